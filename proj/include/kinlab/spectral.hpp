#pragma once

/// Spatial infrastructure on the periodic slab T^2 x R_+: horizontal Fourier
/// transform, sinh-graded vertical grid, Dirichlet elliptic solves via the
/// explicit half-line Green's function, Biot-Savart velocity recovery, the
/// boundary trace kernel, and the analytic / boundary-layer norm evaluators.

#include <array>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "kinlab/common.hpp"

namespace kinlab {

using Cplx = std::complex<double>;
using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// Vertical grid
// ---------------------------------------------------------------------------

/// Graded grid z_j = z_max * sinh(a s_j) / sinh(a), s_j = j / K, chosen so at
/// least `nodes_in_layer` nodes fall inside [0, sqrt(kappa_min)].
struct VerticalGrid {
  int K = 256;          ///< number of intervals; K + 1 nodes
  double z_max = 20.0;
  double a = 1.0;       ///< grading strength
  VecX z;               ///< nodes, z[0] = 0
  VecX w;               ///< trapezoid quadrature weights

  int size() const { return K + 1; }
};

inline VerticalGrid build_vertical(int K = 256, double z_max = 20.0,
                                   double kappa_min = 2.5e-3,
                                   int nodes_in_layer = 8) {
  KINLAB_REQUIRE(K >= 16 && z_max > 0.0 && kappa_min > 0.0,
                 "build_vertical: bad parameters");
  VerticalGrid g;
  g.K = K;
  g.z_max = z_max;
  // Smallest a with z_{nodes_in_layer} <= sqrt(kappa_min); the node ratio
  // sinh(a j / K) / sinh(a) decreases in a, so bisect after doubling.
  const double target = std::sqrt(kappa_min) / z_max;
  const double s = static_cast<double>(nodes_in_layer) / K;
  auto ratio = [&](double a) { return std::sinh(a * s) / std::sinh(a); };
  double lo = 1e-3, hi = 1.0;
  while (ratio(hi) > target) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) > target ? lo : hi) = mid;
  }
  g.a = hi;
  g.z.resize(K + 1);
  for (int j = 0; j <= K; ++j)
    g.z[j] = z_max * std::sinh(g.a * j / K) / std::sinh(g.a);
  g.w = VecX::Zero(K + 1);
  for (int j = 0; j < K; ++j) {
    const double h = g.z[j + 1] - g.z[j];
    g.w[j] += 0.5 * h;
    g.w[j + 1] += 0.5 * h;
  }
  return g;
}

/// First derivative on the graded grid: second-order nonuniform central
/// stencil inside, one-sided three-point stencils at the ends.
inline VecXc dz_profile(const VerticalGrid& g, const VecXc& f) {
  const int n = g.size();
  KINLAB_REQUIRE(f.size() == n, "dz_profile: size mismatch");
  VecXc out(n);
  auto stencil = [&](int j, int i0, int i1, int i2) {
    const double x0 = g.z[i0] - g.z[j], x1 = g.z[i1] - g.z[j], x2 = g.z[i2] - g.z[j];
    // Lagrange derivative weights at the evaluation point z_j.
    const double w0 = (2.0 * 0.0 - x1 - x2) / ((x0 - x1) * (x0 - x2));
    const double w1 = (2.0 * 0.0 - x0 - x2) / ((x1 - x0) * (x1 - x2));
    const double w2 = (2.0 * 0.0 - x0 - x1) / ((x2 - x0) * (x2 - x1));
    out[j] = w0 * f[i0] + w1 * f[i1] + w2 * f[i2];
  };
  stencil(0, 0, 1, 2);
  for (int j = 1; j < n - 1; ++j) stencil(j, j - 1, j, j + 1);
  stencil(n - 1, n - 3, n - 2, n - 1);
  return out;
}

/// Conormal derivative zeta(z) d/dz with zeta(z) = z / (1 + z).
inline VecXc conormal_dz(const VerticalGrid& g, const VecXc& f) {
  VecXc d = dz_profile(g, f);
  for (int j = 0; j < d.size(); ++j) d[j] *= g.z[j] / (1.0 + g.z[j]);
  return d;
}

inline double quad_z(const VerticalGrid& g, const VecX& absf) {
  return g.w.dot(absf);
}

// ---------------------------------------------------------------------------
// Horizontal modes and transforms
// ---------------------------------------------------------------------------

struct SpatialGrid {
  int M = 16;                ///< modes xi with |xi_i| <= M are retained
  int nh = 48;               ///< physical points per horizontal axis (>= 2M+1)
  VerticalGrid vert;

  int modes_per_axis() const { return 2 * M + 1; }
  int n_modes() const { return modes_per_axis() * modes_per_axis(); }
  int mode_index(int m1, int m2) const {
    return (m1 + M) * modes_per_axis() + (m2 + M);
  }
  std::pair<int, int> mode_of(int idx) const {
    return {idx / modes_per_axis() - M, idx % modes_per_axis() - M};
  }
  double xi_norm(int idx) const {
    auto [m1, m2] = mode_of(idx);
    return std::sqrt(static_cast<double>(m1 * m1 + m2 * m2));
  }
};

inline SpatialGrid build_spatial(int M = 16, int K = 256, double z_max = 20.0,
                                 double kappa_min = 2.5e-3,
                                 int nodes_in_layer = 8) {
  SpatialGrid g;
  g.M = M;
  g.nh = 3 * M;  // leaves room for 2/3-rule dealiasing of quadratic terms
  KINLAB_REQUIRE(g.nh >= 2 * M + 1, "build_spatial: physical grid too small");
  g.vert = build_vertical(K, z_max, kappa_min, nodes_in_layer);
  return g;
}

/// One scalar field, either physical (nh^2 x (K+1) values f(x_h, z_j)) or
/// spectral (n_modes x (K+1) profiles g_xi(z_j)).  Physical row index is
/// i1 * nh + i2 with x_l = 2 pi i_l / nh.
using PhysComp = Eigen::MatrixXd;
using SpecComp = MatXc;

namespace detail {

inline MatXc dft_matrix(int n) {
  MatXc w(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      w(j, k) = std::exp(Cplx(0.0, -kTwoPi * j * k / n));
  return w;
}

}  // namespace detail

/// Forward horizontal transform: g_xi(z) = (1/(2 pi)^2) integral of
/// e^{-i x_h . xi} f(x_h, z), realized as a truncated discrete transform.
inline SpecComp transform_h(const SpatialGrid& g, const PhysComp& f) {
  const int n = g.nh;
  KINLAB_REQUIRE(f.rows() == n * n && f.cols() == g.vert.size(),
                 "transform_h: shape mismatch");
  const MatXc w = detail::dft_matrix(n);
  SpecComp out(g.n_modes(), g.vert.size());
  MatXc lvl(n, n);
  for (int c = 0; c < f.cols(); ++c) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lvl(i, j) = f(i * n + j, c);
    const MatXc hat = w * lvl * w.transpose() / double(n * n);
    for (int m1 = -g.M; m1 <= g.M; ++m1)
      for (int m2 = -g.M; m2 <= g.M; ++m2)
        out(g.mode_index(m1, m2), c) = hat((m1 + n) % n, (m2 + n) % n);
  }
  return out;
}

/// Inverse transform onto the physical grid (imaginary residue discarded; it
/// vanishes identically when the reality constraint holds).
inline PhysComp inverse_h(const SpatialGrid& g, const SpecComp& s) {
  const int n = g.nh;
  KINLAB_REQUIRE(s.rows() == g.n_modes() && s.cols() == g.vert.size(),
                 "inverse_h: shape mismatch");
  const MatXc w = detail::dft_matrix(n);
  PhysComp out(n * n, g.vert.size());
  MatXc hat = MatXc::Zero(n, n);
  for (int c = 0; c < s.cols(); ++c) {
    hat.setZero();
    for (int m1 = -g.M; m1 <= g.M; ++m1)
      for (int m2 = -g.M; m2 <= g.M; ++m2)
        hat((m1 + n) % n, (m2 + n) % n) = s(g.mode_index(m1, m2), c);
    const MatXc lvl = w.conjugate() * hat * w.adjoint();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i * n + j, c) = lvl(i, j).real();
  }
  return out;
}

/// Max deviation from the reality constraint g_{-xi} = conj(g_xi).
inline double reality_defect(const SpatialGrid& g, const SpecComp& s) {
  double d = 0.0;
  for (int m1 = -g.M; m1 <= g.M; ++m1)
    for (int m2 = -g.M; m2 <= g.M; ++m2)
      d = std::max(d, (s.row(g.mode_index(m1, m2)) -
                       s.row(g.mode_index(-m1, -m2)).conjugate())
                          .cwiseAbs()
                          .maxCoeff());
  return d;
}

// ---------------------------------------------------------------------------
// Elliptic solves with the explicit Green's function
// ---------------------------------------------------------------------------

/// Solve (|xi|^2 - d_z^2) phi = omega with phi(0) = 0 and decay, via the
/// half-line Dirichlet kernel G(z, y) = (e^{-|xi||z-y|} - e^{-|xi|(z+y)}) /
/// (2|xi|), quadratured on the graded grid (split at the kink y = z).
inline VecXc elliptic_dirichlet(const VerticalGrid& g, const VecXc& omega, double k) {
  KINLAB_REQUIRE(k > 0.0, "elliptic_dirichlet: |xi| = 0 needs the direct handler");
  const int n = g.size();
  KINLAB_REQUIRE(omega.size() == n, "elliptic_dirichlet: size mismatch");
  VecXc phi = VecXc::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double z = g.z[i];
    Cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = g.z[j];
      const double ker =
          (std::exp(-k * std::fabs(z - y)) - std::exp(-k * (z + y))) / (2.0 * k);
      // The trapezoid weight w[j] straddles the kink when j == i; both
      // one-sided limits of the kernel agree, so plain weights are exact to
      // the same order as elsewhere.
      acc += g.w[j] * ker * omega[j];
    }
    phi[i] = acc;
  }
  return phi;
}

/// d/dz of the Dirichlet solve, using the analytic kernel derivative
/// dG/dz = (-sign(z - y) e^{-|xi||z-y|} + e^{-|xi|(z+y)}) / 2.
inline VecXc elliptic_dirichlet_dz(const VerticalGrid& g, const VecXc& omega,
                                   double k) {
  KINLAB_REQUIRE(k > 0.0, "elliptic_dirichlet_dz: |xi| = 0 not supported");
  const int n = g.size();
  VecXc dphi = VecXc::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double z = g.z[i];
    Cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = g.z[j];
      const double sgn = (z > y) ? 1.0 : ((z < y) ? -1.0 : 0.0);
      const double ker =
          0.5 * (-sgn * std::exp(-k * std::fabs(z - y)) + std::exp(-k * (z + y)));
      acc += g.w[j] * ker * omega[j];
    }
    dphi[i] = acc;
  }
  return dphi;
}

/// Boundary trace a_xi = [d_z (|xi|^2 - d_z^2)^{-1} g]|_{z=0}
///                     = integral of e^{-|xi| y} g(y) dy.
inline Cplx trace_a(const VerticalGrid& g, const VecXc& prof, double k) {
  KINLAB_REQUIRE(k > 0.0, "trace_a: |xi| = 0 has no decaying kernel");
  Cplx acc = 0.0;
  for (int j = 0; j < g.size(); ++j)
    acc += g.w[j] * std::exp(-k * g.z[j]) * prof[j];
  return acc;
}

// ---------------------------------------------------------------------------
// Biot-Savart and curl
// ---------------------------------------------------------------------------

/// A three-component spectral field.
struct SpectralField3 {
  const SpatialGrid* grid = nullptr;
  std::array<SpecComp, 3> c;

  void resize() {
    for (auto& m : c) m = SpecComp::Zero(grid->n_modes(), grid->vert.size());
  }
};

/// Curl in mode space: (i xi_h, d_z) x u.
inline SpectralField3 curl_spec(const SpectralField3& u) {
  const SpatialGrid& g = *u.grid;
  SpectralField3 w;
  w.grid = u.grid;
  w.resize();
  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    const Cplx ix1(0.0, static_cast<double>(m1)), ix2(0.0, static_cast<double>(m2));
    const VecXc du1 = dz_profile(g.vert, u.c[0].row(m).transpose());
    const VecXc du2 = dz_profile(g.vert, u.c[1].row(m).transpose());
    w.c[0].row(m) = (ix2 * u.c[2].row(m).transpose() - du2).transpose();
    w.c[1].row(m) = (du1 - ix1 * u.c[2].row(m).transpose()).transpose();
    w.c[2].row(m) =
        (ix1 * u.c[1].row(m) - ix2 * u.c[0].row(m));
  }
  return w;
}

/// Divergence in mode space.
inline SpecComp divergence_spec(const SpectralField3& u) {
  const SpatialGrid& g = *u.grid;
  SpecComp d = SpecComp::Zero(g.n_modes(), g.vert.size());
  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    const Cplx ix1(0.0, static_cast<double>(m1)), ix2(0.0, static_cast<double>(m2));
    d.row(m) = ix1 * u.c[0].row(m) + ix2 * u.c[1].row(m) +
               dz_profile(g.vert, u.c[2].row(m).transpose()).transpose();
  }
  return d;
}

/// Velocity from vorticity: u = curl (-Delta)^{-1} omega with zero-Dirichlet
/// component solves; the xi = 0 mode uses the direct antiderivative
/// construction u_{0,1} = int_0^z omega_{0,2}, u_{0,2} = -int_0^z omega_{0,1},
/// u_{0,3} = 0.
inline SpectralField3 biot_savart(const SpectralField3& omega,
                                  double* div_residual = nullptr) {
  const SpatialGrid& g = *omega.grid;
  const VerticalGrid& v = g.vert;
  SpectralField3 u;
  u.grid = omega.grid;
  u.resize();
  if (div_residual) *div_residual = divergence_spec(omega).cwiseAbs().maxCoeff();

  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    if (omega.c[0].row(m).isZero(0.0) && omega.c[1].row(m).isZero(0.0) &&
        omega.c[2].row(m).isZero(0.0))
      continue;
    if (m1 == 0 && m2 == 0) {
      Cplx a1 = 0.0, a2 = 0.0;
      u.c[0](m, 0) = 0.0;
      u.c[1](m, 0) = 0.0;
      for (int j = 1; j < v.size(); ++j) {
        const double h = 0.5 * (v.z[j] - v.z[j - 1]);
        a1 += h * (omega.c[1](m, j - 1) + omega.c[1](m, j));
        a2 -= h * (omega.c[0](m, j - 1) + omega.c[0](m, j));
        u.c[0](m, j) = a1;
        u.c[1](m, j) = a2;
      }
      continue;
    }
    const double k = g.xi_norm(m);
    const Cplx ix1(0.0, static_cast<double>(m1)), ix2(0.0, static_cast<double>(m2));
    std::array<VecXc, 3> phi, dphi;
    for (int comp = 0; comp < 3; ++comp) {
      const VecXc w = omega.c[comp].row(m).transpose();
      phi[comp] = elliptic_dirichlet(v, w, k);
      dphi[comp] = elliptic_dirichlet_dz(v, w, k);
    }
    u.c[0].row(m) = (ix2 * phi[2] - dphi[1]).transpose();
    u.c[1].row(m) = (dphi[0] - ix1 * phi[2]).transpose();
    u.c[2].row(m) = (ix1 * phi[1] - ix2 * phi[0]).transpose();
  }
  return u;
}

// ---------------------------------------------------------------------------
// Boundary-layer weights and analytic norms (real-axis evaluation)
// ---------------------------------------------------------------------------

struct NormParams {
  double lambda0 = 0.5;   ///< initial analyticity radius
  double gamma0 = 0.5;    ///< shrink rate
  double alpha = 0.5;     ///< Cauchy exponent on second derivatives
  double alpha_bar = 0.5; ///< exponential decay rate in z
  double tau = 2.0;       ///< boundary-layer profile exponent (> 1)
  double kappa = 1e-2;
  double t = 0.0;         ///< evaluation time

  void validate() const {
    KINLAB_REQUIRE(lambda0 > 0.0 && gamma0 > 0.0 && alpha_bar > 0.0 && tau > 1.0,
                   "NormParams: invalid");
    KINLAB_REQUIRE(t < lambda0 / (2.0 * gamma0), "NormParams: t outside window");
  }
};

inline double phi_profile(double z, double tau) {
  return 1.0 / (1.0 + std::pow(std::fabs(z), tau));
}

/// phi_kappa(z) = kappa^{-1/2} phi(z / sqrt(kappa)).
inline double phi_kappa(double kappa, double z, double tau = 2.0) {
  KINLAB_REQUIRE(kappa > 0.0, "phi_kappa: kappa must be positive");
  const double s = std::sqrt(kappa);
  return phi_profile(z / s, tau) / s;
}

/// phi_{kappa t}(z) = (kappa t)^{-1/2} phi(z / sqrt(kappa t)).
inline double phi_kappa_t(double kappa, double t, double z, double tau = 2.0) {
  KINLAB_REQUIRE(t > 0.0, "phi_kappa_t: t must be positive");
  return phi_kappa(kappa * t, z, tau);
}

/// Per-mode z-norms.  kappa <= 0 selects the unweighted sup norm; t > 0 adds
/// the phi_{kappa t} term to the denominator.
inline double mode_norm_L1(const VerticalGrid& g, const VecXc& prof) {
  return quad_z(g, prof.cwiseAbs());
}

inline double mode_norm_Linf(const VerticalGrid& g, const VecXc& prof,
                             double alpha_bar, double kappa, double tau,
                             double t = 0.0) {
  double m = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    double den = 1.0;
    if (kappa > 0.0) {
      den += phi_kappa(kappa, g.z[j], tau);
      if (t > 0.0) den += phi_kappa_t(kappa, t, g.z[j], tau);
    }
    m = std::max(m, std::exp(alpha_bar * g.z[j]) * std::abs(prof[j]) / den);
  }
  return m;
}

/// Mode-summed norms at a single radius lambda on the real axis.
enum class ZNorm { L1, LinfPlain, LinfKappa, LinfKappaT };

inline double field_norm(const SpatialGrid& g, const SpecComp& s, double lambda,
                         ZNorm which, const NormParams& p,
                         int extra_h_powers = 0) {
  double acc = 0.0;
  for (int m = 0; m < g.n_modes(); ++m) {
    const double xi = g.xi_norm(m);
    double mode = 0.0;
    switch (which) {
      case ZNorm::L1:
        mode = mode_norm_L1(g.vert, s.row(m).transpose());
        break;
      case ZNorm::LinfPlain:
        mode = mode_norm_Linf(g.vert, s.row(m).transpose(), p.alpha_bar, 0.0, p.tau);
        break;
      case ZNorm::LinfKappa:
        mode = mode_norm_Linf(g.vert, s.row(m).transpose(), p.alpha_bar, p.kappa,
                              p.tau);
        break;
      case ZNorm::LinfKappaT:
        mode = mode_norm_Linf(g.vert, s.row(m).transpose(), p.alpha_bar, p.kappa,
                              p.tau, p.t);
        break;
    }
    acc += std::exp(lambda * xi) * std::pow(1.0 + xi, extra_h_powers) * mode;
  }
  return acc;
}

/// Vector boundary-layer norm: horizontal components carry the kappa weight,
/// the vertical one does not.
inline double bracket_norm(const SpectralField3& f, double lambda,
                           const NormParams& p, bool with_t = false) {
  const ZNorm h = with_t ? ZNorm::LinfKappaT : ZNorm::LinfKappa;
  return field_norm(*f.grid, f.c[0], lambda, h, p) +
         field_norm(*f.grid, f.c[1], lambda, h, p) +
         field_norm(*f.grid, f.c[2], lambda, ZNorm::LinfPlain, p);
}

namespace detail {

/// Apply D^beta = (i xi_1)^{b1} (i xi_2)^{b2} (zeta dz)^{b3} to a field.
inline SpectralField3 conormal_derivative(const SpectralField3& f, int b1, int b2,
                                          int b3) {
  const SpatialGrid& g = *f.grid;
  SpectralField3 out;
  out.grid = f.grid;
  out.resize();
  for (int comp = 0; comp < 3; ++comp)
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      VecXc prof = f.c[comp].row(m).transpose();
      for (int r = 0; r < b3; ++r) prof = conormal_dz(g.vert, prof);
      const Cplx fac = std::pow(Cplx(0.0, m1), b1) * std::pow(Cplx(0.0, m2), b2);
      out.c[comp].row(m) = (fac * prof).transpose();
    }
  return out;
}

}  // namespace detail

/// Composite norm report: the sup over lambda < lambda0 - gamma0 t of the
/// first- plus weighted second-derivative sums, in the three flavors (L^inf
/// with kappa, L^inf with kappa t, and L^1 with an extra horizontal power).
struct CompositeNorms {
  double inf_kappa = 0.0;
  double inf_kappa_t = 0.0;
  double l1 = 0.0;
};

inline CompositeNorms composite_norms(const SpectralField3& f, const NormParams& p,
                                      int n_lambda = 8) {
  p.validate();
  const double lam_max = p.lambda0 - p.gamma0 * p.t;
  static constexpr int kBetas[10][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                        {2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0},
                                        {1, 0, 1}, {0, 1, 1}};
  // Cache the derivative fields once; the lambda sweep reuses them.
  std::vector<SpectralField3> dfs;
  dfs.reserve(10);
  for (const auto& b : kBetas)
    dfs.push_back(detail::conormal_derivative(f, b[0], b[1], b[2]));

  CompositeNorms out;
  for (int i = 0; i < n_lambda; ++i) {
    const double lam = lam_max * (i + 0.5) / n_lambda;
    const double cauchy = std::pow(lam_max - lam, p.alpha);
    double ik = 0.0, ikt = 0.0, l1 = 0.0;
    for (int b = 0; b < 10; ++b) {
      const bool second = (kBetas[b][0] + kBetas[b][1] + kBetas[b][2]) == 2;
      const double fac = second ? cauchy : 1.0;
      ik += fac * bracket_norm(dfs[b], lam, p, false);
      ikt += fac * bracket_norm(dfs[b], lam, p, true);
      double l1b = 0.0;
      for (int comp = 0; comp < 3; ++comp)
        l1b += field_norm(*f.grid, dfs[b].c[comp], lam, ZNorm::L1, p, 1);
      l1 += fac * l1b;
    }
    out.inf_kappa = std::max(out.inf_kappa, ik);
    out.inf_kappa_t = std::max(out.inf_kappa_t, ikt);
    out.l1 = std::max(out.l1, l1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contour evaluation for closed-form profiles
// ---------------------------------------------------------------------------

/// L^1 norm of a closed-form profile over the sector boundary contour at
/// height sigma: z(s) = s + i sigma min(s, 1), both branches, truncated at
/// Re z = z_max.  Used to validate that real-axis evaluation under-estimates
/// the contour sup in a controlled way.
inline double contour_L1(const std::function<Cplx(Cplx)>& g, double sigma,
                         double z_max = 20.0, int n = 4000) {
  double acc = 0.0;
  const double h = z_max / n;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * h;
    const double slope = (s < 1.0) ? sigma : 0.0;
    const double dl = h * std::sqrt(1.0 + slope * slope);
    const Cplx zp(s, sigma * std::min(s, 1.0));
    const Cplx zm(s, -sigma * std::min(s, 1.0));
    acc += 0.5 * dl * (std::abs(g(zp)) + std::abs(g(zm)));
  }
  return acc;
}

}  // namespace kinlab
