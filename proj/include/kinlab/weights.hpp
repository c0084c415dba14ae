#pragma once

/// Phase-space weight machinery for the half-space problem: the drift weight
/// w_{rho,beta}, its transport inequality, the weighted collision frequency
/// nu_B and kernel k_w, backward exit geometry with boundary Jacobians, the
/// energy / dissipation / auxiliary functionals, and small analytic checks
/// (1D trace embedding, Gaussian moment identities).

#include <cmath>
#include <vector>

#include "kinlab/hydro_projection.hpp"
#include "kinlab/linearized.hpp"
#include "kinlab/velocity_grid.hpp"

namespace kinlab {

// ---------------------------------------------------------------------------
// Weight function
// ---------------------------------------------------------------------------

struct WeightParams {
  double rho = 0.2;         ///< Gaussian strength, 0 < rho < 1/4
  double beta = 0.002;      ///< drift strength, 0 < beta << rho / (2 pi)
  double rho_prime = 0.1;   ///< optional weaker Gaussian strength < rho
};

inline void validate(const WeightParams& p) {
  KINLAB_REQUIRE(p.rho > 0.0 && p.rho < 0.25, "weight: rho outside (0, 1/4)");
  KINLAB_REQUIRE(p.beta > 0.0 && p.beta < 0.1 * p.rho / kTwoPi,
                 "weight: beta outside (0, rho/(2 pi) * 0.1)");
  KINLAB_REQUIRE(p.rho_prime < p.rho, "weight: rho_prime must be < rho");
}

/// Piecewise drift profile: beta on [0, 1/beta - 1], then 1/(1 + x3).
inline double z_beta(const WeightParams& p, double x3) {
  KINLAB_REQUIRE(x3 >= 0.0, "z_beta: x3 must be nonnegative");
  return (x3 <= 1.0 / p.beta - 1.0) ? p.beta : 1.0 / (1.0 + x3);
}

/// d/dx3 of z_beta (zero on the flat branch).
inline double z_beta_prime(const WeightParams& p, double x3) {
  return (x3 <= 1.0 / p.beta - 1.0) ? 0.0 : -1.0 / sq(1.0 + x3);
}

/// w(x, v) = exp(rho |v|^2 - z_beta(x3) (x . v)).
inline double weight_w(const WeightParams& p, const Vec3& x, const Vec3& v) {
  return std::exp(p.rho * v.squaredNorm() - z_beta(p, x.z()) * x.dot(v));
}

inline double weight_w_prime(const WeightParams& p, const Vec3& x, const Vec3& v) {
  return std::exp(p.rho_prime * v.squaredNorm() - z_beta(p, x.z()) * x.dot(v));
}

/// Transport inequality: lhs = -v . grad_x w, rhs = (beta z_beta / 2)|v|^2 w.
/// The closed-form gradient gives
///   -v . grad_x w / w = z_beta |v|^2 + z_beta'(x3) (x . v) v3.
struct TransportPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline TransportPair weight_transport_inequality(const WeightParams& p, const Vec3& x,
                                                 const Vec3& v) {
  const double w = weight_w(p, x, v);
  TransportPair out;
  out.lhs = (z_beta(p, x.z()) * v.squaredNorm() +
             z_beta_prime(p, x.z()) * x.dot(v) * v.z()) *
            w;
  out.rhs = 0.5 * p.beta * z_beta(p, x.z()) * v.squaredNorm() * w;
  return out;
}

// ---------------------------------------------------------------------------
// Weighted collision frequency
// ---------------------------------------------------------------------------

struct Scales {
  double eps = 1e-2;    ///< Mach number
  double kappa = 1e-2;  ///< viscosity scale
  double delta = 1e-1;  ///< remainder amplitude
};

/// Local fluid data at one space-time point.
struct FlowSample {
  Vec3 u = Vec3::Zero();
  Vec3 dt_u = Vec3::Zero();
  Eigen::Matrix3d grad_u = Eigen::Matrix3d::Zero();
};

/// nu_B = nu(v) - eps*kappa (v . grad_x w)/w + eps^2*kappa (dt + v.grad/eps) sqrt(mu)/sqrt(mu),
/// together with the lower bound nu/2 + (eps*kappa/4) z_beta |v|^2.  Throws
/// when the flow is too large for the bound (the smallness condition on
/// eps |dt u| and (1 + x3)|grad u| fails).
inline double nu_B(const WeightParams& p, const Scales& s, const FlowSample& flow,
                   const Vec3& x, const Vec3& v) {
  const Vec3 c = v - s.eps * flow.u;
  const double nu_v = nu0(c);
  const TransportPair tp = weight_transport_inequality(p, x, v);
  const double w = weight_w(p, x, v);
  // (dt + eps^{-1} v . grad_x) sqrt(mu) / sqrt(mu)
  //   = (c / 2) . (eps dt_u + (v . grad_x) u).
  const Vec3 advect = s.eps * flow.dt_u + flow.grad_u.transpose() * v;
  const double mu_log = 0.5 * c.dot(advect);
  const double nb = nu_v + s.eps * s.kappa * tp.lhs / w + sq(s.eps) * s.kappa * mu_log;
  const double bound = 0.5 * nu_v + 0.25 * s.eps * s.kappa * z_beta(p, x.z()) * v.squaredNorm();
  if (nb < bound) {
    throw KinlabError("nu_B: flow too large, weighted-frequency lower bound fails");
  }
  return nb;
}

// ---------------------------------------------------------------------------
// Weighted kernel
// ---------------------------------------------------------------------------

/// k_w(v, v*) = (2 c2 / |v - v*|) exp(-|w|^2/8 - (|v - eps u|^2 - |v* - eps u|^2)^2/(8|w|^2))
///              * w(x, v) / w(x, v*).
inline double kernel_kw(const WeightParams& p, const Vec3& x, const Vec3& v,
                        const Vec3& vs, const Vec3& eps_u = Vec3::Zero(),
                        double c2 = KernelConstants::kDefaultC2,
                        double eps_reg = 1e-10) {
  const Vec3 w = v - vs;
  const double wn = w.norm();
  if (wn < eps_reg) return 0.0;
  const double d = (v - eps_u).squaredNorm() - (vs - eps_u).squaredNorm();
  const double env = 2.0 * c2 *
                     std::exp(-0.125 * wn * wn - 0.125 * sq(d / wn)) / wn;
  const double ratio = std::exp(p.rho * (v.squaredNorm() - vs.squaredNorm()) -
                                z_beta(p, x.z()) * x.dot(w));
  return env * ratio;
}

/// Quadrature of k_w over v* on a wide lattice (independent of the velocity
/// grid so the tails are not clipped).
inline double kernel_kw_integral(const WeightParams& p, const Vec3& x, const Vec3& v,
                                 double box = 12.0, int n = 40) {
  const double h = 2.0 * box / n, w = h * h * h;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 vs{-box + (i + 0.5) * h, -box + (j + 0.5) * h,
                      -box + (k + 0.5) * h};
        acc += kernel_kw(p, x, v, vs);
      }
  return acc * w;
}

// ---------------------------------------------------------------------------
// Exit geometry on the extended box (0, 2 pi)^2 x (0, infinity)
// ---------------------------------------------------------------------------

struct ExitData {
  double t_b = 0.0;  ///< backward exit time (kinetic time, scaled by eps)
  Vec3 x_b = Vec3::Zero();
};

/// t_b = eps x3 / v3 and x_b = x - (x3 / v3) v; the backward characteristic
/// from (x, v) with v3 > 0 exits through the bottom face.
inline ExitData exit_geometry(const Vec3& x, const Vec3& v, double eps) {
  KINLAB_REQUIRE(std::fabs(v.z()) > 1e-14, "exit_geometry: grazing velocity (v3 = 0)");
  ExitData e;
  e.t_b = eps * x.z() / v.z();
  e.x_b = x - (x.z() / v.z()) * v;
  return e;
}

/// Outward normal of the extended box face containing x.
inline Vec3 box_normal(const Vec3& x) {
  const double tol = 1e-12;
  if (std::fabs(x.z()) < tol) return Vec3{0.0, 0.0, -1.0};
  if (std::fabs(x.x()) < tol) return Vec3{-1.0, 0.0, 0.0};
  if (std::fabs(x.x() - kTwoPi) < tol) return Vec3{1.0, 0.0, 0.0};
  if (std::fabs(x.y()) < tol) return Vec3{0.0, -1.0, 0.0};
  if (std::fabs(x.y() - kTwoPi) < tol) return Vec3{0.0, 1.0, 0.0};
  throw KinlabError("box_normal: point is not on the boundary");
}

/// Jacobians of the boundary flattening maps: |det d(xB_1, xB_2)/d(x1, x3)| =
/// |v2 / (v . n)| and |det d(xB_i, xB_3)/d(x1, x3)| = |v_i / (v . n)|.
struct BoundaryJacobians {
  double bottom = 0.0;  ///< |v2 / (v . n)| with n = (0,0,-1)
  double side1 = 0.0;   ///< |v1 / (v . n)|
  double side2 = 0.0;   ///< |v2 / (v . n)|
};

inline BoundaryJacobians boundary_jacobians(const Vec3& x_b, const Vec3& v) {
  const Vec3 n = box_normal(x_b);
  const double vn = std::fabs(v.dot(n));
  KINLAB_REQUIRE(vn > 1e-14, "boundary_jacobians: grazing velocity");
  return {std::fabs(v.y()) / vn, std::fabs(v.x()) / vn, std::fabs(v.y()) / vn};
}

// ---------------------------------------------------------------------------
// Energy / dissipation / auxiliary functionals
// ---------------------------------------------------------------------------

/// One spatial sample of a phase-space field.
struct PhasePoint {
  Vec3 x = Vec3::Zero();
  double wx = 1.0;        ///< spatial quadrature weight
  bool boundary = false;  ///< contributes to the trace terms when true
};

/// A diagnostic phase-space field: rows are spatial samples, columns are
/// velocity-grid nodes.
struct PhaseField {
  const VelocityGrid* grid = nullptr;
  std::vector<PhasePoint> pts;
  MatX vals;  // pts.size() x grid->size()

  void resize() {
    vals = MatX::Zero(static_cast<int>(pts.size()),
                      static_cast<int>(grid->size()));
  }
};

struct FunctionalParams {
  double p = 2.8;       ///< L^p exponent (must be < 3)
  double frak_p = 0.5;  ///< the kappa exponent on the t-derivative terms
};

struct Functionals {
  double energy = 0.0;       ///< ||f||^2 + ||dt f||^2
  double dissipation = 0.0;  ///< instantaneous integrand of the dissipation
  double auxiliary = 0.0;    ///< instantaneous version of the auxiliary norm
};

inline Functionals functionals_E_D_F(const PhaseField& f, const PhaseField& ft,
                                     const Scales& s, const WeightParams& wp,
                                     const FunctionalParams& fp = {}) {
  KINLAB_REQUIRE(fp.p < 3.0, "functionals: L^p exponent must be < 3");
  const VelocityGrid& g = *f.grid;
  const HydroProjection proj(g, Vec3::Zero());
  VecX sqnu(g.size());
  for (int i = 0; i < sqnu.size(); ++i) sqnu[i] = std::sqrt(nu0(g.nodes[i]));

  Functionals out;
  double lp_acc = 0.0, lpt_acc = 0.0, l6_acc = 0.0, winf = 0.0, wpinf = 0.0;
  for (std::size_t r = 0; r < f.pts.size(); ++r) {
    const double wx = f.pts[r].wx;
    const DistField fr = f.vals.row(static_cast<int>(r));
    const DistField ftr = ft.vals.row(static_cast<int>(r));
    out.energy += wx * (g.dot(fr, fr) + g.dot(ftr, ftr));

    const DistField df = sqnu.cwiseProduct(proj.deflect(fr));
    const DistField dft = sqnu.cwiseProduct(proj.deflect(ftr));
    out.dissipation += wx / (s.kappa * sq(s.eps)) * (g.dot(df, df) + g.dot(dft, dft));
    if (f.pts[r].boundary) {
      double flux = 0.0, fluxt = 0.0;
      for (int i = 0; i < static_cast<int>(g.size()); ++i) {
        flux += std::fabs(g.nodes[i].z()) * sq(fr[i]);
        fluxt += std::fabs(g.nodes[i].z()) * sq(ftr[i]);
      }
      out.dissipation += wx / s.eps * (flux + fluxt) * g.weight();
    }

    const double pf = g.norm(proj.project_exact(fr));
    const double pft = g.norm(proj.project_exact(ftr));
    l6_acc += wx * std::pow(pf, 6.0);
    lp_acc += wx * std::pow(pf, fp.p);
    lpt_acc += wx * std::pow(pft, fp.p);
    for (int i = 0; i < static_cast<int>(g.size()); ++i) {
      winf = std::max(winf, weight_w(wp, f.pts[r].x, g.nodes[i]) * std::fabs(fr[i]));
      wpinf = std::max(wpinf,
                       weight_w_prime(wp, f.pts[r].x, g.nodes[i]) * std::fabs(fr[i]));
    }
  }
  out.auxiliary = s.kappa * std::pow(l6_acc, 1.0 / 3.0) +
                  s.kappa * std::pow(lp_acc, 2.0 / fp.p) +
                  std::pow(s.kappa, 2.0 * fp.frak_p + 1.0) *
                      std::pow(lpt_acc, 2.0 / fp.p) +
                  s.eps * sq(s.kappa) * sq(winf) +
                  std::pow(s.eps * s.kappa, 6.0 / fp.p) *
                      std::pow(s.kappa, 1.0 + 2.0 * fp.frak_p) * sq(wpinf);
  return out;
}

// ---------------------------------------------------------------------------
// 1D trace embedding and Gaussian moment identities
// ---------------------------------------------------------------------------

/// Check sup_t |g(t)|^2 <= C_T (int |g|^2 + int |g'|^2) with C_T = max(4/T, T)
/// on uniformly sampled data.  Returns (max lhs, rhs budget).
struct EmbeddingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline EmbeddingCheck embedding_1d_check(const std::vector<double>& g,
                                         const std::vector<double>& gp, double T) {
  KINLAB_REQUIRE(g.size() == gp.size() && g.size() >= 2,
                 "embedding_1d_check: need matching samples");
  const int n = static_cast<int>(g.size());
  const double dt = T / (n - 1);
  double ig = 0.0, igp = 0.0, sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double tw = (i == 0 || i == n - 1) ? 0.5 : 1.0;  // trapezoid
    ig += tw * sq(g[i]) * dt;
    igp += tw * sq(gp[i]) * dt;
    sup = std::max(sup, sq(g[i]));
  }
  EmbeddingCheck out;
  out.lhs = sup;
  out.rhs = std::max(4.0 / T, T) * (ig + igp);
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

/// The three Gaussian moment identities used by the boundary test functions:
/// the listed constants make each integral vanish.
struct MomentIdentities {
  double beta_a = 10.0, beta_b = 1.0, beta_c = 5.0;
  double defect_a = 0.0, defect_b = 0.0, defect_c = 0.0;
};

inline MomentIdentities moment_identities(const VelocityGrid& g) {
  MomentIdentities m;
  double na = 0.0, nc = 0.0, scale_a = 0.0, scale_c = 0.0;
  for (int i = 0; i < static_cast<int>(g.size()); ++i) {
    const Vec3& v = g.nodes[i];
    const double mu = mu0(v);
    const double e4 = (v.squaredNorm() - 3.0) / std::sqrt(6.0);
    na += (v.squaredNorm() - m.beta_a) * e4 * sq(v.x()) * mu;
    scale_a += std::fabs(v.squaredNorm() * e4) * sq(v.x()) * mu;
    nc += (v.squaredNorm() - m.beta_c) * sq(v.x()) * mu;
    scale_c += v.squaredNorm() * sq(v.x()) * mu;
  }
  m.defect_a = std::fabs(na) / scale_a;
  m.defect_c = std::fabs(nc) / scale_c;

  // 1D identity on the grid's axis quadrature.
  double nb = 0.0, scale_b = 0.0;
  for (int i = 0; i < g.resolution; ++i) {
    const double v1 = g.axis(i);
    const double m1 = std::exp(-0.5 * v1 * v1) / std::sqrt(kTwoPi);
    nb += (v1 * v1 - m.beta_b) * m1 * g.h;
    scale_b += v1 * v1 * m1 * g.h;
  }
  m.defect_b = std::fabs(nb) / scale_b;
  return m;
}

}  // namespace kinlab
