#pragma once

/// Half-space Navier-Stokes solver in vorticity form, one horizontal Fourier
/// mode at a time.  The horizontal vorticity carries a nonlocal Robin-type
/// boundary condition driven by the nonlinearity, the vertical vorticity a
/// homogeneous Dirichlet condition.  Two backends are provided: a
/// semi-implicit direct stepper (Crank-Nicolson diffusion, Adams-Bashforth-2
/// nonlinearity, boundary rows folded into the implicit solve) and a
/// Duhamel evaluator built on the closed-form half-line heat kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "spectral.hpp"

namespace kinlab {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct NSParams {
  double kappa = 1e-2; ///< inverse-Reynolds sweep parameter
  double eta0 = 1.0;   ///< viscosity coefficient (1.0 in pure-fluid mode)

  double nu() const { return kappa * eta0; }
  void validate() const {
    KINLAB_REQUIRE(kappa > 0.0 && eta0 > 0.0, "NSParams: must be positive");
  }
};

// ---------------------------------------------------------------------------
// Profile utilities
// ---------------------------------------------------------------------------

/// Local quadratic interpolation of a vertical profile; the field is
/// extended evenly (parity = +1) or oddly (parity = -1) across z = 0 and by
/// zero beyond the top of the grid.  The stencil never crosses the wall, so
/// the reflection kink does not degrade the order.
inline Cplx interp_profile(const VerticalGrid& g, const VecXc& prof, double z,
                           int parity) {
  double sgn = 1.0;
  if (z < 0.0) {
    z = -z;
    if (parity < 0) sgn = -1.0;
  }
  if (z >= g.z[g.K]) return Cplx(0.0, 0.0);
  const double* lo = std::upper_bound(g.z.data(), g.z.data() + g.size(), z);
  int j = static_cast<int>(lo - g.z.data());
  int i0 = std::clamp(j - 1, 0, g.K - 2);
  const double za = g.z[i0], zb = g.z[i0 + 1], zc = g.z[i0 + 2];
  const double la = (z - zb) * (z - zc) / ((za - zb) * (za - zc));
  const double lb = (z - za) * (z - zc) / ((zb - za) * (zb - zc));
  const double lc = (z - za) * (z - zb) / ((zc - za) * (zc - zb));
  return sgn * (la * prof[i0] + lb * prof[i0 + 1] + lc * prof[i0 + 2]);
}

/// Quadrature of a complex profile with the grid's trapezoid weights.
inline Cplx quad_prof(const VerticalGrid& g, const VecXc& f) {
  Cplx acc(0.0, 0.0);
  for (int j = 0; j < g.size(); ++j) acc += g.w[j] * f[j];
  return acc;
}

/// Cumulative trapezoid integral from the wall.
inline VecXc cumtrapz_prof(const VerticalGrid& g, const VecXc& f) {
  VecXc out(g.size());
  out[0] = Cplx(0.0, 0.0);
  for (int j = 1; j < g.size(); ++j)
    out[j] = out[j - 1] + 0.5 * (g.z[j] - g.z[j - 1]) * (f[j] + f[j - 1]);
  return out;
}

namespace detail {

/// 6-point Gauss-Legendre rule on [-1, 1].
inline const std::array<std::array<double, 2>, 6>& legendre6() {
  static const std::array<std::array<double, 2>, 6> r = {{
      {-0.9324695142031521, 0.1713244923791704},
      {-0.6612093864662645, 0.3607615730481386},
      {-0.2386191860831969, 0.4679139345726910},
      {0.2386191860831969, 0.4679139345726910},
      {0.6612093864662645, 0.3607615730481386},
      {0.9324695142031521, 0.1713244923791704},
  }};
  return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Half-line heat kernels with Robin / Dirichlet walls
// ---------------------------------------------------------------------------

/// Per-mode solution kernels of the vertical diffusion problem.  For the
/// horizontal components the kernel is the free heat kernel plus its mirror
/// image plus a wall corrector that enforces the homogeneous Robin condition
/// nu (d/dx + |xi|) G_h = 0 at x = 0; the corrector depends on x + y only and
/// has the closed form |xi| e^{-|xi|(x+y)} erfc((x+y-2a|xi|)/(2 sqrt(a))) with
/// a = nu t.  The vertical component uses the Dirichlet (odd-image) kernel.
/// Kernels are exactly normalized so semigroup and mass identities hold.
struct StokesGreens {
  double kappa_eta = 0.0;           ///< nu = kappa * eta0
  const VerticalGrid* vert = nullptr;
  std::vector<double> times;        ///< Duhamel time lattice, starts at 0
  bool exact_normalization = true;  ///< 1/sqrt(4 pi a) convention

  /// Free-space 1D heat kernel at diffusion scale a = nu t.
  static double heat1d(double a, double s) {
    return std::exp(-s * s / (4.0 * a)) / std::sqrt(4.0 * kPi * a);
  }

  /// Robin wall corrector as a function of s = x + y.
  double residual_R(double k, double t, double s) const {
    if (k <= 0.0) return 0.0;
    const double a = kappa_eta * t;
    return k * std::exp(-k * s) *
           std::erfc((s - 2.0 * a * k) / (2.0 * std::sqrt(a)));
  }

  /// d/dx of the wall corrector.
  double residual_R_dx(double k, double t, double s) const {
    if (k <= 0.0) return 0.0;
    const double a = kappa_eta * t;
    const double u = (s - 2.0 * a * k) / (2.0 * std::sqrt(a));
    return -k * residual_R(k, t, s) -
           k * std::exp(-k * s) * std::exp(-u * u) / std::sqrt(kPi * a);
  }

  /// Horizontal-component kernel (Robin wall).
  double G_h(double k, double t, double x, double y) const {
    const double a = kappa_eta * t;
    return std::exp(-a * k * k) * (heat1d(a, x - y) + heat1d(a, x + y)) +
           residual_R(k, t, x + y);
  }

  /// Vertical-component kernel (Dirichlet wall).
  double G_3(double k, double t, double x, double y) const {
    const double a = kappa_eta * t;
    return std::exp(-a * k * k) * (heat1d(a, x - y) - heat1d(a, x + y));
  }

  /// d/dx of the horizontal kernel (for boundary-condition residuals).
  double G_h_dx(double k, double t, double x, double y) const {
    const double a = kappa_eta * t;
    const double gm = heat1d(a, x - y), gp = heat1d(a, x + y);
    return std::exp(-a * k * k) *
               (-(x - y) / (2.0 * a) * gm - (x + y) / (2.0 * a) * gp) +
           residual_R_dx(k, t, x + y);
  }

  /// Gaussian image pair applied to a profile by product integration: on
  /// each grid cell the profile is linear and the Gaussian moments have erf
  /// closed forms, so the rule is exact for piecewise-linear data and
  /// accurate uniformly in t, including kernels narrower than the grid
  /// spacing.  sign = +1 gives the Neumann pair, -1 the Dirichlet pair.
  VecXc apply_images(double a, int sign, const VecXc& prof) const {
    const VerticalGrid& g = *vert;
    const double rt = 2.0 * std::sqrt(a);
    auto cdf = [&](double s) { return 0.5 * std::erf(s / rt); };
    VecXc out(g.size());
    for (int i = 0; i < g.size(); ++i) {
      const double x = g.z[i];
      Cplx acc(0.0, 0.0);
      for (int j = 0; j < g.K; ++j) {
        const double p = g.z[j], q = g.z[j + 1];
        const Cplx fa = prof[j], slope = (prof[j + 1] - prof[j]) / (q - p);
        // direct term: integrals of 1 and (y - p) against heat1d(a, x - y)
        double i0 = cdf(x - p) - cdf(x - q);
        double i1 = (x - p) * i0 - 2.0 * a * (heat1d(a, x - q) - heat1d(a, x - p));
        acc += fa * i0 + slope * i1;
        // image term against heat1d(a, x + y)
        i0 = cdf(x + q) - cdf(x + p);
        i1 = -2.0 * a * (heat1d(a, x + q) - heat1d(a, x + p)) - (x + p) * i0;
        acc += static_cast<double>(sign) * (fa * i0 + slope * i1);
      }
      out[i] = acc;
    }
    return out;
  }

  /// Horizontal-kernel application: exactly integrated Gaussian pair plus
  /// grid quadrature of the smooth wall corrector.
  VecXc apply_h(double k, double t, const VecXc& prof) const {
    const VerticalGrid& g = *vert;
    if (t <= 0.0) return prof;
    const double a = kappa_eta * t;
    VecXc out = std::exp(-a * k * k) * apply_images(a, +1, prof);
    if (k > 0.0)
      for (int i = 0; i < g.size(); ++i) {
        Cplx acc(0.0, 0.0);
        for (int j = 0; j < g.size(); ++j)
          acc += g.w[j] * residual_R(k, t, g.z[i] + g.z[j]) * prof[j];
        out[i] += acc;
      }
    return out;
  }

  /// Dirichlet-kernel application.
  VecXc apply_3(double k, double t, const VecXc& prof) const {
    if (t <= 0.0) return prof;
    const double a = kappa_eta * t;
    return std::exp(-a * k * k) * apply_images(a, -1, prof);
  }
};

/// Assembles the kernel family for a time lattice.  The lattice must start
/// at 0, increase strictly, and resolve the diffusive time scale of the
/// requested viscosity product.
inline StokesGreens build_greens(const VerticalGrid& vert, double kappa,
                                 double eta0, std::vector<double> times) {
  NSParams prm{kappa, eta0};
  prm.validate();
  KINLAB_REQUIRE(times.size() >= 2 && times.front() == 0.0,
                 "build_greens: time lattice must start at 0");
  double dt_max = 0.0;
  for (std::size_t j = 1; j < times.size(); ++j) {
    KINLAB_REQUIRE(times[j] > times[j - 1],
                   "build_greens: time lattice must increase");
    dt_max = std::max(dt_max, times[j] - times[j - 1]);
  }
  KINLAB_REQUIRE(dt_max <= 25.0 * prm.nu(),
                 "build_greens: time lattice too coarse for this kappa");
  StokesGreens gr;
  gr.kappa_eta = prm.nu();
  gr.vert = &vert;
  gr.times = std::move(times);
  return gr;
}

/// Independent construction of the Robin wall corrector: Crank-Nicolson heat
/// solve in the collapsed variable s = x + y with the inhomogeneous Robin
/// data -2 k e^{-a k^2} heat1d(a, 0), started from zero and advanced on a
/// graded time ladder to tame the t^{-1/2} data singularity.  Used as an
/// oracle against the closed form.
inline VecX residual_corrector_numeric(double k, double nu, double t_final,
                                       int nt, double s_max = 30.0,
                                       int ns = 1200) {
  KINLAB_REQUIRE(k > 0.0 && nu > 0.0 && t_final > 0.0 && nt > 4 && ns > 16,
                 "residual_corrector_numeric: bad arguments");
  const double h = s_max / ns;
  VecX r = VecX::Zero(ns + 1);
  // Tridiagonal Thomas solve, rebuilt per (variable) step.
  VecX lo(ns + 1), di(ns + 1), up(ns + 1), rhs(ns + 1);
  double t = 0.0;
  for (int step = 1; step <= nt; ++step) {
    const double t_new = t_final * sq(static_cast<double>(step) / nt);
    const double dt = t_new - t;
    const double lam = nu * dt / (2.0 * h * h);
    const double decay2 = nu * dt * 0.5 * k * k;
    for (int j = 1; j < ns; ++j) {
      lo[j] = -lam;
      di[j] = 1.0 + 2.0 * lam + decay2;
      up[j] = -lam;
      rhs[j] = lam * r[j - 1] + (1.0 - 2.0 * lam - decay2) * r[j] + lam * r[j + 1];
    }
    // Robin row at s = 0 with a one-sided 3-point derivative
    // (-3 r0 + 4 r1 - r2)/(2h) + k r0 = data(t_new); the r2 entry is
    // eliminated against the first interior row to stay tridiagonal.
    const double a_new = nu * t_new;
    const double data = -2.0 * k * std::exp(-a_new * k * k) *
                        StokesGreens::heat1d(a_new, 0.0);
    di[0] = -1.5 / h + k;
    up[0] = 2.0 / h;
    rhs[0] = data;
    const double extra = -0.5 / h; // coefficient of r2 in the wall row
    const double f = extra / up[1];
    di[0] -= f * lo[1];
    up[0] -= f * di[1];
    rhs[0] -= f * rhs[1];
    lo[ns] = 0.0;
    di[ns] = 1.0;
    rhs[ns] = 0.0;
    for (int j = 1; j <= ns; ++j) {
      const double m = lo[j] / di[j - 1];
      di[j] -= m * up[j - 1];
      rhs[j] -= m * rhs[j - 1];
    }
    r[ns] = rhs[ns] / di[ns];
    for (int j = ns - 1; j >= 0; --j) r[j] = (rhs[j] - up[j] * r[j + 1]) / di[j];
    t = t_new;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Spectral calculus helpers
// ---------------------------------------------------------------------------

/// Zeroes the outermost retained mode band; products of the surviving modes
/// are then alias-free on the 3M-point physical grid (2/3-style truncation).
inline void dealias_band(const SpatialGrid& g, SpecComp& s) {
  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    if (std::max(std::abs(m1), std::abs(m2)) >= g.M) s.row(m).setZero();
  }
}

/// Horizontal derivative (axis = 0 or 1) in mode space.
inline SpecComp dx_spec(const SpatialGrid& g, const SpecComp& s, int axis) {
  SpecComp out(s.rows(), s.cols());
  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    const double mm = axis == 0 ? m1 : m2;
    out.row(m) = Cplx(0.0, mm) * s.row(m);
  }
  return out;
}

/// Vertical derivative applied row-wise.
inline SpecComp dz_spec(const SpatialGrid& g, const SpecComp& s) {
  SpecComp out(s.rows(), s.cols());
  for (int m = 0; m < s.rows(); ++m)
    out.row(m) = dz_profile(g.vert, s.row(m).transpose()).transpose();
  return out;
}

/// Per-mode vector Laplacian (d_zz - |xi|^2).
inline SpectralField3 laplacian_spec(const SpectralField3& f) {
  const SpatialGrid& g = *f.grid;
  SpectralField3 out;
  out.grid = f.grid;
  out.resize();
  for (int c = 0; c < 3; ++c) {
    for (int m = 0; m < g.n_modes(); ++m) {
      const double k = g.xi_norm(m);
      const VecXc row = f.c[c].row(m).transpose();
      out.c[c].row(m) =
          (dz_profile(g.vert, dz_profile(g.vert, row)) - k * k * row).transpose();
    }
  }
  return out;
}

/// Bilinear vorticity interaction -u . grad(om) + om . grad(u), evaluated
/// pseudo-spectrally with band dealiasing.
inline SpectralField3 nonlinear_N(const SpectralField3& u,
                                  const SpectralField3& om) {
  const SpatialGrid& g = *u.grid;
  std::array<PhysComp, 3> up, omp;
  std::array<std::array<PhysComp, 3>, 3> du, dom; // [direction][component]
  for (int c = 0; c < 3; ++c) {
    SpecComp uc = u.c[c], oc = om.c[c];
    dealias_band(g, uc);
    dealias_band(g, oc);
    up[c] = inverse_h(g, uc);
    omp[c] = inverse_h(g, oc);
    du[0][c] = inverse_h(g, dx_spec(g, uc, 0));
    du[1][c] = inverse_h(g, dx_spec(g, uc, 1));
    du[2][c] = inverse_h(g, dz_spec(g, uc));
    dom[0][c] = inverse_h(g, dx_spec(g, oc, 0));
    dom[1][c] = inverse_h(g, dx_spec(g, oc, 1));
    dom[2][c] = inverse_h(g, dz_spec(g, oc));
  }
  SpectralField3 out;
  out.grid = u.grid;
  out.resize();
  for (int c = 0; c < 3; ++c) {
    PhysComp n = PhysComp::Zero(up[0].rows(), up[0].cols());
    for (int d = 0; d < 3; ++d)
      n += omp[d].cwiseProduct(du[d][c]) - up[d].cwiseProduct(dom[d][c]);
    out.c[c] = transform_h(g, n);
    dealias_band(g, out.c[c]);
  }
  return out;
}

/// Per-mode boundary data for the Robin condition: the wall trace of the
/// vertical derivative of the Dirichlet elliptic solve applied to the
/// horizontal interaction components (exponential-moment representation for
/// nonzero modes, plain vertical integral for the mean mode).
inline MatXc boundary_B(const SpectralField3& n_field) {
  const SpatialGrid& g = *n_field.grid;
  MatXc b = MatXc::Zero(g.n_modes(), 2);
  for (int m = 0; m < g.n_modes(); ++m) {
    const double k = g.xi_norm(m);
    for (int c = 0; c < 2; ++c) {
      const VecXc prof = n_field.c[c].row(m).transpose();
      b(m, c) = k > 0.0 ? trace_a(g.vert, prof, k) : quad_prof(g.vert, prof);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Flow state
// ---------------------------------------------------------------------------

struct FlowState {
  const SpatialGrid* grid = nullptr;
  NSParams params;
  double t = 0.0;

  SpectralField3 omega, u, nonlin;
  MatXc bdata; ///< per-mode Robin boundary data (n_modes x 2)
  SpectralField3 dt_omega, dt_u, dt2_omega, dt2_u;
  SpecComp p, dt_p, dt2_p;

  double div_u_residual = 0.0;
  double noslip_residual = 0.0;
  double omega3_wall = 0.0;
  double robin_residual = 0.0;
};

/// Robin boundary defect per mode: kappa eta0 (d_z + |xi|) omega_h(0) minus
/// the boundary data.
inline MatXc robin_defect(const FlowState& s) {
  const SpatialGrid& g = *s.grid;
  const double nu = s.params.nu();
  MatXc d = MatXc::Zero(g.n_modes(), 2);
  for (int m = 0; m < g.n_modes(); ++m) {
    const double k = g.xi_norm(m);
    for (int c = 0; c < 2; ++c) {
      const VecXc prof = s.omega.c[c].row(m).transpose();
      const VecXc dp = dz_profile(g.vert, prof);
      d(m, c) = nu * (dp[0] + k * prof[0]) - s.bdata(m, c);
    }
  }
  return d;
}

/// Rebuilds the derived velocity, interaction, and boundary data from the
/// vorticity, and refreshes the structural residual diagnostics.
inline void refresh_state(FlowState& s, bool linear_only = false) {
  const SpatialGrid& g = *s.grid;
  s.u = biot_savart(s.omega);
  s.div_u_residual = divergence_spec(s.u).cwiseAbs().maxCoeff();
  double ns = 0.0, w3 = 0.0;
  for (int m = 0; m < g.n_modes(); ++m) {
    for (int c = 0; c < 3; ++c) ns = std::max(ns, std::abs(s.u.c[c](m, 0)));
    w3 = std::max(w3, std::abs(s.omega.c[2](m, 0)));
  }
  s.noslip_residual = ns;
  s.omega3_wall = w3;
  if (linear_only) {
    s.nonlin.grid = s.grid;
    s.nonlin.resize();
    s.bdata = MatXc::Zero(g.n_modes(), 2);
  } else {
    s.nonlin = nonlinear_N(s.u, s.omega);
    s.bdata = boundary_B(s.nonlin);
  }
  s.robin_residual = robin_defect(s).cwiseAbs().maxCoeff();
}

/// Builds a complete state around a vorticity field.
inline FlowState make_state(const SpatialGrid& g, NSParams prm,
                            const SpectralField3& omega,
                            bool linear_only = false) {
  prm.validate();
  FlowState s;
  s.grid = &g;
  s.params = prm;
  s.omega = omega;
  s.dt_omega.grid = s.dt_u.grid = s.dt2_omega.grid = s.dt2_u.grid = &g;
  s.dt_omega.resize();
  s.dt_u.resize();
  s.dt2_omega.resize();
  s.dt2_u.resize();
  s.p = s.dt_p = s.dt2_p = SpecComp::Zero(g.n_modes(), g.vert.size());
  refresh_state(s, linear_only);
  return s;
}

/// Kinetic energy (1/2) sum_modes int |u_xi|^2 dz (horizontal Parseval up to
/// the fixed domain area factor).
inline double kinetic_energy(const SpectralField3& u) {
  const SpatialGrid& g = *u.grid;
  double e = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < g.n_modes(); ++m)
      for (int j = 0; j < g.vert.size(); ++j)
        e += g.vert.w[j] * std::norm(u.c[c](m, j));
  return 0.5 * e;
}

/// Gradient energy sum_modes int |xi|^2 |u|^2 + |d_z u|^2 dz.
inline double grad_energy(const SpectralField3& u) {
  const SpatialGrid& g = *u.grid;
  double e = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < g.n_modes(); ++m) {
      const double k2 = sq(g.xi_norm(m));
      const VecXc prof = u.c[c].row(m).transpose();
      const VecXc dp = dz_profile(g.vert, prof);
      for (int j = 0; j < g.vert.size(); ++j)
        e += g.vert.w[j] * (k2 * std::norm(prof[j]) + std::norm(dp[j]));
    }
  return e;
}

// ---------------------------------------------------------------------------
// Time derivatives via the vorticity equation chain
// ---------------------------------------------------------------------------

/// Fills dt_omega = nu Lap(omega) + N, dt_u, and the second derivative
/// dt2_omega = nu Lap(dt_omega) + N(dt_u, omega) + N(u, dt_omega) from the
/// differentiated equation.
inline void time_derivatives(FlowState& s) {
  const double nu = s.params.nu();
  SpectralField3 lap = laplacian_spec(s.omega);
  s.dt_omega.grid = s.grid;
  s.dt_omega.resize();
  for (int c = 0; c < 3; ++c) s.dt_omega.c[c] = nu * lap.c[c] + s.nonlin.c[c];
  s.dt_u = biot_savart(s.dt_omega);
  SpectralField3 lap2 = laplacian_spec(s.dt_omega);
  SpectralField3 na = nonlinear_N(s.dt_u, s.omega);
  SpectralField3 nb = nonlinear_N(s.u, s.dt_omega);
  s.dt2_omega.grid = s.grid;
  s.dt2_omega.resize();
  for (int c = 0; c < 3; ++c)
    s.dt2_omega.c[c] = nu * lap2.c[c] + na.c[c] + nb.c[c];
  s.dt2_u = biot_savart(s.dt2_omega);
}

// ---------------------------------------------------------------------------
// Pressure reconstruction
// ---------------------------------------------------------------------------

/// Quadratic pressure source sum_{l,m} d_l ua_m d_m ub_l (pseudo-spectral).
inline SpecComp pressure_source(const SpectralField3& ua,
                                const SpectralField3& ub) {
  const SpatialGrid& g = *ua.grid;
  std::array<std::array<PhysComp, 3>, 3> da, db; // [direction][component]
  for (int c = 0; c < 3; ++c) {
    SpecComp ac = ua.c[c], bc = ub.c[c];
    dealias_band(g, ac);
    dealias_band(g, bc);
    da[0][c] = inverse_h(g, dx_spec(g, ac, 0));
    da[1][c] = inverse_h(g, dx_spec(g, ac, 1));
    da[2][c] = inverse_h(g, dz_spec(g, ac));
    db[0][c] = inverse_h(g, dx_spec(g, bc, 0));
    db[1][c] = inverse_h(g, dx_spec(g, bc, 1));
    db[2][c] = inverse_h(g, dz_spec(g, bc));
  }
  PhysComp src = PhysComp::Zero(da[0][0].rows(), da[0][0].cols());
  for (int l = 0; l < 3; ++l)
    for (int m = 0; m < 3; ++m) src += da[l][m].cwiseProduct(db[m][l]);
  SpecComp out = transform_h(g, src);
  dealias_band(g, out);
  return out;
}

/// Solves -p'' + |xi|^2 p = src per nonzero mode with Neumann wall data and
/// decay at the top (two-sided exponential kernel plus image plus boundary
/// tail).  The mean mode is the vertical tail integral of the supplied mean
/// profile, which must be the horizontal mean of u3 d_z u3 (its own source
/// column collapses to a derivative of that product).
inline SpecComp pressure_solve(const SpatialGrid& g, const SpecComp& src,
                               const VecXc& neumann, const VecXc& mean_u3du3) {
  const VerticalGrid& v = g.vert;
  SpecComp p = SpecComp::Zero(g.n_modes(), v.size());
  for (int m = 0; m < g.n_modes(); ++m) {
    const double k = g.xi_norm(m);
    if (k == 0.0) {
      // tail integral: p0(x) = 2 int_x^inf mean(u3 d_z u3)
      VecXc tail = cumtrapz_prof(v, mean_u3du3);
      const Cplx total = tail[v.size() - 1];
      for (int i = 0; i < v.size(); ++i) p(m, i) = 2.0 * (total - tail[i]);
      continue;
    }
    for (int i = 0; i < v.size(); ++i) {
      Cplx acc(0.0, 0.0);
      for (int j = 0; j < v.size(); ++j) {
        const double ker = (std::exp(-k * std::fabs(v.z[i] - v.z[j])) +
                            std::exp(-k * (v.z[i] + v.z[j]))) /
                           (2.0 * k);
        acc += v.w[j] * ker * src(m, j);
      }
      acc -= neumann[m] / k * std::exp(-k * v.z[i]);
      p(m, i) = acc;
    }
  }
  return p;
}

/// Reconstructs the pressure and its first two time derivatives from the
/// velocity/vorticity chain.  The Neumann wall data is the rotated wall
/// vorticity trace of the diffusion term.
inline void pressure_reconstruct(FlowState& s) {
  const SpatialGrid& g = *s.grid;
  const double nu = s.params.nu();
  auto neumann_of = [&](const SpectralField3& om) {
    VecXc d(g.n_modes());
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      d[m] = Cplx(0.0, 1.0) * nu *
             (static_cast<double>(m2) * om.c[0](m, 0) -
              static_cast<double>(m1) * om.c[1](m, 0));
    }
    return d;
  };
  auto mean_prod = [&](const SpectralField3& a, const SpectralField3& b) {
    // horizontal mean of a3 d_z b3, as the zero mode of the spectral product
    SpecComp a3 = a.c[2], b3 = dz_spec(g, b.c[2]);
    dealias_band(g, a3);
    dealias_band(g, b3);
    const PhysComp prod = inverse_h(g, a3).cwiseProduct(inverse_h(g, b3));
    return transform_h(g, prod).row(g.mode_index(0, 0)).transpose().eval();
  };
  s.p = pressure_solve(g, pressure_source(s.u, s.u), neumann_of(s.omega),
                       mean_prod(s.u, s.u));
  const SpecComp g1 = pressure_source(s.dt_u, s.u) + pressure_source(s.u, s.dt_u);
  s.dt_p = pressure_solve(g, g1, neumann_of(s.dt_omega),
                          mean_prod(s.dt_u, s.u) + mean_prod(s.u, s.dt_u));
  const SpecComp g2 = pressure_source(s.dt2_u, s.u) +
                      2.0 * pressure_source(s.dt_u, s.dt_u) +
                      pressure_source(s.u, s.dt2_u);
  s.dt2_p = pressure_solve(g, g2, neumann_of(s.dt2_omega),
                           mean_prod(s.dt2_u, s.u) +
                               2.0 * mean_prod(s.dt_u, s.dt_u) +
                               mean_prod(s.u, s.dt2_u));
}

// ---------------------------------------------------------------------------
// Direct semi-implicit stepper
// ---------------------------------------------------------------------------

/// Crank-Nicolson diffusion with the Robin (horizontal) / Dirichlet
/// (vertical) wall rows folded into the per-mode implicit solve;
/// Adams-Bashforth-2 extrapolation of the interaction term and the boundary
/// data.  Implicit matrices are factored once per distinct |xi|.
class DirectStepper {
public:
  DirectStepper(const SpatialGrid& g, NSParams prm, double dt,
                bool linear_only = false, double tol = 1e-5)
      : grid_(&g), prm_(prm), dt_(dt), tol_(tol), linear_(linear_only) {
    prm_.validate();
    KINLAB_REQUIRE(dt > 0.0, "DirectStepper: dt must be positive");
    build_ops();
  }

  double dt() const { return dt_; }

  FlowState start(const SpectralField3& omega0) {
    FlowState s = make_state(*grid_, prm_, omega0, linear_);
    n_prev_ = s.nonlin;
    b_prev_ = s.bdata;
    div0_ = s.div_u_residual;
    noslip0_ = s.noslip_residual;
    return s;
  }

  /// Advances one step; refreshes u, N, B and the residual diagnostics, and
  /// aborts if the structural residuals blow past 100x tolerance.
  void step(FlowState& s) {
    const SpatialGrid& g = *grid_;
    const int nz = g.vert.size();
    SpectralField3 omega_new;
    omega_new.grid = &g;
    omega_new.resize();
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      if (s.omega.c[0].row(m).isZero(0.0) && s.omega.c[1].row(m).isZero(0.0) &&
          s.omega.c[2].row(m).isZero(0.0) && s.nonlin.c[0].row(m).isZero(0.0) &&
          s.nonlin.c[1].row(m).isZero(0.0) && s.nonlin.c[2].row(m).isZero(0.0) &&
          s.bdata.row(m).isZero(0.0) && b_prev_.row(m).isZero(0.0))
        continue;
      const KOps& op = ops_.at(kindex_.at(key(m1, m2)));
      for (int c = 0; c < 3; ++c) {
        VecXc rhs = op.plus * s.omega.c[c].row(m).transpose();
        const VecXc nn = s.nonlin.c[c].row(m).transpose();
        const VecXc np = n_prev_.c[c].row(m).transpose();
        rhs += dt_ * (1.5 * nn - 0.5 * np);
        rhs[0] = Cplx(0.0, 0.0);
        rhs[nz - 1] = Cplx(0.0, 0.0);
        if (c < 2) rhs[0] = 2.0 * s.bdata(m, c) - b_prev_(m, c);
        const auto& lu = c < 2 ? op.robin : op.dirichlet;
        VecX re = lu.solve(rhs.real().eval());
        VecX im = lu.solve(rhs.imag().eval());
        for (int j = 0; j < nz; ++j) omega_new.c[c](m, j) = Cplx(re[j], im[j]);
      }
    }
    n_prev_ = s.nonlin;
    b_prev_ = s.bdata;
    s.omega = omega_new;
    s.t += dt_;
    refresh_state(s, linear_);
    // Abort on growth beyond the initial discretization floor, not on the
    // floor itself.
    const double scale = std::max(1e-12, field_scale(s.omega));
    const double cap = 100.0 * tol_ * scale;
    if (!linear_ && (s.div_u_residual > 10.0 * div0_ + cap ||
                     s.noslip_residual > 10.0 * noslip0_ + cap))
      throw KinlabError("DirectStepper: structural residual blew up (div " +
                        std::to_string(s.div_u_residual) + ", no-slip " +
                        std::to_string(s.noslip_residual) + ")");
  }

  static double field_scale(const SpectralField3& f) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, f.c[c].cwiseAbs().maxCoeff());
    return m;
  }

private:
  struct KOps {
    Eigen::PartialPivLU<MatX> robin, dirichlet;
    MatX plus;
  };

  static long long key(int m1, int m2) {
    return static_cast<long long>(m1) * m1 + static_cast<long long>(m2) * m2;
  }

  void build_ops() {
    const SpatialGrid& g = *grid_;
    const VerticalGrid& v = g.vert;
    const int n = v.size();
    const double nu = prm_.nu();
    // nonuniform 3-point second derivative, interior rows
    MatX d2 = MatX::Zero(n, n);
    for (int j = 1; j < n - 1; ++j) {
      const double hm = v.z[j] - v.z[j - 1], hp = v.z[j + 1] - v.z[j];
      d2(j, j - 1) = 2.0 / (hm * (hm + hp));
      d2(j, j) = -2.0 / (hm * hp);
      d2(j, j + 1) = 2.0 / (hp * (hm + hp));
    }
    // one-sided first derivative at the wall
    const double x1 = v.z[1], x2 = v.z[2];
    const double c0 = -(x1 + x2) / (x1 * x2);
    const double c1 = x2 / (x1 * (x2 - x1));
    const double c2 = -x1 / (x2 * (x2 - x1));
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      if (kindex_.count(key(m1, m2))) continue;
      const double k = g.xi_norm(m);
      MatX lm = MatX::Identity(n, n) - (nu * dt_ / 2.0) * d2;
      MatX lp = MatX::Identity(n, n) + (nu * dt_ / 2.0) * d2;
      for (int j = 1; j < n - 1; ++j) {
        lm(j, j) += nu * dt_ / 2.0 * k * k;
        lp(j, j) -= nu * dt_ / 2.0 * k * k;
      }
      lp.row(0).setZero();
      lp.row(n - 1).setZero();
      MatX rob = lm, dir = lm;
      rob.row(0).setZero();
      rob(0, 0) = nu * (c0 + k);
      rob(0, 1) = nu * c1;
      rob(0, 2) = nu * c2;
      dir.row(0).setZero();
      dir(0, 0) = 1.0;
      rob.row(n - 1).setZero();
      dir.row(n - 1).setZero();
      rob(n - 1, n - 1) = 1.0;
      dir(n - 1, n - 1) = 1.0;
      KOps op;
      op.robin = Eigen::PartialPivLU<MatX>(rob);
      op.dirichlet = Eigen::PartialPivLU<MatX>(dir);
      op.plus = lp;
      kindex_[key(m1, m2)] = static_cast<int>(ops_.size());
      ops_.push_back(std::move(op));
    }
  }

  const SpatialGrid* grid_;
  NSParams prm_;
  double dt_, tol_;
  bool linear_;
  std::map<long long, int> kindex_;
  std::vector<KOps> ops_;
  SpectralField3 n_prev_;
  MatXc b_prev_;
  double div0_ = 0.0, noslip0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Duhamel backend
// ---------------------------------------------------------------------------

/// Evaluates the kernel representation at lattice time index j from the
/// initial field and interaction/boundary histories on the lattice:
///   omega(t_j) = G(t_j) f0 + int_0^{t_j} G(t_j - s) N(s) ds
///                - int_0^{t_j} G_h(t_j - s, ., 0) B(s) ds.
/// The volume convolution uses the trapezoid rule in s (the integrand is
/// continuous up to s = t, where the kernel acts as the identity); the
/// boundary term uses a per-subinterval product rule with the square-root
/// substitution that removes the (t - s)^{-1/2} kernel singularity.
inline SpectralField3 duhamel_apply(const SpatialGrid& g,
                                    const StokesGreens& gr,
                                    const SpectralField3& f0,
                                    const std::vector<SpectralField3>& ns,
                                    const std::vector<MatXc>& bs, int j) {
  const VerticalGrid& v = g.vert;
  const auto& times = gr.times;
  KINLAB_REQUIRE(j >= 0 && j < static_cast<int>(times.size()),
                 "duhamel_apply: index out of range");
  KINLAB_REQUIRE(ns.size() >= times.size() && bs.size() >= times.size(),
                 "duhamel_apply: history too short");
  const double tj = times[j];
  SpectralField3 out;
  out.grid = &g;
  out.resize();
  for (int m = 0; m < g.n_modes(); ++m) {
    const double k = g.xi_norm(m);
    std::array<VecXc, 3> acc;
    for (int c = 0; c < 3; ++c) {
      const VecXc p0 = f0.c[c].row(m).transpose();
      acc[c] = c < 2 ? gr.apply_h(k, tj, p0) : gr.apply_3(k, tj, p0);
    }
    // volume convolution, trapezoid in s
    for (int i = 0; i <= j; ++i) {
      double wt;
      if (j == 0)
        wt = 0.0;
      else if (i == 0)
        wt = 0.5 * (times[1] - times[0]);
      else if (i == j)
        wt = 0.5 * (times[j] - times[j - 1]);
      else
        wt = 0.5 * (times[i + 1] - times[i - 1]);
      if (wt == 0.0) continue;
      const double tau = tj - times[i];
      for (int c = 0; c < 3; ++c) {
        const VecXc np = ns[i].c[c].row(m).transpose();
        acc[c] += wt * (c < 2 ? gr.apply_h(k, tau, np) : gr.apply_3(k, tau, np));
      }
    }
    // boundary term with sqrt(t - s) substitution per subinterval; boundary
    // data interpolated linearly in s at each quadrature node
    for (int i = 0; i < j; ++i) {
      const double ta = std::sqrt(tj - times[i + 1]);
      const double tb = std::sqrt(tj - times[i]);
      const double ds = times[i + 1] - times[i];
      if (std::abs(bs[i](m, 0)) == 0.0 && std::abs(bs[i + 1](m, 0)) == 0.0 &&
          std::abs(bs[i](m, 1)) == 0.0 && std::abs(bs[i + 1](m, 1)) == 0.0)
        continue;
      VecXc wall0 = VecXc::Zero(v.size());
      VecXc wall1 = VecXc::Zero(v.size());
      for (const auto& [x, w] : detail::legendre6()) {
        const double tq = 0.5 * (ta + tb) + 0.5 * (tb - ta) * x;
        const double wq = 0.5 * (tb - ta) * w * 2.0 * tq;
        const double lam = (tj - tq * tq - times[i]) / ds;
        const Cplx b0 = (1.0 - lam) * bs[i](m, 0) + lam * bs[i + 1](m, 0);
        const Cplx b1 = (1.0 - lam) * bs[i](m, 1) + lam * bs[i + 1](m, 1);
        for (int iz = 0; iz < v.size(); ++iz) {
          const double gh = wq * gr.G_h(k, tq * tq, v.z[iz], 0.0);
          wall0[iz] += gh * b0;
          wall1[iz] += gh * b1;
        }
      }
      for (int iz = 0; iz < v.size(); ++iz) {
        acc[0][iz] -= wall0[iz];
        acc[1][iz] -= wall1[iz];
      }
    }
    for (int c = 0; c < 3; ++c) out.c[c].row(m) = acc[c].transpose();
  }
  return out;
}

struct DuhamelRun {
  std::vector<FlowState> states; ///< one per lattice time
  int iterations = 0;
  double last_delta = 0.0;
};

/// Fixed-point solve of the kernel representation over the whole time slab:
/// iterates history -> (u, N, B) -> new history until successive sweeps
/// differ by less than fp_tol (absolute, fields are O(1)).  Errors out if
/// the sweep fails to contract within max_iter iterations.
inline DuhamelRun step_duhamel(const SpatialGrid& g, const StokesGreens& gr,
                               const SpectralField3& omega0, NSParams prm,
                               bool linear_only = false, double fp_tol = 1e-8,
                               int max_iter = 20) {
  const int nt = static_cast<int>(gr.times.size());
  DuhamelRun run;
  run.states.reserve(nt);
  run.states.push_back(make_state(g, prm, omega0, linear_only));
  // linear predictor as the initial sweep
  std::vector<SpectralField3> ns(nt);
  std::vector<MatXc> bs(nt, MatXc::Zero(g.n_modes(), 2));
  for (int i = 0; i < nt; ++i) {
    ns[i].grid = &g;
    ns[i].resize();
  }
  for (int i = 1; i < nt; ++i)
    run.states.push_back(
        make_state(g, prm, duhamel_apply(g, gr, omega0, ns, bs, i), linear_only));
  if (linear_only) return run;

  double prev_delta = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < nt; ++i) {
      ns[i] = run.states[i].nonlin;
      bs[i] = run.states[i].bdata;
    }
    double delta = 0.0;
    for (int i = 1; i < nt; ++i) {
      SpectralField3 next = duhamel_apply(g, gr, omega0, ns, bs, i);
      for (int c = 0; c < 3; ++c)
        delta = std::max(
            delta, (next.c[c] - run.states[i].omega.c[c]).cwiseAbs().maxCoeff());
      run.states[i] = make_state(g, prm, next, false);
    }
    run.iterations = it;
    run.last_delta = delta;
    if (delta < fp_tol) return run;
    if (prev_delta >= 0.0 && delta > 2.0 * prev_delta)
      throw KinlabError("step_duhamel: fixed point is not contracting");
    prev_delta = delta;
  }
  throw KinlabError("step_duhamel: no convergence in " +
                    std::to_string(max_iter) + " iterations (delta " +
                    std::to_string(run.last_delta) + ")");
}

// ---------------------------------------------------------------------------
// Compatibility machinery
// ---------------------------------------------------------------------------

struct CompatibilityReport {
  MatXc robin; ///< per-mode Robin defect (first condition)
  double robin_max = 0.0;
  double omega3_wall = 0.0;    ///< second condition
  double dt_omega3_wall = 0.0; ///< third condition
};

/// Evaluates the three boundary compatibility residuals of a state.
inline CompatibilityReport compatibility_check(const FlowState& s) {
  const SpatialGrid& g = *s.grid;
  const double nu = s.params.nu();
  CompatibilityReport r;
  r.robin = robin_defect(s);
  r.robin_max = r.robin.cwiseAbs().maxCoeff();
  double w3 = 0.0, dw3 = 0.0;
  for (int m = 0; m < g.n_modes(); ++m) {
    w3 = std::max(w3, std::abs(s.omega.c[2](m, 0)));
    const VecXc prof = s.omega.c[2].row(m).transpose();
    const VecXc d2 = dz_profile(g.vert, dz_profile(g.vert, prof));
    dw3 = std::max(dw3, std::abs(nu * d2[0] + s.nonlin.c[2](m, 0)));
  }
  r.omega3_wall = w3;
  r.dt_omega3_wall = dw3;
  return r;
}

/// Seed family for compatible initial data: a planar shear amplitude (profile
/// z^2 e^{-z}) plus transverse single-mode vorticity amplitudes built from a
/// vector potential z^2 e^{-z} along the rotated mode direction.  Every
/// member keeps the vertical vorticity identically zero and has vanishing
/// wall exponential moments, so the recovered velocity is no-slip and the
/// wall conditions on omega_3 hold by construction.
struct CompatSeed {
  double shear_amp = 1.0;
  std::vector<std::tuple<int, int, Cplx>> modes;
};

struct InitialData {
  FlowState state;       ///< omega0 with the full derived chain
  CompatibilityReport residuals;
  std::vector<double> history; ///< Robin residual per correction sweep
};

/// Assembles the seed vorticity (reality-symmetric).
inline SpectralField3 seed_vorticity(const SpatialGrid& g,
                                     const CompatSeed& seed) {
  SpectralField3 om;
  om.grid = &g;
  om.resize();
  const int m00 = g.mode_index(0, 0);
  for (int j = 0; j < g.vert.size(); ++j) {
    const double z = g.vert.z[j];
    om.c[1](m00, j) = seed.shear_amp * (2.0 * z - z * z) * std::exp(-z);
  }
  for (const auto& [m1, m2, amp] : seed.modes) {
    KINLAB_REQUIRE(std::abs(m1) < g.M && std::abs(m2) < g.M && (m1 || m2),
                   "seed_vorticity: mode outside the dealiased band");
    const double k = std::sqrt(static_cast<double>(m1 * m1 + m2 * m2));
    const double p1 = -m2 / k, p2 = m1 / k; // unit transverse direction
    const int mi = g.mode_index(m1, m2), mj = g.mode_index(-m1, -m2);
    for (int j = 0; j < g.vert.size(); ++j) {
      const double z = g.vert.z[j];
      // (k^2 - d_zz) applied to the potential profile z^2 e^{-z}
      const double q =
          (k * k * z * z - (2.0 - 4.0 * z + z * z)) * std::exp(-z);
      const Cplx prof = amp * q;
      om.c[0](mi, j) += p1 * prof;
      om.c[1](mi, j) += p2 * prof;
      om.c[0](mj, j) += p1 * std::conj(prof);
      om.c[1](mj, j) += p2 * std::conj(prof);
    }
  }
  return om;
}

/// Iterative boundary correction: per sweep, the mean-mode Robin defect is
/// cancelled with a (1-2z)e^{-2z} profile and each nonzero mode's transverse
/// defect with the screened-elliptic image of z^2 e^{-(1+|xi|)z} (which keeps
/// the field in the divergence-free, zero-omega_3 class).  Errors out with
/// the residual history if the sweep fails to converge.
inline InitialData build_compatible_data(const SpatialGrid& g, NSParams prm,
                                         const CompatSeed& seed,
                                         double tol = 1e-8, int max_iter = 30) {
  SpectralField3 om = seed_vorticity(g, seed);
  const double nu = prm.nu();
  InitialData out;
  for (int it = 0; it < max_iter; ++it) {
    FlowState s = make_state(g, prm, om);
    MatXc d = robin_defect(s);
    // Project out the components the correction family cannot reach: for a
    // nonzero mode only the transverse part is adjustable.
    double ctrl = 0.0;
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      if (m1 == 0 && m2 == 0) {
        ctrl = std::max(ctrl, std::max(std::abs(d(m, 0)), std::abs(d(m, 1))));
      } else {
        const double k = g.xi_norm(m);
        const Cplx dt = (-double(m2) * d(m, 0) + double(m1) * d(m, 1)) / k;
        ctrl = std::max(ctrl, std::abs(dt));
      }
    }
    out.history.push_back(d.cwiseAbs().maxCoeff());
    if (ctrl < tol) {
      out.state = std::move(s);
      time_derivatives(out.state);
      pressure_reconstruct(out.state);
      out.residuals = compatibility_check(out.state);
      return out;
    }
    for (int m = 0; m < g.n_modes(); ++m) {
      auto [m1, m2] = g.mode_of(m);
      if (m1 == 0 && m2 == 0) {
        // q(z) = (1-2z)e^{-2z}: q(0) = 1, q'(0) = -4, wall factor nu q'(0)
        for (int c = 0; c < 2; ++c) {
          const Cplx amp = d(m, c) / (4.0 * nu);
          for (int j = 0; j < g.vert.size(); ++j) {
            const double z = g.vert.z[j];
            om.c[c](m, j) += amp * (1.0 - 2.0 * z) * std::exp(-2.0 * z);
          }
        }
        continue;
      }
      const double k = g.xi_norm(m);
      const double p1 = -m2 / k, p2 = m1 / k;
      const Cplx dt = p1 * d(m, 0) + p2 * d(m, 1);
      // q = (k^2 - d_zz)(z^2 e^{-gz}), g = 1 + k: Robin trace nu(6g - 2k) != 0
      const double gcoef = 1.0 + k;
      const Cplx amp = -dt / (nu * (6.0 * gcoef - 2.0 * k));
      for (int j = 0; j < g.vert.size(); ++j) {
        const double z = g.vert.z[j];
        const double e = std::exp(-gcoef * z);
        const double q = k * k * z * z * e -
                         (2.0 - 4.0 * gcoef * z + gcoef * gcoef * z * z) * e;
        om.c[0](m, j) += amp * p1 * q;
        om.c[1](m, j) += amp * p2 * q;
      }
    }
  }
  std::string hist;
  for (double h : out.history) hist += " " + std::to_string(h);
  throw KinlabError("build_compatible_data: correction did not converge;" +
                    hist);
}

/// Builds initial data by the time-shift route: evolve an arbitrary seed with
/// the direct stepper until t0 and restart from the evolved field.  Any wall
/// incompatibility of the seed relaxes during the run, so the restarted state
/// carries small compatibility residuals without an explicit correction
/// sweep.
inline InitialData time_shift_data(const SpatialGrid& g, NSParams prm,
                                   const SpectralField3& omega_seed, double t0,
                                   double dt, bool linear_only = false) {
  KINLAB_REQUIRE(t0 > 0.0 && dt > 0.0 && dt <= t0,
                 "time_shift_data: need 0 < dt <= t0");
  DirectStepper stepper(g, prm, dt, linear_only);
  FlowState s = stepper.start(omega_seed);
  const int nsteps = static_cast<int>(std::lround(t0 / dt));
  for (int i = 0; i < nsteps; ++i) stepper.step(s);
  InitialData out;
  out.state = make_state(g, prm, s.omega, linear_only);
  time_derivatives(out.state);
  pressure_reconstruct(out.state);
  out.residuals = compatibility_check(out.state);
  out.history.push_back(out.residuals.robin_max);
  return out;
}

// ---------------------------------------------------------------------------
// Profile diagnostics over a kappa sweep
// ---------------------------------------------------------------------------

struct BoundFit {
  std::string name;
  std::vector<double> constants; ///< one per sweep state
  double drift() const {
    const auto [lo, hi] =
        std::minmax_element(constants.begin(), constants.end());
    return *lo > 0.0 ? *hi / *lo : 0.0;
  }
  /// Worst ratio of a later constant over an earlier one.  A fitted bound
  /// constant that only decreases along the sweep stays at 1: the bound
  /// family remains valid with the first constant.  All-noise rows (field
  /// identically zero at machine level) count as stable.
  double growth() const {
    if (constants.empty() ||
        *std::max_element(constants.begin(), constants.end()) < 1e-12)
      return 1.0;
    double r = 1.0;
    for (std::size_t i = 0; i < constants.size(); ++i)
      for (std::size_t j = i + 1; j < constants.size(); ++j)
        if (constants[i] > 0.0) r = std::max(r, constants[j] / constants[i]);
    return r;
  }
};

struct ProfileReport {
  std::vector<double> kappas;
  std::vector<BoundFit> fits;
  double slope_dz_omega_h = 0.0; ///< log-log slope of sup|d_z omega_h| vs kappa
  double identity_defect = 0.0;  ///< wall-integral identity cross-check
};

namespace detail {

/// max over modes and heights of |prof| / (kappa^pow (1 + layer) e^{-c z}).
inline double envelope_fit(const SpatialGrid& g, const SpecComp& s,
                           double kappa, double t, double pow_kappa,
                           double decay, bool with_layer, bool with_layer_t) {
  double c = 0.0;
  for (int m = 0; m < g.n_modes(); ++m)
    for (int j = 0; j < g.vert.size(); ++j) {
      double den = 1.0;
      if (with_layer) den += phi_kappa(kappa, g.vert.z[j]);
      if (with_layer_t && t > 0.0) den += phi_kappa_t(kappa, t, g.vert.z[j]);
      den *= std::pow(kappa, pow_kappa) * std::exp(-decay * g.vert.z[j]);
      c = std::max(c, std::abs(s(m, j)) / den);
    }
  return c;
}

} // namespace detail

/// Fits the boundary-layer envelope constants of a sweep of states (one per
/// kappa, at matched times, with derivative chains and pressure filled) and
/// cross-checks d_z omega_h against its wall-integral identity
///   d_z omega_h(x3) = -|xi| omega_h(0) + B/(nu)
///                     + int_0^{x3} (dt omega_h + nu |xi|^2 omega_h - N_h)/nu.
inline ProfileReport profile_diagnostics(const std::vector<FlowState>& states,
                                         double alpha_bar = 0.5) {
  KINLAB_REQUIRE(states.size() >= 2, "profile_diagnostics: need a sweep");
  ProfileReport rep;
  std::vector<double> sup_dz;
  rep.fits.reserve(14); // keep the pointers below stable
  auto add = [&](const std::string& name) {
    rep.fits.push_back(BoundFit{name, {}});
    return &rep.fits.back();
  };
  const double ab = alpha_bar, am = std::min(1.0, alpha_bar / 2.0);
  std::vector<BoundFit*> fits = {
      add("omega_h"),        add("omega_3"),        add("dt_omega_h"),
      add("dt_omega_3"),     add("dt2_omega_h"),    add("dt2_omega_3"),
      add("dz_omega_h"),     add("dz_omega_3"),     add("dt_u"),
      add("dt2_u"),          add("p"),              add("dt_p"),
      add("grad_p"),         add("dt2_p"),
  };
  for (const FlowState& s : states) {
    const SpatialGrid& g = *s.grid;
    const double kap = s.params.kappa, nu = s.params.nu(), t = s.t;
    rep.kappas.push_back(kap);
    auto fit2 = [&](const SpecComp& a, const SpecComp& b, double pw, double dec,
                    bool lay, bool layt) {
      return std::max(detail::envelope_fit(g, a, kap, t, pw, dec, lay, layt),
                      detail::envelope_fit(g, b, kap, t, pw, dec, lay, layt));
    };
    SpecComp dz0 = dz_spec(g, s.omega.c[0]), dz1 = dz_spec(g, s.omega.c[1]);
    SpecComp dz2 = dz_spec(g, s.omega.c[2]);
    int i = 0;
    fits[i++]->constants.push_back(
        fit2(s.omega.c[0], s.omega.c[1], 0.0, ab, true, false));
    fits[i++]->constants.push_back(detail::envelope_fit(
        g, s.omega.c[2], kap, t, 0.0, ab, false, false));
    fits[i++]->constants.push_back(
        fit2(s.dt_omega.c[0], s.dt_omega.c[1], 0.0, ab, true, false));
    fits[i++]->constants.push_back(detail::envelope_fit(
        g, s.dt_omega.c[2], kap, t, 0.0, ab, false, false));
    fits[i++]->constants.push_back(
        fit2(s.dt2_omega.c[0], s.dt2_omega.c[1], 0.0, ab, true, true));
    fits[i++]->constants.push_back(detail::envelope_fit(
        g, s.dt2_omega.c[2], kap, t, 0.0, ab, false, false));
    fits[i++]->constants.push_back(fit2(dz0, dz1, -1.0, ab, false, false));
    fits[i++]->constants.push_back(
        detail::envelope_fit(g, dz2, kap, t, 0.0, ab, true, false));
    double du = 0.0, d2u = 0.0;
    for (int c = 0; c < 3; ++c) {
      du = std::max(du, detail::envelope_fit(g, s.dt_u.c[c], kap, t, -0.5, am,
                                             false, false));
      d2u = std::max(d2u, detail::envelope_fit(g, s.dt2_u.c[c], kap, t, -0.5,
                                               am, false, false));
    }
    fits[i++]->constants.push_back(du);
    fits[i++]->constants.push_back(d2u);
    fits[i++]->constants.push_back(
        detail::envelope_fit(g, s.p, kap, t, 0.0, 0.0, false, false));
    fits[i++]->constants.push_back(
        detail::envelope_fit(g, s.dt_p, kap, t, 0.0, 0.0, false, false));
    SpecComp gp = dz_spec(g, s.p);
    fits[i++]->constants.push_back(std::max(
        detail::envelope_fit(g, gp, kap, t, -0.5, am, false, false),
        std::max(
            detail::envelope_fit(g, dx_spec(g, s.p, 0), kap, t, -0.5, am, false,
                                 false),
            detail::envelope_fit(g, dx_spec(g, s.p, 1), kap, t, -0.5, am, false,
                                 false))));
    fits[i++]->constants.push_back(detail::envelope_fit(
        g, s.dt2_p, kap, t, -0.5, am, false, true));

    sup_dz.push_back(std::max(dz0.cwiseAbs().maxCoeff(),
                              dz1.cwiseAbs().maxCoeff()));
    // wall-integral identity cross-check for d_z omega_h
    double defect = 0.0, scale = std::max(sup_dz.back(), 1e-12);
    for (int m = 0; m < g.n_modes(); ++m) {
      const double k = g.xi_norm(m);
      for (int c = 0; c < 2; ++c) {
        const VecXc prof = s.omega.c[c].row(m).transpose();
        const VecXc rhs = (s.dt_omega.c[c].row(m).transpose() +
                           nu * k * k * prof - s.nonlin.c[c].row(m).transpose()) /
                          nu;
        const VecXc integral = cumtrapz_prof(g.vert, rhs);
        const VecXc direct = c == 0 ? dz0.row(m).transpose()
                                    : dz1.row(m).transpose();
        const Cplx base = -k * prof[0] + s.bdata(m, c) / nu;
        for (int j = 0; j < g.vert.size(); ++j)
          defect = std::max(defect, std::abs(direct[j] - (base + integral[j])));
      }
    }
    rep.identity_defect = std::max(rep.identity_defect, defect / scale);
  }
  // least-squares slope of log sup|d_z omega_h| against log kappa
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int n = static_cast<int>(rep.kappas.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(rep.kappas[i]), y = std::log(sup_dz[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope_dz_omega_h = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

} // namespace kinlab
