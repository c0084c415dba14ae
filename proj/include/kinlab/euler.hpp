#pragma once

/// @file euler.hpp
/// @brief Inviscid reference solver on the same half-space spectral grids:
///        RK4 vorticity transport with no-penetration, the viscous
///        boundary-layer dissipation functional, and the local-Maxwellian
///        distance used by the vanishing-viscosity diagnostics.

#include <cmath>
#include <vector>

#include "kinlab/ns_solver.hpp"
#include "kinlab/velocity_grid.hpp"

namespace kinlab {

// ---------------------------------------------------------------------------
// Inviscid vorticity transport
// ---------------------------------------------------------------------------

/// Inviscid flow snapshot.  The velocity is always the stream-function
/// reconstruction of the vorticity, so u3 vanishes on the wall exactly at the
/// discrete level (no-penetration).
struct EulerState {
  const SpatialGrid* grid = nullptr;
  SpectralField3 omega;
  SpectralField3 u;
  double t = 0.0;
  double div_u_residual = 0.0;
  double omega3_wall = 0.0;
};

/// Classical RK4 on the transport form d_t omega = -u.grad(omega) +
/// omega.grad(u), with the velocity recomputed from the vorticity at every
/// stage.  There is no wall condition to impose beyond no-penetration, which
/// the reconstruction provides by construction.
class EulerStepper {
public:
  EulerStepper(const SpatialGrid& g, double dt) : g_(&g), dt_(dt) {
    KINLAB_REQUIRE(dt > 0.0, "EulerStepper: dt must be positive");
  }

  EulerState start(const SpectralField3& omega0) const {
    EulerState s;
    s.grid = g_;
    s.omega = omega0;
    refresh(s);
    return s;
  }

  void step(EulerState& s) const {
    check_cfl(s.u);
    const SpectralField3 k1 = rhs(s.omega);
    const SpectralField3 k2 = rhs(shifted(s.omega, k1, 0.5 * dt_));
    const SpectralField3 k3 = rhs(shifted(s.omega, k2, 0.5 * dt_));
    const SpectralField3 k4 = rhs(shifted(s.omega, k3, dt_));
    for (int c = 0; c < 3; ++c)
      s.omega.c[c] +=
          (dt_ / 6.0) * (k1.c[c] + 2.0 * k2.c[c] + 2.0 * k3.c[c] + k4.c[c]);
    s.t += dt_;
    refresh(s);
  }

private:
  SpectralField3 rhs(const SpectralField3& om) const {
    return nonlinear_N(biot_savart(om), om);
  }

  SpectralField3 shifted(const SpectralField3& om, const SpectralField3& k,
                         double a) const {
    SpectralField3 out = om;
    for (int c = 0; c < 3; ++c) out.c[c] += a * k.c[c];
    return out;
  }

  void refresh(EulerState& s) const {
    s.u = biot_savart(s.omega);
    s.div_u_residual = divergence_spec(s.u).cwiseAbs().maxCoeff();
    double w3 = 0.0;
    for (int m = 0; m < g_->n_modes(); ++m)
      w3 = std::max(w3, std::abs(s.omega.c[2](m, 0)));
    s.omega3_wall = w3;
  }

  /// Horizontal advection CFL guard (the wall-normal velocity vanishes
  /// linearly at the wall, so the graded vertical spacing is not limiting).
  void check_cfl(const SpectralField3& u) const {
    double umax = 0.0;
    for (int c = 0; c < 3; ++c)
      umax = std::max(umax, inverse_h(*g_, u.c[c]).cwiseAbs().maxCoeff());
    KINLAB_REQUIRE(std::isfinite(umax) && dt_ * umax * g_->M <= 1.0,
                   "EulerStepper: advection CFL violated");
  }

  const SpatialGrid* g_;
  double dt_;
};

/// Diagnostic pressure for an inviscid snapshot: the same Poisson solve as
/// the viscous reconstruction, with homogeneous wall flux (the wall-normal
/// momentum balance has no diffusion term and u3 together with its
/// horizontal derivatives vanish on the wall).
inline SpecComp euler_pressure(const EulerState& s) {
  const SpatialGrid& g = *s.grid;
  SpecComp a3 = s.u.c[2], b3 = dz_spec(g, s.u.c[2]);
  dealias_band(g, a3);
  dealias_band(g, b3);
  const PhysComp prod = inverse_h(g, a3).cwiseProduct(inverse_h(g, b3));
  const VecXc mean =
      transform_h(g, prod).row(g.mode_index(0, 0)).transpose().eval();
  return pressure_solve(g, pressure_source(s.u, s.u),
                        VecXc::Zero(g.n_modes()), mean);
}

// ---------------------------------------------------------------------------
// Boundary-layer dissipation functional
// ---------------------------------------------------------------------------

struct KatoResult {
  double value = 0.0;   ///< kappa * int_0^T int_{z < c kappa} |grad u|^2
  int layer_nodes = 0;  ///< vertical nodes inside the strip
  bool under_resolved = false;  ///< fewer than 4 nodes in the strip
};

/// Gradient energy restricted to the wall strip z < zcut (same Parseval
/// normalization as grad_energy).
inline double layer_grad_energy(const SpectralField3& u, double zcut) {
  const SpatialGrid& g = *u.grid;
  double e = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m < g.n_modes(); ++m) {
      const double k2 = sq(g.xi_norm(m));
      const VecXc prof = u.c[c].row(m).transpose();
      const VecXc dp = dz_profile(g.vert, prof);
      for (int j = 0; j < g.vert.size() && g.vert.z[j] < zcut; ++j)
        e += g.vert.w[j] * (k2 * std::norm(prof[j]) + std::norm(dp[j]));
    }
  return e;
}

/// Viscous dissipation accumulated in a strip of width c*kappa over a run:
/// K = kappa int_0^T int_{z < c kappa} |grad u|^2 dx dt (time trapezoid over
/// equally spaced velocity snapshots).
inline KatoResult kato_functional(const std::vector<SpectralField3>& u_snaps,
                                  double dt, double kappa, double c = 1.0) {
  KINLAB_REQUIRE(u_snaps.size() >= 2 && dt > 0.0 && kappa > 0.0 && c > 0.0,
                 "kato_functional: need >= 2 snapshots and positive scales");
  const SpatialGrid& g = *u_snaps.front().grid;
  const double zcut = c * kappa;
  KatoResult r;
  while (r.layer_nodes < g.vert.size() && g.vert.z[r.layer_nodes] < zcut)
    ++r.layer_nodes;
  r.under_resolved = r.layer_nodes < 4;
  double acc = 0.0;
  for (std::size_t i = 0; i < u_snaps.size(); ++i) {
    const double w = (i == 0 || i + 1 == u_snaps.size()) ? 0.5 : 1.0;
    acc += w * layer_grad_energy(u_snaps[i], zcut);
  }
  r.value = kappa * dt * acc;
  return r;
}

// ---------------------------------------------------------------------------
// Local-Maxwellian distance
// ---------------------------------------------------------------------------

/// Weighted L^2(space x velocity) distance between the local Maxwellians
/// lifted from two velocity fields:
///   || (M_{1,eps u,1} - M_{1,eps uE,1}) / (eps (1+|v|)^2 sqrt(mu0)) ||.
/// The 1/eps factor makes the leading order eps-independent; the Gaussian
/// weight keeps the quadrature convergent on the truncated velocity ball.
inline double maxwellian_distance(const SpectralField3& u,
                                  const SpectralField3& uE, double eps,
                                  const VelocityGrid& vg) {
  KINLAB_REQUIRE(eps > 0.0, "maxwellian_distance: eps must be positive");
  const SpatialGrid& g = *u.grid;
  const int nh = g.nh;
  PhysComp ua[3], ub[3];
  for (int c = 0; c < 3; ++c) {
    ua[c] = inverse_h(g, u.c[c]);
    ub[c] = inverse_h(g, uE.c[c]);
  }
  const double umax = std::max(
      std::max(ua[0].cwiseAbs().maxCoeff(),
               std::max(ua[1].cwiseAbs().maxCoeff(),
                        ua[2].cwiseAbs().maxCoeff())),
      std::max(ub[0].cwiseAbs().maxCoeff(),
               std::max(ub[1].cwiseAbs().maxCoeff(),
                        ub[2].cwiseAbs().maxCoeff())));
  KINLAB_REQUIRE(eps * umax <= 0.5,
                 "maxwellian_distance: eps * |u|_inf must be <= 1/2");

  // Velocity-dependent factors that do not change across space.
  const std::size_t nv = vg.size();
  std::vector<double> wv(nv);
  for (std::size_t n = 0; n < nv; ++n) {
    const Vec3& v = vg.nodes[n];
    const double wgt = (1.0 + v.norm()) * (1.0 + v.norm());
    wv[n] = vg.weight() * mu0(v) / (wgt * wgt);  // mu0^2 / mu0 = mu0
  }

  const double hx = kTwoPi / nh;
  double total = 0.0;
  for (int p = 0; p < nh * nh; ++p)
    for (int iz = 0; iz < g.vert.size(); ++iz) {
      const Vec3 va(ua[0](p, iz), ua[1](p, iz), ua[2](p, iz));
      const Vec3 vb(ub[0](p, iz), ub[1](p, iz), ub[2](p, iz));
      if ((va - vb).squaredNorm() == 0.0) continue;
      double dsq = 0.0;
      for (std::size_t n = 0; n < nv; ++n) {
        const Vec3& v = vg.nodes[n];
        const double ma = std::exp(eps * v.dot(va) -
                                   0.5 * eps * eps * va.squaredNorm());
        const double mb = std::exp(eps * v.dot(vb) -
                                   0.5 * eps * eps * vb.squaredNorm());
        dsq += wv[n] * sq(ma - mb);
      }
      total += hx * hx * g.vert.w[iz] * dsq;
    }
  return std::sqrt(total) / eps;
}

}  // namespace kinlab
