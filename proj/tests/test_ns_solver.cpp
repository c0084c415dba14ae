#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <deque>
#include <vector>

#include "kinlab/ns_solver.hpp"

using namespace kinlab;

namespace {

/// Default parameters used throughout: unit viscosity factor so nu = kappa.
NSParams params(double kappa = 1e-2) { return NSParams{kappa, 1.0}; }

/// Shared grids (built once; the heavier ones dominate setup time).
const SpatialGrid& grid96() {
  static SpatialGrid g = build_spatial(3, 96, 12.0, 1e-2, 12);
  return g;
}
const SpatialGrid& grid192() {
  static SpatialGrid g = build_spatial(3, 192, 12.0, 1e-2, 24);
  return g;
}
const SpatialGrid& grid384() {
  static SpatialGrid g = build_spatial(3, 384, 12.0, 1e-2, 48);
  return g;
}
const SpatialGrid& grid768() {
  static SpatialGrid g = build_spatial(3, 768, 12.0, 1e-2, 96);
  return g;
}

/// Reality-symmetric single-mode horizontal vorticity with profile q(z) on
/// the (1,0) mode pair.  q(0) = q'(0) = 0 keeps the homogeneous wall
/// condition satisfied, so linear evolutions are free of startup layers.
SpectralField3 single_mode(const SpatialGrid& g, Cplx amp,
                           double decay = 2.0) {
  SpectralField3 om;
  om.grid = &g;
  om.resize();
  const int m = g.mode_index(1, 0), mc = g.mode_index(-1, 0);
  for (int iz = 0; iz < g.vert.size(); ++iz) {
    const double z = g.vert.z[iz];
    const Cplx q = amp * (z * z * std::exp(-decay * z));
    om.c[1](m, iz) = q;
    om.c[1](mc, iz) = std::conj(q);
  }
  return om;
}

/// Standard nonlinear seed: a strong planar shear plus one oblique mode.
CompatSeed standard_seed(double shear = 0.4, Cplx mode_amp = Cplx(0.15, 0.1)) {
  CompatSeed seed;
  seed.shear_amp = shear;
  seed.modes.push_back({1, 0, mode_amp});
  return seed;
}

double field_gap(const SpectralField3& a, const SpectralField3& b) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c)
    d = std::max(d, (a.c[c] - b.c[c]).cwiseAbs().maxCoeff());
  return d;
}

double field_max(const SpectralField3& a) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) d = std::max(d, a.c[c].cwiseAbs().maxCoeff());
  return d;
}

/// Gap between the evolved time derivative and its one-shot propagated
/// representation (initial derivative pushed through the kernel plus the
/// differentiated interior/boundary data), at lattice indices j = 1 and
/// j = last.
std::vector<double> derivative_representation_gaps(const SpatialGrid& g,
                                                   const StokesGreens& gr,
                                                   const SpectralField3& om0,
                                                   NSParams prm) {
  const int n = static_cast<int>(gr.times.size()) - 1;
  DuhamelRun run = step_duhamel(g, gr, om0, prm, false, 1e-9, 60);
  std::vector<SpectralField3> dns(n + 1), dtoms(n + 1);
  std::vector<MatXc> dbs(n + 1);
  for (int i = 0; i <= n; ++i) {
    time_derivatives(run.states[i]);
    dtoms[i] = run.states[i].dt_omega;
    SpectralField3 na = nonlinear_N(run.states[i].dt_u, run.states[i].omega);
    SpectralField3 nb = nonlinear_N(run.states[i].u, run.states[i].dt_omega);
    dns[i].grid = &g;
    dns[i].resize();
    for (int c = 0; c < 3; ++c) dns[i].c[c] = na.c[c] + nb.c[c];
    dbs[i] = boundary_B(dns[i]);
  }
  std::vector<double> out;
  for (int j : {1, n}) {
    SpectralField3 mild = duhamel_apply(g, gr, dtoms[0], dns, dbs, j);
    out.push_back(field_gap(mild, dtoms[j]));
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Half-space kernels
// ---------------------------------------------------------------------------

TEST_CASE("half-space kernels: wall values and the Robin identity") {
  const SpatialGrid& g = grid96();
  std::vector<double> times{0.0, 0.05, 0.1};
  StokesGreens gr = build_greens(g.vert, 1e-2, 1.0, times);

  // Odd-image kernel vanishes identically at the wall.
  for (double t : {0.05, 0.1})
    for (double k : {0.0, 1.0, 2.0})
      for (double y : {0.01, 0.5, 2.0, 6.0})
        REQUIRE(gr.G_3(k, t, 0.0, y) == 0.0);

  // Horizontal kernel satisfies (d_x + k) G = 0 at the wall.
  double rob = 0.0;
  for (double t : {0.05, 0.1})
    for (double k : {0.5, 1.0, 2.236, 4.0})
      for (double y : {0.01, 0.3, 1.0, 4.0}) {
        const double scale = std::max(1.0, std::abs(gr.G_h(k, t, 0.0, y)));
        rob = std::max(rob, std::abs(gr.G_h_dx(k, t, 0.0, y) +
                                     k * gr.G_h(k, t, 0.0, y)) /
                                scale);
      }
  REQUIRE(rob <= 1e-8);

  // The non-heat part of the horizontal kernel fits a decaying exponential
  // envelope k e^{-theta k (x+y)} with a finite constant.
  double cenv = 0.0;
  for (double k : {0.5, 1.0, 2.0, 4.0})
    for (double t : {0.01, 0.05, 0.1})
      for (double s = 0.0; s < 8.0; s += 0.01)
        cenv = std::max(cenv,
                        gr.residual_R(k, t, s) / (k * std::exp(-0.5 * k * s)));
  REQUIRE(cenv > 0.0);
  REQUIRE(cenv <= 2.0);

  // A lattice too coarse for the diffusion scale is rejected.
  REQUIRE_THROWS_AS(build_greens(g.vert, 1e-4, 1.0, {0.0, 1.0}), KinlabError);
}

TEST_CASE("half-space kernels: semigroup, mass, trace, and corrector") {
  const SpatialGrid& g = grid768();
  std::vector<double> times;
  for (int i = 0; i <= 10; ++i) times.push_back(0.01 * i);
  StokesGreens gr = build_greens(g.vert, 1e-2, 1.0, times);

  VecXc f(g.vert.size());
  for (int iz = 0; iz < g.vert.size(); ++iz)
    f[iz] = g.vert.z[iz] * std::exp(-1.5 * g.vert.z[iz]);

  // Two half steps equal one full step.
  for (double k : {0.0, 1.0, 2.236}) {
    const VecXc two = gr.apply_h(k, 0.05, gr.apply_h(k, 0.05, f));
    const VecXc one = gr.apply_h(k, 0.1, f);
    REQUIRE((two - one).cwiseAbs().maxCoeff() <= 1e-5);
  }

  // The mean mode conserves its vertical integral (pure reflection images).
  const Cplx m0 = quad_prof(g.vert, f);
  const Cplx m1 = quad_prof(g.vert, gr.apply_h(0.0, 0.1, f));
  REQUIRE(std::abs(m1 - m0) <= 1e-5);

  // Wall-derivative kernel mass scales like 1/sqrt(nu tau) with a finite
  // fitted constant.
  double ctr = 0.0;
  for (double tau : {0.01, 0.02, 0.05, 0.1}) {
    double w = 0.0;
    for (int iz = 0; iz < g.vert.size(); ++iz)
      w += g.vert.w[iz] * std::abs(gr.G_h_dx(1.0, tau, 0.0, g.vert.z[iz]));
    ctr = std::max(ctr, std::sqrt(1e-2 * tau) * w);
  }
  REQUIRE(ctr > 0.0);
  REQUIRE(ctr <= 0.1);

  // Time-convolved kernel applications grow at most linearly in t with a
  // finite fitted constant.
  VecXc ef(g.vert.size());
  for (int iz = 0; iz < g.vert.size(); ++iz)
    ef[iz] = std::exp(-g.vert.z[iz]);
  double cvol = 0.0;
  for (int j = 1; j <= 10; ++j) {
    VecXc acc = VecXc::Zero(g.vert.size());
    for (int i = 0; i <= j; ++i) {
      const double wt = (i == 0 || i == j) ? 0.005 : 0.01;
      acc += wt * gr.apply_h(1.0, times[j] - times[i], ef);
    }
    cvol = std::max(cvol, acc.cwiseAbs().maxCoeff() / times[j]);
  }
  REQUIRE(cvol > 0.0);
  REQUIRE(cvol <= 2.0);

  // Closed-form boundary corrector agrees with an independent
  // finite-difference heat solve of the same corrector problem.
  const double k = 1.0, nu = 0.25, tf = 0.5;
  VecX num = residual_corrector_numeric(k, nu, tf, 400);
  double cerr = 0.0;
  for (int i = 0; i < num.size(); ++i) {
    const double s = 30.0 * i / (num.size() - 1);
    cerr = std::max(cerr, std::abs(num[i] - gr.residual_R(k, nu * tf / 1e-2, s)));
  }
  REQUIRE(cerr <= 1e-3);
}

// ---------------------------------------------------------------------------
// Interaction term and boundary data
// ---------------------------------------------------------------------------

TEST_CASE("interaction term: planar shear is self-consistent and the term is bilinear") {
  const SpatialGrid& g = grid96();
  // Pure shear: u = (U(z), 0, 0), omega = (0, U'(z), 0) -> no interaction.
  CompatSeed shear;
  shear.shear_amp = 0.7;
  SpectralField3 om = seed_vorticity(g, shear);
  SpectralField3 u = biot_savart(om);
  SpectralField3 n = nonlinear_N(u, om);
  REQUIRE(field_max(n) <= 1e-12 * field_max(om));

  // Bilinearity in each argument.
  SpectralField3 om2 = seed_vorticity(g, standard_seed());
  SpectralField3 u2 = biot_savart(om2);
  SpectralField3 a = nonlinear_N(u2, om2);
  SpectralField3 u3 = u2;
  for (int c = 0; c < 3; ++c) u3.c[c] *= 2.0;
  SpectralField3 b = nonlinear_N(u3, om2);
  for (int c = 0; c < 3; ++c) b.c[c] -= 2.0 * a.c[c];
  REQUIRE(field_max(b) <= 1e-12 * field_max(a));

  // Boundary data: zero field maps to zero; an e^{-z} profile on a |xi| = 1
  // mode has the closed-form weighted trace 1/2.
  SpectralField3 zero;
  zero.grid = &g;
  zero.resize();
  REQUIRE(boundary_B(zero).cwiseAbs().maxCoeff() == 0.0);
  SpectralField3 ef;
  ef.grid = &g;
  ef.resize();
  const int m10 = g.mode_index(1, 0);
  for (int iz = 0; iz < g.vert.size(); ++iz)
    ef.c[0](m10, iz) = std::exp(-g.vert.z[iz]);
  REQUIRE(std::abs(boundary_B(ef)(m10, 0) - Cplx(0.5, 0.0)) <= 1e-3);
}

// ---------------------------------------------------------------------------
// Direct stepper
// ---------------------------------------------------------------------------

TEST_CASE("direct stepper: closed-form heat oracles and time refinement") {
  NSParams prm = params();

  SECTION("zero data stays zero") {
    const SpatialGrid& g = grid96();
    SpectralField3 zero;
    zero.grid = &g;
    zero.resize();
    DirectStepper st(g, prm, 1e-3, true);
    FlowState s = st.start(zero);
    for (int i = 0; i < 5; ++i) st.step(s);
    REQUIRE(field_max(s.omega) == 0.0);
    REQUIRE_THROWS_AS(DirectStepper(g, prm, -1.0), KinlabError);
  }

  SECTION("mean-mode bump follows the reflected heat solution") {
    const SpatialGrid& g = grid192();
    const int m0 = g.mode_index(0, 0);
    SpectralField3 om;
    om.grid = &g;
    om.resize();
    const double z0 = 2.0, sig2 = 0.25;
    for (int iz = 0; iz < g.vert.size(); ++iz) {
      const double z = g.vert.z[iz];
      om.c[1](m0, iz) = std::exp(-(z - z0) * (z - z0) / (2 * sig2)) +
                        std::exp(-(z + z0) * (z + z0) / (2 * sig2));
    }
    const double T = 0.5, dt = 1e-3;
    DirectStepper st(g, prm, dt, true);
    FlowState s = st.start(om);
    for (int i = 0; i < static_cast<int>(T / dt + 0.5); ++i) st.step(s);
    const double s2 = sig2 + 2.0 * prm.nu() * T;
    double err = 0.0;
    for (int iz = 0; iz < g.vert.size(); ++iz) {
      const double z = g.vert.z[iz];
      const double exact =
          std::sqrt(sig2 / s2) *
          (std::exp(-(z - z0) * (z - z0) / (2 * s2)) +
           std::exp(-(z + z0) * (z + z0) / (2 * s2)));
      err = std::max(err, std::abs(s.omega.c[1](m0, iz).real() - exact));
    }
    REQUIRE(err <= 2e-4);
  }

  SECTION("single mode matches the kernel and a four-times-finer run") {
    const SpatialGrid& g = grid384();
    SpectralField3 om = single_mode(g, Cplx(0.15, 0.1));
    const double T = 0.1, dt = 1e-3;
    const int nst = static_cast<int>(T / dt + 0.5);
    DirectStepper st(g, prm, dt, true);
    FlowState s = st.start(om);
    for (int i = 0; i < nst; ++i) st.step(s);
    DirectStepper st4(g, prm, dt / 4, true);
    FlowState s4 = st4.start(om);
    for (int i = 0; i < 4 * nst; ++i) st4.step(s4);

    StokesGreens gr = build_greens(g.vert, prm.kappa, prm.eta0, {0.0, T});
    const int m = g.mode_index(1, 0);
    const VecXc ref = gr.apply_h(g.xi_norm(m), T, om.c[1].row(m).transpose());
    const double scale = ref.cwiseAbs().maxCoeff();
    REQUIRE((s.omega.c[1].row(m).transpose() - ref).cwiseAbs().maxCoeff() <=
            1e-4 * scale);
    REQUIRE(field_gap(s.omega, s4.omega) <= 1e-5 * scale);
  }
}

// ---------------------------------------------------------------------------
// Kernel-representation stepping vs the direct scheme
// ---------------------------------------------------------------------------

TEST_CASE("kernel-representation stepping matches the direct scheme") {
  NSParams prm = params();

  SECTION("linear flow") {
    const SpatialGrid& g = grid384();
    SpectralField3 om = single_mode(g, Cplx(0.15, 0.1));
    const double T = 0.1;
    std::vector<double> lt;
    for (int i = 0; i <= 10; ++i) lt.push_back(T * i / 10);
    StokesGreens gr = build_greens(g.vert, prm.kappa, prm.eta0, lt);
    DuhamelRun run = step_duhamel(g, gr, om, prm, true);
    DirectStepper st(g, prm, 1e-3, true);
    FlowState s = st.start(om);
    for (int i = 0; i < 100; ++i) st.step(s);
    REQUIRE(field_gap(run.states.back().omega, s.omega) <=
            1e-4 * field_max(s.omega));
  }

  SECTION("nonlinear flow via the fixed-point iteration") {
    const SpatialGrid& g = grid96();
    InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-10);
    const double T = 0.05;
    std::vector<double> lt;
    for (int i = 0; i <= 10; ++i) lt.push_back(T * i / 10);
    StokesGreens gr = build_greens(g.vert, prm.kappa, prm.eta0, lt);
    DuhamelRun run = step_duhamel(g, gr, id.state.omega, prm, false, 1e-9, 25);
    REQUIRE(run.last_delta <= 1e-9);
    DirectStepper st(g, prm, 2e-3, false);
    FlowState s = st.start(id.state.omega);
    for (int i = 0; i < 25; ++i) st.step(s);
    REQUIRE(field_gap(run.states.back().omega, s.omega) <=
            1e-3 * field_max(s.omega));

    // The iteration reports failure instead of returning a bad answer.
    REQUIRE_THROWS_AS(step_duhamel(g, gr, id.state.omega, prm, false, 0.0, 1),
                      KinlabError);
  }
}

// ---------------------------------------------------------------------------
// Structural residuals and the energy balance
// ---------------------------------------------------------------------------

TEST_CASE("structural residuals stay below tolerance along a resolved run") {
  NSParams prm = params();
  const SpatialGrid& g = grid192();
  CompatSeed seed = standard_seed(1.0, Cplx(3e-4, 2e-4));
  InitialData id = build_compatible_data(g, prm, seed, 1e-12);
  DirectStepper st(g, prm, 1e-3, false);
  FlowState s = st.start(id.state.omega);
  double mdiv = 0.0, mns = 0.0, mw3 = 0.0, mrob = 0.0;
  for (int i = 0; i < 50; ++i) {
    st.step(s);
    mdiv = std::max(mdiv, s.div_u_residual);
    mns = std::max(mns, s.noslip_residual);
    mw3 = std::max(mw3, s.omega3_wall);
    mrob = std::max(mrob, s.robin_residual);
  }
  REQUIRE(mdiv <= 1e-6);
  REQUIRE(mns <= 1e-6);
  REQUIRE(mw3 <= 1e-6);
  REQUIRE(mrob <= 1e-6);
}

TEST_CASE("energy balance defect is quadratic in the step size") {
  NSParams prm = params();
  const SpatialGrid& g = grid96();
  InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-10);
  const double T = 0.05;
  auto defect_at = [&](double dt) {
    DirectStepper st(g, prm, dt, false);
    FlowState s = st.start(id.state.omega);
    const double e0 = kinetic_energy(s.u);
    double diss = 0.0, gprev = grad_energy(s.u);
    for (int i = 0; i < static_cast<int>(T / dt + 0.5); ++i) {
      st.step(s);
      const double gg = grad_energy(s.u);
      diss += 0.5 * dt * prm.nu() * (gg + gprev);
      gprev = gg;
    }
    return std::abs(kinetic_energy(s.u) - e0 + diss) /
           (e0 - kinetic_energy(s.u));
  };
  const double d1 = defect_at(4e-3), d2 = defect_at(2e-3), d3 = defect_at(1e-3);
  // A resolution-independent floor plus an O(dt^2) part: successive
  // differences shrink by about 4x, and the total stays small.
  REQUIRE(d1 <= 1e-3);
  const double r = (d1 - d2) / (d2 - d3);
  REQUIRE(r >= 2.5);
  REQUIRE(r <= 6.0);
}

// ---------------------------------------------------------------------------
// Time-derivative representation and compatibility
// ---------------------------------------------------------------------------

TEST_CASE("time-derivative representation separates compatible from violated data") {
  NSParams prm = params();
  const SpatialGrid& g = grid96();
  const double T = 0.04;
  std::vector<double> lt;
  for (int i = 0; i <= 8; ++i) lt.push_back(T * i / 8);
  StokesGreens gr = build_greens(g.vert, prm.kappa, prm.eta0, lt);

  InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-10);
  REQUIRE(id.residuals.robin_max <= 1e-8);
  REQUIRE(id.residuals.omega3_wall == 0.0);
  REQUIRE(id.residuals.dt_omega3_wall <= 1e-12);

  SpectralField3 raw = seed_vorticity(g, standard_seed());
  FlowState raw_state = make_state(g, prm, raw, false);
  const double raw_robin = robin_defect(raw_state).cwiseAbs().maxCoeff();
  REQUIRE(raw_robin >= 1e-3);

  const std::vector<double> gc =
      derivative_representation_gaps(g, gr, id.state.omega, prm);
  const std::vector<double> gv = derivative_representation_gaps(g, gr, raw, prm);
  // Compatible data: both paths agree to the lattice quadrature floor.
  REQUIRE(gc[0] <= 1e-2);
  REQUIRE(gc[1] <= 2e-3);
  // Violated data: a large early mismatch that decays in time.
  REQUIRE(gv[0] >= 50.0 * gc[0]);
  REQUIRE(gv[0] >= 1.5 * gv[1]);
}

TEST_CASE("initial-data builders: correction sweep and time-shift restart") {
  NSParams prm = params();
  const SpatialGrid& g = grid96();

  SECTION("correction sweep reaches tolerance on a planar-plus-mode seed") {
    InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-8);
    REQUIRE(id.residuals.robin_max <= 1e-6);
    REQUIRE(id.residuals.omega3_wall <= 1e-6);
    REQUIRE(id.residuals.dt_omega3_wall <= 1e-6);
    REQUIRE_FALSE(id.history.empty());
    // Pure shear satisfies the third condition identically.
    CompatSeed shear;
    shear.shear_amp = 1.0;
    InitialData ids = build_compatible_data(g, prm, shear, 1e-10);
    REQUIRE(ids.residuals.omega3_wall == 0.0);
    REQUIRE(ids.residuals.dt_omega3_wall == 0.0);
  }

  SECTION("non-convergent sweep raises with its residual history") {
    REQUIRE_THROWS_AS(build_compatible_data(g, prm, standard_seed(), 1e-14, 2),
                      KinlabError);
  }

  SECTION("time-shift restart relaxes an arbitrary seed") {
    SpectralField3 raw = seed_vorticity(g, standard_seed());
    InitialData id = time_shift_data(g, prm, raw, 0.02, 5e-4, false);
    REQUIRE(id.residuals.robin_max <= 1e-6);
    REQUIRE(id.residuals.omega3_wall <= 1e-6);
    REQUIRE(id.residuals.dt_omega3_wall <= 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Pressure reconstruction
// ---------------------------------------------------------------------------

TEST_CASE("pressure reconstruction satisfies its defining equations") {
  NSParams prm = params();
  const SpatialGrid& g = grid96();

  SECTION("planar shear carries no pressure") {
    CompatSeed shear;
    shear.shear_amp = 0.7;
    FlowState s = make_state(g, prm, seed_vorticity(g, shear), false);
    time_derivatives(s);
    pressure_reconstruct(s);
    REQUIRE(s.p.cwiseAbs().maxCoeff() <= 1e-12);
  }

  SECTION("wall flux, interior equation, and decay") {
    InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-10);
    const FlowState& s = id.state;
    const SpecComp src = pressure_source(s.u, s.u);
    double neu = 0.0, lap = 0.0;
    for (int m = 0; m < g.n_modes(); ++m) {
      const double k = g.xi_norm(m);
      const VecXc prow = s.p.row(m).transpose();
      const VecXc dp = dz_profile(g.vert, prow);
      if (k > 0.0) {
        auto [m1, m2] = g.mode_of(m);
        const Cplx data = Cplx(0.0, 1.0) * prm.nu() *
                          (static_cast<double>(m2) * s.omega.c[0](m, 0) -
                           static_cast<double>(m1) * s.omega.c[1](m, 0));
        neu = std::max(neu, std::abs(dp[0] - data));
      }
      const VecXc d2p = dz_profile(g.vert, dp);
      for (int j = 4; j < g.vert.size() - 4; ++j)
        lap = std::max(lap,
                       std::abs(-(d2p[j] - k * k * prow[j]) - src(m, j)));
    }
    REQUIRE(neu <= 1e-6);
    REQUIRE(lap <= 1e-3);
    REQUIRE(s.p.cwiseAbs().col(g.vert.size() - 1).maxCoeff() <= 1e-4);
  }
}

// ---------------------------------------------------------------------------
// Viscosity sweep: envelope constants, thinning slope, derivative identity
// ---------------------------------------------------------------------------

TEST_CASE("boundary-layer envelope constants are stable across the viscosity sweep") {
  std::deque<SpatialGrid> grids;
  std::vector<FlowState> states;
  for (double kap : {1e-2, 5e-3, 2.5e-3}) {
    NSParams prm = params(kap);
    grids.push_back(build_spatial(3, 96, 12.0, kap, 12));
    const SpatialGrid& g = grids.back();
    InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-9, 500);
    DirectStepper st(g, prm, 1e-3, false);
    FlowState s = st.start(id.state.omega);
    for (int i = 0; i < 50; ++i) st.step(s);
    time_derivatives(s);
    pressure_reconstruct(s);
    states.push_back(std::move(s));
  }
  ProfileReport rep = profile_diagnostics(states, 0.5);
  for (const BoundFit& f : rep.fits) {
    INFO(f.name);
    for (double c : f.constants) REQUIRE(std::isfinite(c));
    REQUIRE(f.growth() <= 2.0);
  }
  REQUIRE(rep.slope_dz_omega_h >= -1.1);
  REQUIRE(rep.slope_dz_omega_h <= 0.0);
  REQUIRE(rep.identity_defect <= 1e-2);
}
