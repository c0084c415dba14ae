#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <deque>
#include <vector>

#include "kinlab/euler.hpp"

using namespace kinlab;

namespace {

const SpatialGrid& grid96() {
  static SpatialGrid g = build_spatial(3, 96, 12.0, 1e-2, 12);
  return g;
}

const VelocityGrid& vgrid() {
  static VelocityGrid v = build_grid(16, 6.0);
  return v;
}

CompatSeed standard_seed() {
  CompatSeed seed;
  seed.shear_amp = 0.4;
  seed.modes.push_back({1, 0, Cplx(0.15, 0.1)});
  return seed;
}

double field_max(const SpectralField3& a) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) d = std::max(d, a.c[c].cwiseAbs().maxCoeff());
  return d;
}

double l2_diff(const SpectralField3& a, const SpectralField3& b) {
  SpectralField3 d = a;
  for (int c = 0; c < 3; ++c) d.c[c] -= b.c[c];
  return std::sqrt(2.0 * kinetic_energy(d));
}

} // namespace

// ---------------------------------------------------------------------------
// Inviscid transport stepper
// ---------------------------------------------------------------------------

TEST_CASE("inviscid stepper: trivial data, steady shear, and the CFL guard") {
  const SpatialGrid& g = grid96();
  EulerStepper st(g, 1e-3);

  SpectralField3 zero;
  zero.grid = &g;
  zero.resize();
  EulerState z = st.start(zero);
  for (int i = 0; i < 5; ++i) st.step(z);
  REQUIRE(field_max(z.omega) == 0.0);

  // A planar shear is an exact steady solution: the transport term vanishes
  // identically, so RK4 reproduces it to roundoff.
  CompatSeed shear;
  shear.shear_amp = 0.7;
  SpectralField3 om0 = seed_vorticity(g, shear);
  EulerState s = st.start(om0);
  for (int i = 0; i < 100; ++i) st.step(s);
  double drift = 0.0;
  for (int c = 0; c < 3; ++c)
    drift = std::max(drift, (s.omega.c[c] - om0.c[c]).cwiseAbs().maxCoeff());
  REQUIRE(drift <= 1e-12);
  REQUIRE(s.div_u_residual == 0.0);
  REQUIRE(s.omega3_wall == 0.0);

  // An advective step far beyond the horizontal resolution limit is refused.
  EulerStepper coarse(g, 10.0);
  EulerState c = coarse.start(om0);
  REQUIRE_THROWS_AS(coarse.step(c), KinlabError);
  REQUIRE_THROWS_AS(EulerStepper(g, 0.0), KinlabError);
}

TEST_CASE("inviscid stepper: conservation and wall invariants on a nonlinear run") {
  const SpatialGrid& g = grid96();
  NSParams prm{1e-2, 1.0};
  InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-8);
  EulerStepper st(g, 1e-3);
  EulerState s = st.start(id.state.omega);
  const double e0 = kinetic_energy(s.u);
  double w3 = 0.0, dv = 0.0;
  for (int i = 0; i < 100; ++i) {
    st.step(s);
    w3 = std::max(w3, s.omega3_wall);
    dv = std::max(dv, s.div_u_residual);
  }
  // No boundary flux (u3 = 0 on the wall by construction), so the kinetic
  // energy is conserved up to discretization.
  REQUIRE(std::abs(kinetic_energy(s.u) - e0) / e0 <= 1e-4);
  // Wall vorticity condition is transported: u3 and its horizontal
  // derivatives vanish on the wall, so omega_3(0) = 0 stays exact.
  REQUIRE(w3 <= 1e-12);
  REQUIRE(dv <= 1e-3);

  // Diagnostic pressure: decays at the top; a pure shear carries none.
  const SpecComp p = euler_pressure(s);
  REQUIRE(p.cwiseAbs().col(g.vert.size() - 1).maxCoeff() <= 1e-4);
  CompatSeed shear;
  shear.shear_amp = 0.7;
  EulerState sh = st.start(seed_vorticity(g, shear));
  REQUIRE(euler_pressure(sh).cwiseAbs().maxCoeff() <= 1e-12);
}

// ---------------------------------------------------------------------------
// Boundary-strip dissipation functional
// ---------------------------------------------------------------------------

TEST_CASE("boundary-strip dissipation matches the closed-form shear integral") {
  const SpatialGrid& g = grid96();
  CompatSeed shear;
  shear.shear_amp = 0.7;
  std::vector<SpectralField3> snaps(3, biot_savart(seed_vorticity(g, shear)));

  SECTION("zero flow gives zero") {
    SpectralField3 zero;
    zero.grid = &g;
    zero.resize();
    std::vector<SpectralField3> zs(3, zero);
    REQUIRE(kato_functional(zs, 0.05, 1e-2).value == 0.0);
  }

  SECTION("frozen shear agrees with the exact strip integral of U'(z)^2") {
    // u = (U(z), 0, 0) with U' = 0.7 (2z - z^2) e^{-z}; the functional is
    // kappa * T * int_0^{kappa} U'(z)^2 dz for c = 1.
    for (double kap : {0.5, 0.25, 0.125}) {
      KatoResult kr = kato_functional(snaps, 0.05, kap, 1.0);
      REQUIRE_FALSE(kr.under_resolved);
      double exact = 0.0;
      const int nn = 200000;
      for (int i = 0; i < nn; ++i) {
        const double z = kap * (i + 0.5) / nn;
        const double up = 0.7 * (2 * z - z * z) * std::exp(-z);
        exact += up * up * kap / nn;
      }
      exact *= kap * 0.1;
      REQUIRE(std::abs(kr.value - exact) / exact <= 3e-2);
    }
  }

  SECTION("a strip thinner than four nodes is flagged") {
    KatoResult kr = kato_functional(snaps, 0.05, 1e-2, 0.5);
    REQUIRE(kr.under_resolved);
    REQUIRE(kr.layer_nodes < 4);
  }
}

// ---------------------------------------------------------------------------
// Local-Maxwellian distance
// ---------------------------------------------------------------------------

TEST_CASE("local-Maxwellian distance: kernel of the map and linear response") {
  const SpatialGrid& g = grid96();
  const VelocityGrid& vg = vgrid();
  SpectralField3 ua = biot_savart(seed_vorticity(g, standard_seed()));
  SpectralField3 ub = ua, uc = ua;
  for (int c = 0; c < 3; ++c) {
    ub.c[c] *= 0.9;
    uc.c[c] *= 0.8; // doubled difference
  }

  REQUIRE(maxwellian_distance(ua, ua, 0.1, vg) == 0.0);

  const double d1 = maxwellian_distance(ua, ub, 0.1, vg);
  const double d2 = maxwellian_distance(ua, uc, 0.1, vg);
  REQUIRE(std::abs(d2 / d1 - 2.0) <= 1e-2);

  // Fitted comparison constant against the plain velocity L^2 distance.
  const double cfit = d1 / l2_diff(ua, ub);
  REQUIRE(cfit > 0.0);
  REQUIRE(cfit <= 2.0);

  // Precondition eps |u|_inf <= 1/2 is enforced.
  REQUIRE_THROWS_AS(maxwellian_distance(ua, ub, 2.0, vg), KinlabError);
}

// ---------------------------------------------------------------------------
// Vanishing-viscosity sweep
// ---------------------------------------------------------------------------

TEST_CASE("viscous-inviscid gap, Maxwellian distance, and strip dissipation shrink with viscosity") {
  const VelocityGrid& vg = vgrid();
  const double T = 0.1, dt = 1e-3;
  std::deque<SpatialGrid> grids;
  std::vector<double> supdiff, maxw;
  std::vector<std::vector<double>> kato(3);
  for (double kap : {1e-2, 5e-3, 2.5e-3}) {
    NSParams prm{kap, 1.0};
    grids.push_back(build_spatial(3, 96, 12.0, kap, 12));
    const SpatialGrid& g = grids.back();
    InitialData id = build_compatible_data(g, prm, standard_seed(), 1e-9, 500);
    DirectStepper ns(g, prm, dt, false);
    FlowState fs = ns.start(id.state.omega);
    EulerStepper es(g, dt);
    EulerState eu = es.start(id.state.omega);
    std::vector<SpectralField3> snaps{fs.u};
    double sd = 0.0;
    for (int i = 0; i < static_cast<int>(T / dt + 0.5); ++i) {
      ns.step(fs);
      es.step(eu);
      snaps.push_back(fs.u);
      sd = std::max(sd, l2_diff(fs.u, eu.u));
    }
    supdiff.push_back(sd);
    maxw.push_back(maxwellian_distance(fs.u, eu.u, 0.1, vg));
    const double cs[3] = {0.5, 1.0, 2.0};
    for (int ci = 0; ci < 3; ++ci)
      kato[ci].push_back(kato_functional(snaps, dt, kap, cs[ci]).value);
  }
  // Monotone nonincreasing within a 10% margin across the halvings.
  for (int i = 0; i + 1 < 3; ++i) {
    REQUIRE(supdiff[i + 1] <= 1.1 * supdiff[i]);
    REQUIRE(maxw[i + 1] <= 1.1 * maxw[i]);
    for (int ci = 0; ci < 3; ++ci) REQUIRE(kato[ci][i + 1] < kato[ci][i]);
  }
}
