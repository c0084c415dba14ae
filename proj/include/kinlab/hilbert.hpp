#pragma once

/// @file hilbert.hpp
/// @brief Local-Maxwellian expansion machinery: the corrector built from the
///        pressure and the velocity-gradient contraction of the inverted
///        linearized operator, the remainder-equation source terms, the
///        diffuse-boundary mismatch, and the cancellation checks that encode
///        the fluid equations inside the kinetic hierarchy.

#include <array>
#include <cmath>
#include <vector>

#include "kinlab/burnett.hpp"
#include "kinlab/hydro_projection.hpp"
#include "kinlab/linearized.hpp"
#include "kinlab/ns_solver.hpp"

namespace kinlab {

using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// ---------------------------------------------------------------------------
// Expansion scales
// ---------------------------------------------------------------------------

/// The three small parameters of the expansion: Mach/Strouhal eps, inverse
/// Reynolds scale kappa, and remainder amplitude delta.
struct ExpansionScales {
  double eps = 0.1;
  double kappa = 1e-2;
  double delta = 0.1;

  ExpansionScales(double e, double k, double d) : eps(e), kappa(k), delta(d) {
    KINLAB_REQUIRE(e > 0.0 && e < 1.0 && k > 0.0 && k < 1.0 && d > 0.0 &&
                       d < 1.0,
                   "ExpansionScales: eps, kappa, delta must lie in (0,1)");
  }

  /// Coupled regime delta = sqrt(eps).
  static ExpansionScales coupled(double e, double k) {
    return ExpansionScales(e, k, std::sqrt(e));
  }
};

// ---------------------------------------------------------------------------
// Point samples of the fluid fields
// ---------------------------------------------------------------------------

/// Everything the expansion needs from the flow at one space-time point.
/// Gradient convention: grad_u(l, m) = d_l u_m; hess_u[m](k, l) = d_k d_l u_m.
struct FluidSample {
  Vec3 u = Vec3::Zero(), dt_u = Vec3::Zero(), dt2_u = Vec3::Zero();
  double p = 0.0, dt_p = 0.0, dt2_p = 0.0;
  Mat3 grad_u = Mat3::Zero(), grad_dt_u = Mat3::Zero();
  Vec3 grad_p = Vec3::Zero(), grad_dt_p = Vec3::Zero();
  std::array<Mat3, 3> hess_u{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  std::array<Mat3, 3> hess_dt_u{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};

  Vec3 lap_u() const {
    return Vec3(hess_u[0].trace(), hess_u[1].trace(), hess_u[2].trace());
  }
  Vec3 material_accel() const { return dt_u + grad_u.transpose() * u; }
};

namespace detail {

/// Physical-space value of one spectral component at collocation point
/// (i1, i2, iz): sum over retained modes of g_xi(z) e^{i x.xi}.
inline double phys_at(const SpatialGrid& g, const SpecComp& s, int i1, int i2,
                      int iz) {
  Cplx acc(0.0, 0.0);
  for (int m = 0; m < g.n_modes(); ++m) {
    auto [m1, m2] = g.mode_of(m);
    const double ph = kTwoPi * (m1 * i1 + m2 * i2) / g.nh;
    acc += s(m, iz) * std::exp(Cplx(0.0, ph));
  }
  return acc.real();
}

}  // namespace detail

/// Extracts a FluidSample at collocation indices (i1, i2, iz) from a flow
/// snapshot whose derivative chain and pressure have been filled.
inline FluidSample sample_flow(const FlowState& s, int i1, int i2, int iz) {
  const SpatialGrid& g = *s.grid;
  KINLAB_REQUIRE(s.dt_u.grid != nullptr && s.p.size() > 0,
                 "sample_flow: fill time derivatives and pressure first");
  FluidSample out;
  auto d = [&](const SpecComp& f, int axis) {
    return axis < 2 ? dx_spec(g, f, axis) : dz_spec(g, f);
  };
  auto at = [&](const SpecComp& f) { return detail::phys_at(g, f, i1, i2, iz); };
  for (int m = 0; m < 3; ++m) {
    out.u[m] = at(s.u.c[m]);
    out.dt_u[m] = at(s.dt_u.c[m]);
    out.dt2_u[m] = at(s.dt2_u.c[m]);
    std::array<SpecComp, 3> du;
    for (int l = 0; l < 3; ++l) {
      du[l] = d(s.u.c[m], l);
      out.grad_u(l, m) = at(du[l]);
      out.grad_dt_u(l, m) = at(d(s.dt_u.c[m], l));
    }
    for (int k = 0; k < 3; ++k)
      for (int l = k; l < 3; ++l) {
        out.hess_u[m](k, l) = out.hess_u[m](l, k) = at(d(du[l], k));
        const double h = at(d(d(s.dt_u.c[m], l), k));
        out.hess_dt_u[m](k, l) = out.hess_dt_u[m](l, k) = h;
      }
  }
  out.p = at(s.p);
  out.dt_p = at(s.dt_p);
  out.dt2_p = at(s.dt2_p);
  for (int l = 0; l < 3; ++l) {
    out.grad_p[l] = at(d(s.p, l));
    out.grad_dt_p[l] = at(d(s.dt_p, l));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local Maxwellian
// ---------------------------------------------------------------------------

/// mu = M_{1, eps u, 1} sampled on the velocity grid.  Rejects data outside
/// the expansion regime eps |u| <= 1/2.
inline DistField build_mu(const VelocityGrid& vg, const Vec3& u, double eps) {
  KINLAB_REQUIRE(eps * u.norm() <= 0.5,
                 "build_mu: eps |u| must be <= 1/2 (expansion regime)");
  MaxwellianParams mp;
  mp.U = eps * u;
  return sample_field(vg, [&](const Vec3& v) { return maxwellian(mp, v); });
}

// ---------------------------------------------------------------------------
// Shifted inverted-operator fields
// ---------------------------------------------------------------------------

/// The six tensor fields of the inverted linearized operator recentred at a
/// bulk velocity b by shift covariance A^b(v) = A^0(v - b) (trilinear
/// interpolation on the velocity cube), together with their velocity
/// gradients (central differences on the cube, also shifted).
struct ShiftedBurnett {
  Vec3 bulk = Vec3::Zero();
  std::array<DistField, 6> A;
  std::array<std::array<DistField, 3>, 6> dA;  ///< dA[t][j] = d A_t / d v_j
};

inline ShiftedBurnett shift_burnett(const VelocityGrid& vg,
                                    const BurnettTensor& bt, const Vec3& bulk) {
  KINLAB_REQUIRE(bt.bulk.norm() == 0.0,
                 "shift_burnett: reference tensor must be centred at zero");
  ShiftedBurnett out;
  out.bulk = bulk;
  const int r = vg.resolution;
  for (int t = 0; t < 6; ++t) {
    const std::vector<double> cube = vg.to_cube(bt.fields[t]);
    // Velocity gradient on the cube by central differences.
    std::array<std::vector<double>, 3> dcube;
    for (int j = 0; j < 3; ++j) dcube[j].assign(cube.size(), 0.0);
    const int stride[3] = {r * r, r, 1};
    for (int i = 1; i + 1 < r; ++i)
      for (int jj = 1; jj + 1 < r; ++jj)
        for (int k = 1; k + 1 < r; ++k) {
          const int c = i * r * r + jj * r + k;
          for (int j = 0; j < 3; ++j)
            dcube[j][c] = (cube[c + stride[j]] - cube[c - stride[j]]) /
                          (2.0 * vg.h);
        }
    out.A[t].resize(vg.size());
    for (int j = 0; j < 3; ++j) out.dA[t][j].resize(vg.size());
    for (std::size_t n = 0; n < vg.size(); ++n) {
      const Vec3 vs = vg.nodes[n] - bulk;
      out.A[t][n] = vg.interp(cube, vs);
      for (int j = 0; j < 3; ++j) out.dA[t][j][n] = vg.interp(dcube[j], vs);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The corrector bundle
// ---------------------------------------------------------------------------

/// One space-time point of the expansion: the local Maxwellian, the corrector
/// split into its hydrodynamic and microscopic parts, and its exact time
/// derivative.  The microscopic part is deflected against the local
/// hydrodynamic frame, so the orthogonality invariant holds to machine
/// precision by construction.
struct HilbertBundle {
  ExpansionScales scales{0.1, 1e-2, 0.1};
  FluidSample s;
  const VelocityGrid* vg = nullptr;
  Vec3 bulk = Vec3::Zero();
  HydroProjection proj;
  ShiftedBurnett burnett;
  DistField sqrt_mu;
  DistField Pf2;    ///< p sqrt(mu)
  DistField If2;    ///< -kappa sum A^b_lm d_l u_m, microscopic
  DistField f2;
  DistField dt_f2;  ///< exact time derivative of f2
};

inline HilbertBundle build_f2(const VelocityGrid& vg, const BurnettTensor& bt,
                              const ExpansionScales& scales,
                              const FluidSample& s) {
  HilbertBundle b{scales, s, &vg, scales.eps * s.u,
                  HydroProjection(vg, scales.eps * s.u),
                  shift_burnett(vg, bt, scales.eps * s.u),
                  DistField(),    DistField(), DistField(),
                  DistField(),    DistField()};
  const double eps = scales.eps, kappa = scales.kappa;
  KINLAB_REQUIRE(eps * s.u.norm() <= 0.5,
                 "build_f2: eps |u| must be <= 1/2 (expansion regime)");
  const std::size_t n = vg.size();
  b.sqrt_mu.resize(n);
  MaxwellianParams mp;
  mp.U = b.bulk;
  for (std::size_t k = 0; k < n; ++k)
    b.sqrt_mu[k] = std::sqrt(maxwellian(mp, vg.nodes[k]));

  b.Pf2 = s.p * b.sqrt_mu;
  DistField contraction = DistField::Zero(n);
  DistField dt_contraction = DistField::Zero(n);
  for (int l = 0; l < 3; ++l)
    for (int m = 0; m < 3; ++m) {
      const int t = BurnettTensor::tri_index(l, m);
      contraction += s.grad_u(l, m) * b.burnett.A[t];
      // d_t A^b = -eps dt_u . grad_v A^b (the bulk moves with the flow).
      DistField dta = DistField::Zero(n);
      for (int j = 0; j < 3; ++j)
        dta -= eps * s.dt_u[j] * b.burnett.dA[t][j];
      dt_contraction += s.grad_dt_u(l, m) * b.burnett.A[t] +
                        s.grad_u(l, m) * dta;
    }
  b.If2 = b.proj.deflect(-kappa * contraction);
  b.f2 = b.Pf2 + b.If2;

  // dt Pf2 = dt_p sqrt_mu + p dt sqrt_mu, dt sqrt_mu = (eps/2)(c.dt_u) sqrt_mu.
  b.dt_f2.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 c = vg.nodes[k] - b.bulk;
    b.dt_f2[k] = s.dt_p * b.sqrt_mu[k] +
                 s.p * 0.5 * eps * c.dot(s.dt_u) * b.sqrt_mu[k];
  }
  b.dt_f2 -= kappa * dt_contraction;
  return b;
}

// ---------------------------------------------------------------------------
// Transport factor of the local Maxwellian (closed forms)
// ---------------------------------------------------------------------------

/// (d_t + eps^{-1} v.grad_x) sqrt(mu) / sqrt(mu) at velocity v:
///   (1/2)[c . grad_u . c + eps (dt_u + u.grad u) . c], c = v - eps u.
inline double transport_log_sqrt_mu(const FluidSample& s, double eps,
                                    const Vec3& v) {
  const Vec3 c = v - eps * s.u;
  return 0.5 * (c.dot(s.grad_u.transpose() * c) +
                eps * s.material_accel().dot(c));
}

/// Time derivative of the transport factor (exact differentiation of the
/// closed form, with d_t c = -eps dt_u).
inline double dt_transport_log_sqrt_mu(const FluidSample& s, double eps,
                                       const Vec3& v) {
  const Vec3 c = v - eps * s.u;
  const double quad = c.dot(s.grad_dt_u.transpose() * c);
  const double cross = -eps * c.dot(s.grad_u * s.dt_u);  // c_l d_l u_m dt_u_m
  const Vec3 dt_accel = s.dt2_u + s.grad_dt_u.transpose() * s.u;
  return 0.5 * (quad + cross + eps * dt_accel.dot(c) -
                eps * eps * s.dt_u.dot(s.material_accel()));
}

// ---------------------------------------------------------------------------
// Hierarchy checks
// ---------------------------------------------------------------------------

/// Hydrodynamic projection coefficients of the transport of the local
/// Maxwellian: eps^{-1} <phi_i sqrt_mu, (v - eps u).grad_x mu / sqrt_mu>.
/// Components 1..3 vanish by parity; components 0 and 4 return the
/// divergence with the closed coefficients (1, sqrt(2/3)).
inline Vec5 solvability_defect(const VelocityGrid& vg,
                                                      double eps,
                                                      const Vec3& u,
                                                      const Mat3& grad_u) {
  HydroProjection hp(vg, eps * u);
  DistField f(vg.size());
  for (std::size_t k = 0; k < vg.size(); ++k) {
    const Vec3 c = vg.nodes[k] - eps * u;
    f[k] = c.dot(grad_u.transpose() * c) *
           hp.basis()(static_cast<int>(k), 0);  // c.grad_u.c sqrt(mu)
  }
  return hp.coefficients(f);
}

/// Contraction of the inverted-operator Gram matrix against a second
/// derivative tensor, compared with the isotropic eta0-Laplacian form.
struct CaptureResult {
  Vec3 capture = Vec3::Zero();   ///< kappa <L A_ik, A_lm> d_k d_l u_m
  Vec3 target = Vec3::Zero();    ///< kappa eta0 Lap(u) (divergence-free data)
  double rel_defect = 0.0;
  double row0 = 0.0, row4 = 0.0; ///< mass / energy rows, should vanish
};

inline CaptureResult viscosity_capture_check(const BurnettTensor& bt,
                                             const VelocityGrid& vg,
                                             double kappa,
                                             const std::array<Mat3, 3>& hess) {
  CaptureResult r;
  for (int i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m)
          acc += bt.gram(3 * i + k, 3 * l + m) * hess[m](k, l);
    r.capture[i] = kappa * acc;
    r.target[i] = kappa * bt.eta0 * hess[i].trace();
  }
  r.rel_defect = (r.capture - r.target).norm() /
                 std::max(r.target.norm(), 1e-300);
  // Mass and energy rows: kappa sum <phi_{0,4} v_k sqrt(mu), A_lm> d_k d_l u_m.
  DistField row0f(vg.size()), row4f(vg.size());
  MaxwellianParams mp;
  double acc0 = 0.0, acc4 = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t n = 0; n < vg.size(); ++n) {
      const Vec3& v = vg.nodes[n];
      const double sm = std::sqrt(maxwellian(mp, v));
      row0f[n] = v[k] * sm;
      row4f[n] = (v.squaredNorm() - 3.0) / std::sqrt(6.0) * v[k] * sm;
    }
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        const DistField& a = bt.A(l, m);
        acc0 += vg.dot(row0f, a) * hess[m](k, l);
        acc4 += vg.dot(row4f, a) * hess[m](k, l);
      }
  }
  r.row0 = kappa * std::abs(acc0);
  r.row4 = kappa * std::abs(acc4);
  return r;
}

/// The 1/delta-order hydrodynamic leading term of the hierarchy:
///   -(1/delta)[ c.(dt_u + u.grad u) sqrt_mu + c.grad_p sqrt_mu
///               - kappa sum c.A_lm grad d_l u_m ].
/// For an exact solution of the fluid equations its hydrodynamic projection
/// cancels up to the capture defect; its momentum coefficients equal
/// -(1/delta) times the fluid residual in general.
inline DistField leading_term(const HilbertBundle& b) {
  const VelocityGrid& vg = *b.vg;
  const FluidSample& s = b.s;
  const double kappa = b.scales.kappa, delta = b.scales.delta;
  const Vec3 accel = s.material_accel() + s.grad_p;
  DistField out(vg.size());
  for (std::size_t n = 0; n < vg.size(); ++n) {
    const Vec3 c = vg.nodes[n] - b.bulk;
    double visc = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        const int t = BurnettTensor::tri_index(l, m);
        for (int k = 0; k < 3; ++k)
          visc += c[k] * b.burnett.A[t][n] * s.hess_u[m](k, l);
      }
    out[n] = -(1.0 / delta) * (c.dot(accel) * b.sqrt_mu[n] - kappa * visc);
  }
  return out;
}

/// Time derivative of the 1/delta-order leading term.  The advection piece
/// differentiates as d_t(u.grad u) = dt_u.grad u + u.grad dt_u, and the
/// contracted second derivatives are those of dt_u.  For an exact solution
/// the hydrodynamic projection again cancels to the residual floor.
inline DistField leading_term_dt(const HilbertBundle& b) {
  const VelocityGrid& vg = *b.vg;
  const FluidSample& s = b.s;
  const double kappa = b.scales.kappa, delta = b.scales.delta;
  const Vec3 accel = s.dt2_u + s.grad_u.transpose() * s.dt_u +
                     s.grad_dt_u.transpose() * s.u + s.grad_dt_p;
  DistField out(vg.size());
  for (std::size_t n = 0; n < vg.size(); ++n) {
    const Vec3 c = vg.nodes[n] - b.bulk;
    double visc = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        const int t = BurnettTensor::tri_index(l, m);
        for (int k = 0; k < 3; ++k)
          visc += c[k] * b.burnett.A[t][n] * s.hess_dt_u[m](k, l);
      }
    out[n] = -(1.0 / delta) * (c.dot(accel) * b.sqrt_mu[n] - kappa * visc);
  }
  return out;
}

/// Remainder-equation source terms assembled term by term.  R1 and R4 are the
/// purely microscopic second-derivative contractions of the base and
/// time-differentiated hierarchies; R2 collects every remaining first-order
/// term (bundle transport, corrector advection, and optionally the quadratic
/// collision term); R3 is the eps-order transport-times-corrector cross term.
struct HilbertSources {
  DistField R1, R2, R3, R4;
};

inline HilbertSources assemble_sources(const HilbertBundle& b,
                                       const CollisionConfig* gamma_cfg =
                                           nullptr) {
  const VelocityGrid& vg = *b.vg;
  const FluidSample& s = b.s;
  const double eps = b.scales.eps, kappa = b.scales.kappa,
               delta = b.scales.delta;
  const std::size_t n = vg.size();
  HilbertSources out;

  DistField micro1 = DistField::Zero(n), micro4 = DistField::Zero(n);
  DistField lower = DistField::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 c = vg.nodes[i] - b.bulk;
    double m1 = 0.0, m4 = 0.0, grad_a = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < 3; ++m) {
        const int t = BurnettTensor::tri_index(l, m);
        for (int k = 0; k < 3; ++k) {
          m1 += c[k] * b.burnett.A[t][i] * s.hess_u[m](k, l);
          m4 += c[k] * b.burnett.A[t][i] * s.hess_dt_u[m](k, l);
          // c . grad_x A_lm d_l u_m with grad_x A = -eps grad_u . grad_v A.
          for (int j = 0; j < 3; ++j)
            grad_a -= c[k] * eps * s.grad_u(k, j) * b.burnett.dA[t][j][i] *
                      s.grad_u(l, m);
        }
      }
    micro1[i] = (kappa / delta) * m1;
    micro4[i] = (kappa / delta) * m4;
    // Lower-order part of the base hierarchy: the Maxwellian-gradient part
    // of grad_x(p sqrt_mu) plus the x-dependence of the shifted fields.
    const double quad = c.dot(s.grad_u.transpose() * c);
    lower[i] = -(eps / (2.0 * delta)) * s.p * quad * b.sqrt_mu[i] +
               (kappa / delta) * grad_a;
  }
  out.R1 = b.proj.deflect(micro1);
  out.R4 = b.proj.deflect(micro4);

  // Corrector transport: -(eps/delta)[dt f2 + u.grad_x f2 + T f2] with the
  // closed-form transport factor T.
  DistField advect = DistField::Zero(n);
  for (int k = 0; k < 3; ++k) {
    DistField dk(n);  // d_{x_k} f2
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 c = vg.nodes[i] - b.bulk;
      double da = 0.0;
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
          const int t = BurnettTensor::tri_index(l, m);
          double dka = 0.0;
          for (int j = 0; j < 3; ++j)
            dka -= eps * s.grad_u(k, j) * b.burnett.dA[t][j][i];
          da += dka * s.grad_u(l, m) + b.burnett.A[t][i] * s.hess_u[m](k, l);
        }
      const double dk_sqmu =
          0.5 * eps * c.dot(s.grad_u.row(k).transpose()) * b.sqrt_mu[i];
      dk[i] = s.grad_p[k] * b.sqrt_mu[i] + s.p * dk_sqmu - kappa * da;
    }
    advect += s.u[k] * dk;
  }
  DistField transport(n);
  for (std::size_t i = 0; i < n; ++i)
    transport[i] = transport_log_sqrt_mu(s, eps, vg.nodes[i]) * b.f2[i];
  out.R2 = lower - (eps / delta) * (b.dt_f2 + advect + transport);
  if (gamma_cfg != nullptr) {
    out.R2 += (eps / (delta * kappa)) *
              apply_Gamma(b.f2, b.f2, b.bulk, *gamma_cfg);
  }

  // eps-order cross term: the eps-part of the transport factor times f2.
  DistField cross(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 c = vg.nodes[i] - b.bulk;
    cross[i] = 0.5 * eps * s.material_accel().dot(c) * b.f2[i];
  }
  out.R3 = b.proj.deflect((eps / delta) * cross);
  return out;
}

// ---------------------------------------------------------------------------
// Diffuse-boundary mismatch
// ---------------------------------------------------------------------------

/// The part of the microscopic corrector the diffuse wall cannot absorb:
/// (eps/delta)(1 - P_gamma)(I - P) f2 at a wall point (no-slip, so the bulk
/// vanishes there).  Norms are taken over the incoming half with the |n.v|
/// flux weight.
struct BoundaryMismatch {
  DistField field;
  double l2_gamma = 0.0;
  double l4_gamma = 0.0;
};

inline BoundaryMismatch boundary_mismatch(const VelocityGrid& vg,
                                          const BurnettTensor& bt,
                                          const ExpansionScales& scales,
                                          const Mat3& grad_u_wall) {
  const Vec3 normal(0.0, 0.0, -1.0);  // outward normal of the half-space
  BoundaryProjection pg(vg, normal);
  HydroProjection hp(vg, Vec3::Zero());
  DistField contraction = DistField::Zero(vg.size());
  for (int l = 0; l < 3; ++l)
    for (int m = 0; m < 3; ++m)
      contraction += grad_u_wall(l, m) * bt.A(l, m);
  const DistField if2 = hp.deflect(-scales.kappa * contraction);
  BoundaryMismatch out;
  out.field = (scales.eps / scales.delta) * (if2 - pg.apply(if2));
  double l2 = 0.0, l4 = 0.0;
  for (std::size_t k = 0; k < vg.size(); ++k) {
    const double nv = normal.dot(vg.nodes[k]);
    if (nv >= 0.0) continue;  // incoming half n.v < 0, flux weight |n.v|
    l2 += -nv * sq(out.field[k]);
    l4 += -nv * sq(sq(out.field[k]));
  }
  out.l2_gamma = std::sqrt(l2 * vg.weight());
  out.l4_gamma = std::pow(l4 * vg.weight(), 0.25);
  return out;
}

// ---------------------------------------------------------------------------
// Weighted-bound fitting
// ---------------------------------------------------------------------------

/// sup over the velocity grid of |f(v)| e^{rho |v - bulk|^2}; the left-hand
/// side of every pointwise weighted bound in the source estimates.
inline double weighted_sup(const VelocityGrid& vg, const DistField& f,
                           const Vec3& bulk, double rho = 0.2) {
  double s = 0.0;
  for (std::size_t k = 0; k < vg.size(); ++k)
    s = std::max(s, std::abs(f[k]) *
                        std::exp(rho * (vg.nodes[k] - bulk).squaredNorm()));
  return s;
}

/// Fitted constant: lhs / (rhs + floor).
inline double fit_constant(double lhs, double rhs, double floor = 1e-12) {
  return lhs / (rhs + floor);
}

}  // namespace kinlab
