#pragma once

/// @file hydro_projection.hpp
/// @brief Hydrodynamic projection P onto span{phi_i sqrt(mu)} and the
///        half-space diffuse-reflection boundary projection.
///
/// Basis around bulk velocity b = eps*u:
///   phi_0 = 1, phi_i = v_i - b_i (i=1..3), phi_4 = (|v-b|^2 - 3)/sqrt(6),
/// each multiplied by sqrt(mu) with mu = M_{1,b,1}. These are analytically
/// orthonormal in L^2(dv); the grid Gram matrix is the identity within the
/// quadrature tolerance.

#include "kinlab/velocity_grid.hpp"

namespace kinlab {

class HydroProjection {
 public:
  HydroProjection() = default;

  /// Build the five-dimensional collision-invariant basis around bulk b.
  HydroProjection(const VelocityGrid& g, const Vec3& bulk) : grid_(&g), bulk_(bulk) {
    const std::size_t n = g.size();
    basis_.resize(n, 5);
    MaxwellianParams mp;
    mp.U = bulk;
    for (std::size_t k = 0; k < n; ++k) {
      Vec3 c = g.nodes[k] - bulk;
      double s = std::sqrt(maxwellian(mp, g.nodes[k]));
      basis_(k, 0) = s;
      basis_(k, 1) = c[0] * s;
      basis_(k, 2) = c[1] * s;
      basis_(k, 3) = c[2] * s;
      basis_(k, 4) = (c.squaredNorm() - 3.0) / std::sqrt(6.0) * s;
    }
    // Discretely exact orthonormal frame for machine-precision deflation.
    MatX gram = basis_.transpose() * basis_ * g.weight();
    Eigen::LLT<MatX> llt(gram);
    ortho_ = llt.matrixL().solve(basis_.transpose()).transpose();
  }

  const MatX& basis() const { return basis_; }
  const MatX& ortho() const { return ortho_; }
  const Vec3& bulk() const { return bulk_; }

  /// Gram matrix <phi_i sqrt(mu), phi_j sqrt(mu)> on the grid.
  MatX gram() const { return basis_.transpose() * basis_ * grid_->weight(); }

  /// Raw projection coefficients <f, phi_i sqrt(mu)>.
  Eigen::Matrix<double, 5, 1> coefficients(const DistField& f) const {
    return basis_.transpose() * f * grid_->weight();
  }

  /// Pf = sum_j <f, phi_j sqrt(mu)> phi_j sqrt(mu).
  DistField project(const DistField& f) const {
    return basis_ * coefficients(f);
  }

  /// Machine-precision idempotent projection (orthonormalized frame);
  /// used wherever exact null-space deflation is required.
  DistField project_exact(const DistField& f) const {
    return ortho_ * (ortho_.transpose() * f * grid_->weight());
  }

  DistField deflect(const DistField& f) const {  // (I - P) f, exact frame
    return f - project_exact(f);
  }

 private:
  const VelocityGrid* grid_ = nullptr;
  Vec3 bulk_ = Vec3::Zero();
  MatX basis_;   // N x 5, columns phi_i sqrt(mu)
  MatX ortho_;   // N x 5, grid-orthonormal frame spanning the same space
};

/// project_P operation: (Pf, coefficients) for the bulk velocity b = eps*u.
inline std::pair<DistField, Eigen::Matrix<double, 5, 1>> project_P(
    const DistField& f, const Vec3& bulk, const VelocityGrid& g) {
  HydroProjection hp(g, bulk);
  return {hp.project(f), hp.coefficients(f)};
}

/// Diffuse-reflection boundary projection on {n.v > 0}:
///   P_gamma g = sqrt(c_mu mu(v)) Integral_{n.vb>0} g(vb) sqrt(c_mu mu(vb)) (n.vb) dvb,
/// with c_mu normalized so Integral_{n.v>0} c_mu mu (n.v) dv = 1.
class BoundaryProjection {
 public:
  BoundaryProjection(const VelocityGrid& g, const Vec3& normal)
      : grid_(&g), normal_(normal.normalized()) {
    const std::size_t n = g.size();
    flux_.assign(n, 0.0);
    double mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double nv = normal_.dot(g.nodes[k]);
      if (nv > 0.0) {
        flux_[k] = nv * mu0(g.nodes[k]);
        mass += flux_[k];
      }
    }
    mass *= g.weight();
    c_mu_ = 1.0 / mass;  // normalization constant
  }

  double c_mu() const { return c_mu_; }

  /// Apply P_gamma to a field defined on the outgoing half {n.v > 0}
  /// (values on the other half are ignored).
  DistField apply(const DistField& f) const {
    const VelocityGrid& g = *grid_;
    double a = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (flux_[k] > 0.0)
        a += f[k] * std::sqrt(c_mu_ * mu0(g.nodes[k])) *
             normal_.dot(g.nodes[k]);
    a *= g.weight();
    DistField out = DistField::Zero(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      if (flux_[k] > 0.0) out[k] = a * std::sqrt(c_mu_ * mu0(g.nodes[k]));
    return out;
  }

 private:
  const VelocityGrid* grid_ = nullptr;
  Vec3 normal_;
  std::vector<double> flux_;
  double c_mu_ = 0.0;
};

}  // namespace kinlab
