#pragma once

/// @file velocity_grid.hpp
/// @brief Velocity-space discretization: truncated uniform quadrature grid,
///        Maxwellians, and hydrodynamic moments.
///
/// The grid is a uniform cell-centered tensor grid on [-cutoff, cutoff]^3
/// restricted to the ball |v| <= cutoff. Cell-centered nodes (no node at the
/// origin, node set closed under v -> -v) make all odd Gaussian moments vanish
/// exactly and give near-spectral accuracy for smooth rapidly decaying
/// integrands (midpoint rule + Poisson summation).

#include <functional>

#include "kinlab/common.hpp"

namespace kinlab {

/// A distribution-function sample on the grid's node list.
using DistField = VecX;

struct VelocityGrid {
  int resolution = 0;   ///< nodes per axis of the bounding cube (even)
  double cutoff = 0.0;  ///< |v| <= cutoff (thermal units)
  double h = 0.0;       ///< uniform spacing; quadrature weight is h^3
  std::vector<Vec3> nodes;       ///< ball-restricted node list
  std::vector<int> cube_of;      ///< node index -> flattened cube index
  std::vector<int> node_of;      ///< flattened cube index -> node index or -1

  std::size_t size() const { return nodes.size(); }
  double weight() const { return h * h * h; }

  /// Axis coordinate of cube slot i in [0, resolution).
  double axis(int i) const { return -cutoff + (i + 0.5) * h; }

  /// Discrete integral of a node field.
  double integrate(const DistField& f) const { return f.sum() * weight(); }

  /// Discrete L^2(dv) inner product.
  double dot(const DistField& f, const DistField& g) const {
    return f.dot(g) * weight();
  }
  double norm(const DistField& f) const { return std::sqrt(dot(f, f)); }

  /// Scatter a node field into the full cube array (zeros outside the ball);
  /// the cube layout is what trilinear interpolation indexes into.
  std::vector<double> to_cube(const DistField& f) const {
    std::vector<double> c(static_cast<std::size_t>(resolution) * resolution *
                              resolution,
                          0.0);
    for (std::size_t n = 0; n < nodes.size(); ++n) c[cube_of[n]] = f[n];
    return c;
  }

  /// Index of the node at -v (exists by construction).
  int negated(int n) const {
    int r = resolution;
    int c = cube_of[n];
    int i = c / (r * r), j = (c / r) % r, k = c % r;
    return node_of[(r - 1 - i) * r * r + (r - 1 - j) * r + (r - 1 - k)];
  }

  /// Trilinear interpolation of a cube array at an arbitrary point.
  /// Points outside the cube clamp to zero (fields are required to decay).
  double interp(const std::vector<double>& cube, const Vec3& v) const {
    double out;
    interp_weights w;
    if (!make_weights(v, w)) return 0.0;
    out = apply_weights(cube, w);
    return out;
  }

  /// Precomputed trilinear stencil, reusable across many fields.
  struct interp_weights {
    int base = 0;          // flattened index of the low corner
    double w[8] = {0};     // corner weights
  };

  bool make_weights(const Vec3& v, interp_weights& iw) const {
    const int r = resolution;
    double x = (v[0] + cutoff) / h - 0.5;
    double y = (v[1] + cutoff) / h - 0.5;
    double z = (v[2] + cutoff) / h - 0.5;
    int i = static_cast<int>(std::floor(x));
    int j = static_cast<int>(std::floor(y));
    int k = static_cast<int>(std::floor(z));
    if (i < 0 || j < 0 || k < 0 || i >= r - 1 || j >= r - 1 || k >= r - 1)
      return false;
    double fx = x - i, fy = y - j, fz = z - k;
    iw.base = (i * r + j) * r + k;
    double gx = 1 - fx, gy = 1 - fy, gz = 1 - fz;
    iw.w[0] = gx * gy * gz;
    iw.w[1] = gx * gy * fz;
    iw.w[2] = gx * fy * gz;
    iw.w[3] = gx * fy * fz;
    iw.w[4] = fx * gy * gz;
    iw.w[5] = fx * gy * fz;
    iw.w[6] = fx * fy * gz;
    iw.w[7] = fx * fy * fz;
    return true;
  }

  double apply_weights(const std::vector<double>& cube,
                       const interp_weights& iw) const {
    const int r = resolution;
    const double* c = cube.data() + iw.base;
    return iw.w[0] * c[0] + iw.w[1] * c[1] + iw.w[2] * c[r] +
           iw.w[3] * c[r + 1] + iw.w[4] * c[r * r] + iw.w[5] * c[r * r + 1] +
           iw.w[6] * c[r * r + r] + iw.w[7] * c[r * r + r + 1];
  }
};

/// Build the truncated velocity grid.
/// Preconditions: resolution >= 8 (even), cutoff >= 5 thermal units.
inline VelocityGrid build_grid(int resolution, double cutoff) {
  KINLAB_REQUIRE(resolution >= 8, "build_grid: resolution below minimum (8)");
  KINLAB_REQUIRE(cutoff >= 5.0, "build_grid: cutoff below minimum (5)");
  KINLAB_REQUIRE(resolution % 2 == 0,
                 "build_grid: resolution must be even for v -> -v symmetry");
  VelocityGrid g;
  g.resolution = resolution;
  g.cutoff = cutoff;
  g.h = 2.0 * cutoff / resolution;
  const int r = resolution;
  g.node_of.assign(static_cast<std::size_t>(r) * r * r, -1);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        Vec3 v(g.axis(i), g.axis(j), g.axis(k));
        if (v.norm() <= cutoff) {
          g.node_of[(i * r + j) * r + k] = static_cast<int>(g.nodes.size());
          g.nodes.push_back(v);
          g.cube_of.push_back((i * r + j) * r + k);
        }
      }
  return g;
}

/// Local Maxwellian parameters M_{R,U,T}.
struct MaxwellianParams {
  double R = 1.0;  ///< density, > 0
  Vec3 U = Vec3::Zero();
  double T = 1.0;  ///< temperature, > 0
};

/// M_{R,U,T}(v) = R (2 pi T)^{-3/2} exp(-|v-U|^2 / (2T)).
inline double maxwellian(const MaxwellianParams& p, const Vec3& v) {
  KINLAB_REQUIRE(p.R > 0.0 && p.T > 0.0, "maxwellian: R and T must be positive");
  double c = p.R * std::pow(kTwoPi * p.T, -1.5);
  return c * std::exp(-(v - p.U).squaredNorm() / (2.0 * p.T));
}

/// Global reference Maxwellian mu0 = M_{1,0,1}.
inline double mu0(const Vec3& v) {
  return std::pow(kTwoPi, -1.5) * std::exp(-0.5 * v.squaredNorm());
}

inline DistField sample_field(const VelocityGrid& g,
                              const std::function<double(const Vec3&)>& f) {
  DistField out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = f(g.nodes[n]);
  return out;
}

/// Hydrodynamic fluctuation moments of F around the reference state:
/// (1/Ma) * Integral (F - M_{1,0,1}) (1, v, (|v|^2-3)/sqrt(6)) dv.
struct FluctuationMoments {
  double rho = 0.0;
  Vec3 u = Vec3::Zero();
  double theta = 0.0;
};

inline FluctuationMoments moments(const DistField& F, const VelocityGrid& g,
                                  double Ma) {
  FluctuationMoments m;
  const double w = g.weight();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3& v = g.nodes[n];
    double d = (F[n] - mu0(v)) * w;
    m.rho += d;
    m.u += d * v;
    m.theta += d * (v.squaredNorm() - 3.0) / std::sqrt(6.0);
  }
  m.rho /= Ma;
  m.u /= Ma;
  m.theta /= Ma;
  return m;
}

}  // namespace kinlab
