#pragma once

/// Burnett fields: the inverse of the linearized collision operator applied
/// to the traceless velocity quadratics, their Gram matrix against L, and the
/// shear viscosity extracted from its isotropic structure
///   <L A_ik, A_lm> = eta0 (d_lk d_mi + d_li d_mk) - (2/3) eta0 d_lm d_ik.

#include <array>
#include <cmath>

#include "kinlab/linearized.hpp"

namespace kinlab {

struct BurnettTensor {
  Vec3 bulk = Vec3::Zero();
  double eta0 = 0.0;           ///< fitted shear viscosity
  double off_structure = 0.0;  ///< relative Frobenius defect of the Gram fit
  double decay_constant = 0.0; ///< sup |A_ij| e^{rho |v - bulk|^2}, rho = 0.2
  std::array<DistField, 6> fields;   ///< upper triangle: 11,12,13,22,23,33
  Eigen::Matrix<double, 9, 9> gram;  ///< index 3*(i-1) + (k-1)

  static int tri_index(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr int lut[3][3] = {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}};
    return lut[i][j];
  }
  const DistField& A(int i, int j) const { return fields[tri_index(i, j)]; }
};

/// Source field (phi_i phi_j - |v - bulk|^2/3 d_ij) sqrt(mu).
inline DistField burnett_source(const VelocityGrid& g, const Vec3& bulk, int i, int j) {
  const MaxwellianParams mp{1.0, bulk, 1.0};
  DistField s(g.nodes.size());
  for (int n = 0; n < s.size(); ++n) {
    const Vec3 c = g.nodes[n] - bulk;
    const double quad = c[i] * c[j] - (i == j ? c.squaredNorm() / 3.0 : 0.0);
    s[n] = quad * std::sqrt(maxwellian(mp, g.nodes[n]));
  }
  return s;
}

/// Ideal Gram structure for unit viscosity.
inline Eigen::Matrix<double, 9, 9> burnett_gram_structure() {
  Eigen::Matrix<double, 9, 9> s;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
          s(3 * i + k, 3 * l + m) = (l == k && m == i ? 1.0 : 0.0) +
                                    (l == i && m == k ? 1.0 : 0.0) -
                                    (2.0 / 3.0) * (l == m && i == k ? 1.0 : 0.0);
        }
  return s;
}

/// Build the Burnett fields from a prepared operator (prepare_inverse done).
inline BurnettTensor burnett_tensor(const LinearizedOperator& op) {
  const VelocityGrid& g = op.grid();
  BurnettTensor bt;
  bt.bulk = op.bulk();

  std::array<DistField, 6> sources;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const int t = BurnettTensor::tri_index(i, j);
      sources[t] = op.projection().deflect(burnett_source(g, bt.bulk, i, j));
      bt.fields[t] = op.invert(sources[t]);
    }
  }

  // Gram matrix <L A_ik, A_lm>; L A equals the deflected source by
  // construction, but apply_L keeps the entry honest.
  std::array<DistField, 6> la;
  for (int t = 0; t < 6; ++t) la[t] = op.apply_L(bt.fields[t]);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
          bt.gram(3 * i + k, 3 * l + m) =
              g.dot(la[BurnettTensor::tri_index(i, k)],
                    bt.fields[BurnettTensor::tri_index(l, m)]);
        }

  const Eigen::Matrix<double, 9, 9> s = burnett_gram_structure();
  bt.eta0 = (bt.gram.array() * s.array()).sum() / (s.array() * s.array()).sum();
  bt.off_structure =
      (bt.gram - bt.eta0 * s).norm() / std::max((bt.eta0 * s).norm(), 1e-300);

  const double rho = 0.2;
  for (int t = 0; t < 6; ++t) {
    for (int n = 0; n < bt.fields[t].size(); ++n) {
      const double env = std::exp(rho * (g.nodes[n] - bt.bulk).squaredNorm());
      bt.decay_constant =
          std::max(bt.decay_constant, std::fabs(bt.fields[t][n]) * env);
    }
  }
  return bt;
}

}  // namespace kinlab
