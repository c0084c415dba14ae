#pragma once

/// @file collision.hpp
/// @brief Hard-sphere collision operator Q(F,G): symmetrized bilinear form,
///        gain/loss split, conservative correction, and the sign-exact
///        entropy-production quadrature.
///
/// Key numerical choices:
///  * sigma-representation of the gain term: post-collision pairs are
///    m + r*sigma, m - r*sigma with m = (v+v*)/2, r = |v-v*|/2, so
///    ∫_{S^2} |(v-v*).u| f(v',v'_*) du = (|v-v*|/2) ∫_{S^2} f(m+r s, m-r s) ds.
///  * exact Maxwellian prefactor: with F = gF * mu0, G = gG * mu0 and the
///    collision energy identity |v'|^2+|v'_*|^2 = |v|^2+|v*|^2, the product
///    F(v')G(v'_*) = gF(v')gG(v'_*) mu0(v) mu0(v*). Only the smooth ratios are
///    interpolated; Q(mu0, mu0) = 0 to machine precision because trilinear
///    interpolation reproduces constants.
///  * unordered-pair symmetry: the gain (and loss) contribution of partner v*
///    to the output at v equals the contribution of v to the output at v*,
///    so the pair loop runs over i < j and writes both rows.
///  * batching: many (F,G) pairs share the per-(pair, angle) interpolation
///    stencils; ratio fields are stored interleaved per grid cell so the
///    inner accumulation is a contiguous fused multiply-add sweep.

#include <algorithm>
#include <utility>

#include "kinlab/velocity_grid.hpp"

namespace kinlab {

/// Quadrature on S^2: product Gauss-Legendre (polar cosine) x uniform azimuth.
/// The node set is symmetric under s -> -s; weights sum to 4*pi.
struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  explicit SphereQuadrature(int n_polar = 4, int n_azimuth = 8) {
    std::vector<double> c(n_polar), wc(n_polar);
    gauss_legendre(n_polar, c, wc);
    for (int i = 0; i < n_polar; ++i) {
      double s = std::sqrt(1.0 - c[i] * c[i]);
      for (int j = 0; j < n_azimuth; ++j) {
        double phi = kTwoPi * (j + 0.5) / n_azimuth;
        nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), c[i]);
        weights.push_back(wc[i] * kTwoPi / n_azimuth);
      }
    }
  }

  /// Nodes with positive polar cosine (one representative per +-s pair).
  SphereQuadrature hemisphere() const {
    SphereQuadrature h = *this;
    h.nodes.clear();
    h.weights.clear();
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes[k][2] > 0.0) {
        h.nodes.push_back(nodes[k]);
        h.weights.push_back(weights[k]);
      }
    return h;
  }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// Gauss-Legendre nodes/weights on (-1,1) via Newton iteration.
  static void gauss_legendre(int n, std::vector<double>& x,
                             std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

struct CollisionConfig {
  const VelocityGrid* grid = nullptr;
  int n_polar = 4;       ///< polar Gauss order (n_polar * n_azimuth >= 26)
  int n_azimuth = 8;     ///< azimuthal count
  double eps_reg = 1e-10;    ///< kernel-singularity floor
  double prune_tol = 1e-13;  ///< absolute per-pair contribution threshold
};

/// Result of one Q(F,G) evaluation.
struct QResult {
  DistField gain, loss;  ///< Q = gain - loss (raw quadrature)
  DistField q;           ///< conservatively corrected Q
  Eigen::Matrix<double, 5, 1> raw_moments;  ///< (1,v,|v|^2) moments pre-correction
  double entropy_production = 0.0;  ///< sign-exact quadrature of ∫Q(F,F)lnF
  double entropy_direct = 0.0;      ///< Σ w (gain-loss) ln F (direct moment)
  long offgrid = 0;  ///< post-collision stencil points outside the cube
};

namespace detail {

/// Project a field onto the zero-(mass,momentum,energy)-moment subspace.
/// Correction directions are Gaussian-damped collision invariants.
inline DistField conservative_correction(
    const VelocityGrid& g, const DistField& q,
    Eigen::Matrix<double, 5, 1>* raw_moments) {
  const std::size_t n = g.size();
  MatX psi(n, 5), chi(n, 5);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = g.nodes[k];
    double m = mu0(v);
    psi(k, 0) = 1.0;
    psi(k, 1) = v[0];
    psi(k, 2) = v[1];
    psi(k, 3) = v[2];
    psi(k, 4) = v.squaredNorm();
    for (int a = 0; a < 5; ++a) chi(k, a) = psi(k, a) * m;
  }
  Eigen::Matrix<double, 5, 1> mom = psi.transpose() * q * g.weight();
  if (raw_moments) *raw_moments = mom;
  Eigen::Matrix<double, 5, 5> gram = psi.transpose() * chi * g.weight();
  Eigen::Matrix<double, 5, 1> c = gram.fullPivLu().solve(mom);
  return q - chi * c;
}

}  // namespace detail

/// Batched evaluation of Q(F_k, G_k) for several field pairs on one grid.
/// All pairs share the expensive per-(velocity pair, angle) stencil work.
inline std::vector<QResult> collide_Q_batch(
    const std::vector<std::pair<DistField, DistField>>& field_pairs,
    const CollisionConfig& cfg, bool with_entropy = false) {
  const VelocityGrid& g = *cfg.grid;
  const std::size_t N = g.size();
  const int nfp = static_cast<int>(field_pairs.size());
  const int nf = 2 * nfp;  // field slots (F_k, G_k interleaved)
  const int R = g.resolution;
  const std::size_t ncell = static_cast<std::size_t>(R) * R * R;
  SphereQuadrature hemi =
      SphereQuadrature(cfg.n_polar, cfg.n_azimuth).hemisphere();
  const int ns = static_cast<int>(hemi.nodes.size());

  std::vector<double> mu(N);
  for (std::size_t k = 0; k < N; ++k) mu[k] = mu0(g.nodes[k]);

  // Interleaved storage: cube[cell * nf + f] and node ratios gn[k * nf + f].
  std::vector<double> cube(ncell * nf, 0.0);
  std::vector<double> gn(N * nf);
  double env2 = 0.0;  // max |gF| * max |gG| over pairs
  for (int p = 0; p < nfp; ++p) {
    double eF = 0.0, eG = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      double a = field_pairs[p].first[k] / mu[k];
      double b = field_pairs[p].second[k] / mu[k];
      gn[k * nf + 2 * p] = a;
      gn[k * nf + 2 * p + 1] = b;
      cube[static_cast<std::size_t>(g.cube_of[k]) * nf + 2 * p] = a;
      cube[static_cast<std::size_t>(g.cube_of[k]) * nf + 2 * p + 1] = b;
      eF = std::max(eF, std::abs(a));
      eG = std::max(eG, std::abs(b));
    }
    env2 = std::max(env2, eF * eG);
  }

  // Interleaved accumulators for locality: [node * nfp + pair].
  std::vector<double> gain_acc(N * nfp, 0.0), loss_acc(N * nfp, 0.0);
  std::vector<double> entropy(nfp, 0.0);
  long offgrid = 0;

  const double w = g.weight();
  // Pair kept when w * wn * (2pi + 2pi) * mu_i mu_j * env2 can exceed the
  // pruning threshold (gain bound 4pi*w*r*mu*mu*env2, loss bound similar).
  const double wn_max = 2.0 * g.cutoff;
  const double pref_floor =
      cfg.prune_tol / (w * wn_max * 2.0 * kTwoPi * std::max(env2, 1e-300));

  std::vector<double> acc_p(nf), acc_q(nf);
  const long corner[8] = {0,
                          1,
                          R,
                          R + 1,
                          static_cast<long>(R) * R,
                          static_cast<long>(R) * R + 1,
                          static_cast<long>(R) * R + R,
                          static_cast<long>(R) * R + R + 1};

  for (std::size_t i = 0; i < N; ++i) {
    const Vec3 vi = g.nodes[i];
    const double mi = mu[i];
    const double* gi = &gn[i * nf];
    double* gacc_i = &gain_acc[i * nfp];
    double* lacc_i = &loss_acc[i * nfp];
    for (std::size_t j = i + 1; j < N; ++j) {
      const double pref = mi * mu[j];
      if (pref < pref_floor) continue;
      const Vec3 vj = g.nodes[j];
      const Vec3 wv = vi - vj;
      const double wn = wv.norm();
      const Vec3 m = 0.5 * (vi + vj);
      const double r = 0.5 * wn;
      const double* gj = &gn[j * nf];
      double* gacc_j = &gain_acc[j * nfp];
      double* lacc_j = &loss_acc[j * nfp];

      // Loss: pi * w * wn * (F_i G_j + F_j G_i), identical at both rows.
      const double lc = kPi * w * wn * pref;
      for (int p = 0; p < nfp; ++p) {
        double s = lc * (gi[2 * p] * gj[2 * p + 1] + gj[2 * p] * gi[2 * p + 1]);
        lacc_i[p] += s;
        lacc_j[p] += s;
      }

      // Gain: w * r * sum_hemi ws * [gF(p)gG(q) + gF(q)gG(p)] * mu_i mu_j.
      const double gc = w * r * pref;
      for (int s = 0; s < ns; ++s) {
        const Vec3 vp = m + r * hemi.nodes[s];
        const Vec3 vq = m - r * hemi.nodes[s];
        VelocityGrid::interp_weights iwp, iwq;
        const bool okp = g.make_weights(vp, iwp);
        const bool okq = g.make_weights(vq, iwq);
        if (!okp || !okq) ++offgrid;  // clamp-to-zero tail fallback
        std::fill(acc_p.begin(), acc_p.end(), 0.0);
        std::fill(acc_q.begin(), acc_q.end(), 0.0);
        if (okp)
          for (int c = 0; c < 8; ++c) {
            const double wt = iwp.w[c];
            const double* src = &cube[(iwp.base + corner[c]) * nf];
            for (int f = 0; f < nf; ++f) acc_p[f] += wt * src[f];
          }
        if (okq)
          for (int c = 0; c < 8; ++c) {
            const double wt = iwq.w[c];
            const double* src = &cube[(iwq.base + corner[c]) * nf];
            for (int f = 0; f < nf; ++f) acc_q[f] += wt * src[f];
          }

        const double cw = gc * hemi.weights[s];
        for (int p = 0; p < nfp; ++p) {
          double sum = cw * (acc_p[2 * p] * acc_q[2 * p + 1] +
                             acc_q[2 * p] * acc_p[2 * p + 1]);
          gacc_i[p] += sum;
          gacc_j[p] += sum;
        }
        if (with_entropy) {
          // Sign-exact H-form: each term (P'-P) log(P/P') <= 0; Maxwellian
          // prefactors cancel inside the log by energy conservation.
          // Aggregate factor (1/4) * [pairs x2] * [sphere x2] = 1.
          for (int p = 0; p < nfp; ++p) {
            double P = gi[2 * p] * gj[2 * p];
            double Pp = acc_p[2 * p] * acc_q[2 * p];
            if (P > 0.0 && Pp > 0.0)
              entropy[p] += w * cw * (Pp - P) * std::log(P / Pp);
          }
        }
      }
    }
  }

  std::vector<QResult> out(nfp);
  for (int p = 0; p < nfp; ++p) {
    out[p].gain = DistField::Zero(N);
    out[p].loss = DistField::Zero(N);
    for (std::size_t k = 0; k < N; ++k) {
      out[p].gain[k] = gain_acc[k * nfp + p];
      out[p].loss[k] = loss_acc[k * nfp + p];
    }
    DistField qraw = out[p].gain - out[p].loss;
    out[p].q = detail::conservative_correction(g, qraw, &out[p].raw_moments);
    out[p].offgrid = offgrid;
    out[p].entropy_production = entropy[p];
    if (with_entropy) {
      bool pos = true;
      for (std::size_t k = 0; k < N && pos; ++k)
        if (field_pairs[p].first[k] <= 0.0) pos = false;
      if (pos) {
        double d = 0.0;
        for (std::size_t k = 0; k < N; ++k)
          d += qraw[k] * std::log(field_pairs[p].first[k]);
        out[p].entropy_direct = d * w;
      }
    }
  }
  return out;
}

/// Single-pair convenience wrapper.
inline QResult collide_Q(const DistField& F, const DistField& G,
                         const CollisionConfig& cfg, bool with_entropy = false) {
  return collide_Q_batch({{F, G}}, cfg, with_entropy)[0];
}

}  // namespace kinlab
