#pragma once

/// @file common.hpp
/// @brief Shared numeric utilities: constants, RNG helpers, fitted-constant
///        protocol, and small math helpers used across the library.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinlab {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CVecX = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Deterministic RNG used everywhere a random sample is needed.
/// A fixed seed makes reports byte-identical across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) {
    return std::uniform_real_distribution<double>(a, b)(eng_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }
  Vec3 uniform_vec3(double a, double b) {
    return Vec3(uniform(a, b), uniform(a, b), uniform(a, b));
  }
  std::uint64_t integer() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

/// Fitted-constant protocol: C := max over samples of lhs/(rhs + floor).
/// The library never asserts specific hidden constants, only that fitted
/// ratios are finite and stable.
class ConstantFit {
 public:
  explicit ConstantFit(double floor = 1e-12) : floor_(floor) {}
  void add(double lhs, double rhs) {
    double r = lhs / (rhs + floor_);
    if (r > c_) c_ = r;
    ++n_;
  }
  double value() const { return c_; }
  int samples() const { return n_; }

 private:
  double floor_;
  double c_ = 0.0;
  int n_ = 0;
};

inline double sq(double x) { return x * x; }

/// <v> = sqrt(1 + |v|^2), the standard velocity bracket.
inline double vbracket(const Vec3& v) { return std::sqrt(1.0 + v.squaredNorm()); }

struct KinlabError : std::runtime_error {
  explicit KinlabError(const std::string& msg) : std::runtime_error(msg) {}
};

#define KINLAB_REQUIRE(cond, msg) \
  do {                            \
    if (!(cond)) throw ::kinlab::KinlabError(msg); \
  } while (0)

}  // namespace kinlab
