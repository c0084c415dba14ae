#pragma once

/// @file config.hpp
/// @brief Experiment configuration: a schema-versioned JSON document that
///        collects every tunable the experiment driver needs, with all
///        parameter invariants revalidated at load time.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinlab/common.hpp"

namespace kinlab {

/// Rule for tying the remainder amplitude delta to the Mach number eps.
enum class DeltaRule { kFixed, kSqrtEps };

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  // Velocity grid (base and refined resolutions for drift checks).
  int velocity_resolution = 16;
  int velocity_resolution_refined = 20;
  double velocity_cutoff = 6.0;

  // Spatial grid.
  int horizontal_modes = 3;
  int vertical_nodes = 96;
  double z_max = 12.0;
  double kappa_min = 1e-2;
  int nodes_in_layer = 12;

  // Scales.
  double eps = 0.1;
  std::vector<double> kappa_list = {1e-2, 5e-3, 2.5e-3};
  DeltaRule delta_rule = DeltaRule::kSqrtEps;
  double delta_fixed = 0.3;

  // Weight / norm parameters.
  double weight_rho = 0.2;
  double weight_beta = 0.002;
  double weight_rho_prime = 0.1;
  int weight_samples = 100000;

  // Solver options.
  double dt = 1e-3;
  int steps = 100;
  double compat_tol = 1e-9;
  int compat_max_iter = 500;
  double shear_amp = 0.4;
  double mode_re = 0.15;
  double mode_im = 0.1;

  double delta_for(double eps_value) const {
    return delta_rule == DeltaRule::kSqrtEps ? std::sqrt(eps_value)
                                             : delta_fixed;
  }

  void validate() const {
    KINLAB_REQUIRE(velocity_resolution >= 8 && velocity_resolution % 2 == 0,
                   "config: velocity resolution must be even and >= 8");
    KINLAB_REQUIRE(velocity_resolution_refined > velocity_resolution,
                   "config: refined resolution must exceed the base one");
    KINLAB_REQUIRE(velocity_cutoff >= 5.0, "config: velocity cutoff < 5");
    KINLAB_REQUIRE(horizontal_modes >= 1, "config: horizontal modes < 1");
    KINLAB_REQUIRE(vertical_nodes >= 16, "config: vertical nodes < 16");
    KINLAB_REQUIRE(z_max > 0.0 && kappa_min > 0.0 && nodes_in_layer >= 4,
                   "config: invalid vertical-grid parameters");
    KINLAB_REQUIRE(eps > 0.0 && eps < 1.0, "config: eps outside (0,1)");
    KINLAB_REQUIRE(!kappa_list.empty(), "config: empty kappa list");
    for (double k : kappa_list)
      KINLAB_REQUIRE(k > 0.0 && k < 1.0, "config: kappa outside (0,1)");
    KINLAB_REQUIRE(delta_rule == DeltaRule::kSqrtEps ||
                       (delta_fixed > 0.0 && delta_fixed < 1.0),
                   "config: fixed delta outside (0,1)");
    KINLAB_REQUIRE(weight_rho > 0.0 && weight_rho < 0.25,
                   "config: weight rho outside (0, 1/4)");
    KINLAB_REQUIRE(weight_beta > 0.0 &&
                       weight_beta < weight_rho / kTwoPi,
                   "config: weight beta too large");
    KINLAB_REQUIRE(weight_samples > 0, "config: weight samples < 1");
    KINLAB_REQUIRE(dt > 0.0 && steps > 0, "config: invalid time stepping");
    KINLAB_REQUIRE(compat_tol > 0.0 && compat_max_iter > 0,
                   "config: invalid compatibility solve options");
  }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  KINLAB_REQUIRE(j.value("schema_version", 0) == ExperimentConfig::kSchemaVersion,
                 "config: unsupported schema version");
  auto get = [&](const char* section, const char* key, auto fallback) {
    using T = decltype(fallback);
    if (j.contains(section) && j[section].contains(key))
      return j[section][key].template get<T>();
    return fallback;
  };
  c.velocity_resolution = get("velocity", "resolution", c.velocity_resolution);
  c.velocity_resolution_refined =
      get("velocity", "resolution_refined", c.velocity_resolution_refined);
  c.velocity_cutoff = get("velocity", "cutoff", c.velocity_cutoff);
  c.horizontal_modes = get("spatial", "horizontal_modes", c.horizontal_modes);
  c.vertical_nodes = get("spatial", "vertical_nodes", c.vertical_nodes);
  c.z_max = get("spatial", "z_max", c.z_max);
  c.kappa_min = get("spatial", "kappa_min", c.kappa_min);
  c.nodes_in_layer = get("spatial", "nodes_in_layer", c.nodes_in_layer);
  c.eps = get("scales", "eps", c.eps);
  c.kappa_list = get("scales", "kappa_list", c.kappa_list);
  std::string rule = get("scales", "delta_rule", std::string("sqrt-eps"));
  KINLAB_REQUIRE(rule == "sqrt-eps" || rule == "fixed",
                 "config: delta rule must be 'fixed' or 'sqrt-eps'");
  c.delta_rule = rule == "fixed" ? DeltaRule::kFixed : DeltaRule::kSqrtEps;
  c.delta_fixed = get("scales", "delta_fixed", c.delta_fixed);
  c.weight_rho = get("weights", "rho", c.weight_rho);
  c.weight_beta = get("weights", "beta", c.weight_beta);
  c.weight_rho_prime = get("weights", "rho_prime", c.weight_rho_prime);
  c.weight_samples = get("weights", "samples", c.weight_samples);
  c.dt = get("solver", "dt", c.dt);
  c.steps = get("solver", "steps", c.steps);
  c.compat_tol = get("solver", "compat_tol", c.compat_tol);
  c.compat_max_iter = get("solver", "compat_max_iter", c.compat_max_iter);
  c.shear_amp = get("solver", "shear_amp", c.shear_amp);
  c.mode_re = get("solver", "mode_re", c.mode_re);
  c.mode_im = get("solver", "mode_im", c.mode_im);
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  KINLAB_REQUIRE(is.good(), "config: cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw KinlabError(std::string("config: parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = ExperimentConfig::kSchemaVersion;
  j["velocity"] = {{"resolution", c.velocity_resolution},
                   {"resolution_refined", c.velocity_resolution_refined},
                   {"cutoff", c.velocity_cutoff}};
  j["spatial"] = {{"horizontal_modes", c.horizontal_modes},
                  {"vertical_nodes", c.vertical_nodes},
                  {"z_max", c.z_max},
                  {"kappa_min", c.kappa_min},
                  {"nodes_in_layer", c.nodes_in_layer}};
  j["scales"] = {{"eps", c.eps},
                 {"kappa_list", c.kappa_list},
                 {"delta_rule",
                  c.delta_rule == DeltaRule::kFixed ? "fixed" : "sqrt-eps"},
                 {"delta_fixed", c.delta_fixed}};
  j["weights"] = {{"rho", c.weight_rho},
                  {"beta", c.weight_beta},
                  {"rho_prime", c.weight_rho_prime},
                  {"samples", c.weight_samples}};
  j["solver"] = {{"dt", c.dt},
                 {"steps", c.steps},
                 {"compat_tol", c.compat_tol},
                 {"compat_max_iter", c.compat_max_iter},
                 {"shear_amp", c.shear_amp},
                 {"mode_re", c.mode_re},
                 {"mode_im", c.mode_im}};
  return j;
}

}  // namespace kinlab
