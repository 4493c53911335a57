#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvp/exponents.hpp"

namespace fvp::cli {

inline constexpr int kSchemaVersion = 1;

/// Batch configuration. Every field maps to one top-level JSON key of the
/// same name; README.md lists the schema.
struct RunConfig {
  int schema_version = kSchemaVersion;

  // problem
  double alpha = 0.5;
  double beta = 1.0;
  double T = 1.0;
  std::string operator_kind = "analytic";  ///< analytic | discrete
  double domain_length = 1.0;
  double diffusion = 1.0;
  double potential = 0.0;
  std::string boundary = "dirichlet";  ///< dirichlet | robin
  double kappa = 0.0;
  std::size_t mesh_nodes = 0;
  std::size_t modes = 16;
  std::size_t grid_K = 128;
  std::string grid_spacing = "uniform";  ///< uniform | graded
  double grid_exponent = 2.0;

  // data
  std::string phi_law = "coefficients";  ///< coefficients | edge
  std::vector<double> phi{1.0};
  double phi_gamma = 0.5;
  double phi_epsilon = 0.01;
  std::vector<double> u0;
  std::string direction = "backward";  ///< backward | forward
  std::string source_kind = "none";    ///< none | table | polynomial | nonlinear
  std::vector<std::vector<double>> source_table;
  std::vector<double> source_coefficients;
  double source_power = 2.0;
  std::string nonlinearity = "zero";  ///< zero | linear_lambda | scaled_sine
  double nonlinearity_coefficient = 0.0;

  // exponents
  std::string regime = "R_linear_basic";
  double p = 0.5;
  double q = 0.5;
  double r = 0.0;
  double s = 0.0;
  double p_prime = 0.0;
  double q_prime = 0.0;
  double p_hat = 0.0;
  double q_hat = 0.0;
  double r_hat = 0.0;

  // run
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t max_iter = 100;
  double tol = 1e-10;
  bool override_gate = false;
  unsigned threads = 1;
  std::size_t pairs = 100;
  double roundtrip_tol = 1e-9;
  double decomposition_tol = 1e-8;
  double caputo_tol = 1e-9;
  double fit_tol = 0.05;
  /// Blow-up fit window; 0 selects T/1000 and T/10.
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  std::optional<double> expected_exponent;
  std::vector<std::size_t> unbounded_levels{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};

  bool operator==(const RunConfig&) const = default;

  verify::ExponentSet exponents() const;
  /// Eigenfunction mesh actually used: mesh_nodes, or 4 modes when it is 0
  /// and samples are needed.
  std::size_t effective_mesh() const;
  bool nonlinear() const { return source_kind == "nonlinear"; }
};

/// Parses and validates; unknown keys, wrong types and inconsistent fields
/// raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// Cross-field checks applied by config_from_json.
void validate_config(const RunConfig& c);

}  // namespace fvp::cli
