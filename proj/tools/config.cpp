#include "config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "fvp/errors.hpp"
#include "fvp/io.hpp"

namespace fvp::cli {
namespace {

using nlohmann::json;
using Reader = std::function<void(RunConfig&, const json&)>;

template <class T>
Reader field(T RunConfig::*member) {
  return [member](RunConfig& c, const json& v) { c.*member = v.get<T>(); };
}

const std::map<std::string, Reader>& readers() {
  static const std::map<std::string, Reader> table = {
      {"schema_version", field(&RunConfig::schema_version)},
      {"alpha", field(&RunConfig::alpha)},
      {"beta", field(&RunConfig::beta)},
      {"T", field(&RunConfig::T)},
      {"operator_kind", field(&RunConfig::operator_kind)},
      {"domain_length", field(&RunConfig::domain_length)},
      {"diffusion", field(&RunConfig::diffusion)},
      {"potential", field(&RunConfig::potential)},
      {"boundary", field(&RunConfig::boundary)},
      {"kappa", field(&RunConfig::kappa)},
      {"mesh_nodes", field(&RunConfig::mesh_nodes)},
      {"modes", field(&RunConfig::modes)},
      {"grid_K", field(&RunConfig::grid_K)},
      {"grid_spacing", field(&RunConfig::grid_spacing)},
      {"grid_exponent", field(&RunConfig::grid_exponent)},
      {"phi_law", field(&RunConfig::phi_law)},
      {"phi", field(&RunConfig::phi)},
      {"phi_gamma", field(&RunConfig::phi_gamma)},
      {"phi_epsilon", field(&RunConfig::phi_epsilon)},
      {"u0", field(&RunConfig::u0)},
      {"direction", field(&RunConfig::direction)},
      {"source_kind", field(&RunConfig::source_kind)},
      {"source_table", field(&RunConfig::source_table)},
      {"source_coefficients", field(&RunConfig::source_coefficients)},
      {"source_power", field(&RunConfig::source_power)},
      {"nonlinearity", field(&RunConfig::nonlinearity)},
      {"nonlinearity_coefficient", field(&RunConfig::nonlinearity_coefficient)},
      {"regime", field(&RunConfig::regime)},
      {"p", field(&RunConfig::p)},
      {"q", field(&RunConfig::q)},
      {"r", field(&RunConfig::r)},
      {"s", field(&RunConfig::s)},
      {"p_prime", field(&RunConfig::p_prime)},
      {"q_prime", field(&RunConfig::q_prime)},
      {"p_hat", field(&RunConfig::p_hat)},
      {"q_hat", field(&RunConfig::q_hat)},
      {"r_hat", field(&RunConfig::r_hat)},
      {"seed", field(&RunConfig::seed)},
      {"output_dir", field(&RunConfig::output_dir)},
      {"max_iter", field(&RunConfig::max_iter)},
      {"tol", field(&RunConfig::tol)},
      {"override_gate", field(&RunConfig::override_gate)},
      {"threads", field(&RunConfig::threads)},
      {"pairs", field(&RunConfig::pairs)},
      {"roundtrip_tol", field(&RunConfig::roundtrip_tol)},
      {"decomposition_tol", field(&RunConfig::decomposition_tol)},
      {"caputo_tol", field(&RunConfig::caputo_tol)},
      {"fit_tol", field(&RunConfig::fit_tol)},
      {"fit_lo", field(&RunConfig::fit_lo)},
      {"fit_hi", field(&RunConfig::fit_hi)},
      {"expected_exponent",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) {
           c.expected_exponent.reset();
         } else {
           c.expected_exponent = v.get<double>();
         }
       }},
      {"unbounded_levels", field(&RunConfig::unbounded_levels)},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

void require_member(const std::string& key, const std::string& value, const std::set<std::string>& allowed) {
  if (allowed.count(value) != 0) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw ConfigError("config: " + key + " = \"" + value + "\" is not one of {" + list + "}");
}

}  // namespace

verify::ExponentSet RunConfig::exponents() const {
  verify::ExponentSet e;
  e.alpha = alpha;
  e.p = p;
  e.q = q;
  e.r = r;
  e.s = s;
  e.p_prime = p_prime;
  e.q_prime = q_prime;
  e.p_hat = p_hat;
  e.q_hat = q_hat;
  e.r_hat = r_hat;
  e.regime = verify::regime_from_name(regime);
  return e;
}

std::size_t RunConfig::effective_mesh() const {
  if (mesh_nodes != 0) return mesh_nodes;
  const bool needs_samples = operator_kind == "discrete" || (nonlinear() && nonlinearity == "scaled_sine");
  return needs_samples ? 4 * modes : 0;
}

void validate_config(const RunConfig& c) {
  require(c.schema_version == kSchemaVersion,
          "schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
              std::to_string(kSchemaVersion) + ")");
  require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
  require(c.beta > 0.0 && c.beta <= 1.0, "beta must lie in (0, 1]");
  require(c.T > 0.0 && std::isfinite(c.T), "T must be positive");
  require(c.domain_length > 0.0, "domain_length must be positive");
  require(c.modes >= 1, "modes must be at least 1");
  require(c.grid_K >= 2, "grid_K must be at least 2");
  require(c.grid_exponent >= 1.0, "grid_exponent must be at least 1");

  require_member("operator_kind", c.operator_kind, {"analytic", "discrete"});
  require_member("boundary", c.boundary, {"dirichlet", "robin"});
  require_member("grid_spacing", c.grid_spacing, {"uniform", "graded"});
  require_member("phi_law", c.phi_law, {"coefficients", "edge"});
  require_member("direction", c.direction, {"backward", "forward"});
  require_member("source_kind", c.source_kind, {"none", "table", "polynomial", "nonlinear"});
  require_member("nonlinearity", c.nonlinearity, {"zero", "linear_lambda", "scaled_sine"});

  if (c.operator_kind == "analytic") {
    require(c.boundary == "dirichlet" && c.diffusion == 1.0 && c.potential == 0.0,
            "operator_kind analytic is the Dirichlet Laplacian (diffusion 1, potential 0)");
    require(c.mesh_nodes == 0 || c.mesh_nodes >= c.modes, "mesh_nodes must be 0 or at least modes");
  } else {
    require(c.diffusion > 0.0, "diffusion must be positive");
    require(c.effective_mesh() >= 3 * c.modes, "discrete operators need mesh_nodes >= 3 modes");
  }

  if (c.phi_law == "coefficients") {
    require(c.phi.size() <= c.modes, "phi has more entries than modes");
  } else {
    require(c.phi_epsilon > 0.0, "phi_epsilon must be positive");
  }
  require(c.u0.size() <= c.modes, "u0 has more entries than modes");

  if (c.source_kind == "table") {
    require(c.source_table.size() == c.modes, "source_table needs one row per mode");
    for (const auto& row : c.source_table) {
      require(row.size() == c.grid_K + 1, "source_table rows need grid_K + 1 values");
    }
  }
  if (c.source_kind == "polynomial") {
    require(c.source_coefficients.size() <= c.modes, "source_coefficients has more entries than modes");
    require(c.source_power >= 0.0, "source_power must be non-negative");
  }
  if (c.nonlinear()) {
    require(c.direction == "backward", "nonlinear sources are solved backward only");
    require(c.nonlinearity != "scaled_sine" || c.effective_mesh() >= c.modes,
            "scaled_sine needs eigenfunction samples");
  }

  try {
    (void)verify::regime_from_name(c.regime);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.nonlinear()) {
    const auto violations = verify::validate_exponents(c.exponents());
    if (!violations.empty()) {
      throw ConfigError("config: exponents violate " + violations.front().group + ": " + violations.front().name);
    }
  }

  require(c.max_iter >= 1, "max_iter must be at least 1");
  require(c.tol > 0.0, "tol must be positive");
  require(c.fit_lo >= 0.0 && c.fit_hi >= 0.0, "fit window bounds must be non-negative");
  require(!c.unbounded_levels.empty(), "unbounded_levels must not be empty");
  for (std::size_t i = 0; i < c.unbounded_levels.size(); ++i) {
    require(c.unbounded_levels[i] >= 1, "unbounded_levels entries must be positive");
    require(i == 0 || c.unbounded_levels[i] > c.unbounded_levels[i - 1], "unbounded_levels must increase");
  }
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto it = readers().find(key);
    if (it == readers().end()) throw ConfigError("config: unknown key \"" + key + "\"");
    try {
      it->second(c, value);
    } catch (const json::exception& e) {
      throw ConfigError("config: key \"" + key + "\": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["T"] = c.T;
  j["operator_kind"] = c.operator_kind;
  j["domain_length"] = c.domain_length;
  j["diffusion"] = c.diffusion;
  j["potential"] = c.potential;
  j["boundary"] = c.boundary;
  j["kappa"] = c.kappa;
  j["mesh_nodes"] = c.mesh_nodes;
  j["modes"] = c.modes;
  j["grid_K"] = c.grid_K;
  j["grid_spacing"] = c.grid_spacing;
  j["grid_exponent"] = c.grid_exponent;
  j["phi_law"] = c.phi_law;
  j["phi"] = c.phi;
  j["phi_gamma"] = c.phi_gamma;
  j["phi_epsilon"] = c.phi_epsilon;
  j["u0"] = c.u0;
  j["direction"] = c.direction;
  j["source_kind"] = c.source_kind;
  j["source_table"] = c.source_table;
  j["source_coefficients"] = c.source_coefficients;
  j["source_power"] = c.source_power;
  j["nonlinearity"] = c.nonlinearity;
  j["nonlinearity_coefficient"] = c.nonlinearity_coefficient;
  j["regime"] = c.regime;
  j["p"] = c.p;
  j["q"] = c.q;
  j["r"] = c.r;
  j["s"] = c.s;
  j["p_prime"] = c.p_prime;
  j["q_prime"] = c.q_prime;
  j["p_hat"] = c.p_hat;
  j["q_hat"] = c.q_hat;
  j["r_hat"] = c.r_hat;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["override_gate"] = c.override_gate;
  j["threads"] = c.threads;
  j["pairs"] = c.pairs;
  j["roundtrip_tol"] = c.roundtrip_tol;
  j["decomposition_tol"] = c.decomposition_tol;
  j["caputo_tol"] = c.caputo_tol;
  j["fit_tol"] = c.fit_tol;
  j["fit_lo"] = c.fit_lo;
  j["fit_hi"] = c.fit_hi;
  j["expected_exponent"] = c.expected_exponent ? json(*c.expected_exponent) : json(nullptr);
  j["unbounded_levels"] = c.unbounded_levels;
  return j;
}

RunConfig load_config(const std::string& path) {
  const std::string text = io::read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fvp::cli
