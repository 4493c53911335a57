#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "fvp/exponents.hpp"
#include "fvp/io.hpp"
#include "fvp/operators.hpp"
#include "fvp/picard.hpp"
#include "fvp/specialfn.hpp"
#include "fvp/verify.hpp"

namespace fvp::cli {
namespace {

using nlohmann::json;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string path_in(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output_dir) / name).string();
}

void write_json(const RunConfig& c, const std::string& name, const json& j) {
  io::write_text_file(path_in(c, name), j.dump(2) + "\n");
}

void write_solution(const RunConfig& c, const GridFunction& u) {
  std::ostringstream os;
  io::write_grid_function_csv(os, u);
  io::write_text_file(path_in(c, "solution.csv"), os.str());
}

/// Two-column "t,value" series under plotdata/.
void write_series(const RunConfig& c, const std::string& name, const std::string& x_label,
                  const std::vector<double>& x, const std::vector<double>& y) {
  std::ostringstream os;
  os << x_label << ",value\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    os << io::format_double(x[i]) << ',' << io::format_double(y[i]) << '\n';
  }
  io::write_text_file(path_in(c, "plotdata/" + name + ".csv"), os.str());
}

std::vector<double> node_list(const TimeGrid& g) { return {g.nodes().begin(), g.nodes().end()}; }

std::vector<double> norm_series(const GridFunction& u, const spectral::Spectrum& s, double gamma) {
  std::vector<double> out(u.nodes());
  for (std::size_t n = 0; n < u.nodes(); ++n) out[n] = spectral::v_norm(s, gamma, u.at(n));
  return out;
}

json diagnostics_json(const std::vector<operators::ModeDiagnostic>& excluded) {
  json a = json::array();
  for (const auto& e : excluded) {
    a.push_back({{"mode", e.mode}, {"eigenvalue", e.eigenvalue}, {"relaxation_at_T", e.relaxation_at_T}});
  }
  return a;
}

json run_header(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"schema_version", c.schema_version}, {"seed", c.seed}, {"config", config_to_json(c)}};
}

operators::LinearProblem linear_problem(const RunConfig& c, std::size_t intervals) {
  if (c.nonlinear()) throw ConfigError("config: this diagnostic needs a linear source (source_kind none, table or polynomial)");
  auto s = build_spectrum(c, c.modes);
  const TimeGrid grid = build_grid(c, intervals);
  return operators::make_problem(s, c.alpha, c.beta, build_phi(c, *s), build_source(c, grid, s->id()));
}

verify::ExponentSet validated_exponents(const RunConfig& c) {
  const auto e = c.exponents();
  const auto violations = verify::validate_exponents(e);
  if (!violations.empty()) {
    throw ConfigError("config: exponents violate " + violations.front().group + ": " + violations.front().name);
  }
  return e;
}

void finish(bool passed, const std::string& invariant, std::ostream& log) {
  if (!passed) throw DiagnosticFailure("diagnostic failed: " + invariant);
  log << "pass: " << invariant << '\n';
}

// ---------------------------------------------------------------- diagnostics

void verify_exponents(const RunConfig& c, std::ostream& log) {
  const auto e = c.exponents();
  const auto checks = verify::check_exponents(e);
  const auto binding = verify::binding_constraints(e);
  std::ostringstream os;
  os << "group,name,parameter,value,bound,margin,satisfied\n";
  json rows = json::array();
  std::string first_violation;
  for (const auto& k : checks) {
    os << k.group << ",\"" << k.name << "\"," << k.parameter << ',' << io::format_double(k.value) << ','
       << io::format_double(k.bound) << ',' << io::format_double(k.margin) << ',' << (k.satisfied ? 1 : 0) << '\n';
    rows.push_back(verify::to_json(k));
    if (!k.satisfied && first_violation.empty()) first_violation = k.group + ": " + k.name;
  }
  json bind = json::array();
  for (const auto& k : binding) bind.push_back(verify::to_json(k));
  io::write_text_file(path_in(c, "exponents.csv"), os.str());
  json report = run_header(c, "verify exponents");
  report["regime"] = c.regime;
  report["checks"] = rows;
  report["binding"] = bind;
  report["valid"] = first_violation.empty();
  write_json(c, "report.json", report);
  finish(first_violation.empty(), first_violation.empty() ? "exponents satisfy " + c.regime : first_violation, log);
}

void verify_roundtrip(const RunConfig& c, std::ostream& log) {
  if (c.nonlinear()) throw ConfigError("config: roundtrip needs a linear source");
  auto s = build_spectrum(c, c.modes);
  const TimeGrid grid = build_grid(c, c.grid_K);
  const ModalVector u0 = c.u0.empty() ? build_phi(c, *s) : build_u0(c);
  const auto r = verify::roundtrip_experiment(s, c.alpha, c.beta, u0, build_source(c, grid, s->id()), nullptr,
                                              c.threads);
  json report = run_header(c, "verify roundtrip");
  report["roundtrip"] = verify::to_json(r);
  report["tolerance"] = c.roundtrip_tol;
  const bool ok = r.max_deviation <= c.roundtrip_tol;
  report["passed"] = ok;
  write_json(c, "report.json", report);
  write_series(c, "roundtrip_deviation", "t", node_list(grid), r.node_deviation);
  log << "max deviation " << io::format_double(r.max_deviation) << '\n';
  finish(ok, "forward-backward deviation <= " + io::format_double(c.roundtrip_tol), log);
}

void verify_unbounded(const RunConfig& c, std::ostream& log) {
  const std::size_t top = c.unbounded_levels.back();
  std::shared_ptr<const spectral::Spectrum> s;
  if (c.operator_kind == "analytic") {
    s = std::make_shared<const spectral::Spectrum>(spectral::eigensystem_analytic(c.domain_length, top, 0));
  } else {
    if (top > c.modes) throw ConfigError("config: unbounded_levels exceed modes for a discrete operator");
    s = build_spectrum(c, c.modes);
  }
  const auto probe = operators::unboundedness_probe(*s, c.alpha, c.beta, c.T, c.unbounded_levels);
  std::ostringstream os;
  os << "N,S_N,lower_bound_c_lo,lower_bound_c_hi,tail_increment,tail_lower_bound,forward_sum,norm_squared\n";
  std::vector<double> ns;
  std::vector<double> sums;
  for (const auto& row : probe.rows) {
    os << row.n << ',' << io::format_double(row.partial_sum) << ',' << io::format_double(row.lower_bound) << ','
       << io::format_double(row.lower_bound_hi) << ',' << io::format_double(row.tail_increment) << ','
       << io::format_double(row.tail_lower_bound) << ',' << io::format_double(row.forward_sum) << ','
       << io::format_double(row.norm_squared) << '\n';
    ns.push_back(static_cast<double>(row.n));
    sums.push_back(row.partial_sum);
  }
  io::write_text_file(path_in(c, "unbounded.csv"), os.str());
  write_series(c, "unbounded_partial_sums", "N", ns, sums);
  json report = run_header(c, "verify unbounded");
  report["c_lo"] = probe.c_lo;
  report["c_hi"] = probe.c_hi;
  report["lower_bound_c_lo_holds"] = probe.all_hold;
  report["lower_bound_c_hi_holds"] = probe.all_hold_hi;
  report["tails_hold"] = probe.tails_hold;
  const bool ok = probe.all_hold_hi && probe.tails_hold;
  report["passed"] = ok;
  write_json(c, "report.json", report);
  if (!probe.all_hold) log << "note: S_N falls below the c_lo-scaled harmonic bound on some rows\n";
  finish(ok, "S_N >= c_hi^-2 T^(2 alpha) H_N and S_2N - S_N >= harmonic tail term", log);
}

void verify_blowup(const RunConfig& c, std::ostream& log) {
  const auto e = validated_exponents(c);
  if (c.source_kind != "none") throw ConfigError("config: blowup runs with source_kind none");
  const double lo = c.fit_lo > 0.0 ? c.fit_lo : c.T / 1000.0;
  const double hi = c.fit_hi > 0.0 ? c.fit_hi : c.T / 10.0;
  auto s = build_spectrum(c, c.modes);
  const TimeGrid grid = verify::log_dyadic_grid(c.T, lo, hi);
  auto prob = operators::make_problem(s, c.alpha, c.beta, build_phi(c, *s), GridFunction(grid, c.modes, s->id()));
  operators::SolveOptions opts;
  opts.threads = c.threads;
  opts.cross_check = false;
  const auto sol = operators::solve_backward_linear(prob, opts);
  const auto fit = verify::fit_blowup_exponent(sol.u, *s, 0.0, verify::FitWindow{lo, hi});
  const double bound = c.alpha * e.q;
  bool ok = fit.exponent_hat <= bound + c.fit_tol;
  std::string invariant = "fitted blow-up exponent <= alpha q + " + io::format_double(c.fit_tol);
  if (c.expected_exponent) {
    ok = ok && std::abs(fit.exponent_hat - *c.expected_exponent) <= c.fit_tol;
    invariant += " and within " + io::format_double(c.fit_tol) + " of " + io::format_double(*c.expected_exponent);
  }
  json report = run_header(c, "verify blowup");
  report["fit"] = verify::to_json(fit);
  report["alpha_q"] = bound;
  report["passed"] = ok;
  write_json(c, "report.json", report);
  write_series(c, "blowup_norm", "t", node_list(grid), norm_series(sol.u, *s, 0.0));
  log << "exponent_hat " << io::format_double(fit.exponent_hat) << '\n';
  finish(ok, invariant, log);
}

void verify_holder(const RunConfig& c, std::ostream& log) {
  const auto e = validated_exponents(c);
  if (c.source_kind == "table") throw ConfigError("config: holder refines the grid and cannot use a source table");
  const double gamma = -c.beta * e.q_prime;
  json levels = json::array();
  std::vector<double> moduli;
  std::vector<double> increments;
  for (std::size_t k : {c.grid_K, 2 * c.grid_K}) {
    auto prob = linear_problem(c, k);
    operators::SolveOptions opts;
    opts.threads = c.threads;
    opts.cross_check = false;
    const auto u = operators::solve_backward_linear(prob, opts).u;
    const auto h = verify::fit_holder_modulus(u, *prob.spectrum, gamma, e.s, true);
    moduli.push_back(h.sup_modulus);
    levels.push_back({{"K", k}, {"holder", verify::to_json(h)}});
    if (increments.empty()) {
      const ModalVector u0 = u.at(0);
      for (std::size_t n = 0; n < u.nodes(); ++n) {
        increments.push_back(spectral::v_norm(*prob.spectrum, gamma, u.at(n) - u0));
      }
      write_series(c, "holder_increment", "t", node_list(u.grid()), increments);
    }
  }
  const double ratio = moduli[1] / moduli[0];
  const bool finite = std::isfinite(moduli[0]) && std::isfinite(moduli[1]);
  const bool ok = finite && (moduli[0] == 0.0 ? moduli[1] == 0.0 : ratio >= 0.5 && ratio <= 2.0);
  json report = run_header(c, "verify holder");
  report["gamma"] = gamma;
  report["s"] = e.s;
  report["levels"] = levels;
  report["refinement_ratio"] = finite_or_null(ratio);
  report["passed"] = ok;
  write_json(c, "report.json", report);
  log << "sup modulus " << io::format_double(moduli[0]) << " -> " << io::format_double(moduli[1]) << '\n';
  finish(ok, "finite Hoelder modulus stable within 2x under K -> 2K", log);
}

void verify_caputo(const RunConfig& c, std::ostream& log) {
  auto prob = linear_problem(c, c.grid_K);
  operators::SolveOptions opts;
  opts.threads = c.threads;
  opts.cross_check = false;
  const auto u = operators::solve_backward_linear(prob, opts).u;
  const double gamma_out = -c.beta * c.q;
  const auto d = verify::spectral_caputo(prob, gamma_out, c.threads);
  const double residual = verify::caputo_modal_residual(d, u, prob);
  double scale = 1.0;
  for (std::size_t n = 1; n < u.nodes(); ++n) {
    for (std::size_t j = 0; j < u.modes(); ++j) {
      scale = std::max(scale, std::abs(prob.rate(j) * u.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j))));
    }
  }
  const double l1 = prob.grid().is_uniform() ? verify::caputo_l1_deviation(d, u, c.alpha)
                                             : std::numeric_limits<double>::quiet_NaN();
  const bool ok = residual <= c.caputo_tol * scale;
  json report = run_header(c, "verify caputo");
  report["gamma_out"] = gamma_out;
  report["modal_residual"] = residual;
  report["residual_scale"] = scale;
  report["l1_deviation"] = finite_or_null(l1);
  report["weighted_sup"] = finite_or_null(d.weighted_sup);
  report["passed"] = ok;
  write_json(c, "report.json", report);
  std::ostringstream os;
  io::write_grid_function_csv(os, d.derivative);
  io::write_text_file(path_in(c, "caputo.csv"), os.str());
  write_series(c, "caputo_weighted_norm", "t", node_list(prob.grid()), d.weighted_norm);
  log << "modal residual " << io::format_double(residual) << '\n';
  finish(ok, "spectral Caputo derivative satisfies the modal equation within " + io::format_double(c.caputo_tol) +
               " relative",
         log);
}

void verify_decomposition(const RunConfig& c, std::ostream& log) {
  auto prob = linear_problem(c, c.grid_K);
  const std::size_t last = prob.grid().intervals();
  verify::IncrementDecomposer decompose(prob, -c.beta * c.q_prime, c.threads);
  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> pick(0, last);
  std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, last / 2}};
  while (pairs.size() < std::max<std::size_t>(c.pairs, 1)) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    pairs.emplace_back(a, b);
  }
  std::ostringstream os;
  os << "t1,t2,identity_residual,I1_l2,I2_l2,I3_l2,I4_l2,I1_v,I2_v,I3_v,I4_v\n";
  double worst = 0.0;
  bool origin_zero = true;
  for (const auto& [a, b] : pairs) {
    const auto d = decompose(a, b);
    worst = std::max(worst, d.identity_residual);
    if (a == 0) origin_zero = origin_zero && d.terms[0].cwiseAbs().maxCoeff() == 0.0;
    os << io::format_double(prob.grid()[a]) << ',' << io::format_double(prob.grid()[b]) << ','
       << io::format_double(d.identity_residual);
    for (double v : d.norms_l2) os << ',' << io::format_double(v);
    for (double v : d.norms_v) os << ',' << io::format_double(v);
    os << '\n';
  }
  io::write_text_file(path_in(c, "decomposition.csv"), os.str());
  const bool ok = worst <= c.decomposition_tol && origin_zero;
  json report = run_header(c, "verify decomposition");
  report["pairs"] = pairs.size();
  report["max_identity_residual"] = worst;
  report["I1_zero_at_origin"] = origin_zero;
  report["passed"] = ok;
  write_json(c, "report.json", report);
  log << "max identity residual " << io::format_double(worst) << '\n';
  finish(ok, "I1 + I2 + I3 + I4 = u(t2) - u(t1) within " + io::format_double(c.decomposition_tol) +
               " and I1 = 0 at t1 = 0",
         log);
}

}  // namespace

// ---------------------------------------------------------------- builders

std::shared_ptr<const spectral::Spectrum> build_spectrum(const RunConfig& c, std::size_t count) {
  if (c.operator_kind == "analytic") {
    return std::make_shared<const spectral::Spectrum>(
        spectral::eigensystem_analytic(c.domain_length, count, c.effective_mesh()));
  }
  spectral::OperatorSpec spec;
  spec.domain_length = c.domain_length;
  spec.diffusion = c.diffusion;
  spec.potential = c.potential;
  spec.boundary.kind = c.boundary == "robin" ? spectral::BoundaryKind::Robin : spectral::BoundaryKind::Dirichlet;
  spec.boundary.kappa = c.kappa;
  spec.beta = c.beta;
  return std::make_shared<const spectral::Spectrum>(spectral::eigensystem_discrete(spec, c.effective_mesh(), count));
}

TimeGrid build_grid(const RunConfig& c, std::size_t intervals) {
  if (c.grid_spacing == "graded") return TimeGrid::graded(c.T, intervals, c.grid_exponent);
  return TimeGrid::uniform(c.T, intervals);
}

ModalVector build_phi(const RunConfig& c, const spectral::Spectrum& s) {
  if (c.phi_law == "edge") return verify::edge_regularity_data(s, c.modes, c.beta, c.phi_gamma, c.phi_epsilon);
  ModalVector phi = ModalVector::Zero(static_cast<Eigen::Index>(c.modes));
  for (std::size_t j = 0; j < c.phi.size(); ++j) phi(static_cast<Eigen::Index>(j)) = c.phi[j];
  return phi;
}

ModalVector build_u0(const RunConfig& c) {
  ModalVector u0 = ModalVector::Zero(static_cast<Eigen::Index>(c.modes));
  for (std::size_t j = 0; j < c.u0.size(); ++j) u0(static_cast<Eigen::Index>(j)) = c.u0[j];
  return u0;
}

GridFunction build_source(const RunConfig& c, const TimeGrid& grid, const std::string& spectrum_id) {
  GridFunction f(grid, c.modes, spectrum_id);
  if (c.source_kind == "table") {
    if (grid.intervals() != c.grid_K) throw ConfigError("config: source_table is tied to grid_K");
    for (std::size_t j = 0; j < c.modes; ++j) f.set_mode(j, c.source_table[j]);
  } else if (c.source_kind == "polynomial") {
    for (std::size_t j = 0; j < c.source_coefficients.size(); ++j) {
      std::vector<double> values(grid.size());
      for (std::size_t n = 0; n < grid.size(); ++n) {
        values[n] = c.source_coefficients[j] * std::pow(grid[n], c.source_power);
      }
      f.set_mode(j, values);
    }
  }
  return f;
}

// ---------------------------------------------------------------- commands

void cmd_mlf(double a, double b, const std::vector<double>& z, std::ostream& out) {
  std::ostringstream table;
  table << "z,E,envelope,regime,warning\n";
  char buf[64];
  for (double x : z) {
    const auto v = specialfn::mlf_eval({a, b}, x);
    std::snprintf(buf, sizeof buf, "%.10g", v.value);
    const char* regime = "series";
    if (v.regime == specialfn::MLRegime::Integral) regime = "integral";
    if (v.regime == specialfn::MLRegime::Asymptotic) regime = "asymptotic";
    if (v.regime == specialfn::MLRegime::Closed) regime = "closed";
    table << io::format_double(x) << ',' << buf << ',' << io::format_double(1.0 / (1.0 + std::abs(x))) << ','
          << regime << ',' << (v.accuracy_warning ? 1 : 0) << '\n';
  }
  out << table.str();
}

void cmd_spectrum(const RunConfig& c, std::ostream& log) {
  auto s = build_spectrum(c, c.modes);
  std::ostringstream os;
  spectral::write_spectrum_csv(os, *s);
  io::write_text_file(path_in(c, "spectrum.csv"), os.str());
  json report = run_header(c, "spectrum");
  report["id"] = s->id();
  report["count"] = s->count();
  report["mesh_size"] = s->mesh_size();
  report["eigenvalues"] = std::vector<double>(s->eigenvalues().begin(), s->eigenvalues().end());
  report["orthonormality_residual"] = s->has_samples() ? json(s->orthonormality_residual()) : json(nullptr);
  write_json(c, "report.json", report);
  std::vector<double> index(s->count());
  for (std::size_t j = 0; j < s->count(); ++j) index[j] = static_cast<double>(j + 1);
  write_series(c, "eigenvalues", "j", index, {s->eigenvalues().begin(), s->eigenvalues().end()});
  log << "wrote " << s->count() << " eigenpairs to " << path_in(c, "spectrum.csv") << '\n';
}

void cmd_solve(const RunConfig& c, std::ostream& log) {
  auto s = build_spectrum(c, c.modes);
  const TimeGrid grid = build_grid(c, c.grid_K);
  json meta = run_header(c, "solve");

  if (c.nonlinear()) {
    picard::NonlinearProblem prob;
    prob.spectrum = s;
    prob.alpha = c.alpha;
    prob.beta = c.beta;
    prob.phi = build_phi(c, *s);
    prob.grid = grid;
    prob.source = picard::make_builtin(c.nonlinearity, c.nonlinearity_coefficient, s);
    picard::PicardOptions opts;
    opts.max_iter = c.max_iter;
    opts.tol = c.tol;
    opts.override_gate = c.override_gate;
    opts.threads = c.threads;
    opts.record_iterates = true;
    const auto result = picard::picard_solve(prob, validated_exponents(c), opts);
    const auto& r = result.report;
    write_solution(c, result.u);
    json report = picard::report_to_json(r);
    for (const char* key : {"k0", "M0", "C_tilde0", "C_hat0", "measured_ratio", "iterations", "converged"}) {
      meta[key] = report[key];
    }
    meta["solution"] = io::grid_function_metadata(result.u, c.alpha, c.beta);
    meta["nonlinearity"] = {{"kind", prob.source->kind()}, {"params", prob.source->params()},
                            {"K", prob.source->lipschitz_K()}};
    meta["picard"] = report;
    write_json(c, "meta.json", meta);
    std::ostringstream os;
    picard::write_report_csv(os, r);
    io::write_text_file(path_in(c, "picard.csv"), os.str());
    std::vector<double> index(r.distances.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<double>(i + 1);
    write_series(c, "picard_distances", "n", index, r.distances);
    write_series(c, "solution_norm", "t", node_list(grid), norm_series(result.u, *s, 0.0));
    log << "k0 " << io::format_double(r.constants.k0) << ", " << r.iterations << " iterations, measured ratio "
        << io::format_double(r.measured_ratio) << (r.converged ? "" : " (not converged)") << '\n';
    return;
  }

  const GridFunction source = build_source(c, grid, s->id());
  GridFunction u(grid, c.modes, s->id());
  if (c.direction == "forward") {
    u = operators::solve_forward_linear(*s, c.alpha, c.beta, build_u0(c), source, c.threads);
    meta["solution"] = io::grid_function_metadata(u, c.alpha, c.beta);
  } else {
    auto prob = operators::make_problem(s, c.alpha, c.beta, build_phi(c, *s), source);
    operators::SolveOptions opts;
    opts.threads = c.threads;
    const auto sol = operators::solve_backward_linear(prob, opts);
    u = sol.u;
    meta["solution"] = io::grid_function_metadata(u, c.alpha, c.beta);
    meta["path_deviation"] = finite_or_null(sol.path_deviation);
    meta["excluded_modes"] = diagnostics_json(sol.excluded);
  }
  write_solution(c, u);
  write_json(c, "meta.json", meta);
  write_series(c, "solution_norm", "t", node_list(grid), norm_series(u, *s, 0.0));
  log << "solved " << c.direction << " linear problem, N = " << c.modes << ", K = " << c.grid_K << '\n';
}

void cmd_verify(const RunConfig& c, const std::string& which, std::ostream& log) {
  if (which == "exponents") return verify_exponents(c, log);
  if (which == "roundtrip") return verify_roundtrip(c, log);
  if (which == "unbounded") return verify_unbounded(c, log);
  if (which == "blowup") return verify_blowup(c, log);
  if (which == "holder") return verify_holder(c, log);
  if (which == "caputo") return verify_caputo(c, log);
  if (which == "decomposition") return verify_decomposition(c, log);
  throw ConfigError("unknown diagnostic \"" + which + "\"");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const GateRefusedError*>(&e) != nullptr) return kExitGateRefused;
  if (dynamic_cast<const DivergenceError*>(&e) != nullptr) return kExitDivergence;
  if (dynamic_cast<const DiagnosticFailure*>(&e) != nullptr) return kExitDiagnostic;
  if (dynamic_cast<const Error*>(&e) != nullptr) return kExitParameter;
  return kExitInternal;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Terminal-value problems for time-space fractional diffusion"};
  app.require_subcommand(1);

  double a = 1.0;
  double b = 1.0;
  std::vector<double> z;
  auto* mlf = app.add_subcommand("mlf", "Evaluate E_{a,b}(z)");
  mlf->add_option("--a", a, "Order a")->required();
  mlf->add_option("--b", b, "Order b")->required();
  mlf->add_option("--z", z, "Arguments (repeat or comma separated)")->required()->delimiter(',')
      ->allow_extra_args(false);

  std::string config_path;
  std::string out_dir;
  bool override_gate = false;
  std::optional<unsigned> threads;
  std::string which;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "RunConfig JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_flag("--override-gate", override_gate, "Iterate even when k0 >= 1");
    sub->add_option("--threads", threads, "Worker threads (overrides threads; 0 uses all cores)");
  };
  auto* solve = app.add_subcommand("solve", "Solve the configured problem");
  add_common(solve);
  auto* verify = app.add_subcommand("verify", "Run one diagnostic");
  verify->add_option("which", which, "Diagnostic")
      ->required()
      ->check(CLI::IsMember({"blowup", "holder", "caputo", "decomposition", "unbounded", "roundtrip", "exponents"}));
  add_common(verify);
  auto* spectrum = app.add_subcommand("spectrum", "Export the truncated eigensystem");
  add_common(spectrum);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParameter;
  }

  try {
    if (mlf->parsed()) {
      cmd_mlf(a, b, z, out);
      return kExitOk;
    }
    RunConfig c = load_config(config_path);
    if (!out_dir.empty()) c.output_dir = out_dir;
    if (override_gate) c.override_gate = true;
    if (threads) c.threads = *threads;
    if (solve->parsed()) cmd_solve(c, out);
    if (verify->parsed()) cmd_verify(c, which, out);
    if (spectrum->parsed()) cmd_spectrum(c, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace fvp::cli
