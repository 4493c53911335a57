#include "fvp/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "fvp/errors.hpp"
#include "fvp/io.hpp"
#include "fvp/modal.hpp"
#include "fvp/parallel.hpp"

namespace fvp::picard {

namespace sf = fvp::specialfn;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double row_norm(const Eigen::MatrixXd& m, std::size_t n) { return m.row(static_cast<Eigen::Index>(n)).norm(); }

nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

ModalVector ZeroNonlinearity::eval(double, const ModalVector& u) const { return ModalVector::Zero(u.size()); }

LinearLambda::LinearLambda(double lambda) : lambda_(lambda) {
  if (!std::isfinite(lambda)) throw DomainError("linear_lambda: coefficient must be finite");
}

ModalVector LinearLambda::eval(double, const ModalVector& u) const { return lambda_ * u; }

double LinearLambda::lipschitz_K() const { return std::abs(lambda_); }

nlohmann::json LinearLambda::params() const { return {{"lambda", lambda_}}; }

PointwiseNonlinearity::PointwiseNonlinearity(std::shared_ptr<const spectral::Spectrum> spectrum, Function f,
                                             double lipschitz, std::string kind, nlohmann::json params,
                                             bool zero_at_zero)
    : spectrum_(std::move(spectrum)),
      f_(std::move(f)),
      lipschitz_(lipschitz),
      kind_(std::move(kind)),
      params_(std::move(params)),
      zero_at_zero_(zero_at_zero) {
  if (!spectrum_ || !spectrum_->has_samples()) {
    throw DomainError("pointwise nonlinearity: needs a spectrum with eigenfunction samples");
  }
  if (!(lipschitz_ >= 0.0)) throw DomainError("pointwise nonlinearity: Lipschitz constant must be non-negative");
}

ModalVector PointwiseNonlinearity::eval(double t, const ModalVector& u) const {
  if (static_cast<std::size_t>(u.size()) > spectrum_->count()) {
    throw MeshMismatchError("pointwise nonlinearity: state has more modes than the spectrum");
  }
  const auto nodes = spectrum_->nodes();
  ModalVector padded = ModalVector::Zero(static_cast<Eigen::Index>(spectrum_->count()));
  padded.head(u.size()) = u;
  auto samples = spectral::synthesize(padded, *spectrum_);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = f_(t, nodes[i], samples[i]);
  return spectral::project(samples, *spectrum_).head(u.size());
}

std::shared_ptr<const Nonlinearity> scaled_sine(std::shared_ptr<const spectral::Spectrum> spectrum, double K) {
  return std::make_shared<PointwiseNonlinearity>(
      std::move(spectrum), [K](double, double, double u) { return K * std::sin(u); }, std::abs(K), "scaled_sine",
      nlohmann::json{{"K", K}});
}

std::shared_ptr<const Nonlinearity> make_builtin(const std::string& kind, double coefficient,
                                                 std::shared_ptr<const spectral::Spectrum> spectrum) {
  if (kind == "zero") return std::make_shared<ZeroNonlinearity>();
  if (kind == "linear_lambda") return std::make_shared<LinearLambda>(coefficient);
  if (kind == "scaled_sine") return scaled_sine(std::move(spectrum), coefficient);
  throw ConfigError("unknown nonlinearity kind '" + kind + "'");
}

void NonlinearProblem::validate() const {
  if (!spectrum) throw DomainError("NonlinearProblem: missing spectrum");
  if (!source) throw DomainError("NonlinearProblem: missing nonlinearity");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("NonlinearProblem: alpha must lie in (0, 1)");
  if (!(beta > 0.0) || beta > 1.0) throw DomainError("NonlinearProblem: beta must lie in (0, 1]");
  if (modes() == 0) throw DomainError("NonlinearProblem: need at least one mode");
  if (modes() > spectrum->count()) throw MeshMismatchError("NonlinearProblem: more modes than spectrum eigenvalues");
  if (!phi.allFinite()) throw DomainError("NonlinearProblem: terminal datum must be finite");
  if (!source->zero_at_zero()) throw DomainError("NonlinearProblem: the nonlinearity must vanish at u = 0");
}

sf::MLBoundConstants default_ml_bounds(double alpha) {
  const auto grid = sf::negative_log_grid(1e-6, 1e6, 1201);
  return sf::certify_ml_bounds(alpha, grid);
}

ContractionConstants contraction_constants(const NonlinearProblem& prob, double K, const verify::ExponentSet& exps,
                                           const sf::MLBoundConstants& bounds) {
  if (!(K >= 0.0) || !std::isfinite(K)) throw DomainError("contraction_constants: K must be finite and >= 0");
  if (!(exps.p > 0.0 && exps.p < 1.0 && exps.q > 0.0 && exps.q < 1.0) ||
      std::abs(exps.p + exps.q - 1.0) > verify::kSumTolerance) {
    std::ostringstream os;
    os << "contraction_constants: (R1) requires 0 < p, q < 1 with p + q = 1 (p = " << exps.p << ", q = " << exps.q
       << ")";
    throw RegimeError(os.str());
  }
  if (std::abs(exps.alpha - prob.alpha) > 1e-12) {
    throw RegimeError("contraction_constants: exponent set and problem disagree on alpha");
  }
  if (std::abs(bounds.alpha - prob.alpha) > 1e-12) {
    throw DomainError("contraction_constants: ML bounds were certified for a different alpha");
  }
  if (!(bounds.c_lo > 0.0) || !(bounds.c_hi >= bounds.c_lo)) {
    throw DomainError("contraction_constants: ML bounds must satisfy 0 < c_lo <= c_hi");
  }
  ContractionInputs in;
  in.alpha = prob.alpha;
  in.q = exps.q;
  in.p = exps.p;
  in.T = prob.horizon();
  in.K = K;
  in.beta = prob.beta;
  in.m1 = prob.spectrum->eigenvalue(0);
  in.c_lo = bounds.c_lo;
  in.c_hi = bounds.c_hi;
  in.c_hat = bounds.c_hi * std::max(1.0, bounds.max_envelope_ratio);
  in.C_D = std::pow(in.m1, -in.beta * in.p);
  const double aq = in.alpha * in.q;
  in.beta_factor = sf::beta(aq, 1.0 - aq);
  in.phi_norm = spectral::v_norm(*prob.spectrum, in.beta * in.p, prob.phi);

  const double taq = std::pow(in.T, aq);
  const double shift = std::pow(std::pow(in.m1, -in.beta) + std::pow(in.T, in.alpha), in.p);
  ContractionConstants c;
  c.inputs = in;
  c.k0 = K * in.beta_factor * taq *
         (in.c_hat * std::pow(in.m1, -in.beta * in.p) + in.c_hat * in.c_hat / in.c_lo * shift);
  c.M0 = in.C_D * taq + in.c_hat / in.c_lo * taq * shift;
  if (c.k0 < 1.0) {
    c.C_tilde0 = c.M0 / (1.0 - c.k0);
    c.C_hat0 = c.C_tilde0 * in.phi_norm;
  } else {
    c.C_tilde0 = kInf;
    c.C_hat0 = kInf;
  }
  return c;
}

GridFunction picard_map(const NonlinearProblem& prob, const GridFunction& w, const operators::ModalBank& bank,
                        unsigned threads) {
  if (w.modes() != prob.modes() || w.nodes() != prob.grid.size()) {
    throw MeshMismatchError("picard_map: iterate does not match the problem discretisation");
  }
  GridFunction source(prob.grid, prob.modes(), prob.spectrum->id());
  if (!prob.source->is_zero()) {
    parallel_for(prob.grid.size(), threads, [&](std::size_t n) { source.set(n, prob.source->eval(prob.grid[n], w.at(n))); });
  }
  const operators::LinearProblem lin{prob.spectrum, prob.alpha, prob.beta, prob.phi, std::move(source)};
  operators::SolveOptions opts;
  opts.threads = threads;
  opts.cross_check = false;
  return operators::solve_backward_linear(lin, bank, opts).u;
}

std::vector<MembershipRow> verify_w_membership(const std::vector<GridFunction>& iterates, double C_hat0,
                                               double alpha_q) {
  std::vector<MembershipRow> out;
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const auto m = operators::weighted_sup(iterates[i], alpha_q);
    out.push_back({i, m.value, m.argmax, C_hat0 - m.value, m.value <= C_hat0});
  }
  return out;
}

DatumChain datum_chain(const NonlinearProblem& prob, const ContractionConstants& c, const verify::ExponentSet& exps) {
  DatumChain out;
  const double aq = prob.alpha * exps.q;
  out.phi_norm = prob.phi.norm();
  out.embedded = c.inputs.C_D * c.inputs.phi_norm;
  out.weighted_min = kInf;
  for (std::size_t n = 1; n < prob.grid.size(); ++n) {
    out.weighted_min = std::min(out.weighted_min, c.M0 * c.inputs.phi_norm * std::pow(prob.grid[n], -aq));
  }
  const double slack = 1.0 + 8.0 * kEps;
  out.holds = out.phi_norm <= out.embedded * slack && out.embedded <= out.weighted_min * slack;
  return out;
}

PicardResult picard_solve(const NonlinearProblem& prob, const verify::ExponentSet& exps, const PicardOptions& options) {
  prob.validate();
  if (options.max_iter == 0) throw DomainError("picard_solve: max_iter must be positive");
  if (!(options.tol > 0.0)) throw DomainError("picard_solve: tol must be positive");
  const auto bounds = options.bounds ? *options.bounds : default_ml_bounds(prob.alpha);

  PicardReport report;
  report.constants = contraction_constants(prob, prob.source->lipschitz_K(), exps, bounds);
  report.gate = {report.constants.k0, report.constants.k0 < 1.0, false};
  if (!report.gate.passed) {
    if (!options.override_gate) {
      std::ostringstream os;
      os << "picard_solve: contraction gate refused (k0 = " << report.constants.k0
         << " >= 1); rerun with the gate override to iterate anyway";
      throw GateRefusedError(os.str());
    }
    report.gate.overridden = true;
  }

  const unsigned threads = resolve_threads(options.threads);
  const TimeGrid& grid = prob.grid;
  const operators::ModalBank bank(*prob.spectrum, prob.alpha, prob.beta, grid, prob.modes(), !prob.source->is_zero(),
                                  threads);
  for (std::size_t j : bank.degenerate_modes()) {
    const double e_t = bank.mode(j).relaxation().back();
    report.excluded.push_back({j + 1, prob.spectrum->eigenvalue(j), e_t, e_t > 0.0 ? 1.0 / e_t : kInf});
  }

  const double aq = prob.alpha * exps.q;
  report.lp_exponent = exps.r > 0.0 ? 1.0 / aq - exps.r : kNaN;
  report.initial = options.initial == InitialIterate::Datum ? "phi" : "zero";

  GridFunction w(grid, prob.modes(), prob.spectrum->id());
  if (options.initial == InitialIterate::Datum) {
    for (std::size_t n = 0; n < grid.size(); ++n) w.set(n, prob.phi);
  }
  PicardResult result{w, {}, {}};
  if (options.record_iterates) result.iterates.push_back(w);
  const double C_hat0 = report.constants.C_hat0;
  auto membership = [&](const GridFunction& g, std::size_t i) {
    const auto m = operators::weighted_sup(g, aq);
    report.w_membership.push_back({i, m.value, m.argmax, C_hat0 - m.value, m.value <= C_hat0});
  };
  membership(w, 0);

  double scale = prob.phi.norm();
  std::size_t growth = 0;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    GridFunction next = picard_map(prob, w, bank, threads);
    const Eigen::MatrixXd diff = next.coeffs() - w.coeffs();
    double d = 0.0;
    double lp = 0.0;
    double prev_term = 0.0;
    const double P = report.lp_exponent;
    for (std::size_t n = 1; n < grid.size(); ++n) {
      const double dn = row_norm(diff, n);
      d = std::max(d, dn);
      scale = std::max(scale, row_norm(next.coeffs(), n));
      if (std::isfinite(P)) {
        const double term = std::pow(dn, P);
        if (n > 1) lp += 0.5 * (grid[n] - grid[n - 1]) * (term + prev_term);
        prev_term = term;
      }
    }
    report.noise_floor = 1e3 * kEps * scale;
    report.distances.push_back(d);
    report.lp_distances.push_back(std::isfinite(P) ? std::pow(lp, 1.0 / P) : kNaN);
    report.iterations = it;
    membership(next, it);
    w = std::move(next);
    if (options.record_iterates) result.iterates.push_back(w);

    if (prob.source->is_zero() || d < options.tol) {
      report.converged = true;
      break;
    }
    const std::size_t k = report.distances.size();
    if (k >= 2 && d > report.distances[k - 2] && report.distances[k - 2] >= report.noise_floor) {
      if (++growth >= 5) {
        std::ostringstream os;
        os << "picard_solve: iterate distances grew for 5 consecutive iterations (d_" << it << " = " << d
           << ", k0 = " << report.constants.k0 << ")";
        throw DivergenceError(os.str());
      }
    } else {
      growth = 0;
    }
  }

  for (std::size_t i = 1; i < report.distances.size(); ++i) {
    const double a = report.distances[i - 1];
    const double b = report.distances[i];
    if (a >= report.noise_floor && b >= report.noise_floor) report.ratios.push_back(b / a);
  }
  report.measured_ratio = report.ratios.empty() ? 0.0 : *std::max_element(report.ratios.begin(), report.ratios.end());

  report.residual_first_node = grid.size() - 1;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    if (grid[n] >= options.residual_from * grid.horizon()) {
      report.residual_first_node = n;
      break;
    }
  }
  if (grid.is_uniform()) {
    GridFunction f(grid, prob.modes(), prob.spectrum->id());
    for (std::size_t n = 0; n < grid.size(); ++n) f.set(n, prob.source->eval(grid[n], w.at(n)));
    double worst = 0.0;
    double size = 0.0;
    for (std::size_t j = 0; j < prob.modes(); ++j) {
      if (bank.is_degenerate(j)) continue;
      modal::ModalTrajectory traj;
      traj.values = w.mode(j);
      const double rate = bank.mode(j).m();
      worst = std::max(worst, modal::residual_mode(traj, f.mode(j), rate, prob.alpha, grid, report.residual_first_node));
      for (std::size_t n = report.residual_first_node; n < grid.size(); ++n) {
        size = std::max(size, std::abs(rate * traj.values[n]));
      }
    }
    report.residual = worst;
    report.relative_residual = size > 0.0 ? worst / size : worst;
  } else {
    report.residual = kNaN;
    report.relative_residual = kNaN;
  }

  result.u = std::move(w);
  result.u.t0_extrapolated = true;
  result.report = std::move(report);
  return result;
}

LipschitzProbe lipschitz_probe(const Nonlinearity& f, std::size_t modes, double horizon, std::uint64_t seed,
                               std::size_t pairs, double slack) {
  if (modes == 0 || pairs == 0) throw DomainError("lipschitz_probe: need at least one mode and one pair");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LipschitzProbe out;
  out.pairs = pairs;
  out.declared = f.lipschitz_K();
  out.slack = slack;
  const auto dim = static_cast<Eigen::Index>(modes);
  for (std::size_t k = 0; k < pairs; ++k) {
    const double amplitude = std::pow(10.0, -2.0 + 3.0 * unit(rng));
    ModalVector v1(dim), v2(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double decay = amplitude / static_cast<double>(j + 1);
      v1(j) = decay * normal(rng);
      v2(j) = decay * normal(rng);
    }
    const double t = horizon * (1.0 - unit(rng));
    const double den = (v1 - v2).norm();
    if (den == 0.0) continue;
    out.max_ratio = std::max(out.max_ratio, (f.eval(t, v1) - f.eval(t, v2)).norm() / den);
  }
  out.passes = out.max_ratio <= out.declared * (1.0 + slack);
  return out;
}

BetaIdentity beta_identity_check(double a, double b, double t, std::size_t intervals, double grading,
                                 double tolerance) {
  if (!(a > 0.0) || !(b > 0.0) || !(t > 0.0)) throw DomainError("beta_identity_check: a, b and t must be positive");
  const TimeGrid grid = TimeGrid::graded(t, intervals, grading);
  std::vector<double> profile(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) profile[n] = n == 0 ? kNaN : std::pow(grid[n], b - 1.0);
  BetaIdentity out{a, b, t, 0.0, std::pow(t, a + b - 1.0) * sf::beta(a, b), 0.0, false};
  out.quadrature = spectral::weighted_integrals(grid.nodes(), profile, a).back();
  out.relative_error = std::abs(out.quadrature - out.exact) / out.exact;
  out.passes = out.relative_error <= tolerance;
  return out;
}

nlohmann::json report_to_json(const PicardReport& r) {
  using nlohmann::json;
  auto array = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(finite_or_null(x));
    return a;
  };
  const auto& in = r.constants.inputs;
  json membership = json::array();
  for (const auto& m : r.w_membership) {
    membership.push_back({{"iterate", m.iterate}, {"weighted_sup", finite_or_null(m.weighted_sup)},
                          {"argmax", m.argmax}, {"margin", finite_or_null(m.margin)}, {"member", m.member}});
  }
  json excluded = json::array();
  for (const auto& e : r.excluded) {
    excluded.push_back({{"mode", e.mode}, {"eigenvalue", e.eigenvalue}, {"relaxation_at_T", e.relaxation_at_T}});
  }
  return {
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"initial", r.initial},
      {"distances", array(r.distances)},
      {"lp_distances", array(r.lp_distances)},
      {"lp_exponent", finite_or_null(r.lp_exponent)},
      {"ratios", array(r.ratios)},
      {"measured_ratio", r.measured_ratio},
      {"noise_floor", r.noise_floor},
      {"gate", {{"k0", finite_or_null(r.gate.k0)}, {"passed", r.gate.passed}, {"overridden", r.gate.overridden}}},
      {"k0", finite_or_null(r.constants.k0)},
      {"M0", finite_or_null(r.constants.M0)},
      {"C_tilde0", finite_or_null(r.constants.C_tilde0)},
      {"C_hat0", finite_or_null(r.constants.C_hat0)},
      {"inputs",
       {{"alpha", in.alpha}, {"q", in.q}, {"p", in.p}, {"T", in.T}, {"K", in.K}, {"beta", in.beta}, {"m1", in.m1},
        {"c_lo", in.c_lo}, {"c_hi", in.c_hi}, {"c_hat", in.c_hat}, {"C_D", in.C_D}, {"beta_factor", in.beta_factor},
        {"phi_norm", in.phi_norm}}},
      {"w_membership", membership},
      {"residual", finite_or_null(r.residual)},
      {"relative_residual", finite_or_null(r.relative_residual)},
      {"residual_first_node", r.residual_first_node},
      {"excluded_modes", excluded},
  };
}

void write_report_csv(std::ostream& os, const PicardReport& r) {
  os << "n,distance,lp_distance,ratio,weighted_sup,member\n";
  auto field = [](const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? io::format_double(v[i]) : std::string();
  };
  for (std::size_t n = 0; n < r.w_membership.size(); ++n) {
    const auto& m = r.w_membership[n];
    os << n << ',';
    if (n > 0) os << field(r.distances, n - 1) << ',' << field(r.lp_distances, n - 1);
    else os << ',';
    os << ',';
    if (n >= 2) os << io::format_double(r.distances[n - 1] / r.distances[n - 2]);
    os << ',' << io::format_double(m.weighted_sup) << ',' << (m.member ? 1 : 0) << '\n';
  }
}

}  // namespace fvp::picard
