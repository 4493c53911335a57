#include "fvp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "fvp/errors.hpp"
#include "fvp/modal.hpp"
#include "fvp/parallel.hpp"
#include "fvp/specialfn.hpp"

namespace fvp::verify {

namespace sf = fvp::specialfn;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMinFitNodes = 8;

FitWindow resolve_window(const TimeGrid& grid, std::optional<FitWindow> window) {
  const double T = grid.horizon();
  return window ? *window : FitWindow{T / 1000.0, T / 10.0};
}

std::vector<std::size_t> window_nodes(const TimeGrid& grid, const FitWindow& w) {
  std::vector<std::size_t> out;
  const double lo = w.lo * (1.0 - 1e-12);
  const double hi = w.hi * (1.0 + 1e-12);
  for (std::size_t n = 1; n < grid.size(); ++n) {
    if (grid[n] >= lo && grid[n] <= hi) out.push_back(n);
  }
  return out;
}

/// Rows scaled by m_j^gamma so that Euclidean row norms are V_gamma norms.
Eigen::MatrixXd weighted_coeffs(const GridFunction& u, const spectral::Spectrum& s, double gamma) {
  if (u.modes() > s.count()) throw MeshMismatchError("verify: grid function has more modes than the spectrum");
  Eigen::VectorXd w(static_cast<Eigen::Index>(u.modes()));
  for (std::size_t j = 0; j < u.modes(); ++j) w(static_cast<Eigen::Index>(j)) = std::pow(s.eigenvalue(j), gamma);
  return u.coeffs() * w.asDiagonal();
}

nlohmann::json vector_json(const ModalVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw FitError("least_squares_line: need at least three paired points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("least_squares_line: abscissae are all equal");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - out.intercept - out.slope * x[i];
    ssr += r * r;
  }
  out.slope_std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return out;
}

std::string norm_tag(double gamma) {
  if (gamma == 0.0) return "L2";
  std::ostringstream os;
  os << "V_" << std::setprecision(6) << gamma;
  return os.str();
}

TimeGrid log_dyadic_grid(double horizon, double lo, double hi, std::size_t per_octave, std::size_t tail) {
  if (!(lo > 0.0) || !(hi > lo) || !(horizon >= hi) || per_octave == 0) {
    throw DomainError("log_dyadic_grid: need 0 < lo < hi <= T and a positive density");
  }
  std::vector<double> nodes{0.0};
  for (std::size_t k = 0;; ++k) {
    const double t = lo * std::exp2(static_cast<double>(k) / static_cast<double>(per_octave));
    if (t > hi * (1.0 + 1e-12)) break;
    nodes.push_back(std::min(t, hi));
  }
  if (nodes.back() < hi) nodes.push_back(hi);
  if (horizon > hi) {
    const std::size_t m = std::max<std::size_t>(tail, 1);
    for (std::size_t k = 1; k <= m; ++k) {
      nodes.push_back(k == m ? horizon : hi + (horizon - hi) * static_cast<double>(k) / static_cast<double>(m));
    }
  }
  return TimeGrid::from_nodes(std::move(nodes));
}

ModalVector edge_regularity_data(const spectral::Spectrum& s, std::size_t modes, double beta, double gamma,
                                 double epsilon) {
  if (modes > s.count()) throw MeshMismatchError("edge_regularity_data: more modes than spectrum eigenvalues");
  if (!(epsilon > 0.0)) throw DomainError("edge_regularity_data: epsilon must be positive");
  ModalVector phi(static_cast<Eigen::Index>(modes));
  for (std::size_t j = 0; j < modes; ++j) {
    phi(static_cast<Eigen::Index>(j)) =
        std::pow(s.eigenvalue(j), -beta * gamma) * std::pow(static_cast<double>(j + 1), -0.5 - epsilon);
  }
  return phi;
}

RateFit fit_blowup_exponent(const GridFunction& u, const spectral::Spectrum& s, double norm_gamma,
                            std::optional<FitWindow> window) {
  const TimeGrid& grid = u.grid();
  const FitWindow w = resolve_window(grid, window);
  if (!(w.lo > 0.0) || !(w.hi > w.lo) || w.hi > 0.5 * grid.horizon() * (1.0 + 1e-12)) {
    throw DomainError("fit_blowup_exponent: window must satisfy 0 < lo < hi <= T/2");
  }
  const auto nodes = window_nodes(grid, w);
  if (nodes.size() < kMinFitNodes) {
    throw FitError("fit_blowup_exponent: " + std::to_string(nodes.size()) + " nodes in the window, need at least 8");
  }
  const Eigen::MatrixXd c = weighted_coeffs(u, s, norm_gamma);
  std::vector<double> x, y;
  for (std::size_t n : nodes) {
    const double norm = c.row(static_cast<Eigen::Index>(n)).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw FitError("fit_blowup_exponent: the norm vanishes or is not finite inside the window");
    }
    x.push_back(std::log(grid[n]));
    y.push_back(std::log(norm));
  }
  const LineFit line = least_squares_line(x, y);
  return {-line.slope, line.slope_std_error, line.intercept, w, norm_tag(norm_gamma), nodes.size()};
}

HolderResult fit_holder_modulus(const GridFunction& u, const spectral::Spectrum& s, double gamma, double s_exp,
                                bool include_origin, std::optional<FitWindow> window) {
  if (!(s_exp > 0.0) || !(s_exp <= 1.0)) throw DomainError("fit_holder_modulus: exponent must lie in (0, 1]");
  const TimeGrid& grid = u.grid();
  const Eigen::MatrixXd c = weighted_coeffs(u, s, gamma);
  HolderResult out;
  out.includes_origin = include_origin;
  const std::size_t first = include_origin ? 0 : 1;
  for (std::size_t a = first; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const double d = (c.row(static_cast<Eigen::Index>(b)) - c.row(static_cast<Eigen::Index>(a))).norm();
      const double v = d / std::pow(grid[b] - grid[a], s_exp);
      if (v > out.sup_modulus) {
        out.sup_modulus = v;
        out.argmax_a = a;
        out.argmax_b = b;
      }
    }
  }
  const FitWindow w = resolve_window(grid, window);
  const auto nodes = window_nodes(grid, w);
  out.increment_fit.window = w;
  out.increment_fit.norm_tag = norm_tag(gamma);
  out.increment_fit.nodes = nodes.size();
  out.increment_fit.exponent_hat = kNaN;
  out.increment_fit.std_error = kNaN;
  if (nodes.size() >= kMinFitNodes) {
    std::vector<double> x, y;
    for (std::size_t n : nodes) {
      const double d = (c.row(static_cast<Eigen::Index>(n)) - c.row(0)).norm();
      if (!(d > 0.0) || !std::isfinite(d)) {
        x.clear();
        break;
      }
      x.push_back(std::log(grid[n]));
      y.push_back(std::log(d));
    }
    if (x.size() >= kMinFitNodes) {
      const LineFit line = least_squares_line(x, y);
      out.increment_fit.exponent_hat = line.slope;
      out.increment_fit.std_error = line.slope_std_error;
      out.increment_fit.intercept = line.intercept;
      out.fitted = true;
    }
  }
  return out;
}

IncrementDecomposer::IncrementDecomposer(operators::LinearProblem prob, double norm_gamma, unsigned threads)
    : prob_(std::move(prob)),
      gamma_(norm_gamma),
      threads_(resolve_threads(threads)),
      u_(prob_.grid(), prob_.modes()) {
  prob_.validate();
  operators::SolveOptions opts;
  opts.threads = threads_;
  opts.cross_check = false;
  u_ = operators::solve_backward_linear(prob_, opts).u;
  const TimeGrid& grid = prob_.grid();
  const double T = grid.horizon();
  modes_.resize(prob_.modes());
  cache_.resize(prob_.modes());
  parallel_for(prob_.modes(), threads_, [&](std::size_t j) {
    ModeData& d = modes_[j];
    d.rate = prob_.rate(j);
    d.relax_T = sf::mlf({prob_.alpha, 1.0}, -d.rate * std::pow(T, prob_.alpha));
    d.degenerate = !(d.relax_T >= modal::kRelaxationUnderflow);
    d.f = prob_.source.mode(j);
    d.prefix.assign(grid.size(), 0.0);
    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
      d.prefix[n + 1] = d.prefix[n] + 0.5 * (grid[n + 1] - grid[n]) * (d.f[n] + d.f[n + 1]);
    }
    d.conv_T = second_term(d, 0, grid.size() - 1);
  });
}

double IncrementDecomposer::source_value(const ModeData& d, std::size_t i, double tau) const {
  const TimeGrid& grid = prob_.grid();
  const double h = grid[i + 1] - grid[i];
  return d.f[i] + (d.f[i + 1] - d.f[i]) * (tau - grid[i]) / h;
}

double IncrementDecomposer::source_integral(const ModeData& d, double a, double b) const {
  if (!(b > a)) return 0.0;
  const auto t = prob_.grid().nodes();
  const std::size_t last = t.size() - 2;
  auto interval = [&](double x) {
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.begin() - 1, 0));
    return std::min(k, last);
  };
  const std::size_t ia = interval(a);
  std::size_t ib = interval(b);
  if (ib > ia && b == t[ib]) --ib;
  if (ia == ib) return 0.5 * (b - a) * (source_value(d, ia, a) + source_value(d, ia, b));
  double acc = 0.5 * (t[ia + 1] - a) * (source_value(d, ia, a) + d.f[ia + 1]);
  acc += d.prefix[ib] - d.prefix[ia + 1];
  acc += 0.5 * (b - t[ib]) * (d.f[ib] + source_value(d, ib, b));
  return acc;
}

double IncrementDecomposer::second_term(const ModeData& d, std::size_t from, std::size_t to) const {
  const TimeGrid& grid = prob_.grid();
  const double target = grid[to];
  const double alpha = prob_.alpha;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    const double h = grid[i + 1] - grid[i];
    const double lo = target - grid[i + 1];
    const double hi = target - grid[i];
    const double phi_hi = sf::kernel_primitive(alpha, d.rate, hi);
    const double z = phi_hi - sf::kernel_primitive(alpha, d.rate, lo);
    const double dl = sf::kernel_second_primitive(alpha, d.rate, hi) - sf::kernel_second_primitive(alpha, d.rate, lo);
    // sigma = target - tau runs over [lo, hi]; F is linear from f[i+1] (sigma = lo) to f[i] (sigma = hi).
    acc += d.f[i + 1] * z + (d.f[i] - d.f[i + 1]) * (h * phi_hi - dl) / h;
  }
  return acc;
}

const IncrementDecomposer::KernelRule& IncrementDecomposer::kernel_rule(std::size_t j, double lo, double hi,
                                                                        bool singular) {
  auto& cache = cache_[j];
  const auto key = std::make_pair(lo, hi);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  using Gauss = boost::math::quadrature::gauss<double, 32>;
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  const double alpha = prob_.alpha;
  const double m = modes_[j].rate;
  KernelRule rule;
  auto add_piece = [&](double a, double b, bool mapped) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        const double v = 0.5 * (1.0 + sign * x[k]);
        double omega = 0.0;
        double jac = 0.0;
        if (mapped) {
          // omega = a + (b - a) v^{1/alpha} absorbs the omega^{alpha-1} endpoint behaviour.
          omega = a + (b - a) * std::pow(v, 1.0 / alpha);
          jac = (b - a) / alpha * std::pow(v, 1.0 / alpha - 1.0);
        } else {
          omega = a + (b - a) * v;
          jac = b - a;
        }
        const double kernel = std::pow(omega, alpha - 2.0) * sf::mlf({alpha, alpha - 1.0}, -m * std::pow(omega, alpha));
        rule.nodes.push_back(omega);
        rule.weights.push_back(0.5 * w[k] * jac * kernel);
        if (x[k] == 0.0) break;
      }
    }
  };
  if (!singular) {
    add_piece(lo, hi, false);
  } else {
    // The kernel turns over at omega ~ m^{-1/alpha}; quarter the piece geometrically down past that scale.
    const double floor = std::pow(m, -1.0 / alpha) / 16.0;
    std::vector<double> cuts{hi};
    while (cuts.back() > floor && cuts.size() < 48) cuts.push_back(cuts.back() / 4.0);
    add_piece(lo, cuts.back(), true);
    for (std::size_t k = cuts.size() - 1; k > 0; --k) add_piece(cuts[k], cuts[k - 1], false);
  }
  return cache.emplace(key, std::move(rule)).first->second;
}

double IncrementDecomposer::first_term(std::size_t j, std::size_t n1, std::size_t n2, const std::vector<double>& breaks) {
  const TimeGrid& grid = prob_.grid();
  const double t1 = grid[n1];
  const double t2 = grid[n2];
  const ModeData& d = modes_[j];
  // For omega inside the last interval before t1 the integral over [t1 - omega, t1] is written in omega
  // itself; forming t1 - omega would cancel digits exactly where the kernel weights are largest.
  const double h_last = t1 - grid[n1 - 1];
  const double slope = (d.f[n1] - d.f[n1 - 1]) / h_last;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const KernelRule& rule = kernel_rule(j, breaks[k], breaks[k + 1], k == 0);
    double part = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double omega = rule.nodes[q];
      if (rule.weights[q] == 0.0) continue;
      double g = 0.0;
      if (omega <= h_last && omega <= t2 - t1) {
        g = omega * (d.f[n1] - 0.5 * slope * omega);
      } else {
        g = source_integral(d, std::max(0.0, t1 - omega), std::min(t1, t2 - omega));
      }
      part += rule.weights[q] * g;
    }
    acc += part;
  }
  return acc;
}

Decomposition IncrementDecomposer::operator()(std::size_t t1_index, std::size_t t2_index) {
  const TimeGrid& grid = prob_.grid();
  if (t2_index >= grid.size() || t1_index > t2_index) {
    throw DomainError("increment_decomposition: need 0 <= t1 <= t2 <= T on grid nodes");
  }
  const auto dim = static_cast<Eigen::Index>(prob_.modes());
  Decomposition out;
  out.t1_index = t1_index;
  out.t2_index = t2_index;
  for (auto& term : out.terms) term = ModalVector::Zero(dim);
  out.direct = u_.at(t2_index) - u_.at(t1_index);

  std::vector<double> breaks;
  if (t1_index > 0 && t2_index > t1_index) {
    const double t1 = grid[t1_index];
    const double t2 = grid[t2_index];
    for (std::size_t i = 0; i <= t2_index; ++i) {
      if (i <= t1_index) breaks.push_back(t1 - grid[i]);
      breaks.push_back(t2 - grid[i]);
    }
    if (grid.is_uniform()) {
      const double h = grid.step();
      for (double& b : breaks) {
        const auto k = static_cast<std::size_t>(std::llround(b / h));
        if (k < grid.size() && std::abs(grid[k] - b) <= 1e-9 * h) b = grid[k];
      }
    }
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> unique;
    for (double b : breaks) {
      if (unique.empty() || b - unique.back() > 1e-13 * t2) unique.push_back(b);
    }
    unique.front() = 0.0;
    breaks = std::move(unique);
  }

  parallel_for(prob_.modes(), threads_, [&](std::size_t j) {
    const ModeData& d = modes_[j];
    if (d.degenerate || t2_index == t1_index) return;
    const auto jj = static_cast<Eigen::Index>(j);
    const double t1 = grid[t1_index];
    const double t2 = grid[t2_index];
    const double area = sf::kernel_antiderivative(prob_.alpha, d.rate, t1, t2);
    const double phi = prob_.phi(jj);
    if (!breaks.empty()) out.terms[0](jj) = first_term(j, t1_index, t2_index, breaks);
    out.terms[1](jj) = second_term(d, t1_index, t2_index);
    out.terms[2](jj) = -d.rate * phi * area / d.relax_T;
    out.terms[3](jj) = d.rate * d.conv_T * area / d.relax_T;
  });

  const ModalVector sum = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  out.identity_residual = dim > 0 ? (sum - out.direct).cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    out.norms_l2[k] = out.terms[k].norm();
    out.norms_v[k] = spectral::v_norm(*prob_.spectrum, gamma_, out.terms[k]);
  }
  return out;
}

Decomposition increment_decomposition(const operators::LinearProblem& prob, std::size_t t1_index,
                                      std::size_t t2_index, double norm_gamma) {
  IncrementDecomposer dec(prob, norm_gamma);
  return dec(t1_index, t2_index);
}

SpectralCaputo spectral_caputo(const operators::LinearProblem& prob, double gamma_out, unsigned threads) {
  prob.validate();
  const TimeGrid& grid = prob.grid();
  const unsigned nt = resolve_threads(threads);
  const operators::ModalBank bank(*prob.spectrum, prob.alpha, prob.beta, grid, prob.modes(), !prob.source.is_zero(),
                                  nt);
  SpectralCaputo out{GridFunction(grid, prob.modes(), prob.spectrum->id()), {}, 0.0};
  parallel_for(prob.modes(), nt, [&](std::size_t j) {
    std::vector<double> col(grid.size(), 0.0);
    col[0] = kNaN;
    if (!bank.is_degenerate(j)) {
      const auto& solver = bank.mode(j);
      const auto f = prob.source.mode(j);
      const auto conv = solver.convolve(f);
      const auto& relax = solver.relaxation();
      const double m = solver.m();
      const double e_T = relax.back();
      const double phi = prob.phi(static_cast<Eigen::Index>(j));
      for (std::size_t n = 1; n < grid.size(); ++n) {
        const double ratio = relax[n] / e_T;
        const double psi1 = -m * conv[n];
        const double psi2 = -phi * m * ratio;
        const double psi3 = conv.back() * m * ratio;
        col[n] = f[n] + psi1 + psi2 + psi3;
      }
    }
    out.derivative.set_mode(j, col);
  });
  const Eigen::MatrixXd c = weighted_coeffs(out.derivative, *prob.spectrum, gamma_out);
  out.weighted_norm.assign(grid.size(), kNaN);
  for (std::size_t n = 1; n < grid.size(); ++n) {
    out.weighted_norm[n] = std::pow(grid[n], prob.alpha) * c.row(static_cast<Eigen::Index>(n)).norm();
    out.weighted_sup = std::max(out.weighted_sup, out.weighted_norm[n]);
  }
  return out;
}

double caputo_modal_residual(const SpectralCaputo& d, const GridFunction& u, const operators::LinearProblem& prob) {
  if (u.nodes() != d.derivative.nodes() || u.modes() != d.derivative.modes()) {
    throw MeshMismatchError("caputo_modal_residual: derivative and solution shapes differ");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < u.modes(); ++j) {
    const double m = prob.rate(j);
    for (std::size_t n = 1; n < u.nodes(); ++n) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto nn = static_cast<Eigen::Index>(n);
      worst = std::max(worst, std::abs(d.derivative.coeffs()(nn, jj) + m * u.coeffs()(nn, jj) -
                                       prob.source.coeffs()(nn, jj)));
    }
  }
  return worst;
}

double caputo_l1_deviation(const SpectralCaputo& d, const GridFunction& u, double alpha, double from) {
  const TimeGrid& grid = u.grid();
  if (u.nodes() != d.derivative.nodes() || u.modes() != d.derivative.modes()) {
    throw MeshMismatchError("caputo_l1_deviation: derivative and solution shapes differ");
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < u.modes(); ++j) {
    const auto l1 = modal::caputo_l1(u.mode(j), alpha, grid);
    for (std::size_t n = 1; n < grid.size(); ++n) {
      if (grid[n] < from * grid.horizon()) continue;
      const double v = d.derivative.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
      worst = std::max(worst, std::abs(v - l1[n]));
    }
  }
  return worst;
}

RoundtripReport roundtrip_experiment(std::shared_ptr<const spectral::Spectrum> s, double alpha, double beta,
                                     const ModalVector& u0, const GridFunction& source, const GridFunction* reference,
                                     unsigned threads) {
  if (!s) throw DomainError("roundtrip_experiment: missing spectrum");
  const unsigned nt = resolve_threads(threads);
  const auto modes = static_cast<std::size_t>(u0.size());
  const TimeGrid& grid = source.grid();
  const operators::ModalBank bank(*s, alpha, beta, grid, modes, !source.is_zero(), nt);
  const GridFunction forward = operators::solve_forward_linear(bank, u0, source, nt);
  GridFunction src(grid, source.coeffs(), s->id());
  const auto prob = operators::make_problem(s, alpha, beta, forward.at(grid.size() - 1), std::move(src));
  operators::SolveOptions opts;
  opts.threads = nt;
  opts.cross_check = false;
  const auto back = operators::solve_backward_linear(prob, bank, opts);

  RoundtripReport out;
  const Eigen::MatrixXd diff = back.u.coeffs() - forward.coeffs();
  out.node_deviation.resize(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto nn = static_cast<Eigen::Index>(n);
    out.node_deviation[n] = diff.row(nn).cwiseAbs().maxCoeff();
    out.max_deviation = std::max(out.max_deviation, out.node_deviation[n]);
    out.norm_deviation =
        std::max(out.norm_deviation, std::abs(back.u.coeffs().row(nn).norm() - forward.coeffs().row(nn).norm()));
  }
  out.deviation_t1 = grid.size() > 1 ? out.node_deviation[1] : 0.0;
  for (std::size_t j = 0; j < modes; ++j) {
    out.max_amplification = std::max(out.max_amplification, 1.0 / bank.mode(j).relaxation().back());
  }
  if (reference != nullptr) {
    if (reference->nodes() != grid.size() || reference->modes() != modes) {
      throw MeshMismatchError("roundtrip_experiment: reference trajectory shape differs");
    }
    out.reference_deviation = (back.u.coeffs() - reference->coeffs()).cwiseAbs().maxCoeff();
  } else {
    out.reference_deviation = kNaN;
  }
  return out;
}

nlohmann::json to_json(const RateFit& f) {
  return {{"exponent_hat", number_or_null(f.exponent_hat)},
          {"stderr", number_or_null(f.std_error)},
          {"intercept", number_or_null(f.intercept)},
          {"window", {f.window.lo, f.window.hi}},
          {"norm", f.norm_tag},
          {"nodes", f.nodes}};
}

nlohmann::json to_json(const HolderResult& h) {
  return {{"sup_modulus", number_or_null(h.sup_modulus)},
          {"argmax", {h.argmax_a, h.argmax_b}},
          {"includes_origin", h.includes_origin},
          {"fitted", h.fitted},
          {"increment_fit", to_json(h.increment_fit)}};
}

nlohmann::json to_json(const Decomposition& d) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    terms.push_back({{"name", "I" + std::to_string(k + 1)},
                     {"norm_l2", d.norms_l2[k]},
                     {"norm_v", d.norms_v[k]},
                     {"coefficients", vector_json(d.terms[k])}});
  }
  return {{"t1_index", d.t1_index}, {"t2_index", d.t2_index}, {"identity_residual", d.identity_residual},
          {"terms", terms}};
}

nlohmann::json to_json(const RoundtripReport& r) {
  return {{"max_deviation", r.max_deviation},
          {"norm_deviation", r.norm_deviation},
          {"deviation_t1", r.deviation_t1},
          {"max_amplification", number_or_null(r.max_amplification)},
          {"reference_deviation", number_or_null(r.reference_deviation)}};
}

nlohmann::json to_json(const ConstraintCheck& c) {
  static const char* relations[] = {">", ">=", "<", "<=", "="};
  return {{"group", c.group},
          {"constraint", c.name},
          {"parameter", c.parameter},
          {"relation", relations[static_cast<int>(c.relation)]},
          {"value", c.value},
          {"bound", number_or_null(c.bound)},
          {"margin", number_or_null(c.margin)},
          {"satisfied", c.satisfied}};
}

}  // namespace fvp::verify
