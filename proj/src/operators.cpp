#include "fvp/operators.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fvp/errors.hpp"
#include "fvp/parallel.hpp"
#include "fvp/specialfn.hpp"

namespace fvp::operators {

namespace sf = fvp::specialfn;

namespace {

// Convolution in interval form: sum_i F_i Z_i + (F_{i+1} - F_i) Mo_i / h_i.
std::vector<double> interval_convolution(double alpha, double m, const TimeGrid& grid, std::span<const double> f) {
  const std::size_t size = grid.size();
  std::vector<double> out(size, 0.0);
  bool zero = true;
  for (double v : f) zero = zero && v == 0.0;
  if (zero) return out;
  const auto t = grid.nodes();
  if (grid.is_uniform()) {
    const double h = grid.step();
    const std::size_t k_total = grid.intervals();
    std::vector<double> z(k_total), mo(k_total), prim(k_total + 1), lam(k_total + 1);
    for (std::size_t l = 0; l <= k_total; ++l) {
      const double s = static_cast<double>(l) * h;
      prim[l] = sf::kernel_primitive(alpha, m, s);
      lam[l] = sf::kernel_second_primitive(alpha, m, s);
    }
    for (std::size_t l = 0; l < k_total; ++l) {
      z[l] = sf::kernel_antiderivative(alpha, m, static_cast<double>(l) * h, static_cast<double>(l + 1) * h);
      mo[l] = lam[l + 1] - lam[l] - h * prim[l];
    }
    for (std::size_t n = 1; n < size; ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = n - i - 1;
        acc += f[i] * z[l] + (f[i + 1] - f[i]) * mo[l] / h;
      }
      out[n] = acc;
    }
    return out;
  }
  for (std::size_t n = 1; n < size; ++n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = t[n] - t[i + 1];
      const double hi = t[n] - t[i];
      const double h = t[i + 1] - t[i];
      const double z = sf::kernel_antiderivative(alpha, m, lo, hi);
      const double mo = sf::kernel_second_primitive(alpha, m, hi) - sf::kernel_second_primitive(alpha, m, lo) -
                        h * sf::kernel_primitive(alpha, m, lo);
      acc += f[i] * z + (f[i + 1] - f[i]) * mo / h;
    }
    out[n] = acc;
  }
  return out;
}

double relaxation(double alpha, double rate, double t) {
  if (t == 0.0) return 1.0;
  return sf::mlf({alpha, 1.0}, -rate * std::pow(t, alpha));
}

}  // namespace

double LinearProblem::rate(std::size_t j) const { return std::pow(spectrum->eigenvalue(j), beta); }

void LinearProblem::validate() const {
  if (!spectrum) throw DomainError("LinearProblem: missing spectrum");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("LinearProblem: alpha must lie in (0, 1)");
  if (!(beta > 0.0) || beta > 1.0) throw DomainError("LinearProblem: beta must lie in (0, 1]");
  if (modes() == 0) throw DomainError("LinearProblem: need at least one mode");
  if (modes() > spectrum->count()) throw MeshMismatchError("LinearProblem: more modes than spectrum eigenvalues");
  if (source.modes() != modes()) throw MeshMismatchError("LinearProblem: source and terminal datum mode counts differ");
  if (!source.spectrum_id().empty() && source.spectrum_id() != spectrum->id()) {
    throw MeshMismatchError("LinearProblem: source was built on spectrum '" + source.spectrum_id() +
                            "', problem uses '" + spectrum->id() + "'");
  }
  if (!phi.allFinite()) throw DomainError("LinearProblem: terminal datum must be finite");
  for (std::size_t n = 1; n < source.nodes(); ++n) {
    if (!source.coeffs().row(static_cast<Eigen::Index>(n)).allFinite()) {
      throw DomainError("LinearProblem: source must be finite for t > 0");
    }
  }
}

LinearProblem make_problem(std::shared_ptr<const spectral::Spectrum> spectrum, double alpha, double beta,
                           ModalVector phi, GridFunction source) {
  LinearProblem p{std::move(spectrum), alpha, beta, std::move(phi), std::move(source)};
  p.validate();
  return p;
}

ModalBank::ModalBank(const spectral::Spectrum& s, double alpha, double beta, const TimeGrid& grid,
                     std::size_t modes, bool with_convolution, unsigned threads)
    : alpha_(alpha), grid_(grid) {
  if (modes > s.count()) throw MeshMismatchError("ModalBank: more modes than spectrum eigenvalues");
  std::vector<std::unique_ptr<modal::ModeSolver>> built(modes);
  parallel_for(modes, threads, [&](std::size_t j) {
    built[j] = std::make_unique<modal::ModeSolver>(alpha, std::pow(s.eigenvalue(j), beta), grid, j,
                                                   with_convolution);
  });
  solvers_.reserve(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    solvers_.push_back(std::move(*built[j]));
    if (!(solvers_.back().relaxation().back() >= modal::kRelaxationUnderflow)) degenerate_.push_back(j);
  }
}

bool ModalBank::is_degenerate(std::size_t j) const {
  for (std::size_t d : degenerate_) {
    if (d == j) return true;
  }
  return false;
}

ModalVector o1_apply(const LinearProblem& prob, std::size_t t_index) {
  prob.validate();
  if (t_index >= prob.grid().size()) throw DomainError("o1_apply: t_index out of range");
  ModalVector out = ModalVector::Zero(static_cast<Eigen::Index>(prob.modes()));
  if (t_index == 0) return out;
  for (std::size_t j = 0; j < prob.modes(); ++j) {
    const auto f = prob.source.mode(j);
    out(static_cast<Eigen::Index>(j)) = modal::convolve_kernel(f, prob.alpha, prob.rate(j), prob.grid(), t_index);
  }
  return out;
}

ModalVector o2_apply(const LinearProblem& prob, const ModalVector& v, std::size_t t_index,
                     std::vector<std::size_t>* underflow) {
  prob.validate();
  if (t_index >= prob.grid().size()) throw DomainError("o2_apply: t_index out of range");
  if (static_cast<std::size_t>(v.size()) != prob.modes()) throw MeshMismatchError("o2_apply: vector length differs from mode count");
  ModalVector out(v.size());
  const double t = prob.grid()[t_index];
  const bool terminal = t_index + 1 == prob.grid().size();
  for (std::size_t j = 0; j < prob.modes(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double den = relaxation(prob.alpha, prob.rate(j), prob.horizon());
    if (!(den >= modal::kRelaxationUnderflow)) {
      out(jj) = 0.0;
      if (underflow != nullptr) underflow->push_back(j);
      continue;
    }
    out(jj) = terminal ? v(jj) : v(jj) * (relaxation(prob.alpha, prob.rate(j), t) / den);
  }
  return out;
}

ModalVector o3_apply(const LinearProblem& prob, std::size_t t_index) {
  const std::size_t last = prob.grid().size() - 1;
  return -o2_apply(prob, o1_apply(prob, last), t_index);
}

GridFunction assemble_mild_solution(const LinearProblem& prob, unsigned threads) {
  prob.validate();
  const TimeGrid& grid = prob.grid();
  const std::size_t size = grid.size();
  GridFunction u(grid, prob.modes(), prob.spectrum->id());
  parallel_for(prob.modes(), threads, [&](std::size_t j) {
    const double rate = prob.rate(j);
    const double den = relaxation(prob.alpha, rate, prob.horizon());
    if (!(den >= modal::kRelaxationUnderflow)) return;
    const auto o1 = interval_convolution(prob.alpha, rate, grid, prob.source.mode(j));
    const double phi = prob.phi(static_cast<Eigen::Index>(j));
    std::vector<double> col(size);
    for (std::size_t n = 0; n < size; ++n) {
      const double ratio = n + 1 == size ? 1.0 : relaxation(prob.alpha, rate, grid[n]) / den;
      const double o2 = phi * ratio;
      const double o3 = -o1.back() * ratio;
      col[n] = o1[n] + o2 + o3;
    }
    u.set_mode(j, col);
  });
  u.t0_extrapolated = true;
  return u;
}

BackwardSolution solve_backward_linear(const LinearProblem& prob, const ModalBank& bank, const SolveOptions& options) {
  prob.validate();
  if (bank.modes() < prob.modes()) throw MeshMismatchError("solve_backward_linear: solver bank has too few modes");
  if (bank.grid().nodes().size() != prob.grid().size() || bank.grid().horizon() != prob.horizon()) {
    throw MeshMismatchError("solve_backward_linear: solver bank was built on a different grid");
  }
  BackwardSolution out{GridFunction(prob.grid(), prob.modes(), prob.spectrum->id()), {}, 0.0};
  parallel_for(prob.modes(), options.threads, [&](std::size_t j) {
    if (bank.is_degenerate(j)) return;
    const auto traj = bank.mode(j).backward(prob.phi(static_cast<Eigen::Index>(j)), prob.source.mode(j));
    out.u.set_mode(j, traj.values);
  });
  for (std::size_t j : bank.degenerate_modes()) {
    if (j >= prob.modes()) continue;
    const double e_t = bank.mode(j).relaxation().back();
    out.excluded.push_back({j + 1, prob.spectrum->eigenvalue(j), e_t, e_t > 0.0 ? 1.0 / e_t : std::numeric_limits<double>::infinity()});
  }
  out.u.t0_extrapolated = true;
  if (options.cross_check) {
    const GridFunction assembled = assemble_mild_solution(prob, options.threads);
    out.path_deviation = (assembled.coeffs() - out.u.coeffs()).cwiseAbs().maxCoeff();
  } else {
    out.path_deviation = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

BackwardSolution solve_backward_linear(const LinearProblem& prob, const SolveOptions& options) {
  prob.validate();
  bool zero_source = prob.source.is_zero();
  const ModalBank bank(*prob.spectrum, prob.alpha, prob.beta, prob.grid(), prob.modes(), !zero_source,
                       options.threads);
  return solve_backward_linear(prob, bank, options);
}

GridFunction solve_forward_linear(const ModalBank& bank, const ModalVector& u0, const GridFunction& source,
                                  unsigned threads) {
  const auto modes = static_cast<std::size_t>(u0.size());
  if (source.modes() != modes) throw MeshMismatchError("solve_forward_linear: source and initial datum mode counts differ");
  if (bank.modes() < modes) throw MeshMismatchError("solve_forward_linear: solver bank has too few modes");
  if (bank.grid().size() != source.grid().size()) throw MeshMismatchError("solve_forward_linear: grid mismatch");
  GridFunction u(source.grid(), modes, source.spectrum_id());
  parallel_for(modes, threads, [&](std::size_t j) {
    const auto traj = bank.mode(j).forward(u0(static_cast<Eigen::Index>(j)), source.mode(j));
    u.set_mode(j, traj.values);
  });
  return u;
}

GridFunction solve_forward_linear(const spectral::Spectrum& s, double alpha, double beta, const ModalVector& u0,
                                  const GridFunction& source, unsigned threads) {
  if (static_cast<std::size_t>(u0.size()) > s.count()) throw MeshMismatchError("solve_forward_linear: too many modes");
  const ModalBank bank(s, alpha, beta, source.grid(), static_cast<std::size_t>(u0.size()), !source.is_zero(), threads);
  GridFunction u = solve_forward_linear(bank, u0, source, threads);
  return GridFunction(u.grid(), u.coeffs(), s.id());
}

ProbeReport unboundedness_probe(const spectral::Spectrum& s, double alpha, double beta, double horizon,
                                std::span<const std::size_t> n_list) {
  if (n_list.empty()) throw DomainError("unboundedness_probe: empty truncation list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw DomainError("unboundedness_probe: truncation levels must be positive and ascending");
    }
  }
  const std::size_t n_max = n_list.back();
  if (n_max > s.count()) throw MeshMismatchError("unboundedness_probe: truncation exceeds spectrum size");
  const double ta = std::pow(horizon, alpha);
  std::vector<double> x(n_max), e(n_max);
  for (std::size_t j = 0; j < n_max; ++j) {
    x[j] = std::pow(s.eigenvalue(j), beta) * ta;
    e[j] = sf::mlf({alpha, 1.0}, -x[j]);
  }
  const auto grid = sf::negative_log_grid(1e-3 * x.front(), x.back(), 400);
  const auto bounds = sf::certify_ml_bounds(alpha, grid);
  ProbeReport report;
  report.c_lo = bounds.c_lo;
  report.c_hi = bounds.c_hi;
  const double scale_lo = ta * ta / (bounds.c_lo * bounds.c_lo);
  const double scale_hi = ta * ta / (bounds.c_hi * bounds.c_hi);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  double s_sum = 0.0, f_sum = 0.0, norm = 0.0, harmonic = 0.0;
  double prev_sum = 0.0, prev_harmonic = 0.0;
  std::size_t prev_n = 0;
  std::size_t next = 0;
  for (std::size_t j = 0; j < n_max; ++j) {
    const double jd = static_cast<double>(j + 1);
    const double v = 1.0 / (std::sqrt(jd) * std::pow(s.eigenvalue(j), beta));
    s_sum += (v / e[j]) * (v / e[j]);
    f_sum += (v * e[j]) * (v * e[j]);
    norm += v * v;
    harmonic += 1.0 / jd;
    if (j + 1 == n_list[next]) {
      ProbeRow row;
      row.n = j + 1;
      row.partial_sum = s_sum;
      row.lower_bound = scale_lo * harmonic;
      row.lower_bound_hi = scale_hi * harmonic;
      row.forward_sum = f_sum;
      row.norm_squared = norm;
      row.bound_holds = s_sum >= row.lower_bound;
      row.bound_hi_holds = s_sum >= row.lower_bound_hi;
      row.forward_bounded = f_sum <= norm;
      if (prev_n > 0 && 2 * prev_n == row.n) {
        row.tail_increment = s_sum - prev_sum;
        row.tail_lower_bound = scale_hi * (harmonic - prev_harmonic);
        row.tail_holds = row.tail_increment >= row.tail_lower_bound;
      } else {
        row.tail_increment = nan;
        row.tail_lower_bound = nan;
      }
      report.all_hold = report.all_hold && row.bound_holds;
      report.all_hold_hi = report.all_hold_hi && row.bound_hi_holds && row.forward_bounded;
      report.tails_hold = report.tails_hold && row.tail_holds;
      report.rows.push_back(row);
      prev_n = row.n;
      prev_sum = s_sum;
      prev_harmonic = harmonic;
      ++next;
    }
  }
  return report;
}

BlowupMeasure weighted_sup(const GridFunction& u, double gamma) {
  BlowupMeasure out;
  for (std::size_t n = 1; n < u.nodes(); ++n) {
    const double v = std::pow(u.grid()[n], gamma) * u.coeffs().row(static_cast<Eigen::Index>(n)).norm();
    if (v > out.value) out = {v, n};
  }
  return out;
}

}  // namespace fvp::operators
