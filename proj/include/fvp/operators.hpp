#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fvp/grid.hpp"
#include "fvp/modal.hpp"
#include "fvp/spectral.hpp"

namespace fvp::operators {

/// Linear terminal-value problem D^alpha u = -L^beta u + F(t), u(T) = phi.
struct LinearProblem {
  std::shared_ptr<const spectral::Spectrum> spectrum;
  double alpha = 0.5;
  double beta = 1.0;
  /// Terminal datum coefficients phi_j, j = 1..N.
  ModalVector phi;
  /// Source coefficients F_j(t_n); its grid defines the time discretisation.
  GridFunction source;

  const TimeGrid& grid() const { return source.grid(); }
  double horizon() const { return source.grid().horizon(); }
  std::size_t modes() const { return static_cast<std::size_t>(phi.size()); }
  /// m_j^beta for mode j (0-based).
  double rate(std::size_t j) const;
  /// Throws DomainError / MeshMismatchError on inconsistent data.
  void validate() const;
};

LinearProblem make_problem(std::shared_ptr<const spectral::Spectrum> spectrum, double alpha, double beta,
                           ModalVector phi, GridFunction source);

/// Per-mode solvers with rate m_j^beta on a common grid, built once and shared
/// by repeated solves (Picard sweeps).
class ModalBank {
 public:
  ModalBank(const spectral::Spectrum& s, double alpha, double beta, const TimeGrid& grid, std::size_t modes,
            bool with_convolution, unsigned threads = 1);

  std::size_t modes() const { return solvers_.size(); }
  const modal::ModeSolver& mode(std::size_t j) const { return solvers_[j]; }
  const TimeGrid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  /// 0-based indices of modes with E_{alpha,1}(-m_j^beta T^alpha) below the underflow guard.
  const std::vector<std::size_t>& degenerate_modes() const { return degenerate_; }
  bool is_degenerate(std::size_t j) const;

 private:
  double alpha_;
  TimeGrid grid_;
  std::vector<modal::ModeSolver> solvers_;
  std::vector<std::size_t> degenerate_;
};

/// O1(t_n) = sum_j (F_j * K_j)(t_n) e_j, K_j(t) = t^{alpha-1} E_{alpha,alpha}(-m_j^beta t^alpha).
ModalVector o1_apply(const LinearProblem& prob, std::size_t t_index);

/// O2(t_n) v: coefficient j is v_j E_{alpha,1}(-m_j^beta t_n^alpha) / E_{alpha,1}(-m_j^beta T^alpha).
/// Modes whose denominator underflows are set to zero and appended to `underflow`.
ModalVector o2_apply(const LinearProblem& prob, const ModalVector& v, std::size_t t_index,
                     std::vector<std::size_t>* underflow = nullptr);

/// O3(t_n) = -O2(t_n) O1(T).
ModalVector o3_apply(const LinearProblem& prob, std::size_t t_index);

struct ModeDiagnostic {
  std::size_t mode = 0;  ///< 1-based mode index
  double eigenvalue = 0.0;
  double relaxation_at_T = 0.0;
  double amplification = 0.0;
};

struct SolveOptions {
  unsigned threads = 1;
  /// Also assemble O1 + O2 phi + O3 and report the deviation from the modal path.
  bool cross_check = true;
};

struct BackwardSolution {
  GridFunction u;
  /// Modes removed by the underflow guard; their rows are zero.
  std::vector<ModeDiagnostic> excluded;
  /// max |modal path - operator assembly|; NaN when the cross-check is off.
  double path_deviation = 0.0;
};

BackwardSolution solve_backward_linear(const LinearProblem& prob, const SolveOptions& options = {});

/// Same as solve_backward_linear but reuses the per-mode solvers of `bank`.
BackwardSolution solve_backward_linear(const LinearProblem& prob, const ModalBank& bank,
                                       const SolveOptions& options = {});

/// u(t_n) = O1(t_n) F + O2(t_n) phi + O3(t_n) F assembled operator by operator.
/// Independent of the modal path: the convolution is accumulated in interval
/// form from kernel_antiderivative and the ML ratios are evaluated afresh.
GridFunction assemble_mild_solution(const LinearProblem& prob, unsigned threads = 1);

/// Per-mode forward solution u_j = u0_j E_{alpha,1}(-m_j^beta t^alpha) + (F_j * K_j)(t).
GridFunction solve_forward_linear(const spectral::Spectrum& s, double alpha, double beta, const ModalVector& u0,
                                  const GridFunction& source, unsigned threads = 1);
GridFunction solve_forward_linear(const ModalBank& bank, const ModalVector& u0, const GridFunction& source,
                                  unsigned threads = 1);

struct ProbeRow {
  std::size_t n = 0;
  /// S_N = sum_{j<=N} v_j^2 / E_{alpha,1}(-m_j^beta T^alpha)^2, v_j = j^{-1/2} m_j^{-beta}.
  double partial_sum = 0.0;
  /// c_lo^{-2} T^{2 alpha} H_N with c_lo the certified lower ML constant.
  double lower_bound = 0.0;
  /// c_hi^{-2} T^{2 alpha} H_N with c_hi the certified upper ML constant.
  double lower_bound_hi = 0.0;
  /// S_N - S_{N/2} and c_hi^{-2} T^{2 alpha} (H_N - H_{N/2}); NaN unless N/2 is the previous level.
  double tail_increment = 0.0;
  double tail_lower_bound = 0.0;
  /// sum_{j<=N} v_j^2 E_{alpha,1}(-m_j^beta T^alpha)^2 (forward contrast, bounded by ||v||^2).
  double forward_sum = 0.0;
  double norm_squared = 0.0;
  bool bound_holds = false;
  bool bound_hi_holds = false;
  bool tail_holds = true;
  bool forward_bounded = false;
};

struct ProbeReport {
  double c_lo = 0.0;
  double c_hi = 0.0;
  std::vector<ProbeRow> rows;
  /// Every row satisfies S_N >= lower_bound.
  bool all_hold = true;
  bool all_hold_hi = true;
  bool tails_hold = true;
};

ProbeReport unboundedness_probe(const spectral::Spectrum& s, double alpha, double beta, double horizon,
                                std::span<const std::size_t> n_list);

/// sup over nodes n >= 1 of t_n^gamma ||u(t_n)||_{L^2} and the node where it is attained.
struct BlowupMeasure {
  double value = 0.0;
  std::size_t argmax = 0;
};
BlowupMeasure weighted_sup(const GridFunction& u, double gamma);

}  // namespace fvp::operators
