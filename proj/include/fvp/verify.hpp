#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fvp/exponents.hpp"
#include "fvp/grid.hpp"
#include "fvp/operators.hpp"
#include "fvp/spectral.hpp"

namespace fvp::verify {

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Least-squares slope of log ||u(t)|| against log t.
struct RateFit {
  /// Minus the fitted slope: ||u(t)|| ~ t^{-exponent_hat}.
  double exponent_hat = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  FitWindow window;
  std::string norm_tag;
  std::size_t nodes = 0;
};

/// OLS fit of y = intercept + slope x. Throws FitError for fewer than three
/// points or a degenerate abscissa.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};
LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

/// "L2" for gamma = 0, otherwise "V_<gamma>".
std::string norm_tag(double gamma);

/// Nodes 0, the log-spaced points lo 2^{k / per_octave} <= hi, then a uniform
/// tail from hi to T with `tail` intervals.
TimeGrid log_dyadic_grid(double horizon, double lo, double hi, std::size_t per_octave = 8, std::size_t tail = 16);

/// phi_j = m_j^{-beta gamma} j^{-1/2 - epsilon}: in V_{beta gamma} but in no
/// V_{beta gamma + delta} as N grows.
ModalVector edge_regularity_data(const spectral::Spectrum& s, std::size_t modes, double beta, double gamma,
                                 double epsilon = 0.01);

/// Fits ||u(t)||_{V_gamma} on the grid nodes inside `window` (default
/// [T/1000, T/10]). Requires window within (0, T/2] and at least 8 nodes.
RateFit fit_blowup_exponent(const GridFunction& u, const spectral::Spectrum& s, double norm_gamma,
                            std::optional<FitWindow> window = std::nullopt);

struct HolderResult {
  /// sup over node pairs of ||u(t_b) - u(t_a)||_{V_gamma} / (t_b - t_a)^s.
  double sup_modulus = 0.0;
  std::size_t argmax_a = 0;
  std::size_t argmax_b = 0;
  bool includes_origin = false;
  /// Fit of ||u(t) - u(0)||_{V_gamma} ~ t^{exponent_hat} over the window
  /// (here exponent_hat is the slope itself); valid when `fitted`.
  RateFit increment_fit;
  bool fitted = false;
};

/// Pairs with t_a = 0 enter only when include_origin is set; the increment fit
/// always uses u(0) and the nodes in `window` (default [T/1000, T/10]).
HolderResult fit_holder_modulus(const GridFunction& u, const spectral::Spectrum& s, double gamma, double s_exp,
                                bool include_origin, std::optional<FitWindow> window = std::nullopt);

struct Decomposition {
  std::size_t t1_index = 0;
  std::size_t t2_index = 0;
  /// I_1 ... I_4 of the increment u(t_2) - u(t_1).
  std::array<ModalVector, 4> terms;
  /// u(t_2) - u(t_1) from the backward modal solution.
  ModalVector direct;
  /// max_j |sum_k I_k - direct|.
  double identity_residual = 0.0;
  std::array<double, 4> norms_l2{};
  std::array<double, 4> norms_v{};
};

/// Evaluates the four increment terms per mode, each by its own rule:
/// I_1 by Gauss-Legendre quadrature (32 points per piece, the first piece
/// refined geometrically down to w ~ m^{-1/alpha}) of the swapped double
/// integral against w^{alpha-2} E_{alpha,alpha-1}(-m w^alpha),
/// I_2 by exact product integration on [t_1, t_2], I_3 from the kernel
/// antiderivative and I_4 from the terminal convolution times that
/// antiderivative. The source is the piecewise-linear interpolant of the nodal
/// values. Kernel samples are cached across pairs.
class IncrementDecomposer {
 public:
  /// `norm_gamma` selects the V_gamma norm reported next to L^2 (use -beta q').
  IncrementDecomposer(operators::LinearProblem prob, double norm_gamma = 0.0, unsigned threads = 1);

  Decomposition operator()(std::size_t t1_index, std::size_t t2_index);
  const GridFunction& solution() const { return u_; }

 private:
  struct KernelRule {
    std::vector<double> nodes;
    std::vector<double> weights;
  };
  struct ModeData {
    double rate = 0.0;
    double relax_T = 0.0;
    double conv_T = 0.0;
    bool degenerate = false;
    std::vector<double> f;
    std::vector<double> prefix;  ///< int_0^{t_n} F_j
  };
  double source_value(const ModeData& d, std::size_t i, double tau) const;
  double source_integral(const ModeData& d, double a, double b) const;
  double first_term(std::size_t j, std::size_t n1, std::size_t n2, const std::vector<double>& breaks);
  double second_term(const ModeData& d, std::size_t from, std::size_t to) const;
  const KernelRule& kernel_rule(std::size_t j, double lo, double hi, bool singular);

  operators::LinearProblem prob_;
  double gamma_;
  unsigned threads_;
  GridFunction u_;
  std::vector<ModeData> modes_;
  std::vector<std::map<std::pair<double, double>, KernelRule>> cache_;
};

Decomposition increment_decomposition(const operators::LinearProblem& prob, std::size_t t1_index,
                                      std::size_t t2_index, double norm_gamma = 0.0);

struct SpectralCaputo {
  /// D^alpha u_j(t_n) = F_j + psi1 + psi2 + psi3; the t_0 row is NaN.
  GridFunction derivative;
  /// t_n^alpha ||D^alpha u(t_n)||_{V_gamma_out}.
  std::vector<double> weighted_norm;
  double weighted_sup = 0.0;
};

/// psi1 = -m (F * K)(t), psi2 = -phi m E(t)/E(T), psi3 = (F * K)(T) m E(t)/E(T)
/// with E(t) = E_{alpha,1}(-m t^alpha) and m = m_j^beta.
SpectralCaputo spectral_caputo(const operators::LinearProblem& prob, double gamma_out, unsigned threads = 1);

/// max over modes and nodes n >= 1 of |D^alpha u_j + m_j^beta u_j - F_j|.
double caputo_modal_residual(const SpectralCaputo& d, const GridFunction& u, const operators::LinearProblem& prob);

/// max over modes and nodes t_n >= from T of |D^alpha u_j - L1(u_j)|; uniform grids only.
double caputo_l1_deviation(const SpectralCaputo& d, const GridFunction& u, double alpha, double from = 0.1);

struct RoundtripReport {
  /// max_{n, j} |u_backward - u_forward|, node 0 included.
  double max_deviation = 0.0;
  /// max_n | ||u_backward(t_n)|| - ||u_forward(t_n)|| |.
  double norm_deviation = 0.0;
  /// Deviation at t_1, where the backward amplification acts most.
  double deviation_t1 = 0.0;
  double max_amplification = 0.0;
  /// max |u_backward - reference| when a reference trajectory is supplied, else NaN.
  double reference_deviation = 0.0;
  std::vector<double> node_deviation;
};

/// Forward solve from u0, phi = u(T), backward solve, comparison.
RoundtripReport roundtrip_experiment(std::shared_ptr<const spectral::Spectrum> s, double alpha, double beta,
                                     const ModalVector& u0, const GridFunction& source,
                                     const GridFunction* reference = nullptr, unsigned threads = 1);

nlohmann::json to_json(const RateFit& f);
nlohmann::json to_json(const HolderResult& h);
nlohmann::json to_json(const Decomposition& d);
nlohmann::json to_json(const RoundtripReport& r);
nlohmann::json to_json(const ConstraintCheck& c);

}  // namespace fvp::verify
