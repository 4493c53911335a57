#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvp/exponents.hpp"
#include "fvp/grid.hpp"
#include "fvp/operators.hpp"
#include "fvp/specialfn.hpp"
#include "fvp/spectral.hpp"

namespace fvp::picard {

/// Source term F(t, u) acting on modal states. Implementations must be pure.
class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;

  virtual ModalVector eval(double t, const ModalVector& u) const = 0;
  /// Lipschitz constant K in ||F(t, v) - F(t, w)|| <= K ||v - w||.
  virtual double lipschitz_K() const = 0;
  /// Constant K_* of Lipschitz continuity in time, when known.
  virtual std::optional<double> time_lipschitz() const { return std::nullopt; }
  virtual bool zero_at_zero() const { return true; }
  virtual std::string kind() const = 0;
  virtual nlohmann::json params() const { return nlohmann::json::object(); }
  /// True when F vanishes identically.
  virtual bool is_zero() const { return false; }
};

class ZeroNonlinearity final : public Nonlinearity {
 public:
  ModalVector eval(double t, const ModalVector& u) const override;
  double lipschitz_K() const override { return 0.0; }
  std::optional<double> time_lipschitz() const override { return 0.0; }
  std::string kind() const override { return "zero"; }
  bool is_zero() const override { return true; }
};

/// F(t, u) = lambda u, applied directly to the coefficients.
class LinearLambda final : public Nonlinearity {
 public:
  explicit LinearLambda(double lambda);
  ModalVector eval(double t, const ModalVector& u) const override;
  double lipschitz_K() const override;
  std::optional<double> time_lipschitz() const override { return 0.0; }
  std::string kind() const override { return "linear_lambda"; }
  nlohmann::json params() const override;
  bool is_zero() const override { return lambda_ == 0.0; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// F(t, u)(x) = f(t, x, u(x)) evaluated in physical space: the state is
/// synthesized on the spectral mesh, f is applied node by node and the result
/// is projected back onto the modes.
class PointwiseNonlinearity : public Nonlinearity {
 public:
  using Function = std::function<double(double t, double x, double u)>;

  PointwiseNonlinearity(std::shared_ptr<const spectral::Spectrum> spectrum, Function f, double lipschitz,
                        std::string kind, nlohmann::json params = nlohmann::json::object(),
                        bool zero_at_zero = true);
  ModalVector eval(double t, const ModalVector& u) const override;
  double lipschitz_K() const override { return lipschitz_; }
  bool zero_at_zero() const override { return zero_at_zero_; }
  std::string kind() const override { return kind_; }
  nlohmann::json params() const override { return params_; }

 private:
  std::shared_ptr<const spectral::Spectrum> spectrum_;
  Function f_;
  double lipschitz_;
  std::string kind_;
  nlohmann::json params_;
  bool zero_at_zero_;
};

/// F(t, u) = K sin(u) in physical space; needs a spectrum with eigenfunction samples.
std::shared_ptr<const Nonlinearity> scaled_sine(std::shared_ptr<const spectral::Spectrum> spectrum, double K);

/// Builtin by name: "zero", "linear_lambda" (uses `coefficient` as lambda),
/// "scaled_sine" (uses `coefficient` as K).
std::shared_ptr<const Nonlinearity> make_builtin(const std::string& kind, double coefficient,
                                                 std::shared_ptr<const spectral::Spectrum> spectrum);

/// D^alpha u = -L^beta u + F(t, u), u(T) = phi on `grid`.
struct NonlinearProblem {
  std::shared_ptr<const spectral::Spectrum> spectrum;
  double alpha = 0.5;
  double beta = 1.0;
  ModalVector phi;
  TimeGrid grid = TimeGrid::uniform(1.0, 64);
  std::shared_ptr<const Nonlinearity> source;

  std::size_t modes() const { return static_cast<std::size_t>(phi.size()); }
  double horizon() const { return grid.horizon(); }
  void validate() const;
};

struct ContractionInputs {
  double alpha = 0.0;
  double q = 0.0;
  double p = 0.0;
  double T = 0.0;
  double K = 0.0;
  double beta = 0.0;
  double m1 = 0.0;
  double c_lo = 0.0;
  double c_hi = 0.0;
  /// Upper constant actually used: c_hi widened by the E_{alpha,alpha} envelope ratio.
  double c_hat = 0.0;
  double C_D = 0.0;
  double beta_factor = 0.0;
  double phi_norm = 0.0;
};

struct ContractionConstants {
  double k0 = 0.0;
  double M0 = 0.0;
  double C_tilde0 = 0.0;
  double C_hat0 = 0.0;
  ContractionInputs inputs;
};

/// k0 = K B(aq, 1-aq) T^{aq} [c m1^{-bp} + c^2 c_lo^{-1} (m1^{-b} + T^a)^p],
/// M0 = C_D T^{aq} + c c_lo^{-1} T^{aq} (m1^{-b} + T^a)^p,
/// C~0 = M0 / (1 - k0) and C^0 = C~0 ||phi||_{V_{bp}}, with c the widened upper constant.
/// C~0 and C^0 are +inf when k0 >= 1. Throws RegimeError when (R1) fails.
ContractionConstants contraction_constants(const NonlinearProblem& prob, double K, const verify::ExponentSet& exps,
                                           const specialfn::MLBoundConstants& bounds);

/// Certified ML constants on 1201 log-spaced points of [-1e6, -1e-6].
specialfn::MLBoundConstants default_ml_bounds(double alpha);

enum class InitialIterate { Datum, Zero };

struct PicardOptions {
  std::size_t max_iter = 100;
  double tol = 1e-10;
  bool override_gate = false;
  unsigned threads = 1;
  InitialIterate initial = InitialIterate::Datum;
  bool record_iterates = true;
  /// Residual of the L1 scheme is measured on nodes t >= residual_from * T.
  double residual_from = 0.1;
  /// ML constants; certified with default_ml_bounds when absent.
  std::optional<specialfn::MLBoundConstants> bounds;
};

struct MembershipRow {
  std::size_t iterate = 0;
  /// max over nodes t_k > 0 of t_k^{aq} ||w(t_k)||.
  double weighted_sup = 0.0;
  std::size_t argmax = 0;
  double margin = 0.0;
  bool member = false;
};

struct GateStatus {
  double k0 = 0.0;
  bool passed = false;
  bool overridden = false;
};

struct PicardReport {
  std::size_t iterations = 0;
  bool converged = false;
  std::string initial;
  /// d_n = max_{k>=1} ||w_n(t_k) - w_{n-1}(t_k)||_{L^2}.
  std::vector<double> distances;
  /// (int_{t_1}^T ||w_n - w_{n-1}||^P dt)^{1/P}, P = 1/(aq) - r.
  std::vector<double> lp_distances;
  double lp_exponent = 0.0;
  /// d_{n+1} / d_n for every pair with d_n above the noise floor.
  std::vector<double> ratios;
  double measured_ratio = 0.0;
  double noise_floor = 0.0;
  GateStatus gate;
  ContractionConstants constants;
  std::vector<MembershipRow> w_membership;
  /// max |L1 Caputo + m_j^beta u_j - F_j(u)| over modes and nodes t >= residual_from T.
  double residual = 0.0;
  /// residual / max |m_j^beta u_j|; NaN for non-uniform grids.
  double relative_residual = 0.0;
  std::size_t residual_first_node = 0;
  std::vector<operators::ModeDiagnostic> excluded;
};

struct PicardResult {
  GridFunction u;
  PicardReport report;
  /// w_0, w_1, ... when PicardOptions::record_iterates is set.
  std::vector<GridFunction> iterates;
};

/// One application of the mild-solution map: the backward linear solution with
/// source F(t, w(t)) sampled at the grid nodes.
GridFunction picard_map(const NonlinearProblem& prob, const GridFunction& w, const operators::ModalBank& bank,
                        unsigned threads = 1);

/// Iterates w_n = O(w_{n-1}) until d_n < tol or max_iter. Throws GateRefusedError
/// when k0 >= 1 without override and DivergenceError after five consecutive
/// increases of d_n above the noise floor.
PicardResult picard_solve(const NonlinearProblem& prob, const verify::ExponentSet& exps,
                          const PicardOptions& options = {});

/// Checks ||w(t_k)|| <= C^0 t_k^{-aq} at every node t_k > 0 of every iterate.
std::vector<MembershipRow> verify_w_membership(const std::vector<GridFunction>& iterates, double C_hat0,
                                               double alpha_q);

/// ||phi|| <= C_D ||phi||_{V_{bp}} <= M0 ||phi||_{V_{bp}} t_k^{-aq} at every node t_k > 0.
struct DatumChain {
  double phi_norm = 0.0;
  double embedded = 0.0;
  /// min over nodes of M0 ||phi||_{V_{bp}} t_k^{-aq}.
  double weighted_min = 0.0;
  bool holds = false;
};
DatumChain datum_chain(const NonlinearProblem& prob, const ContractionConstants& c, const verify::ExponentSet& exps);

struct LipschitzProbe {
  std::size_t pairs = 0;
  double max_ratio = 0.0;
  double declared = 0.0;
  double slack = 0.0;
  bool passes = false;
};

/// max ||F(t, v1) - F(t, v2)|| / ||v1 - v2|| over random pairs and times in (0, T].
LipschitzProbe lipschitz_probe(const Nonlinearity& f, std::size_t modes, double horizon, std::uint64_t seed,
                               std::size_t pairs = 64, double slack = 0.01);

struct BetaIdentity {
  double a = 0.0;
  double b = 0.0;
  double t = 0.0;
  double quadrature = 0.0;
  double exact = 0.0;
  double relative_error = 0.0;
  bool passes = false;
};

/// int_0^t (t - tau)^{a-1} tau^{b-1} d tau against t^{a+b-1} B(a, b) with the
/// product-integration rule of weighted_integrals on a graded grid.
BetaIdentity beta_identity_check(double a, double b, double t, std::size_t intervals = 1000, double grading = 2.5,
                                 double tolerance = 1e-4);

nlohmann::json report_to_json(const PicardReport& r);
/// One row per iteration: n, distance, lp_distance, ratio, weighted_sup, member.
void write_report_csv(std::ostream& os, const PicardReport& r);

}  // namespace fvp::picard
