#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fvp::specialfn {

/// Gamma function. Throws DomainError at the poles 0, -1, -2, ... and
/// OverflowError when the result exceeds the double range.
double gamma(double x);

/// Reciprocal gamma 1/Gamma(x); entire, exactly zero at the poles of Gamma.
double rgamma(double x);

/// Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for a, b > 0.
double beta(double a, double b);

/// sin(pi x) with exact zeros at the integers.
double sinpi(double x);

struct MLParams {
  double a = 1.0;
  double b = 1.0;
};

enum class MLRegime { Series, Integral, Asymptotic, Closed };

struct MLValue {
  double value = 0.0;
  MLRegime regime = MLRegime::Series;
  /// Set when the evaluation path could not certify the 1e-10 relative target
  /// (positive arguments of large modulus, orders outside (0, 1]).
  bool accuracy_warning = false;
};

/// Two-parameter Mittag-Leffler function E_{a,b}(z) = sum_{k>=0} z^k / Gamma(ak + b).
///
/// Certified regime: 0 < a <= 1, real z <= 10. Negative arguments are split
/// into a compensated long-double Taylor series near the origin, the
/// Gorenflo-Loutchko-Luchko integral representation in the intermediate band
/// and the algebraic asymptotic expansion for large |z|. Parameters b > 1 + a/2
/// in the intermediate band are reduced with the recurrence
/// E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
MLValue mlf_eval(MLParams p, double z);

/// Value-only convenience wrapper around mlf_eval.
double mlf(MLParams p, double z);

/// Weakly singular kernel t^{alpha-1} E_{alpha,alpha}(-m t^alpha), t > 0.
double mlf_tilde(double alpha, double m, double t);

/// Primitive of the kernel: t^alpha E_{alpha,alpha+1}(-m t^alpha), which equals
/// (1 - E_{alpha,1}(-m t^alpha)) / m without the cancellation near t = 0.
double kernel_primitive(double alpha, double m, double t);

/// Second primitive: t^{alpha+1} E_{alpha,alpha+2}(-m t^alpha).
double kernel_second_primitive(double alpha, double m, double t);

/// Integral of the kernel over [lo, hi]:
/// (E_{alpha,1}(-m lo^alpha) - E_{alpha,1}(-m hi^alpha)) / m.
double kernel_antiderivative(double alpha, double m, double lo, double hi);

struct MLBoundConstants {
  double alpha = 0.0;
  double c_lo = 0.0;
  double c_hi = 0.0;
  std::string sample_grid_spec;
  std::size_t samples = 0;
  /// Grid points where |E_{alpha,alpha}(z)| exceeds c_hi min(1/(1+|z|), 1/(1+|z|^2)).
  std::size_t envelope_violations = 0;
  double max_envelope_ratio = 0.0;
  /// Evaluations that raised the accuracy warning.
  std::size_t accuracy_warnings = 0;
  double z_at_c_lo = 0.0;
  double z_at_c_hi = 0.0;
};

/// `count` log-spaced negative samples z in [-abs_hi, -abs_lo], ordered from
/// the origin outwards (decreasing z).
std::vector<double> negative_log_grid(double abs_lo, double abs_hi, std::size_t count);

/// Measures c_lo = min (1+|z|) E_{alpha,1}(z) and c_hi = max over the grid.
MLBoundConstants certify_ml_bounds(double alpha, std::span<const double> grid);

namespace detail {

struct SeriesResult {
  long double value = 0.0L;
  long double abs_sum = 0.0L;
  std::size_t terms = 0;
  bool overflow = false;
};

struct AsymptoticResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t terms = 0;
};

/// Radius below which the negative-axis Taylor series is used.
double series_radius(double a);
/// |z| above which the asymptotic expansion is used.
double asymptotic_radius(double a);

SeriesResult ml_series(double a, double b, double z);
AsymptoticResult ml_asymptotic(double a, double b, double z);
/// Integral representation, z < 0, 0 < a < 1, b < 1 + a; accurate for b <= 1 + a/2.
double ml_integral(double a, double b, double z);

}  // namespace detail

}  // namespace fvp::specialfn
