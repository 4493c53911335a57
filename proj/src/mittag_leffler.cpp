#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fvp/errors.hpp"
#include "fvp/specialfn.hpp"

namespace fvp::specialfn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTargetRelError = 1e-10;

double cospi(double x) { return sinpi(x + 0.5); }

long double rgamma_ld(long double x) {
  if (x <= 0.0L && x == std::floor(x)) return 0.0L;
  return 1.0L / std::tgamma(x);
}

// Argument of 1/Gamma that lands on a pole up to rounding of b - a k.
bool near_pole(double x, double scale) {
  if (x > 0.5) return false;
  const double nearest = std::round(x);
  return std::abs(x - nearest) <= 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

void validate(MLParams p, double z) {
  if (!(p.a > 0.0) || !std::isfinite(p.a)) {
    std::ostringstream os;
    os << "mlf: order a must be positive and finite, got " << p.a;
    throw DomainError(os.str());
  }
  if (!std::isfinite(p.b)) throw DomainError("mlf: parameter b must be finite");
  if (std::isnan(z)) throw DomainError("mlf: NaN argument");
}

bool is_integer(double x) { return x == std::floor(x); }

// Per-thread table of 1/Gamma(a k + b) for recently used (a, b) pairs. Time
// stepping evaluates the same few parameter pairs at many arguments.
class SeriesCoefficients {
 public:
  const std::vector<long double>& table(double a, double b, std::size_t count) {
    Entry* hit = nullptr;
    for (auto& e : entries_) {
      if (e.a == a && e.b == b && !e.coef.empty()) hit = &e;
    }
    if (hit == nullptr) {
      hit = &entries_[next_];
      next_ = (next_ + 1) % entries_.size();
      hit->a = a;
      hit->b = b;
      hit->coef.clear();
    }
    while (hit->coef.size() < count) {
      const long double arg = static_cast<long double>(a) * static_cast<long double>(hit->coef.size()) + b;
      hit->coef.push_back(rgamma_ld(arg));
    }
    return hit->coef;
  }

 private:
  struct Entry {
    double a = 0.0;
    double b = 0.0;
    std::vector<long double> coef;
  };
  std::array<Entry, 8> entries_{};
  std::size_t next_ = 0;
};

SeriesCoefficients& coefficient_cache() {
  thread_local SeriesCoefficients cache;
  return cache;
}

// Exponential family a = 1 with integer b built from exp(z).
MLValue unit_order(double b, double z) {
  MLValue out;
  out.regime = MLRegime::Closed;
  if (!is_integer(b) || b > 40.0 || b < -40.0) {
    const auto s = detail::ml_series(1.0, b, z);
    out.regime = MLRegime::Series;
    out.value = static_cast<double>(s.value);
    const long double cond = s.abs_sum / std::max(std::abs(s.value), 1e-300L);
    out.accuracy_warning = s.overflow || cond * 1e-18L > kTargetRelError;
    return out;
  }
  const int n = static_cast<int>(b);
  const double ez = std::exp(z);
  if (n <= 1) {
    // E_{1,b}(z) = z E_{1,b+1}(z) + 1/Gamma(b), walked down from E_{1,1} = exp.
    double v = ez;
    for (int k = 1; k > n; --k) v = z * v + rgamma(static_cast<double>(k - 1));
    out.value = v;
    return out;
  }
  if (std::abs(z) <= 2.0) {
    const auto s = detail::ml_series(1.0, b, z);
    out.regime = MLRegime::Series;
    out.value = static_cast<double>(s.value);
    return out;
  }
  // E_{1,k+1}(z) = (E_{1,k}(z) - 1/(k-1)!) / z; stable for |z| > 2.
  double v = std::expm1(z) / z;
  for (int k = 2; k < n; ++k) v = (v - rgamma(static_cast<double>(k))) / z;
  out.value = v;
  return out;
}

}  // namespace

namespace detail {

double series_radius(double a) { return 0.5 * std::pow(10.0, a); }

double asymptotic_radius(double a) { return 2.0 * std::pow(40.0, a); }

SeriesResult ml_series(double a, double b, double z) {
  SeriesResult r;
  if (z == 0.0) {
    r.value = rgamma_ld(b);
    r.abs_sum = std::abs(r.value);
    r.terms = 1;
    return r;
  }
  const auto za = static_cast<long double>(z);
  const long double log_abs_z = std::log(std::abs(za));
  if (z > 0.0 && std::pow(std::abs(z), 1.0 / a) > 705.0) {
    r.overflow = true;
    r.value = std::numeric_limits<long double>::infinity();
    r.abs_sum = r.value;
    return r;
  }
  // Terms beyond this index are past the peak of |z|^k / Gamma(ak + b).
  const double peak = std::pow(std::abs(z), 1.0 / a) / a + 4.0 / a;
  const std::size_t k_max = 64 + static_cast<std::size_t>(4.0 * peak) + static_cast<std::size_t>(60.0 / a);

  // Coefficients are tabulated while the gamma argument stays below 1700.
  const std::size_t direct_terms =
      std::min<std::size_t>(k_max + 1, static_cast<std::size_t>(std::max(0.0, (1700.0 - b) / a)) + 1);
  const auto& coef = coefficient_cache().table(a, b, direct_terms);

  long double sum = 0.0L;
  long double comp = 0.0L;
  long double abs_sum = 0.0L;
  long double power = 1.0L;
  bool log_domain = false;
  int small_run = 0;
  std::size_t k = 0;
  for (; k <= k_max; ++k) {
    const long double arg = static_cast<long double>(a) * static_cast<long double>(k) + b;
    long double term;
    if (!log_domain && k < direct_terms && arg < 1700.0L) {
      term = power * coef[k];
    } else {
      log_domain = true;
      const long double mag = static_cast<long double>(k) * log_abs_z - std::lgamma(arg);
      const long double sign = (z < 0.0 && (k % 2 == 1)) ? -1.0L : 1.0L;
      term = sign * std::exp(mag);
    }
    // Neumaier compensated accumulation.
    const long double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
    abs_sum += std::abs(term);
    if (!std::isfinite(sum) || abs_sum > 1e300L) {
      r.overflow = true;
      break;
    }
    if (static_cast<double>(k) > peak &&
        std::abs(term) <= 1e-22L * std::abs(sum + comp)) {
      if (++small_run >= 2) break;
    } else {
      small_run = 0;
    }
    if (!log_domain) {
      power *= za;
      if (!std::isfinite(power) || std::abs(power) > 1e4000L) log_domain = true;
    }
  }
  r.value = sum + comp;
  r.abs_sum = abs_sum;
  r.terms = k + 1;
  return r;
}

AsymptoticResult ml_asymptotic(double a, double b, double z) {
  // E_{a,b}(z) = -sum_{k>=1} z^{-k} / Gamma(b - a k), |arg z| > a pi, truncated
  // at the smallest term.
  AsymptoticResult r;
  const double log_abs_z = std::log(std::abs(z));
  const double inv_z = 1.0 / z;
  long double sum = 0.0L;
  double prev_mag = std::numeric_limits<double>::infinity();
  double last_mag = 0.0;
  double inv_power = 1.0;
  bool log_domain = false;
  const std::size_t k_max = 20000;
  std::size_t k = 1;
  for (; k <= k_max; ++k) {
    const double x = b - a * static_cast<double>(k);
    if (!log_domain) {
      inv_power *= inv_z;
      if (std::abs(inv_power) < 1e-280) log_domain = true;
    }
    if (near_pole(x, std::abs(b) + a * static_cast<double>(k))) {
      continue;
    }
    double term;
    // Envelope |z|^{-k} Gamma(1 - x) / pi without the oscillating sine factor;
    // its minimum marks the optimal truncation point.
    double env;
    if (x > 0.0) {
      term = inv_power * rgamma(x);
      // 1/Gamma vanishes as x -> 0+, so the smooth bound Gamma(1 - x)/pi is used
      // there; both bounds agree at x = 1/2.
      env = x < 0.5 ? std::abs(inv_power) * std::tgamma(1.0 - x) / kPi : std::abs(term);
      if (log_domain) term = 0.0;
    } else {
      const double s = sinpi(x) / kPi;
      const double lg = std::lgamma(1.0 - x);
      env = std::exp(lg - static_cast<double>(k) * log_abs_z) / kPi;
      if (!log_domain && lg < 700.0) {
        term = inv_power * s * std::tgamma(1.0 - x);
      } else {
        const double sign = ((z < 0.0 && (k % 2 == 1)) ? -1.0 : 1.0) * (s < 0.0 ? -1.0 : 1.0);
        term = sign * env * kPi * std::abs(s);
      }
    }
    if (env > prev_mag && k > 2) {
      last_mag = env;
      break;
    }
    sum -= term;
    prev_mag = env;
    last_mag = env;
    if (env <= 1e-19 * std::abs(static_cast<double>(sum))) break;
  }
  r.value = static_cast<double>(sum);
  r.error_estimate = last_mag;
  r.terms = k;
  return r;
}

double ml_integral(double a, double b, double z) {
  // With chi = u^a in the Gorenflo-Loutchko-Luchko kernel:
  // E_{a,b}(-x) = (1/pi) int_0^inf u^{a-b} e^{-u} (u^a s1 + x s2) / (u^{2a} + 2 u^a x c + x^2) du.
  const double x = -z;
  const double s1 = sinpi(1.0 - b);
  const double s2 = sinpi(1.0 - b + a);
  const double c = cospi(a);
  auto integrand = [=](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double ua = std::pow(u, a);
    const double den = ua * ua + 2.0 * ua * x * c + x * x;
    return std::pow(u, a - b) * std::exp(-u) * (ua * s1 + x * s2) / den;
  };
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  const double u_max = 80.0 + 4.0 * std::abs(a - b);
  double total = 0.0;
  double err = 0.0;
  const double tol = 1e-14;
  // Split at the near-singularity of the denominator when a > 1/2.
  double split = -1.0;
  if (c < 0.0) {
    split = std::pow(-x * c, 1.0 / a);
    if (split >= u_max) split = -1.0;
  }
  if (split > 0.0) {
    total += integrator.integrate(integrand, 0.0, split, tol, &err);
    total += integrator.integrate(integrand, split, u_max, tol, &err);
  } else {
    total += integrator.integrate(integrand, 0.0, u_max, tol, &err);
  }
  return total / kPi;
}

}  // namespace detail

MLValue mlf_eval(MLParams p, double z) {
  validate(p, z);
  const double a = p.a;
  const double b = p.b;
  MLValue out;
  if (z == 0.0) {
    out.value = rgamma(b);
    return out;
  }
  if (a == 1.0) return unit_order(b, z);

  if (z > 0.0 || a > 1.0) {
    const auto s = detail::ml_series(a, b, z);
    out.regime = MLRegime::Series;
    out.value = static_cast<double>(s.value);
    const long double scale = std::max(std::abs(s.value), 1e-300L);
    out.accuracy_warning = s.overflow || (s.abs_sum / scale) * 1e-18L > kTargetRelError;
    if (s.overflow) out.value = std::numeric_limits<double>::infinity();
    return out;
  }

  const double x = -z;
  if (x <= detail::series_radius(a)) {
    const auto s = detail::ml_series(a, b, z);
    out.regime = MLRegime::Series;
    out.value = static_cast<double>(s.value);
    const long double scale = std::max(std::abs(s.value), 1e-300L);
    out.accuracy_warning = (s.abs_sum / scale) * 1e-18L > kTargetRelError;
    return out;
  }
  if (x >= detail::asymptotic_radius(a)) {
    const auto s = detail::ml_asymptotic(a, b, z);
    out.regime = MLRegime::Asymptotic;
    out.value = s.value;
    out.accuracy_warning = s.error_estimate > kTargetRelError * std::abs(s.value);
    return out;
  }

  out.regime = MLRegime::Integral;
  // The u^{a-b} endpoint singularity becomes non-integrable as b -> 1 + a, so
  // the quadrature is used for b <= 1 + a/2 and the recurrence lifts b above.
  const double b_direct = 1.0 + 0.5 * a;
  if (b <= b_direct) {
    out.value = detail::ml_integral(a, b, z);
    return out;
  }
  int steps = 0;
  double base = b;
  while (base > b_direct) {
    base -= a;
    ++steps;
  }
  double v = detail::ml_integral(a, base, z);
  for (int k = 0; k < steps; ++k) {
    const double bk = base + a * static_cast<double>(k);
    v = (v - rgamma(bk)) / z;
  }
  out.value = v;
  return out;
}

double mlf(MLParams p, double z) { return mlf_eval(p, z).value; }

double mlf_tilde(double alpha, double m, double t) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "mlf_tilde: t must be positive, got " << t;
    throw DomainError(os.str());
  }
  const double ta = std::pow(t, alpha);
  return ta / t * mlf({alpha, alpha}, -m * ta);
}

double kernel_primitive(double alpha, double m, double t) {
  if (t <= 0.0) return 0.0;
  const double ta = std::pow(t, alpha);
  return ta * mlf({alpha, alpha + 1.0}, -m * ta);
}

double kernel_second_primitive(double alpha, double m, double t) {
  if (t <= 0.0) return 0.0;
  const double ta = std::pow(t, alpha);
  return ta * t * mlf({alpha, alpha + 2.0}, -m * ta);
}

double kernel_antiderivative(double alpha, double m, double lo, double hi) {
  if (!(m > 0.0)) throw DomainError("kernel_antiderivative: m must be positive");
  if (!(lo >= 0.0) || !(hi >= lo)) {
    std::ostringstream os;
    os << "kernel_antiderivative: need 0 <= lo <= hi, got [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  if (lo == hi) return 0.0;
  const double v = kernel_primitive(alpha, m, hi) - kernel_primitive(alpha, m, lo);
  return std::max(v, 0.0);
}

std::vector<double> negative_log_grid(double abs_lo, double abs_hi, std::size_t count) {
  if (!(abs_lo > 0.0) || !(abs_hi >= abs_lo) || count == 0) {
    throw DomainError("negative_log_grid: need 0 < abs_lo <= abs_hi and count >= 1");
  }
  std::vector<double> z(count);
  if (count == 1) {
    z[0] = -abs_lo;
    return z;
  }
  const double l0 = std::log(abs_lo);
  const double l1 = std::log(abs_hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    z[i] = -std::exp(l0 + f * (l1 - l0));
  }
  z.front() = -abs_lo;
  z.back() = -abs_hi;
  return z;
}

MLBoundConstants certify_ml_bounds(double alpha, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("certify_ml_bounds: empty grid");
  if (!(alpha > 0.0) || alpha > 1.0) throw DomainError("certify_ml_bounds: alpha must be in (0, 1]");
  MLBoundConstants out;
  out.alpha = alpha;
  out.samples = grid.size();
  double zmin = 0.0;
  double zmax = -std::numeric_limits<double>::infinity();
  out.c_lo = std::numeric_limits<double>::infinity();
  out.c_hi = 0.0;
  std::vector<double> e_aa(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid[i];
    if (!(z < 0.0)) throw DomainError("certify_ml_bounds: grid points must be negative");
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
    const MLValue e1 = mlf_eval({alpha, 1.0}, z);
    const MLValue ea = mlf_eval({alpha, alpha}, z);
    out.accuracy_warnings += (e1.accuracy_warning ? 1 : 0) + (ea.accuracy_warning ? 1 : 0);
    if (!(e1.value > 0.0)) {
      std::ostringstream os;
      os << "certify_ml_bounds: E_{" << alpha << ",1}(" << z << ") = " << e1.value
         << " is not positive";
      throw CertificationError(os.str());
    }
    const double scaled = (1.0 - z) * e1.value;
    if (scaled < out.c_lo) {
      out.c_lo = scaled;
      out.z_at_c_lo = z;
    }
    if (scaled > out.c_hi) {
      out.c_hi = scaled;
      out.z_at_c_hi = z;
    }
    e_aa[i] = ea.value;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double az = -grid[i];
    const double envelope = out.c_hi * std::min(1.0 / (1.0 + az), 1.0 / (1.0 + az * az));
    const double ratio = std::abs(e_aa[i]) / envelope;
    out.max_envelope_ratio = std::max(out.max_envelope_ratio, ratio);
    if (ratio > 1.0) ++out.envelope_violations;
  }
  std::ostringstream spec;
  spec << grid.size() << " samples in [" << zmin << ", " << zmax << "]";
  out.sample_grid_spec = spec.str();
  return out;
}

}  // namespace fvp::specialfn
