#include "fvp/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fvp/errors.hpp"

namespace fvp::specialfn {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double sinpi(double x) {
  if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == std::floor(x)) return 0.0;
  // Reduce to [-1, 1]; subtraction of an even integer is exact.
  double r = std::fmod(x, 2.0);
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  // Fold onto [-1/2, 1/2] using sin(pi r) = sin(pi (1 - r)).
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

double gamma(double x) {
  if (std::isnan(x)) throw DomainError("gamma: NaN argument");
  if (is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "gamma: pole at x = " << x;
    throw DomainError(os.str());
  }
  if (x > 171.61447887182298) {
    std::ostringstream os;
    os << "gamma: overflow for x = " << x;
    throw OverflowError(os.str());
  }
  return std::tgamma(x);
}

double rgamma(double x) {
  if (std::isnan(x)) return x;
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.5) return std::exp(-std::lgamma(x));
  if (x < -170.0) {
    // Reflection keeps the large-negative branch finite.
    return sinpi(x) * std::tgamma(1.0 - x) / kPi;
  }
  return 1.0 / std::tgamma(x);
}

double beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    std::ostringstream os;
    os << "beta: parameters must be positive, got (" << a << ", " << b << ")";
    throw DomainError(os.str());
  }
  if (a + b < 170.0) return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace fvp::specialfn
