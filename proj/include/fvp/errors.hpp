#pragma once

#include <stdexcept>
#include <string>

namespace fvp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (poles,
/// non-positive parameters, ordering violations).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A sampled Mittag-Leffler value contradicted complete monotonicity.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// Spatial mesh too coarse for the requested number of eigenpairs.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Sample vectors whose length does not match the spatial mesh or grid.
class MeshMismatchError : public Error {
 public:
  using Error::Error;
};

/// Backward amplification factor is not representable for some mode.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Contraction constant k0 >= 1 and the caller did not override the gate.
class GateRefusedError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Exponent tuple outside the regime an operation requires.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// A least-squares fit without usable data (vanishing norms, too few nodes).
class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fvp
