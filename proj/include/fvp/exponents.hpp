#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fvp::verify {

enum class Regime {
  Linear,            ///< (R1)-(R5)
  LinearBasic,       ///< (R1), (R2)
  NonlinearA,        ///< (R1), (R4b)
  NonlinearB,        ///< (R1b), (R4c)
  NonlinearDeriv,    ///< (R1), (R4b), (R5b)
};

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

/// Regularity exponents together with the regime whose inequalities they claim.
struct ExponentSet {
  double alpha = 0.5;
  double p = 0.5;
  double q = 0.5;
  double r = 0.0;
  double s = 0.0;
  double p_prime = 0.0;
  double q_prime = 0.0;
  double p_hat = 0.0;
  double q_hat = 0.0;
  double r_hat = 0.0;
  Regime regime = Regime::LinearBasic;
};

enum class Relation { Greater, GreaterEq, Less, LessEq, Equal };

struct ConstraintCheck {
  std::string group;      ///< "R1", "R4b", ...
  std::string name;       ///< e.g. "r <= (1 - alpha q)/(alpha q)"
  std::string parameter;  ///< parameter the constraint bounds
  Relation relation = Relation::Less;
  double value = 0.0;     ///< parameter value
  double bound = 0.0;     ///< right-hand side
  /// Signed slack: positive when satisfied, distance to the boundary.
  double margin = 0.0;
  bool satisfied = false;
};

/// Sums such as p + q are compared with 1 to this absolute tolerance.
inline constexpr double kSumTolerance = 4.0 * 2.220446049250313e-16;

/// Every constraint of the regime with its margin.
std::vector<ConstraintCheck> check_exponents(const ExponentSet& e);
/// The violated constraints; empty means the tuple is valid.
std::vector<ConstraintCheck> validate_exponents(const ExponentSet& e);

/// For each parameter, the satisfied constraint with the smallest margin.
std::vector<ConstraintCheck> binding_constraints(const ExponentSet& e);

/// Uniform sample from the valid region of `regime`.
ExponentSet sample_exponents(Regime regime, std::mt19937_64& rng);

struct Perturbation {
  std::string constraint;
  ExponentSet exponents;
};

/// One tuple per constraint with that constraint's parameter moved onto
/// (strict inequalities) or one ulp past (non-strict ones, equalities by
/// 1e-6) its boundary; every other parameter is left unchanged.
std::vector<Perturbation> boundary_perturbations(const ExponentSet& e);

}  // namespace fvp::verify
