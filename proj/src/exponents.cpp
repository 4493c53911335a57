#include "fvp/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "fvp/errors.hpp"

namespace fvp::verify {

namespace {

using Member = double ExponentSet::*;

struct Constraint {
  const char* group;
  const char* name;
  const char* parameter;
  Member member;
  Relation relation;
  std::function<double(const ExponentSet&)> bound;
};

double r_bound(double alpha, double q) { return (1.0 - alpha * q) / (alpha * q); }

const std::vector<Constraint>& group_alpha() {
  static const std::vector<Constraint> g = {
      {"alpha", "alpha > 0", "alpha", &ExponentSet::alpha, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"alpha", "alpha < 1", "alpha", &ExponentSet::alpha, Relation::Less, [](const ExponentSet&) { return 1.0; }},
  };
  return g;
}

const std::vector<Constraint>& group_r1() {
  static const std::vector<Constraint> g = {
      {"R1", "p > 0", "p", &ExponentSet::p, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R1", "p < 1", "p", &ExponentSet::p, Relation::Less, [](const ExponentSet&) { return 1.0; }},
      {"R1", "q > 0", "q", &ExponentSet::q, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R1", "q < 1", "q", &ExponentSet::q, Relation::Less, [](const ExponentSet&) { return 1.0; }},
      {"R1", "p + q = 1", "q", &ExponentSet::q, Relation::Equal, [](const ExponentSet& e) { return 1.0 - e.p; }},
  };
  return g;
}

const std::vector<Constraint>& group_r2() {
  static const std::vector<Constraint> g = {
      {"R2", "r > 0", "r", &ExponentSet::r, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R2", "r <= (1 - alpha q)/(alpha q)", "r", &ExponentSet::r, Relation::LessEq,
       [](const ExponentSet& e) { return r_bound(e.alpha, e.q); }},
  };
  return g;
}

const std::vector<Constraint>& group_r3() {
  static const std::vector<Constraint> g = {
      {"R3", "s > 0", "s", &ExponentSet::s, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R3", "s < min(alpha q, 1 - alpha q)", "s", &ExponentSet::s, Relation::Less,
       [](const ExponentSet& e) { return std::min(e.alpha * e.q, 1.0 - e.alpha * e.q); }},
  };
  return g;
}

const std::vector<Constraint>& group_r4() {
  static const std::vector<Constraint> g = {
      {"R4", "p' > 0", "p_prime", &ExponentSet::p_prime, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R4", "p' <= p - s/alpha", "p_prime", &ExponentSet::p_prime, Relation::LessEq,
       [](const ExponentSet& e) { return e.p - e.s / e.alpha; }},
      {"R4", "q' = 1 - p'", "q_prime", &ExponentSet::q_prime, Relation::Equal,
       [](const ExponentSet& e) { return 1.0 - e.p_prime; }},
      {"R4", "r > 0", "r", &ExponentSet::r, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R4", "r <= (1 - alpha q')/(alpha q')", "r", &ExponentSet::r, Relation::LessEq,
       [](const ExponentSet& e) { return r_bound(e.alpha, e.q_prime); }},
  };
  return g;
}

const std::vector<Constraint>& group_r5() {
  static const std::vector<Constraint> g = {
      {"R5", "q^ >= 0", "q_hat", &ExponentSet::q_hat, Relation::GreaterEq, [](const ExponentSet&) { return 0.0; }},
      {"R5", "q^ <= min(p, q, s/alpha)", "q_hat", &ExponentSet::q_hat, Relation::LessEq,
       [](const ExponentSet& e) { return std::min({e.p, e.q, e.s / e.alpha}); }},
      {"R5", "p^ = 1 - q^", "p_hat", &ExponentSet::p_hat, Relation::Equal,
       [](const ExponentSet& e) { return 1.0 - e.q_hat; }},
      {"R5", "r^ > 0", "r_hat", &ExponentSet::r_hat, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R5", "r^ <= (1 - alpha)/alpha", "r_hat", &ExponentSet::r_hat, Relation::LessEq,
       [](const ExponentSet& e) { return (1.0 - e.alpha) / e.alpha; }},
  };
  return g;
}

const std::vector<Constraint>& group_r1b() {
  static const std::vector<Constraint> g = {
      {"R1b", "q > 0", "q", &ExponentSet::q, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R1b", "q < p", "q", &ExponentSet::q, Relation::Less, [](const ExponentSet& e) { return e.p; }},
      {"R1b", "p < 1", "p", &ExponentSet::p, Relation::Less, [](const ExponentSet&) { return 1.0; }},
      {"R1b", "p + q = 1", "q", &ExponentSet::q, Relation::Equal, [](const ExponentSet& e) { return 1.0 - e.p; }},
  };
  return g;
}

std::vector<Constraint> group_r4_variant(const char* tag, bool strict_p, bool minus_q) {
  std::vector<Constraint> g;
  g.push_back({tag, "p' > 0", "p_prime", &ExponentSet::p_prime, Relation::Greater,
               [](const ExponentSet&) { return 0.0; }});
  if (minus_q) {
    g.push_back({tag, "p' <= p - q", "p_prime", &ExponentSet::p_prime, Relation::LessEq,
                 [](const ExponentSet& e) { return e.p - e.q; }});
  } else {
    g.push_back({tag, "p' < p", "p_prime", &ExponentSet::p_prime, strict_p ? Relation::Less : Relation::LessEq,
                 [](const ExponentSet& e) { return e.p; }});
  }
  g.push_back({tag, "q' = 1 - p'", "q_prime", &ExponentSet::q_prime, Relation::Equal,
               [](const ExponentSet& e) { return 1.0 - e.p_prime; }});
  g.push_back({tag, "r > 0", "r", &ExponentSet::r, Relation::Greater, [](const ExponentSet&) { return 0.0; }});
  g.push_back({tag, "r <= (1 - alpha q')/(alpha q')", "r", &ExponentSet::r, Relation::LessEq,
               [](const ExponentSet& e) { return r_bound(e.alpha, e.q_prime); }});
  return g;
}

const std::vector<Constraint>& group_r4b() {
  static const std::vector<Constraint> g = group_r4_variant("R4b", true, false);
  return g;
}

const std::vector<Constraint>& group_r4c() {
  static const std::vector<Constraint> g = group_r4_variant("R4c", false, true);
  return g;
}

const std::vector<Constraint>& group_r5b() {
  static const std::vector<Constraint> g = {
      {"R5b", "q^ >= 0", "q_hat", &ExponentSet::q_hat, Relation::GreaterEq, [](const ExponentSet&) { return 0.0; }},
      {"R5b", "q^ < q", "q_hat", &ExponentSet::q_hat, Relation::Less, [](const ExponentSet& e) { return e.q; }},
      {"R5b", "p^ = 1 - q^", "p_hat", &ExponentSet::p_hat, Relation::Equal,
       [](const ExponentSet& e) { return 1.0 - e.q_hat; }},
      {"R5b", "r^ > 0", "r_hat", &ExponentSet::r_hat, Relation::Greater, [](const ExponentSet&) { return 0.0; }},
      {"R5b", "r^ <= (1 - alpha)/alpha", "r_hat", &ExponentSet::r_hat, Relation::LessEq,
       [](const ExponentSet& e) { return (1.0 - e.alpha) / e.alpha; }},
  };
  return g;
}

std::vector<const Constraint*> constraints_for(Regime regime) {
  std::vector<const std::vector<Constraint>*> groups{&group_alpha()};
  switch (regime) {
    case Regime::Linear:
      groups.insert(groups.end(), {&group_r1(), &group_r2(), &group_r3(), &group_r4(), &group_r5()});
      break;
    case Regime::LinearBasic:
      groups.insert(groups.end(), {&group_r1(), &group_r2()});
      break;
    case Regime::NonlinearA:
      groups.insert(groups.end(), {&group_r1(), &group_r4b()});
      break;
    case Regime::NonlinearB:
      groups.insert(groups.end(), {&group_r1b(), &group_r4c()});
      break;
    case Regime::NonlinearDeriv:
      groups.insert(groups.end(), {&group_r1(), &group_r4b(), &group_r5b()});
      break;
  }
  std::vector<const Constraint*> out;
  for (const auto* g : groups) {
    for (const auto& c : *g) out.push_back(&c);
  }
  return out;
}

ConstraintCheck evaluate(const Constraint& c, const ExponentSet& e) {
  ConstraintCheck out;
  out.group = c.group;
  out.name = c.name;
  out.parameter = c.parameter;
  out.relation = c.relation;
  out.value = e.*c.member;
  out.bound = c.bound(e);
  const double x = out.value;
  const double b = out.bound;
  switch (c.relation) {
    case Relation::Greater:
      out.margin = x - b;
      out.satisfied = x > b;
      break;
    case Relation::GreaterEq:
      out.margin = x - b;
      out.satisfied = x >= b;
      break;
    case Relation::Less:
      out.margin = b - x;
      out.satisfied = x < b;
      break;
    case Relation::LessEq:
      out.margin = b - x;
      out.satisfied = x <= b;
      break;
    case Relation::Equal:
      out.margin = kSumTolerance - std::abs(x - b);
      out.satisfied = out.margin >= 0.0;
      break;
  }
  if (std::isnan(x) || std::isnan(b)) out.satisfied = false;
  return out;
}

// Uniform draw from the open interval (lo, hi).
double draw(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  do {
    v = u(rng);
  } while (v == 0.0);
  const double x = lo + (hi - lo) * v;
  return x < hi ? x : lo + 0.5 * (hi - lo);
}

}  // namespace

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Linear: return "R_linear";
    case Regime::LinearBasic: return "R_linear_basic";
    case Regime::NonlinearA: return "R_nonlinear_a";
    case Regime::NonlinearB: return "R_nonlinear_b";
    case Regime::NonlinearDeriv: return "R_nonlinear_deriv";
  }
  return "unknown";
}

Regime regime_from_name(const std::string& name) {
  for (Regime r : {Regime::Linear, Regime::LinearBasic, Regime::NonlinearA, Regime::NonlinearB,
                   Regime::NonlinearDeriv}) {
    if (regime_name(r) == name) return r;
  }
  throw ConfigError("unknown exponent regime '" + name + "'");
}

std::vector<ConstraintCheck> check_exponents(const ExponentSet& e) {
  std::vector<ConstraintCheck> out;
  for (const auto* c : constraints_for(e.regime)) out.push_back(evaluate(*c, e));
  return out;
}

std::vector<ConstraintCheck> validate_exponents(const ExponentSet& e) {
  std::vector<ConstraintCheck> out;
  for (auto& c : check_exponents(e)) {
    if (!c.satisfied) out.push_back(std::move(c));
  }
  return out;
}

std::vector<ConstraintCheck> binding_constraints(const ExponentSet& e) {
  std::map<std::string, ConstraintCheck> tightest;
  std::vector<std::string> order;
  for (auto& c : check_exponents(e)) {
    if (!c.satisfied) continue;
    auto it = tightest.find(c.parameter);
    if (it == tightest.end()) {
      order.push_back(c.parameter);
      tightest.emplace(c.parameter, c);
    } else if (c.margin < it->second.margin) {
      it->second = c;
    }
  }
  std::vector<ConstraintCheck> out;
  for (const auto& name : order) out.push_back(tightest.at(name));
  return out;
}

ExponentSet sample_exponents(Regime regime, std::mt19937_64& rng) {
  ExponentSet e;
  e.regime = regime;
  e.alpha = draw(rng, 0.05, 0.95);
  if (regime == Regime::NonlinearB) {
    e.q = draw(rng, 0.02, 0.48);
  } else {
    e.q = draw(rng, 0.05, 0.95);
  }
  e.p = 1.0 - e.q;
  switch (regime) {
    case Regime::Linear: {
      const double s_max = std::min({e.alpha * e.q, 1.0 - e.alpha * e.q, e.alpha * e.p});
      e.s = draw(rng, 0.0, s_max);
      e.p_prime = draw(rng, 0.0, e.p - e.s / e.alpha);
      e.q_prime = 1.0 - e.p_prime;
      e.r = draw(rng, 0.0, std::min(r_bound(e.alpha, e.q), r_bound(e.alpha, e.q_prime)));
      e.q_hat = draw(rng, 0.0, std::min({e.p, e.q, e.s / e.alpha}));
      e.p_hat = 1.0 - e.q_hat;
      e.r_hat = draw(rng, 0.0, (1.0 - e.alpha) / e.alpha);
      break;
    }
    case Regime::LinearBasic:
      e.r = draw(rng, 0.0, r_bound(e.alpha, e.q));
      break;
    case Regime::NonlinearA:
    case Regime::NonlinearDeriv:
      e.p_prime = draw(rng, 0.0, e.p);
      e.q_prime = 1.0 - e.p_prime;
      e.r = draw(rng, 0.0, r_bound(e.alpha, e.q_prime));
      if (regime == Regime::NonlinearDeriv) {
        e.q_hat = draw(rng, 0.0, e.q);
        e.p_hat = 1.0 - e.q_hat;
        e.r_hat = draw(rng, 0.0, (1.0 - e.alpha) / e.alpha);
      }
      break;
    case Regime::NonlinearB:
      e.p_prime = draw(rng, 0.0, e.p - e.q);
      e.q_prime = 1.0 - e.p_prime;
      e.r = draw(rng, 0.0, r_bound(e.alpha, e.q_prime));
      break;
  }
  return e;
}

std::vector<Perturbation> boundary_perturbations(const ExponentSet& e) {
  std::vector<Perturbation> out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const auto* c : constraints_for(e.regime)) {
    ExponentSet moved = e;
    const double b = c->bound(e);
    double& x = moved.*(c->member);
    switch (c->relation) {
      case Relation::Greater:
      case Relation::Less: x = b; break;
      case Relation::GreaterEq: x = std::nextafter(b, -inf); break;
      case Relation::LessEq: x = std::nextafter(b, inf); break;
      case Relation::Equal: x = b + 1e-6; break;
    }
    out.push_back({std::string(c->group) + ": " + c->name, moved});
  }
  return out;
}

}  // namespace fvp::verify
