#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "fvp/errors.hpp"
#include "fvp/modal.hpp"
#include "fvp/operators.hpp"
#include "fvp/specialfn.hpp"
#include "fvp/spectral.hpp"

using namespace fvp;
using namespace fvp::operators;

namespace {

std::shared_ptr<const spectral::Spectrum> analytic(double length, std::size_t n) {
  return std::make_shared<const spectral::Spectrum>(spectral::eigensystem_analytic(length, n, 0));
}

double relax(double alpha, double m, double t) { return specialfn::mlf({alpha, 1.0}, -m * std::pow(t, alpha)); }

GridFunction random_source(const TimeGrid& g, std::size_t modes, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  GridFunction f(g, modes);
  for (std::size_t n = 0; n < g.size(); ++n) {
    for (std::size_t j = 0; j < modes; ++j) {
      f.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = n01(rng) / (1.0 + j);
    }
  }
  return f;
}

ModalVector random_modal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  ModalVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = n01(rng);
  return v;
}

LinearProblem random_problem(std::uint64_t seed, std::size_t modes = 6, double alpha = 0.6, double beta = 0.8) {
  std::mt19937_64 rng(seed);
  const auto s = analytic(std::numbers::pi, modes);
  const auto g = TimeGrid::uniform(1.0, 64);
  return make_problem(s, alpha, beta, random_modal(modes, rng), random_source(g, modes, rng));
}

}  // namespace

TEST_CASE("O1 examples") {
  auto prob = random_problem(1);
  CHECK(o1_apply(prob, 0).cwiseAbs().maxCoeff() == 0.0);
  prob.source.coeffs().setZero();
  CHECK(o1_apply(prob, 30).cwiseAbs().maxCoeff() == 0.0);
  const std::size_t j0 = 2;
  prob.source.coeffs().col(static_cast<Eigen::Index>(j0)).setConstant(1.5);
  const auto v = o1_apply(prob, 40);
  const double m = prob.rate(j0);
  for (std::size_t j = 0; j < prob.modes(); ++j) {
    if (j == j0) {
      CHECK(std::abs(v(static_cast<Eigen::Index>(j)) - 1.5 * (1.0 - relax(prob.alpha, m, prob.grid()[40])) / m) <= 1e-13);
    } else {
      CHECK(v(static_cast<Eigen::Index>(j)) == 0.0);
    }
  }
}

TEST_CASE("O2 examples") {
  const auto prob = random_problem(2);
  std::mt19937_64 rng(4);
  const ModalVector v = random_modal(prob.modes(), rng);
  CHECK((o2_apply(prob, v, prob.grid().intervals()) - v).cwiseAbs().maxCoeff() == 0.0);

  ModalVector e1 = ModalVector::Zero(static_cast<Eigen::Index>(prob.modes()));
  e1(0) = 1.0;
  const auto bounds = specialfn::certify_ml_bounds(prob.alpha, specialfn::negative_log_grid(1e-6, 1e6, 1201));
  const auto at0 = o2_apply(prob, e1, 0);
  const double m1 = prob.rate(0);
  CHECK(at0(0) == doctest::Approx(1.0 / relax(prob.alpha, m1, 1.0)).epsilon(1e-14));
  CHECK(at0(0) >= (1.0 + m1) / bounds.c_hi);
  CHECK(at0.tail(static_cast<Eigen::Index>(prob.modes() - 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the O2 factor reduces to the backward heat factor at unit order") {
  const auto g = TimeGrid::uniform(1.0, 64);
  for (double m : {1.0, 4.0, 9.0}) {
    const auto tr = modal::backward_mode(m, 1.0, 0.6, {}, g);
    for (std::size_t n : {0UL, 20UL, 63UL}) CHECK(tr.values[n] == doctest::Approx(0.6 * std::exp(m * (1.0 - g[n]))).epsilon(1e-12));
  }
}

TEST_CASE("O3 examples") {
  auto prob = random_problem(5);
  const std::size_t K = prob.grid().intervals();
  CHECK((o3_apply(prob, K) + o1_apply(prob, K)).cwiseAbs().maxCoeff() == 0.0);
  const auto sol = solve_backward_linear(prob);
  CHECK((sol.u.at(K) - prob.phi).cwiseAbs().maxCoeff() <= 1e-12);
  prob.source.coeffs().setZero();
  for (std::size_t n : {0UL, 7UL, K}) CHECK(o3_apply(prob, n).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("homogeneous backward solution of a single mode") {
  const auto s = analytic(1.0, 5);
  const auto g = TimeGrid::uniform(0.5, 40);
  ModalVector e1 = ModalVector::Zero(5);
  e1(0) = 1.0;
  const auto prob = make_problem(s, 0.5, 0.7, e1, GridFunction(g, 5));
  const auto sol = solve_backward_linear(prob);
  const double m = std::pow(s->eigenvalue(0), 0.7);
  for (std::size_t n = 0; n < g.size(); ++n) {
    CHECK(sol.u.coeffs()(static_cast<Eigen::Index>(n), 0) == doctest::Approx(relax(0.5, m, g[n]) / relax(0.5, m, 0.5)).epsilon(1e-13));
    CHECK(sol.u.at(n).tail(4).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(sol.u.t0_extrapolated);
}

TEST_CASE("terminal condition and modal path agreement for random data") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto prob = random_problem(seed, 8);
    const auto sol = solve_backward_linear(prob);
    const std::size_t K = prob.grid().intervals();
    CHECK((sol.u.at(K) - prob.phi).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(sol.path_deviation <= 1e-10);
    for (std::size_t j = 0; j < prob.modes(); ++j) {
      const auto f = prob.source.mode(j);
      const auto tr = modal::backward_mode(prob.rate(j), prob.alpha, prob.phi(static_cast<Eigen::Index>(j)), f, prob.grid());
      for (std::size_t n = 0; n < prob.grid().size(); ++n) {
        CHECK(std::abs(tr.values[n] - sol.u.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j))) <= 1e-10);
      }
    }
  }
}

TEST_CASE("independent assembly reproduces the mild solution") {
  const auto prob = random_problem(21, 6);
  const auto sol = solve_backward_linear(prob, SolveOptions{1, false});
  const auto assembled = assemble_mild_solution(prob);
  for (std::size_t n = 1; n < prob.grid().size(); ++n) {
    const double scale = std::max(1.0, sol.u.at(n).cwiseAbs().maxCoeff());
    CHECK((assembled.at(n) - sol.u.at(n)).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("operators are linear in their data") {
  auto p1 = random_problem(31);
  auto p2 = random_problem(32);
  const double a = 0.7;
  const double b = -1.9;
  auto p = p1;
  p.phi = a * p1.phi + b * p2.phi;
  p.source.coeffs() = a * p1.source.coeffs() + b * p2.source.coeffs();
  std::mt19937_64 rng(3);
  const ModalVector v1 = random_modal(p.modes(), rng);
  const ModalVector v2 = random_modal(p.modes(), rng);
  for (std::size_t n : {1UL, 30UL, 64UL}) {
    CHECK((o1_apply(p, n) - a * o1_apply(p1, n) - b * o1_apply(p2, n)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((o3_apply(p, n) - a * o3_apply(p1, n) - b * o3_apply(p2, n)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((o2_apply(p, a * v1 + b * v2, n) - a * o2_apply(p, v1, n) - b * o2_apply(p, v2, n)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("forward solver examples") {
  const auto s = analytic(1.0, 4);
  const auto g = TimeGrid::uniform(0.3, 30);
  std::mt19937_64 rng(41);
  const ModalVector u0 = random_modal(4, rng);
  const auto u = solve_forward_linear(*s, 1.0, 1.0, u0, GridFunction(g, 4));
  CHECK((u.at(0) - u0).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double exact = u0(static_cast<Eigen::Index>(j)) * std::exp(-s->eigenvalue(j) * g[n]);
      CHECK(u.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
  const auto v = solve_forward_linear(*s, 0.4, 1.0, u0, GridFunction(g, 4));
  for (std::size_t n = 1; n < g.size(); ++n) CHECK(v.at(n).norm() <= v.at(n - 1).norm());
}

TEST_CASE("unboundedness probe") {
  const auto s = analytic(1.0, 4096);
  const std::vector<std::size_t> levels{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
    const auto r = unboundedness_probe(*s, alpha, 1.0, 1.0, levels);
    REQUIRE(r.rows.size() == levels.size());
    CHECK(r.all_hold_hi);
    CHECK(r.tails_hold);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& row = r.rows[i];
      CHECK(row.partial_sum >= row.lower_bound_hi);
      CHECK(row.forward_sum <= row.norm_squared);
      if (i > 0) CHECK(row.partial_sum > r.rows[i - 1].partial_sum);
    }
  }
  const auto half = unboundedness_probe(*s, 0.5, 1.0, 1.0, levels);
  CHECK(half.all_hold);
}

TEST_CASE("O2 amplification is monotone along the spectrum for orders up to one half") {
  for (double alpha : {0.3, 0.5}) {
    const auto prob = random_problem(51, 30, alpha);
    for (std::size_t n : {0UL, 10UL, 50UL}) {
      double prev = 0.0;
      for (std::size_t j = 0; j < prob.modes(); ++j) {
        const double ratio = relax(prob.alpha, prob.rate(j), prob.grid()[n]) / relax(prob.alpha, prob.rate(j), 1.0);
        CHECK(ratio >= prev);
        prev = ratio;
      }
    }
  }
}

TEST_CASE("above order one half the O2 ratio overshoots its limit") {
  const double alpha = 0.7;
  const auto prob = random_problem(51, 30, alpha);
  const double t = prob.grid()[10];
  const double limit = std::pow(t, -alpha);
  bool decreased = false;
  double prev = 0.0;
  for (std::size_t j = 0; j < prob.modes(); ++j) {
    const double ratio = relax(alpha, prob.rate(j), t) / relax(alpha, prob.rate(j), 1.0);
    decreased = decreased || ratio < prev;
    prev = ratio;
  }
  CHECK(decreased);
  CHECK(prev > limit);
  CHECK(prev == doctest::Approx(limit).epsilon(2e-2));
}

TEST_CASE("underflowing relaxation is reported as degenerate") {
  const auto g = TimeGrid::uniform(1.0, 8);
  CHECK_THROWS_AS(modal::backward_mode(1000.0, 1.0, 1.0, {}, g), DegenerateError);
  const auto s = analytic(1.0, 12);
  const ModalBank bank(*s, 0.999, 1.0, g, 12, false);
  CHECK(bank.degenerate_modes().empty());
}

TEST_CASE("weighted sup of a power law") {
  const auto g = TimeGrid::uniform(1.0, 100);
  GridFunction u(g, 1);
  for (std::size_t n = 1; n < g.size(); ++n) u.coeffs()(static_cast<Eigen::Index>(n), 0) = std::pow(g[n], -0.3);
  const auto w = weighted_sup(u, 0.3);
  CHECK(w.value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("problem validation") {
  auto prob = random_problem(61);
  prob.alpha = 1.5;
  CHECK_THROWS_AS(prob.validate(), DomainError);
  auto bad = random_problem(62);
  bad.phi = ModalVector::Zero(3);
  CHECK_THROWS_AS(bad.validate(), MeshMismatchError);
}
