#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "fvp/errors.hpp"
#include "fvp/operators.hpp"
#include "fvp/specialfn.hpp"
#include "fvp/spectral.hpp"
#include "fvp/verify.hpp"

using namespace fvp;
using namespace fvp::verify;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const spectral::Spectrum> analytic(std::size_t modes, double length = kPi) {
  return std::make_shared<const spectral::Spectrum>(spectral::eigensystem_analytic(length, modes, 0));
}

/// u_j(t) = c_j t^{-g}, with the t_0 row set to the t_1 value.
GridFunction power_profile(const TimeGrid& grid, const ModalVector& c, double g) {
  GridFunction u(grid, static_cast<std::size_t>(c.size()));
  for (std::size_t n = 1; n < grid.size(); ++n) u.set(n, c * std::pow(grid[n], -g));
  u.set(0, u.at(1));
  return u;
}

GridFunction polynomial_source(const TimeGrid& grid, const ModalVector& c, double power) {
  GridFunction f(grid, static_cast<std::size_t>(c.size()));
  for (std::size_t n = 0; n < grid.size(); ++n) f.set(n, c * std::pow(grid[n], power));
  return f;
}

ModalVector smooth_phi(std::size_t modes) {
  ModalVector phi(static_cast<Eigen::Index>(modes));
  for (std::size_t j = 0; j < modes; ++j) phi(static_cast<Eigen::Index>(j)) = 1.0 / static_cast<double>((j + 1) * (j + 1));
  return phi;
}

}  // namespace

TEST_CASE("least squares line") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const auto f = least_squares_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.slope_std_error <= 1e-12);
  CHECK_THROWS_AS(least_squares_line({0.0, 1.0}, {0.0, 1.0}), FitError);
  CHECK_THROWS_AS(least_squares_line({1.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), FitError);
}

TEST_CASE("norm tags") {
  CHECK(norm_tag(0.0) == "L2");
  CHECK(norm_tag(0.5).rfind("V_", 0) == 0);
}

TEST_CASE("log dyadic grid") {
  const auto g = log_dyadic_grid(1.0, 1e-3, 1e-1, 8, 16);
  CHECK(g[0] == 0.0);
  CHECK(g.horizon() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1e-3).epsilon(1e-15));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
  std::size_t inside = 0;
  for (std::size_t k = 1; k < g.size(); ++k) inside += g[k] >= 1e-3 && g[k] <= 1e-1;
  CHECK(inside >= 8 * 6);
}

TEST_CASE("edge data follows its defining law") {
  const auto s = analytic(20, 1.0);
  const auto phi = edge_regularity_data(*s, 20, 1.0, 0.5, 0.01);
  for (std::size_t j = 0; j < 20; ++j) {
    const double expected = std::pow(s->eigenvalue(j), -0.5) * std::pow(static_cast<double>(j + 1), -0.51);
    CHECK(phi(static_cast<Eigen::Index>(j)) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("synthetic power profiles are fitted exactly") {
  const auto s = analytic(3);
  const ModalVector c = ModalVector::Constant(3, 0.7);
  const auto grid = log_dyadic_grid(1.0, 1e-3, 1e-1);
  for (double g : {0.1, 0.25, 0.3, 0.45}) {
    const auto f = fit_blowup_exponent(power_profile(grid, c, g), *s, 0.0);
    CHECK(std::abs(f.exponent_hat - g) <= 1e-3);
    CHECK(f.norm_tag == "L2");
    CHECK(f.nodes >= 8);
  }
  const auto v = fit_blowup_exponent(power_profile(grid, c, 0.3), *s, 0.5);
  CHECK(std::abs(v.exponent_hat - 0.3) <= 1e-3);
}

TEST_CASE("fits need enough nodes inside the window") {
  const auto s = analytic(2);
  const auto grid = TimeGrid::uniform(1.0, 20);
  const auto u = power_profile(grid, ModalVector::Ones(2), 0.2);
  CHECK_THROWS_AS(fit_blowup_exponent(u, *s, 0.0), FitError);
  CHECK_THROWS_AS(fit_blowup_exponent(u, *s, 0.0, FitWindow{0.3, 0.5}), FitError);
  CHECK_THROWS(fit_blowup_exponent(u, *s, 0.0, FitWindow{0.3, 0.9}));
}

TEST_CASE("single-mode data shows no blow-up") {
  const auto s = analytic(4);
  const auto grid = log_dyadic_grid(0.005, 5e-6, 5e-4);
  ModalVector phi = ModalVector::Zero(4);
  phi(0) = 1.0;
  const auto prob = operators::make_problem(s, 0.5, 1.0, phi, GridFunction(grid, 4));
  const auto sol = operators::solve_backward_linear(prob);
  const auto f = fit_blowup_exponent(sol.u, *s, 0.0);
  MESSAGE("smooth exponent " << f.exponent_hat);
  CHECK(std::abs(f.exponent_hat) <= 0.05);
}

TEST_CASE("Holder modulus of elementary paths") {
  const auto s = analytic(3);
  const auto grid = TimeGrid::graded(1.0, 200, 2.0);
  GridFunction constant(grid, 3);
  for (std::size_t n = 0; n < grid.size(); ++n) constant.set(n, ModalVector::Constant(3, 2.0));
  const auto h0 = fit_holder_modulus(constant, *s, 0.0, 0.3, true);
  CHECK(h0.sup_modulus == 0.0);

  ModalVector v(3);
  v << 1.0, -0.5, 0.25;
  const double sexp = 0.35;
  GridFunction path(grid, 3);
  for (std::size_t n = 0; n < grid.size(); ++n) path.set(n, v * std::pow(grid[n], sexp));
  const auto h = fit_holder_modulus(path, *s, 0.0, sexp, true);
  CHECK(h.sup_modulus == doctest::Approx(v.norm()).epsilon(1e-12));
  CHECK(h.includes_origin);
  REQUIRE(h.fitted);
  CHECK(std::abs(h.increment_fit.exponent_hat - sexp) <= 1e-3);

  const auto interior = fit_holder_modulus(path, *s, 0.0, sexp, false);
  CHECK(interior.sup_modulus <= v.norm() * (1.0 + 1e-12));
  CHECK(interior.argmax_a > 0);
}

TEST_CASE("Holder modulus grows with the exponent on the unit interval") {
  const auto s = analytic(2);
  const auto grid = TimeGrid::uniform(1.0, 100);
  GridFunction path(grid, 2);
  for (std::size_t n = 0; n < grid.size(); ++n) path.set(n, ModalVector::Constant(2, std::sqrt(grid[n])));
  double prev = 0.0;
  for (double sexp : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double m = fit_holder_modulus(path, *s, 0.0, sexp, true).sup_modulus;
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("decomposition with zero source reduces to the datum term") {
  const auto s = analytic(6);
  const auto grid = TimeGrid::uniform(1.0, 64);
  const auto prob = operators::make_problem(s, 0.5, 1.0, smooth_phi(6), GridFunction(grid, 6));
  const auto d = increment_decomposition(prob, 10, 40);
  CHECK(d.terms[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.terms[1].cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.terms[3].cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.identity_residual <= 1e-12);
}

TEST_CASE("decomposition of a zero increment vanishes") {
  const auto s = analytic(4);
  const auto grid = TimeGrid::uniform(1.0, 32);
  ModalVector c(4);
  c << 1.0, 0.3, -0.2, 0.1;
  const auto prob = operators::make_problem(s, 0.6, 1.0, smooth_phi(4), polynomial_source(grid, c, 1.0));
  const auto d = increment_decomposition(prob, 12, 12);
  for (const auto& t : d.terms) CHECK(t.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.direct.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decomposition identity on random pairs") {
  const auto s = analytic(8);
  const auto grid = TimeGrid::uniform(1.0, 64);
  ModalVector c(8);
  c << 1.0, -0.5, 0.3, 0.2, 0.1, -0.1, 0.05, 0.02;
  const auto prob = operators::make_problem(s, 0.5, 1.0, smooth_phi(8), polynomial_source(grid, c, 1.5));
  IncrementDecomposer dec(prob, -0.5);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, grid.intervals());
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a > b) std::swap(a, b);
    const auto d = dec(a, b);
    worst = std::max(worst, d.identity_residual);
    if (a == 0) CHECK(d.terms[0].cwiseAbs().maxCoeff() == 0.0);
  }
  const auto origin = dec(0, grid.intervals() / 2);
  CHECK(origin.terms[0].cwiseAbs().maxCoeff() == 0.0);
  worst = std::max(worst, origin.identity_residual);
  MESSAGE("decomposition residual " << worst);
  CHECK(worst <= 1e-8);
}

TEST_CASE("spectral Caputo derivative satisfies the equation") {
  const auto s = analytic(4);
  const auto grid = TimeGrid::uniform(1.0, 1024);
  ModalVector c(4);
  c << 0.5, 0.2, -0.1, 0.05;
  const auto prob = operators::make_problem(s, 0.7, 1.0, smooth_phi(4), polynomial_source(grid, c, 1.0));
  const auto sol = operators::solve_backward_linear(prob);
  const auto d = spectral_caputo(prob, 0.0);
  CHECK(std::isnan(d.derivative.coeffs()(0, 0)));
  const double residual = caputo_modal_residual(d, sol.u, prob);
  double scale = 1.0;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    for (std::size_t j = 0; j < 4; ++j) {
      scale = std::max(scale, std::abs(prob.rate(j) * sol.u.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j))));
    }
  }
  CHECK(residual <= 1e-9 * scale);
  CHECK(d.weighted_norm.size() == grid.size());
  CHECK(std::isfinite(d.weighted_sup));
}

TEST_CASE("L1 deviation of the spectral Caputo derivative shrinks under refinement") {
  const auto s = analytic(4);
  const double alpha = 0.7;
  auto deviation = [&](std::size_t k) {
    const auto grid = TimeGrid::uniform(1.0, k);
    const auto prob = operators::make_problem(s, alpha, 1.0, smooth_phi(4), GridFunction(grid, 4));
    const auto sol = operators::solve_backward_linear(prob);
    return caputo_l1_deviation(spectral_caputo(prob, 0.0), sol.u, alpha);
  };
  const double coarse = deviation(1024);
  const double fine = deviation(2048);
  const double order = std::log2(coarse / fine);
  MESSAGE("L1 order " << order);
  CHECK(order >= 1.1);
  CHECK(order <= 1.5);
}

TEST_CASE("round trip recovers the initial state") {
  const auto s = analytic(8);
  const auto grid = TimeGrid::uniform(1.0, 128);
  const ModalVector u0 = smooth_phi(8);
  const auto free = roundtrip_experiment(s, 0.5, 1.0, u0, GridFunction(grid, 8));
  CHECK(free.max_deviation <= 1e-9);
  CHECK(free.max_amplification >= 1.0);
  CHECK(std::isnan(free.reference_deviation));
  CHECK(free.node_deviation.size() == grid.size());

  ModalVector c = ModalVector::Constant(8, 0.1);
  const auto forced = roundtrip_experiment(s, 0.5, 1.0, u0, polynomial_source(grid, c, 2.0));
  CHECK(forced.max_deviation <= 1e-9);
  CHECK(forced.deviation_t1 <= forced.max_deviation);
  CHECK(forced.norm_deviation <= forced.max_deviation * std::sqrt(8.0));
}

TEST_CASE("JSON records") {
  const auto s = analytic(3);
  const auto grid = log_dyadic_grid(1.0, 1e-3, 1e-1);
  const auto f = fit_blowup_exponent(power_profile(grid, ModalVector::Ones(3), 0.2), *s, 0.0);
  const auto j = to_json(f);
  CHECK(j.contains("exponent_hat"));
  const auto rt = to_json(roundtrip_experiment(s, 0.5, 1.0, ModalVector::Ones(3), GridFunction(grid, 3)));
  CHECK(rt.contains("max_deviation"));
}
