#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fvp/errors.hpp"
#include "fvp/modal.hpp"
#include "fvp/specialfn.hpp"

using namespace fvp;
using namespace fvp::modal;

namespace {

double relax(double alpha, double m, double t) { return specialfn::mlf({alpha, 1.0}, -m * std::pow(t, alpha)); }

std::vector<double> sample(const TimeGrid& g, auto&& f) {
  std::vector<double> v(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) v[n] = f(g[n]);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t from = 0) {
  double d = 0.0;
  for (std::size_t i = from; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("convolution of zero and constant sources") {
  const auto g = TimeGrid::uniform(1.0, 64);
  const std::vector<double> zero(g.size(), 0.0);
  const std::vector<double> c(g.size(), 2.5);
  for (double alpha : {0.3, 0.7}) {
    const double m = 4.0;
    for (std::size_t n : {1UL, 17UL, 64UL}) {
      CHECK(convolve_kernel(zero, alpha, m, g, n) == 0.0);
      const double exact = 2.5 * (1.0 - relax(alpha, m, g[n])) / m;
      CHECK(std::abs(convolve_kernel(c, alpha, m, g, n) - exact) <= 1e-13);
    }
  }
  const std::vector<double> ones(g.size(), 1.0);
  for (std::size_t n : {5UL, 64UL}) CHECK(std::abs(convolve_kernel(ones, 1.0, 1.0, g, n) + std::expm1(-g[n])) <= 1e-14);
}

TEST_CASE("convolution on graded grids matches the uniform plan for constants") {
  const auto g = TimeGrid::graded(2.0, 40, 2.5);
  const KernelConvolution plan(0.6, 3.0, g);
  const std::vector<double> c(g.size(), -1.25);
  const auto all = plan.apply_all(c);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(all[n] + 1.25 * (1.0 - relax(0.6, 3.0, g[n])) / 3.0) <= 1e-13);
}

TEST_CASE("convolution is exact for linear sources") {
  const double alpha = 0.5;
  const double m = 2.0;
  const auto g = TimeGrid::uniform(1.0, 32);
  const auto f = sample(g, [](double t) { return t; });
  for (std::size_t n : {1UL, 10UL, 32UL}) {
    const double t = g[n];
    const double exact = std::pow(t, alpha + 1.0) * specialfn::mlf({alpha, alpha + 2.0}, -m * std::pow(t, alpha));
    CHECK(std::abs(convolve_kernel(f, alpha, m, g, n) - exact) <= 1e-14);
  }
}

TEST_CASE("forward_mode examples") {
  const auto g = TimeGrid::uniform(1.0, 50);
  const std::vector<double> zero;
  const auto tr = forward_mode(3.0, 0.4, 1.5, zero, g);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(tr.values[n] == doctest::Approx(1.5 * relax(0.4, 3.0, g[n])).epsilon(1e-15));
  const auto ex = forward_mode(2.0, 1.0, 1.0, zero, g);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(ex.values[n] == doctest::Approx(std::exp(-2.0 * g[n])).epsilon(1e-14));

  const auto long_grid = TimeGrid::uniform(50.0, 200);
  const std::vector<double> one(long_grid.size(), 1.0);
  const auto at50 = forward_mode(1.0, 0.9, 0.0, one, long_grid);
  CHECK(std::abs(at50.values.back() - (1.0 - relax(0.9, 1.0, 50.0))) <= 1e-12);
  const auto very_long = TimeGrid::uniform(5000.0, 200);
  const auto steady = forward_mode(1.0, 0.9, 0.0, std::vector<double>(very_long.size(), 1.0), very_long);
  CHECK(std::abs(steady.values.back() - 1.0) <= 1e-3);
  CHECK(steady.values.back() < 1.0);
}

TEST_CASE("forward_mode with a square source matches the mpmath oracle") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const auto g = TimeGrid::uniform(1.0, 1024);
  const auto f = sample(g, [](double t) { return t * t; });
  const auto tr = forward_mode(pi2, 0.5, 1.0, f, g);
  CHECK(std::abs(tr.values[512] - 0.10079822727544749452) <= 1e-7);
}

TEST_CASE("backward_mode terminal value and amplified origin") {
  const auto g = TimeGrid::uniform(1.0, 64);
  const std::vector<double> zero;
  const auto bounds = specialfn::certify_ml_bounds(0.5, specialfn::negative_log_grid(1e-6, 1e6, 1201));
  for (double m : {1.0, 10.0, 100.0}) {
    const auto tr = backward_mode(m, 0.5, 0.8, zero, g);
    CHECK(tr.values.back() == 0.8);
    CHECK(tr.t0_extrapolated);
    const double amp = 1.0 / relax(0.5, m, 1.0);
    CHECK(tr.values[0] == doctest::Approx(0.8 * amp).epsilon(1e-14));
    CHECK(tr.values[0] >= 0.8 * (1.0 + m) / bounds.c_hi);
  }
}

TEST_CASE("backward_mode reproduces forward trajectories") {
  const auto g = TimeGrid::uniform(1.0, 256);
  const auto smooth = sample(g, [](double t) { return std::cos(3.0 * t) + t * t; });
  for (double m : {1.0, 9.87, 80.0}) {
    for (double alpha : {0.3, 0.6, 0.9}) {
      const auto fw0 = forward_mode(m, alpha, 1.3, {}, g);
      const auto bw0 = backward_mode(m, alpha, fw0.values.back(), {}, g);
      CHECK(max_abs_diff(fw0.values, bw0.values) <= 1e-9);
      const auto fw = forward_mode(m, alpha, -0.4, smooth, g);
      const auto bw = backward_mode(m, alpha, fw.values.back(), smooth, g);
      CHECK(max_abs_diff(fw.values, bw.values) <= 1e-6);
    }
  }
}

TEST_CASE("solvers are linear in their data") {
  const auto g = TimeGrid::graded(1.0, 80, 2.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f1(g.size());
    std::vector<double> f2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      f1[i] = n01(rng);
      f2[i] = n01(rng);
    }
    const double a = n01(rng);
    const double b = n01(rng);
    const double x1 = n01(rng);
    const double x2 = n01(rng);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = a * f1[i] + b * f2[i];
    const ModeSolver solver(0.55, 7.0, g);
    const auto fw = solver.forward(a * x1 + b * x2, f);
    const auto fw1 = solver.forward(x1, f1);
    const auto fw2 = solver.forward(x2, f2);
    const auto bw = solver.backward(a * x1 + b * x2, f);
    const auto bw1 = solver.backward(x1, f1);
    const auto bw2 = solver.backward(x2, f2);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(fw.values[i] - a * fw1.values[i] - b * fw2.values[i]) <= 1e-10);
      CHECK(std::abs(bw.values[i] - a * bw1.values[i] - b * bw2.values[i]) <= 1e-10 * std::max(1.0, std::abs(bw.values[i])));
    }
  }
}

TEST_CASE("forward trajectories stay positive") {
  const auto g = TimeGrid::uniform(3.0, 120);
  const auto f = sample(g, [](double t) { return t * std::exp(-t); });
  for (double m : {0.5, 20.0, 400.0}) {
    const auto tr = forward_mode(m, 0.45, 0.1, f, g);
    for (double v : tr.values) CHECK(v > 0.0);
  }
}

TEST_CASE("caputo_l1 on elementary functions") {
  const auto g = TimeGrid::uniform(1.0, 200);
  const double alpha = 0.4;
  const std::vector<double> c(g.size(), 3.0);
  const auto d0 = caputo_l1(c, alpha, g);
  CHECK(std::isnan(d0[0]));
  for (std::size_t n = 1; n < g.size(); ++n) CHECK(d0[n] == 0.0);

  const auto lin = caputo_l1(sample(g, [](double t) { return t; }), alpha, g);
  for (std::size_t n = 1; n < g.size(); ++n) {
    CHECK(std::abs(lin[n] - std::pow(g[n], 1.0 - alpha) / specialfn::gamma(2.0 - alpha)) <= 1e-12);
  }

  const auto fine = TimeGrid::uniform(1.0, 4000);
  const auto pw = caputo_l1(sample(fine, [&](double t) { return std::pow(t, alpha); }), alpha, fine);
  for (std::size_t n = 400; n < fine.size(); n += 400) {
    CHECK(std::abs(pw[n] - specialfn::gamma(1.0 + alpha)) <= 1e-2);
  }
  CHECK_THROWS_AS(caputo_l1(c, alpha, TimeGrid::graded(1.0, 200, 2.0)), MeshMismatchError);
}

TEST_CASE("caputo_l1 convergence order on t^2") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    auto err = [&](std::size_t k) {
      const auto g = TimeGrid::uniform(1.0, k);
      const auto d = caputo_l1(sample(g, [](double t) { return t * t; }), alpha, g);
      double e = 0.0;
      for (std::size_t n = 1; n < g.size(); ++n) {
        e = std::max(e, std::abs(d[n] - 2.0 * std::pow(g[n], 2.0 - alpha) / specialfn::gamma(3.0 - alpha)));
      }
      return e;
    };
    const double order = std::log2(err(256) / err(512));
    CHECK(order >= 1.8 - alpha);
    CHECK(order <= 2.2 - alpha);
  }
}

TEST_CASE("residual of the stationary balance") {
  const auto g = TimeGrid::uniform(2.0, 100);
  const double m = 3.0;
  const double c = 1.7;
  ModalTrajectory tr;
  tr.values.assign(g.size(), c / m);
  const std::vector<double> f(g.size(), c);
  CHECK(residual_mode(tr, f, m, 0.6, g) <= 1e-8);
}

TEST_CASE("forward residual converges under refinement") {
  const double alpha = 0.5;
  const double m = 5.0;
  auto res = [&](std::size_t k) {
    const auto g = TimeGrid::uniform(1.0, k);
    const auto f = sample(g, [](double t) { return 1.0 + t; });
    const auto tr = forward_mode(m, alpha, 0.0, f, g);
    return residual_mode(tr, f, m, alpha, g, k / 10);
  };
  const double ratio = res(256) / res(512);
  CHECK(ratio >= std::pow(2.0, 2.0 - alpha) * 0.75);
  CHECK(ratio <= std::pow(2.0, 2.0 - alpha) * 1.25);
}

TEST_CASE("backward residual decays away from the origin") {
  const double alpha = 0.6;
  const double m = 9.0;
  std::vector<double> r;
  for (std::size_t k : {128UL, 256UL, 512UL}) {
    const auto g = TimeGrid::uniform(1.0, k);
    const auto tr = backward_mode(m, alpha, 1.0, {}, g);
    r.push_back(residual_mode(tr, {}, m, alpha, g, k / 10));
  }
  CHECK(r[1] < r[0]);
  CHECK(r[2] < r[1]);
  CHECK(std::log2(r[1] / r[2]) >= 1.0 - alpha);
}
