#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "fvp/errors.hpp"
#include "fvp/specialfn.hpp"
#include "fvp/spectral.hpp"

using namespace fvp;
using namespace fvp::spectral;

namespace {

constexpr double kPi = std::numbers::pi;

ModalVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ModalVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = g(rng);
  return v;
}

OperatorSpec laplacian(double length) {
  OperatorSpec spec;
  spec.domain_length = length;
  return spec;
}

}  // namespace

TEST_CASE("analytic eigenvalues") {
  const auto s = eigensystem_analytic(kPi, 3, 0);
  REQUIRE(s.count() == 3);
  CHECK(s.eigenvalue(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.eigenvalue(1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(s.eigenvalue(2) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(!s.has_samples());
  const auto unit = eigensystem_analytic(1.0, 1, 0);
  CHECK(unit.eigenvalue(0) == doctest::Approx(9.8696044010893586).epsilon(1e-15));
}

TEST_CASE("analytic eigenfunctions are orthonormal under the quadrature") {
  const auto s = eigensystem_analytic(1.0, 8, 400);
  REQUIRE(s.has_samples());
  CHECK(s.orthonormality_residual() <= 1e-10);
  const auto& e = s.eigenvectors();
  double inner = 0.0;
  for (std::size_t i = 0; i < s.mesh_size(); ++i) inner += s.weights()[i] * e(0, static_cast<Eigen::Index>(i)) * e(1, static_cast<Eigen::Index>(i));
  CHECK(std::abs(inner) <= 1e-10);
}

TEST_CASE("discrete Laplacian on (0, pi)") {
  const auto s = eigensystem_discrete(laplacian(kPi), 2000, 5);
  CHECK(std::abs(s.eigenvalue(0) - 1.0) <= 1e-5);
  CHECK(s.orthonormality_residual() <= 1e-8);
  for (std::size_t j = 1; j < s.count(); ++j) CHECK(s.eigenvalue(j) > s.eigenvalue(j - 1));
}

TEST_CASE("discrete solve rejects coarse meshes") {
  CHECK_THROWS_AS(eigensystem_discrete(laplacian(1.0), 20, 10), ResolutionError);
}

TEST_CASE("constant potential shifts the spectrum") {
  auto shifted = laplacian(1.0);
  shifted.potential = 2.5;
  const auto base = eigensystem_discrete(laplacian(1.0), 300, 6);
  const auto s = eigensystem_discrete(shifted, 300, 6);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(s.eigenvalue(j) - base.eigenvalue(j) - 2.5) <= 1e-9 * s.eigenvalue(j));
}

TEST_CASE("Robin eigenvalue increases monotonically towards Dirichlet") {
  const double dirichlet = eigensystem_discrete(laplacian(1.0), 800, 2).eigenvalue(0);
  double prev = 0.0;
  for (double kappa : {10.0, 100.0, 1000.0}) {
    auto spec = laplacian(1.0);
    spec.boundary = {BoundaryKind::Robin, kappa};
    const double m1 = eigensystem_discrete(spec, 800, 2).eigenvalue(0);
    CHECK(m1 > prev);
    CHECK(m1 < dirichlet);
    prev = m1;
  }
  CHECK(dirichlet - prev < 0.1 * dirichlet);
}

TEST_CASE("discrete eigenvalues converge at second order") {
  const auto coarse = eigensystem_discrete(laplacian(kPi), 200, 4);
  const auto fine = eigensystem_discrete(laplacian(kPi), 400, 4);
  const auto finer = eigensystem_discrete(laplacian(kPi), 800, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const double ratio = (coarse.eigenvalue(j) - fine.eigenvalue(j)) / (fine.eigenvalue(j) - finer.eigenvalue(j));
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("fractional powers") {
  const auto s = eigensystem_analytic(kPi, 5, 0);
  std::mt19937_64 rng(3);
  const ModalVector v = random_vector(5, rng);
  CHECK((apply_fractional_power(s, 0.0, v) - v).cwiseAbs().maxCoeff() == 0.0);
  ModalVector e1 = ModalVector::Zero(5);
  e1(0) = 1.0;
  CHECK((apply_fractional_power(s, 1.0, e1) - e1).cwiseAbs().maxCoeff() == 0.0);
  const ModalVector twice = apply_fractional_power(s, 0.5, apply_fractional_power(s, 0.5, v));
  CHECK((twice - apply_fractional_power(s, 1.0, v)).cwiseAbs().maxCoeff() <= 1e-13 * v.cwiseAbs().maxCoeff() * 25.0);
}

TEST_CASE("Hilbert scale norms") {
  const auto s = eigensystem_analytic(1.0, 6, 0);
  std::mt19937_64 rng(5);
  const ModalVector v = random_vector(6, rng);
  CHECK(v_norm(s, 0.0, v) == doctest::Approx(v.norm()).epsilon(1e-15));
  ModalVector e1 = ModalVector::Zero(6);
  e1(0) = 1.0;
  for (double g : {-1.0, 0.3, 2.0}) CHECK(v_norm(s, g, e1) == doctest::Approx(std::pow(s.eigenvalue(0), g)).epsilon(1e-15));
  for (int trial = 0; trial < 50; ++trial) {
    const ModalVector a = random_vector(6, rng);
    const ModalVector b = random_vector(6, rng);
    CHECK(std::abs(a.dot(b)) <= v_norm(s, -0.7, a) * v_norm(s, 0.7, b) * (1.0 + 1e-14));
  }
}

TEST_CASE("projection and synthesis") {
  const auto s = eigensystem_analytic(1.0, 6, 300);
  std::vector<double> e1(s.mesh_size());
  for (std::size_t i = 0; i < e1.size(); ++i) e1[i] = s.eigenvectors()(0, static_cast<Eigen::Index>(i));
  const auto back = synthesize(project(e1, s), s);
  double worst = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) worst = std::max(worst, std::abs(back[i] - e1[i]));
  CHECK(worst <= 1e-10);

  const std::vector<double> zero(s.mesh_size(), 0.0);
  CHECK(project(zero, s).cwiseAbs().maxCoeff() == 0.0);

  std::vector<double> f(s.mesh_size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(s.nodes()[i]) * (1.0 - s.nodes()[i]);
  CHECK(project(f, s).norm() <= quad_l2_norm(f, s) * (1.0 + 1e-12));

  std::vector<double> wrong(s.mesh_size() + 1, 1.0);
  CHECK_THROWS_AS(project(wrong, s), MeshMismatchError);
}

TEST_CASE("synthesized L2 norm equals the coefficient norm") {
  const auto s = eigensystem_discrete(laplacian(1.0), 600, 10);
  std::mt19937_64 rng(9);
  const ModalVector v = random_vector(10, rng);
  CHECK(std::abs(quad_l2_norm(synthesize(v, s), s) - v_norm(s, 0.0, v)) <= 1e-8);
}

TEST_CASE("x_norm of a unit profile") {
  const auto grid = TimeGrid::uniform(2.0, 200);
  const auto nodes = grid.nodes();
  const std::vector<double> ones(grid.size(), 1.0);
  for (double eta : {0.25, 0.5, 0.9}) {
    const auto r = x_norm_profile(nodes, ones, eta);
    CHECK(r.value == doctest::Approx(std::pow(2.0, eta) / eta).epsilon(1e-12));
    CHECK(r.argmax == grid.size() - 1);
  }
  const std::vector<double> zeros(grid.size(), 0.0);
  CHECK(x_norm_profile(nodes, zeros, 0.5).value == 0.0);
}

TEST_CASE("x_norm of a singular power profile") {
  const double T = 1.5;
  const auto grid = TimeGrid::graded(T, 2000, 3.0);
  for (auto [eta, g] : {std::pair{0.5, 0.25}, std::pair{0.75, 0.5}}) {
    std::vector<double> profile(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) profile[n] = n == 0 ? INFINITY : std::pow(grid[n], -g);
    const double exact = std::pow(T, eta - g) * specialfn::beta(eta, 1.0 - g);
    CHECK(std::abs(x_norm_profile(grid.nodes(), profile, eta).value - exact) <= 1e-4 * exact);
  }
}

TEST_CASE("x_norm of a GridFunction uses the L2 norm per node") {
  const auto s = eigensystem_analytic(1.0, 2, 0);
  GridFunction f(TimeGrid::uniform(1.0, 50), 2);
  for (std::size_t n = 0; n < f.nodes(); ++n) f.set(n, ModalVector::Constant(2, std::sqrt(0.5)));
  CHECK(x_norm(f, s, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("spectrum CSV round trip") {
  const auto s = eigensystem_discrete(laplacian(2.0), 60, 4);
  std::stringstream ss;
  write_spectrum_csv(ss, s);
  const auto r = read_spectrum_csv(ss, "copy");
  REQUIRE(r.count() == s.count());
  for (std::size_t j = 0; j < s.count(); ++j) CHECK(r.eigenvalue(j) == s.eigenvalue(j));
  CHECK((r.eigenvectors() - s.eigenvectors()).cwiseAbs().maxCoeff() == 0.0);
}
