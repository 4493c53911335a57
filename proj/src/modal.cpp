#include "fvp/modal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fvp/errors.hpp"
#include "fvp/specialfn.hpp"

namespace fvp::modal {

namespace sf = fvp::specialfn;

namespace {

void check_parameters(double alpha, double m) {
  if (!(alpha > 0.0) || alpha > 1.0) throw DomainError("modal: alpha must lie in (0, 1]");
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("modal: eigenvalue must be positive and finite");
}

bool all_zero(std::span<const double> f) {
  for (double v : f) {
    if (v != 0.0) return false;
  }
  return true;
}

}  // namespace

KernelConvolution::KernelConvolution(double alpha, double m, const TimeGrid& grid)
    : alpha_(alpha), m_(m), size_(grid.size()), uniform_(grid.is_uniform()) {
  check_parameters(alpha, m);
  const std::size_t k_total = grid.intervals();
  if (uniform_) {
    const double h = grid.step();
    std::vector<double> phi(k_total + 1), lam(k_total + 1);
    for (std::size_t l = 0; l <= k_total; ++l) {
      const double s = static_cast<double>(l) * h;
      phi[l] = sf::kernel_primitive(alpha, m, s);
      lam[l] = sf::kernel_second_primitive(alpha, m, s);
    }
    left_.resize(k_total);
    right_.resize(k_total);
    for (std::size_t l = 0; l < k_total; ++l) {
      const double z = phi[l + 1] - phi[l];
      const double mo = lam[l + 1] - lam[l] - h * phi[l];
      left_[l] = z - mo / h;
      right_[l] = mo / h;
    }
    return;
  }
  const auto t = grid.nodes();
  const auto dim = static_cast<Eigen::Index>(size_);
  weights_ = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> phi(size_), lam(size_);
  for (std::size_t n = 1; n < size_; ++n) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = t[n] - t[i];
      phi[i] = sf::kernel_primitive(alpha, m, s);
      lam[i] = sf::kernel_second_primitive(alpha, m, s);
    }
    phi[n] = 0.0;
    lam[n] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // s runs over [t_n - t_{i+1}, t_n - t_i].
      const double h = t[i + 1] - t[i];
      const double z = phi[i] - phi[i + 1];
      const double mo = lam[i] - lam[i + 1] - h * phi[i + 1];
      weights_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) += z - mo / h;
      weights_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i + 1)) += mo / h;
    }
  }
}

double KernelConvolution::apply(std::span<const double> f, std::size_t n) const {
  if (f.size() != size_) throw MeshMismatchError("KernelConvolution: source length differs from grid size");
  if (n >= size_) throw DomainError("KernelConvolution: node index out of range");
  if (n == 0) return 0.0;
  double acc = 0.0;
  if (uniform_) {
    for (std::size_t l = 0; l < n; ++l) acc += f[n - l - 1] * left_[l] + f[n - l] * right_[l];
    return acc;
  }
  for (std::size_t i = 0; i <= n; ++i) acc += weights_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) * f[i];
  return acc;
}

std::vector<double> KernelConvolution::apply_all(std::span<const double> f) const {
  std::vector<double> out(size_, 0.0);
  for (std::size_t n = 1; n < size_; ++n) out[n] = apply(f, n);
  return out;
}

double convolve_kernel(std::span<const double> f, double alpha, double m, const TimeGrid& grid, std::size_t t_index) {
  if (t_index == 0 || t_index >= grid.size()) throw DomainError("convolve_kernel: t_index must be in [1, K]");
  if (all_zero(f)) return 0.0;
  return KernelConvolution(alpha, m, grid).apply(f, t_index);
}

ModeSolver::ModeSolver(double alpha, double m, const TimeGrid& grid, std::size_t mode_index, bool with_convolution)
    : alpha_(alpha), m_(m), mode_index_(mode_index), grid_(grid) {
  check_parameters(alpha, m);
  relax_.resize(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    relax_[n] = n == 0 ? 1.0 : sf::mlf({alpha, 1.0}, -m * std::pow(grid[n], alpha));
  }
  if (with_convolution) conv_.emplace_back(alpha, m, grid);
}

const KernelConvolution& ModeSolver::convolution() const {
  if (conv_.empty()) throw DomainError("ModeSolver: built without a convolution plan");
  return conv_.front();
}

std::vector<double> ModeSolver::convolve(std::span<const double> f) const {
  if (f.empty() || all_zero(f)) {
    if (!f.empty() && f.size() != grid_.size()) throw MeshMismatchError("ModeSolver: source length differs from grid size");
    return std::vector<double>(grid_.size(), 0.0);
  }
  return convolution().apply_all(f);
}

ModalTrajectory ModeSolver::forward(double u0, std::span<const double> f) const {
  ModalTrajectory out;
  out.mode_index = mode_index_;
  out.eigenvalue = m_;
  out.values = convolve(f);
  for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] += u0 * relax_[n];
  out.values[0] = u0;
  return out;
}

ModalTrajectory ModeSolver::backward(double phi, std::span<const double> f) const {
  const double e_t = relax_.back();
  if (!(e_t >= kRelaxationUnderflow)) {
    std::ostringstream os;
    os << "backward_mode: E_{alpha,1}(-m T^alpha) = " << e_t << " underflows for mode " << mode_index_ + 1
       << " (m = " << m_ << ", amplification " << 1.0 / e_t << ")";
    throw DegenerateError(os.str());
  }
  ModalTrajectory out;
  out.mode_index = mode_index_;
  out.eigenvalue = m_;
  out.amplification = 1.0 / e_t;
  out.t0_extrapolated = true;
  out.values = convolve(f);
  const double gap = (phi - out.values.back()) / e_t;
  for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] += gap * relax_[n];
  out.values.back() = phi;
  return out;
}

ModalTrajectory forward_mode(double m, double alpha, double u0, std::span<const double> f, const TimeGrid& grid) {
  return ModeSolver(alpha, m, grid, 0, !all_zero(f)).forward(u0, f);
}

ModalTrajectory backward_mode(double m, double alpha, double phi, std::span<const double> f, const TimeGrid& grid) {
  return ModeSolver(alpha, m, grid, 0, !all_zero(f)).backward(phi, f);
}

std::vector<double> caputo_l1(std::span<const double> values, double alpha, const TimeGrid& grid) {
  if (!grid.is_uniform()) throw MeshMismatchError("caputo_l1: the L1 weights require a uniform grid");
  if (values.size() != grid.size()) throw MeshMismatchError("caputo_l1: trajectory length differs from grid size");
  if (!(alpha > 0.0) || alpha > 1.0) throw DomainError("caputo_l1: alpha must lie in (0, 1]");
  if (!std::isfinite(values[0])) throw DomainError("caputo_l1: trajectory must be finite at t_0");
  const std::size_t k_total = grid.intervals();
  std::vector<double> b(k_total, 1.0);
  for (std::size_t l = 1; l < k_total; ++l) {
    const auto ld = static_cast<double>(l);
    b[l] = std::pow(ld + 1.0, 1.0 - alpha) - std::pow(ld, 1.0 - alpha);
  }
  const double scale = std::pow(grid.step(), -alpha) * sf::rgamma(2.0 - alpha);
  std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 1; n <= k_total; ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += b[n - k - 1] * (values[k + 1] - values[k]);
    out[n] = scale * acc;
  }
  return out;
}

std::vector<double> caputo_l1(const ModalTrajectory& traj, double alpha, const TimeGrid& grid) {
  return caputo_l1(traj.values, alpha, grid);
}

double residual_mode(const ModalTrajectory& traj, std::span<const double> f, double m, double alpha,
                     const TimeGrid& grid, std::size_t first_node) {
  if (!f.empty() && f.size() != grid.size()) throw MeshMismatchError("residual_mode: source length differs from grid size");
  const auto d = caputo_l1(traj, alpha, grid);
  double worst = 0.0;
  for (std::size_t n = std::max<std::size_t>(first_node, 1); n < grid.size(); ++n) {
    const double fn = f.empty() ? 0.0 : f[n];
    worst = std::max(worst, std::abs(d[n] - fn + m * traj.values[n]));
  }
  return worst;
}

}  // namespace fvp::modal
