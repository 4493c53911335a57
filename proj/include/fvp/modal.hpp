#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fvp/grid.hpp"

namespace fvp::modal {

struct ModalTrajectory {
  std::size_t mode_index = 0;
  double eigenvalue = 0.0;
  std::vector<double> values;
  /// values[0] is the t -> 0 limit of the terminal-value formula.
  bool t0_extrapolated = false;
  /// 1 / E_{alpha,1}(-m T^alpha) for terminal-value solves, 1 otherwise.
  double amplification = 1.0;
};

/// Product-integration plan for (F * K)(t_n), K(t) = t^{alpha-1} E_{alpha,alpha}(-m t^alpha).
///
/// F is linear between grid nodes. On each subinterval the kernel moments are
/// exact: with Phi(s) = s^alpha E_{alpha,alpha+1}(-m s^alpha) and
/// Lambda(s) = s^{alpha+1} E_{alpha,alpha+2}(-m s^alpha), the interval
/// s in [a, b] contributes F_i (Z - Mo/h) + F_{i+1} Mo/h with
/// Z = Phi(b) - Phi(a) and Mo = Lambda(b) - Lambda(a) - (b - a) Phi(a).
/// Uniform grids store the weights by lag; other grids store the full
/// lower-triangular weight matrix.
class KernelConvolution {
 public:
  KernelConvolution(double alpha, double m, const TimeGrid& grid);

  double alpha() const { return alpha_; }
  double m() const { return m_; }
  std::size_t size() const { return size_; }

  /// (F * K)(t_n); f holds F at every node.
  double apply(std::span<const double> f, std::size_t n) const;
  /// Convolution at all nodes, entry 0 is zero.
  std::vector<double> apply_all(std::span<const double> f) const;

 private:
  double alpha_;
  double m_;
  std::size_t size_;
  bool uniform_;
  // Uniform: weight of F_{n-l-1} and F_{n-l} from the lag-l interval.
  std::vector<double> left_;
  std::vector<double> right_;
  Eigen::MatrixXd weights_;
};

/// One-shot convolution at node t_index; builds a plan internally.
double convolve_kernel(std::span<const double> f, double alpha, double m, const TimeGrid& grid, std::size_t t_index);

/// Per-mode solver: E_{alpha,1}(-m t_n^alpha) on the grid plus an optional
/// convolution plan, reusable across many sources (Picard sweeps).
class ModeSolver {
 public:
  ModeSolver(double alpha, double m, const TimeGrid& grid, std::size_t mode_index = 0, bool with_convolution = true);

  double alpha() const { return alpha_; }
  double m() const { return m_; }
  std::size_t mode_index() const { return mode_index_; }
  const TimeGrid& grid() const { return grid_; }
  /// E_{alpha,1}(-m t_n^alpha) at every node.
  const std::vector<double>& relaxation() const { return relax_; }
  bool has_convolution() const { return !conv_.empty(); }
  const KernelConvolution& convolution() const;

  /// (F * K)(t_n) at every node; an empty or identically zero f gives zeros.
  std::vector<double> convolve(std::span<const double> f) const;

  /// u(t) = u0 E_{alpha,1}(-m t^alpha) + (F * K)(t).
  ModalTrajectory forward(double u0, std::span<const double> f) const;
  /// u(t) = (F * K)(t) + [phi - (F * K)(T)] E_{alpha,1}(-m t^alpha) / E_{alpha,1}(-m T^alpha).
  ModalTrajectory backward(double phi, std::span<const double> f) const;

 private:
  double alpha_;
  double m_;
  std::size_t mode_index_;
  TimeGrid grid_;
  std::vector<double> relax_;
  std::vector<KernelConvolution> conv_;
};

/// E_{alpha,1}(-m T^alpha) below this value is reported as degenerate.
inline constexpr double kRelaxationUnderflow = 1e-290;

ModalTrajectory forward_mode(double m, double alpha, double u0, std::span<const double> f, const TimeGrid& grid);
ModalTrajectory backward_mode(double m, double alpha, double phi, std::span<const double> f, const TimeGrid& grid);

/// L1 discretisation of the Caputo derivative on a uniform grid:
/// D_n = h^{-alpha} / Gamma(2 - alpha) sum_{k<n} b_{n-k-1} (u_{k+1} - u_k),
/// b_l = (l+1)^{1-alpha} - l^{1-alpha}. Entry 0 is NaN.
std::vector<double> caputo_l1(std::span<const double> values, double alpha, const TimeGrid& grid);
std::vector<double> caputo_l1(const ModalTrajectory& traj, double alpha, const TimeGrid& grid);

/// max over nodes n >= first_node of |D_n u - F_n + m u_n|.
double residual_mode(const ModalTrajectory& traj, std::span<const double> f, double m, double alpha,
                     const TimeGrid& grid, std::size_t first_node = 1);

}  // namespace fvp::modal
