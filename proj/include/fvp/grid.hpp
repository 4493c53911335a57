#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fvp {

using ModalVector = Eigen::VectorXd;

enum class GridSpacing { Uniform, Graded, Custom };

/// Discretisation 0 = t_0 < t_1 < ... < t_K = T of the time interval.
class TimeGrid {
 public:
  static TimeGrid uniform(double horizon, std::size_t intervals);
  /// t_k = T (k / K)^exponent, exponent >= 1.
  static TimeGrid graded(double horizon, std::size_t intervals, double exponent);
  /// Arbitrary strictly increasing nodes starting at 0.
  static TimeGrid from_nodes(std::vector<double> nodes);

  double horizon() const { return nodes_.back(); }
  std::size_t intervals() const { return nodes_.size() - 1; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t k) const { return nodes_[k]; }
  GridSpacing spacing() const { return spacing_; }
  double grading_exponent() const { return exponent_; }
  bool is_uniform() const { return spacing_ == GridSpacing::Uniform; }
  /// Uniform step T / K; only meaningful for uniform grids.
  double step() const { return horizon() / static_cast<double>(intervals()); }

  /// Human-readable description recorded in metadata.
  std::string describe() const;

 private:
  TimeGrid(std::vector<double> nodes, GridSpacing spacing, double exponent);

  std::vector<double> nodes_;
  GridSpacing spacing_;
  double exponent_;
};

/// Modal coefficients u_j(t_n): rows are time nodes, columns are modes.
class GridFunction {
 public:
  GridFunction(TimeGrid grid, std::size_t modes, std::string spectrum_id = {});
  GridFunction(TimeGrid grid, Eigen::MatrixXd coeffs, std::string spectrum_id = {});

  const TimeGrid& grid() const { return grid_; }
  std::size_t modes() const { return static_cast<std::size_t>(coeffs_.cols()); }
  std::size_t nodes() const { return static_cast<std::size_t>(coeffs_.rows()); }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::MatrixXd& coeffs() { return coeffs_; }
  const std::string& spectrum_id() const { return spectrum_id_; }

  ModalVector at(std::size_t n) const { return coeffs_.row(static_cast<Eigen::Index>(n)).transpose(); }
  void set(std::size_t n, const ModalVector& v) { coeffs_.row(static_cast<Eigen::Index>(n)) = v.transpose(); }
  std::vector<double> mode(std::size_t j) const;
  void set_mode(std::size_t j, std::span<const double> values);

  /// True when every coefficient is exactly zero.
  bool is_zero() const;

  /// The t_0 row holds the t -> 0 limit of a backward representation.
  bool t0_extrapolated = false;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd coeffs_;
  std::string spectrum_id_;
};

}  // namespace fvp
