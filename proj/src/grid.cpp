#include "fvp/grid.hpp"

#include <cmath>
#include <sstream>

#include "fvp/errors.hpp"

namespace fvp {

TimeGrid::TimeGrid(std::vector<double> nodes, GridSpacing spacing, double exponent)
    : nodes_(std::move(nodes)), spacing_(spacing), exponent_(exponent) {}

TimeGrid TimeGrid::uniform(double horizon, std::size_t intervals) {
  if (!(horizon > 0.0) || intervals == 0) throw DomainError("TimeGrid: need T > 0 and K >= 1");
  std::vector<double> t(intervals + 1);
  const auto k_total = static_cast<double>(intervals);
  for (std::size_t k = 0; k <= intervals; ++k) t[k] = horizon * (static_cast<double>(k) / k_total);
  t.back() = horizon;
  return TimeGrid(std::move(t), GridSpacing::Uniform, 1.0);
}

TimeGrid TimeGrid::graded(double horizon, std::size_t intervals, double exponent) {
  if (!(horizon > 0.0) || intervals == 0) throw DomainError("TimeGrid: need T > 0 and K >= 1");
  if (!(exponent >= 1.0)) throw DomainError("TimeGrid: grading exponent must be >= 1");
  std::vector<double> t(intervals + 1);
  const auto k_total = static_cast<double>(intervals);
  for (std::size_t k = 0; k <= intervals; ++k) {
    t[k] = horizon * std::pow(static_cast<double>(k) / k_total, exponent);
  }
  t.back() = horizon;
  return TimeGrid(std::move(t), exponent == 1.0 ? GridSpacing::Uniform : GridSpacing::Graded, exponent);
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2 || nodes.front() != 0.0) throw DomainError("TimeGrid: nodes must start at 0");
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (!(nodes[k] > nodes[k - 1])) throw DomainError("TimeGrid: nodes must be strictly increasing");
  }
  return TimeGrid(std::move(nodes), GridSpacing::Custom, 0.0);
}

std::string TimeGrid::describe() const {
  std::ostringstream os;
  switch (spacing_) {
    case GridSpacing::Uniform: os << "uniform"; break;
    case GridSpacing::Graded: os << "graded(" << exponent_ << ")"; break;
    case GridSpacing::Custom: os << "custom"; break;
  }
  os << ",K=" << intervals() << ",T=" << horizon();
  return os.str();
}

GridFunction::GridFunction(TimeGrid grid, std::size_t modes, std::string spectrum_id)
    : grid_(std::move(grid)),
      coeffs_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_.size()), static_cast<Eigen::Index>(modes))),
      spectrum_id_(std::move(spectrum_id)) {}

GridFunction::GridFunction(TimeGrid grid, Eigen::MatrixXd coeffs, std::string spectrum_id)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)), spectrum_id_(std::move(spectrum_id)) {
  if (static_cast<std::size_t>(coeffs_.rows()) != grid_.size()) {
    throw MeshMismatchError("GridFunction: coefficient rows must equal the number of time nodes");
  }
}

std::vector<double> GridFunction::mode(std::size_t j) const {
  std::vector<double> out(nodes());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = coeffs_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  return out;
}

void GridFunction::set_mode(std::size_t j, std::span<const double> values) {
  if (values.size() != nodes()) throw MeshMismatchError("GridFunction::set_mode: length mismatch");
  for (std::size_t n = 0; n < values.size(); ++n) {
    coeffs_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = values[n];
  }
}

bool GridFunction::is_zero() const { return (coeffs_.array() == 0.0).all(); }

}  // namespace fvp
