#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fvp/grid.hpp"

namespace fvp::spectral {

enum class BoundaryKind { Dirichlet, Robin };

struct Boundary {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  /// Robin coefficient in dv/dn + kappa v = 0; ignored for Dirichlet.
  double kappa = 0.0;
};

/// Spatially varying coefficient on [0, L]: a constant or uniformly spaced
/// samples interpolated linearly.
class Coefficient {
 public:
  Coefficient(double value = 1.0);  // NOLINT: implicit from constant is intended
  explicit Coefficient(std::vector<double> samples);

  double operator()(double x, double length) const;
  bool is_constant() const { return samples_.empty(); }
  double constant_value() const { return value_; }
  const std::vector<double>& samples() const { return samples_; }

 private:
  double value_ = 1.0;
  std::vector<double> samples_;
};

/// -(a(x) v')' + b(x) v on (0, L) with boundary operator H; beta is the
/// fractional power applied to the spectrum downstream.
struct OperatorSpec {
  double domain_length = 1.0;
  Coefficient diffusion = 1.0;
  Coefficient potential = 0.0;
  Boundary boundary;
  double beta = 1.0;
};

enum class SpectrumSource { Analytic, Discrete, Imported };

/// Truncated eigensystem {m_j, e_j}. Immutable after construction.
///
/// Eigenfunction samples are optional: eigenvalue-only spectra support every
/// norm and modal operation but not synthesize/project.
class Spectrum {
 public:
  Spectrum(std::vector<double> eigenvalues, Eigen::MatrixXd eigenvectors, std::vector<double> nodes,
           std::vector<double> weights, SpectrumSource source, std::string id);

  std::size_t count() const { return eigenvalues_.size(); }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  double eigenvalue(std::size_t j) const { return eigenvalues_[j]; }
  /// N x M matrix, row j holds e_{j+1} at the mesh nodes.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  bool has_samples() const { return eigenvectors_.size() > 0; }
  std::size_t mesh_size() const { return nodes_.size(); }
  SpectrumSource source() const { return source_; }
  const std::string& id() const { return id_; }

  /// max_{i,j} |<e_i, e_j>_quad - delta_ij|.
  double orthonormality_residual() const;

 private:
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  SpectrumSource source_;
  std::string id_;
};

/// Dirichlet Laplacian on (0, L): m_j = (j pi / L)^2, e_j = sqrt(2/L) sin(j pi x / L).
/// `mesh_nodes` interior nodes are sampled (0 = eigenvalues only).
Spectrum eigensystem_analytic(double length, std::size_t count, std::size_t mesh_nodes);

/// First `count` eigenpairs of the symmetric second-order finite-difference
/// discretisation on `mesh_size` nodes. Requires mesh_size >= 3 count.
Spectrum eigensystem_discrete(const OperatorSpec& spec, std::size_t mesh_size, std::size_t count);

/// Coefficient-wise v_j m_j^gamma.
ModalVector apply_fractional_power(const Spectrum& s, double gamma, const ModalVector& v);

/// (sum_j v_j^2 m_j^{2 gamma})^{1/2}, accumulated in ascending j.
double v_norm(const Spectrum& s, double gamma, const ModalVector& v);

/// Bessel projection v_j = sum_i w_i f(x_i) e_j(x_i).
ModalVector project(std::span<const double> samples, const Spectrum& s);
std::vector<double> synthesize(const ModalVector& v, const Spectrum& s);

/// Quadrature L^2 norm of spatial samples.
double quad_l2_norm(std::span<const double> samples, const Spectrum& s);

struct XNormResult {
  double value = 0.0;
  /// Node index where the supremum is attained.
  std::size_t argmax = 0;
};

/// int_0^{t_n} g(tau) (t_n - tau)^{eta - 1} d tau at every node (0 at t_0).
std::vector<double> weighted_integrals(std::span<const double> times, std::span<const double> profile, double eta);

/// sup over grid nodes t_n of int_0^{t_n} g(tau) (t_n - tau)^{eta - 1} d tau for
/// the sampled profile g(tau_i) >= 0. Product integration: g is linear between
/// nodes and the weight moments are exact. A non-finite g(t_0) (singular
/// profile) is replaced by constant extension of g(t_1) on the first interval.
XNormResult x_norm_profile(std::span<const double> times, std::span<const double> profile, double eta);

/// The X_{2,eta} norm of a GridFunction: x_norm_profile of ||f(t_n)||_{L^2}.
double x_norm(const GridFunction& f, const Spectrum& s, double eta);

/// CSV export: header "j,m_j,x_1,...,x_M", a weight row with j = 0, then one
/// row per mode. Eigenvalue-only spectra have no node columns.
void write_spectrum_csv(std::ostream& os, const Spectrum& s);
Spectrum read_spectrum_csv(std::istream& is, std::string id);

}  // namespace fvp::spectral
