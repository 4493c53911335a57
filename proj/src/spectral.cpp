#include "fvp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <lapacke.h>

#include "fvp/errors.hpp"
#include "fvp/io.hpp"

namespace fvp::spectral {

namespace {

using io::format_double;

constexpr double kPi = 3.141592653589793238462643383279502884;

// b^eta - a^eta for 0 <= a <= b without cancellation when a is close to b.
double power_difference(double b, double a, double eta) {
  if (a <= 0.0) return std::pow(b, eta);
  return -std::pow(b, eta) * std::expm1(eta * std::log1p((a - b) / b));
}

void normalise_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * scale) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

void check_samples(const Spectrum& s, const char* what) {
  if (!s.has_samples()) {
    throw DomainError(std::string(what) + ": spectrum carries no eigenfunction samples");
  }
}

}  // namespace

Coefficient::Coefficient(double value) : value_(value) {}

Coefficient::Coefficient(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() == 1) {
    value_ = samples_.front();
    samples_.clear();
  } else if (samples_.empty()) {
    throw DomainError("Coefficient: empty sample list");
  }
}

double Coefficient::operator()(double x, double length) const {
  if (samples_.empty()) return value_;
  const double pos = std::clamp(x / length, 0.0, 1.0) * static_cast<double>(samples_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
}

Spectrum::Spectrum(std::vector<double> eigenvalues, Eigen::MatrixXd eigenvectors, std::vector<double> nodes,
                   std::vector<double> weights, SpectrumSource source, std::string id)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      source_(source),
      id_(std::move(id)) {
  if (eigenvalues_.empty()) throw DomainError("Spectrum: no eigenvalues");
  for (std::size_t j = 0; j < eigenvalues_.size(); ++j) {
    if (!(eigenvalues_[j] > 0.0) || !std::isfinite(eigenvalues_[j])) {
      throw DomainError("Spectrum: eigenvalues must be positive and finite");
    }
    if (j > 0 && eigenvalues_[j] < eigenvalues_[j - 1]) {
      throw DomainError("Spectrum: eigenvalues must be non-decreasing");
    }
  }
  if (eigenvectors_.size() > 0) {
    if (static_cast<std::size_t>(eigenvectors_.rows()) != eigenvalues_.size() ||
        static_cast<std::size_t>(eigenvectors_.cols()) != nodes_.size() || weights_.size() != nodes_.size()) {
      throw MeshMismatchError("Spectrum: eigenvector, node and weight dimensions disagree");
    }
  }
}

double Spectrum::orthonormality_residual() const {
  if (!has_samples()) return 0.0;
  const Eigen::Map<const Eigen::VectorXd> w(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
  const Eigen::MatrixXd gram = eigenvectors_ * w.asDiagonal() * eigenvectors_.transpose();
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

Spectrum eigensystem_analytic(double length, std::size_t count, std::size_t mesh_nodes) {
  if (!(length > 0.0)) throw DomainError("eigensystem_analytic: domain length must be positive");
  if (count == 0) throw DomainError("eigensystem_analytic: need at least one mode");
  if (mesh_nodes != 0 && mesh_nodes < count) {
    throw ResolutionError("eigensystem_analytic: mesh must have at least as many nodes as modes");
  }
  std::vector<double> m(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double k = static_cast<double>(j + 1) * kPi / length;
    m[j] = k * k;
  }
  std::vector<double> x(mesh_nodes), w(mesh_nodes);
  Eigen::MatrixXd e;
  if (mesh_nodes > 0) {
    const double h = length / static_cast<double>(mesh_nodes + 1);
    const double amp = std::sqrt(2.0 / length);
    e.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(mesh_nodes));
    for (std::size_t i = 0; i < mesh_nodes; ++i) {
      x[i] = static_cast<double>(i + 1) * h;
      w[i] = h;
      for (std::size_t j = 0; j < count; ++j) {
        // sin(j pi x_i / L) = sinpi(j (i+1) / (M+1)), reduced exactly in integers.
        const std::size_t num = ((j + 1) * (i + 1)) % (2 * (mesh_nodes + 1));
        const double arg = static_cast<double>(num) / static_cast<double>(mesh_nodes + 1);
        double r = arg > 1.0 ? arg - 2.0 : arg;
        if (r > 0.5) r = 1.0 - r;
        if (r < -0.5) r = -1.0 - r;
        e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = amp * std::sin(kPi * r);
      }
    }
  }
  std::ostringstream id;
  id << "analytic:L=" << format_double(length) << ",N=" << count << ",M=" << mesh_nodes;
  return Spectrum(std::move(m), std::move(e), std::move(x), std::move(w), SpectrumSource::Analytic, id.str());
}

Spectrum eigensystem_discrete(const OperatorSpec& spec, std::size_t mesh_size, std::size_t count) {
  const double length = spec.domain_length;
  if (!(length > 0.0)) throw DomainError("eigensystem_discrete: domain length must be positive");
  if (count == 0) throw DomainError("eigensystem_discrete: need at least one mode");
  if (mesh_size < 3 * count) {
    std::ostringstream os;
    os << "eigensystem_discrete: mesh of " << mesh_size << " nodes cannot resolve " << count
       << " modes (need at least " << 3 * count << ")";
    throw ResolutionError(os.str());
  }
  const bool robin = spec.boundary.kind == BoundaryKind::Robin;
  if (robin && !(spec.boundary.kappa > 0.0)) {
    throw DomainError("eigensystem_discrete: Robin coefficient must be positive");
  }
  const std::size_t n = mesh_size;
  const double h = robin ? length / static_cast<double>(n - 1) : length / static_cast<double>(n + 1);
  std::vector<double> x(n), w(n, h);
  for (std::size_t i = 0; i < n; ++i) x[i] = robin ? static_cast<double>(i) * h : static_cast<double>(i + 1) * h;
  if (robin) {
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
  }
  auto a = [&](double xx) {
    const double v = spec.diffusion(xx, length);
    if (!(v > 0.0)) throw DomainError("eigensystem_discrete: diffusion coefficient must be positive");
    return v;
  };
  auto b = [&](double xx) {
    const double v = spec.potential(xx, length);
    if (!(v >= 0.0)) throw DomainError("eigensystem_discrete: potential must be non-negative");
    return v;
  };

  // Energy form sum a_{i+1/2} (u_{i+1} - u_i)^2 / h + sum w_i b_i u_i^2 (+ Robin terms),
  // lumped mass W; symmetric scaling W^{-1/2} A W^{-1/2}.
  std::vector<double> diag(n, 0.0), off(n > 1 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = w[i] * b(x[i]);
  if (!robin) {
    diag[0] += a(x[0] - 0.5 * h) / h;
    diag[n - 1] += a(x[n - 1] + 0.5 * h) / h;
  } else {
    diag[0] += spec.boundary.kappa * a(0.0);
    diag[n - 1] += spec.boundary.kappa * a(length);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ai = a(x[i] + 0.5 * h) / h;
    diag[i] += ai;
    diag[i + 1] += ai;
    off[i] = -ai;
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] /= w[i];
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] /= std::sqrt(w[i] * w[i + 1]);

  std::vector<double> vals(n);
  std::vector<double> z(n * count);
  std::vector<lapack_int> support(2 * count);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', static_cast<lapack_int>(n), diag.data(),
                                         off.data(), 0.0, 0.0, 1, static_cast<lapack_int>(count), 0.0, &found,
                                         vals.data(), z.data(), static_cast<lapack_int>(n), support.data());
  if (info != 0 || static_cast<std::size_t>(found) != count) {
    std::ostringstream os;
    os << "eigensystem_discrete: LAPACK dstevr failed (info = " << info << ")";
    throw DegenerateError(os.str());
  }
  Eigen::MatrixXd e(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < count; ++j) {
    Eigen::VectorXd col(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) col(static_cast<Eigen::Index>(i)) = z[j * n + i] / std::sqrt(w[i]);
    normalise_sign(col);
    e.row(static_cast<Eigen::Index>(j)) = col.transpose();
  }
  vals.resize(count);
  std::ostringstream id;
  id << "discrete:L=" << format_double(length) << ",N=" << count << ",M=" << mesh_size
     << (robin ? ",robin(" + format_double(spec.boundary.kappa) + ")" : std::string(",dirichlet"));
  return Spectrum(std::move(vals), std::move(e), std::move(x), std::move(w), SpectrumSource::Discrete, id.str());
}

ModalVector apply_fractional_power(const Spectrum& s, double gamma, const ModalVector& v) {
  if (static_cast<std::size_t>(v.size()) > s.count()) throw MeshMismatchError("apply_fractional_power: too many modes");
  ModalVector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    out(j) = v(j) * std::pow(s.eigenvalue(static_cast<std::size_t>(j)), gamma);
  }
  return out;
}

double v_norm(const Spectrum& s, double gamma, const ModalVector& v) {
  if (static_cast<std::size_t>(v.size()) > s.count()) throw MeshMismatchError("v_norm: too many modes");
  // Scaled accumulation avoids overflow for large m_j^{2 gamma}.
  double scale = 0.0, ssq = 1.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double term = std::abs(v(j)) * std::pow(s.eigenvalue(static_cast<std::size_t>(j)), gamma);
    if (term == 0.0) continue;
    if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
    if (scale < term) {
      ssq = 1.0 + ssq * (scale / term) * (scale / term);
      scale = term;
    } else {
      ssq += (term / scale) * (term / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

ModalVector project(std::span<const double> samples, const Spectrum& s) {
  check_samples(s, "project");
  if (samples.size() != s.mesh_size()) throw MeshMismatchError("project: sample count differs from mesh size");
  ModalVector out(static_cast<Eigen::Index>(s.count()));
  const auto& e = s.eigenvectors();
  const auto w = s.weights();
  for (std::size_t j = 0; j < s.count(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      acc += w[i] * samples[i] * e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
    out(static_cast<Eigen::Index>(j)) = acc;
  }
  return out;
}

std::vector<double> synthesize(const ModalVector& v, const Spectrum& s) {
  check_samples(s, "synthesize");
  if (static_cast<std::size_t>(v.size()) > s.count()) throw MeshMismatchError("synthesize: too many modes");
  std::vector<double> out(s.mesh_size(), 0.0);
  const auto& e = s.eigenvectors();
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v(j) == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v(j) * e(j, static_cast<Eigen::Index>(i));
  }
  return out;
}

double quad_l2_norm(std::span<const double> samples, const Spectrum& s) {
  check_samples(s, "quad_l2_norm");
  if (samples.size() != s.mesh_size()) throw MeshMismatchError("quad_l2_norm: sample count differs from mesh size");
  const auto w = s.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) acc += w[i] * samples[i] * samples[i];
  return std::sqrt(acc);
}

std::vector<double> weighted_integrals(std::span<const double> times, std::span<const double> profile, double eta) {
  if (times.size() != profile.size() || times.size() < 2) {
    throw MeshMismatchError("weighted_integrals: times and profile must have equal length >= 2");
  }
  if (!(eta > 0.0)) throw DomainError("weighted_integrals: exponent must be positive");
  std::vector<double> g(profile.begin(), profile.end());
  if (!std::isfinite(g[0])) g[0] = g[1];
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(i), out.end(), std::numeric_limits<double>::infinity());
      return out;
    }
  }
  for (std::size_t n = 1; n < times.size(); ++n) {
    const double tn = times[n];
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = tn - times[i + 1];
      const double hi = tn - times[i];
      const double h = times[i + 1] - times[i];
      // With sigma = t_n - tau: g = g_i + (g_{i+1} - g_i)(hi - sigma)/h.
      const double m0 = power_difference(hi, lo, eta) / eta;
      double m1 = hi * m0 - (std::pow(hi, eta + 1.0) - std::pow(lo, eta + 1.0)) / (eta + 1.0);
      m1 = std::clamp(m1, 0.0, h * m0);
      acc += g[i] * m0 + (g[i + 1] - g[i]) * m1 / h;
    }
    out[n] = acc;
  }
  return out;
}

XNormResult x_norm_profile(std::span<const double> times, std::span<const double> profile, double eta) {
  const auto values = weighted_integrals(times, profile, eta);
  XNormResult best;
  for (std::size_t n = 1; n < values.size(); ++n) {
    if (values[n] > best.value) best = {values[n], n};
    if (std::isinf(values[n])) break;
  }
  return best;
}

double x_norm(const GridFunction& f, const Spectrum& s, double eta) {
  if (f.modes() > s.count()) throw MeshMismatchError("x_norm: grid function has more modes than the spectrum");
  std::vector<double> g(f.nodes());
  for (std::size_t n = 0; n < g.size(); ++n) g[n] = v_norm(s, 0.0, f.at(n));
  if (f.t0_extrapolated) g[0] = std::numeric_limits<double>::quiet_NaN();
  return x_norm_profile(f.grid().nodes(), g, eta).value;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "j,m_j";
  for (double x : s.nodes()) os << ',' << format_double(x);
  os << '\n';
  if (s.has_samples()) {
    os << "0,0";
    for (double w : s.weights()) os << ',' << format_double(w);
    os << '\n';
  }
  for (std::size_t j = 0; j < s.count(); ++j) {
    os << j + 1 << ',' << format_double(s.eigenvalue(j));
    if (s.has_samples()) {
      for (std::size_t i = 0; i < s.mesh_size(); ++i) {
        os << ',' << format_double(s.eigenvectors()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
      }
    }
    os << '\n';
  }
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> out;
  const std::string context = "spectrum CSV line " + std::to_string(line_no);
  for (auto field : io::split_csv(line)) out.push_back(io::parse_double(field, context));
  return out;
}

}  // namespace

Spectrum read_spectrum_csv(std::istream& is, std::string id) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("spectrum CSV: empty input");
  const auto comma = line.find(',');
  const auto second = comma == std::string::npos ? std::string::npos : line.find(',', comma + 1);
  std::vector<double> nodes;
  if (second != std::string::npos) nodes = parse_row(line.substr(second + 1), 1);
  std::vector<double> weights, vals;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = parse_row(line, line_no);
    if (row.size() != nodes.size() + 2) throw ConfigError("spectrum CSV: ragged row on line " + std::to_string(line_no));
    if (row[0] == 0.0) {
      weights.assign(row.begin() + 2, row.end());
      continue;
    }
    if (row[0] != static_cast<double>(vals.size() + 1)) throw ConfigError("spectrum CSV: modes out of order");
    vals.push_back(row[1]);
    rows.emplace_back(row.begin() + 2, row.end());
  }
  Eigen::MatrixXd e;
  if (!nodes.empty()) {
    if (weights.size() != nodes.size()) throw ConfigError("spectrum CSV: missing weight row");
    e.resize(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      for (std::size_t i = 0; i < nodes.size(); ++i) e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[j][i];
    }
  }
  Spectrum s(std::move(vals), std::move(e), std::move(nodes), std::move(weights), SpectrumSource::Imported,
             std::move(id));
  if (s.has_samples() && s.orthonormality_residual() > 1e-8) {
    throw DegenerateError("spectrum CSV: imported eigenvectors are not orthonormal in the quadrature inner product");
  }
  return s;
}

}  // namespace fvp::spectral
