#include "fvp/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fvp/errors.hpp"

namespace fvp::io {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::string_view context) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  double v = 0.0;
  auto res = std::from_chars(first, last, v);
  if (res.ec == std::errc::result_out_of_range) {
    // Subnormal or huge literals: defer to strtod, which saturates.
    v = std::strtod(std::string(field).c_str(), nullptr);
    res.ec = std::errc();
    res.ptr = last;
  }
  if (res.ec != std::errc() || res.ptr != last || field.empty()) {
    std::ostringstream os;
    os << context << ": cannot parse '" << field << "' as a number";
    throw ConfigError(os.str());
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view f = line.substr(pos, end - pos);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (end == line.size()) break;
    pos = end + 1;
  }
  return out;
}

void write_grid_function_csv(std::ostream& os, const GridFunction& f) {
  os << 'j';
  for (double t : f.grid().nodes()) os << ',' << format_double(t);
  os << '\n';
  for (std::size_t j = 0; j < f.modes(); ++j) {
    os << j + 1;
    for (std::size_t n = 0; n < f.nodes(); ++n) {
      os << ',' << format_double(f.coeffs()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)));
    }
    os << '\n';
  }
}

GridFunction read_grid_function_csv(std::istream& is, std::string spectrum_id) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("grid function CSV: empty input");
  const auto header = split_csv(line);
  if (header.size() < 3 || header.front() != "j") throw ConfigError("grid function CSV: header must be 'j,t_0,...'");
  std::vector<double> nodes;
  for (std::size_t i = 1; i < header.size(); ++i) nodes.push_back(parse_double(header[i], "grid function CSV header"));
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) throw ConfigError("grid function CSV: ragged row");
    const double j = parse_double(fields[0], "grid function CSV mode index");
    if (j != static_cast<double>(rows.size() + 1)) throw ConfigError("grid function CSV: mode rows out of order");
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_double(fields[i], "grid function CSV"));
    rows.push_back(std::move(row));
  }
  const std::size_t k_total = nodes.size() - 1;
  TimeGrid grid = TimeGrid::from_nodes(nodes);
  const TimeGrid uniform = TimeGrid::uniform(nodes.back(), k_total);
  bool same = true;
  for (std::size_t i = 0; i <= k_total; ++i) same = same && uniform[i] == nodes[i];
  if (same) grid = uniform;
  GridFunction out(grid, rows.size(), std::move(spectrum_id));
  for (std::size_t j = 0; j < rows.size(); ++j) out.set_mode(j, rows[j]);
  return out;
}

nlohmann::json grid_function_metadata(const GridFunction& f, double alpha, double beta) {
  nlohmann::json meta;
  meta["alpha"] = alpha;
  meta["beta"] = beta;
  meta["T"] = f.grid().horizon();
  meta["N"] = f.modes();
  meta["K"] = f.grid().intervals();
  meta["grid"] = f.grid().describe();
  meta["spectrum"] = f.spectrum_id();
  meta["flags"] = {{"t0_extrapolated", f.t0_extrapolated}};
  return meta;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace fvp::io
