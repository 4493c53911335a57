#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fvp/grid.hpp"

namespace fvp::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);

/// Parses a full field as a double; throws ConfigError naming `context`.
double parse_double(std::string_view field, std::string_view context);

/// Splits one CSV line on commas; surrounding blanks and CR are dropped.
std::vector<std::string_view> split_csv(std::string_view line);

/// Header "j,t_0,...,t_K", then one row "j,u_j(t_0),...,u_j(t_K)" per mode (j from 1).
void write_grid_function_csv(std::ostream& os, const GridFunction& f);
/// Inverse of write_grid_function_csv. Node lists that coincide bit for bit
/// with a uniform grid are restored as uniform.
GridFunction read_grid_function_csv(std::istream& is, std::string spectrum_id = {});

/// Sidecar record for a GridFunction export.
nlohmann::json grid_function_metadata(const GridFunction& f, double alpha, double beta);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fvp::io
