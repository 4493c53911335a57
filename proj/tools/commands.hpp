#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "fvp/errors.hpp"
#include "fvp/grid.hpp"
#include "fvp/spectral.hpp"

namespace fvp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitParameter = 2,
  kExitGateRefused = 3,
  kExitDivergence = 4,
  kExitDiagnostic = 5,
};

/// An assertion-style diagnostic missed its tolerance; the message names the invariant.
class DiagnosticFailure : public Error {
 public:
  using Error::Error;
};

std::shared_ptr<const spectral::Spectrum> build_spectrum(const RunConfig& c, std::size_t count);
TimeGrid build_grid(const RunConfig& c, std::size_t intervals);
ModalVector build_phi(const RunConfig& c, const spectral::Spectrum& s);
ModalVector build_u0(const RunConfig& c);
/// Linear source on `grid`: zero, the table, or c_j t^power.
GridFunction build_source(const RunConfig& c, const TimeGrid& grid, const std::string& spectrum_id);

/// Prints "z,E,envelope,regime,warning" rows with ten significant digits.
void cmd_mlf(double a, double b, const std::vector<double>& z, std::ostream& out);
void cmd_spectrum(const RunConfig& c, std::ostream& log);
void cmd_solve(const RunConfig& c, std::ostream& log);
void cmd_verify(const RunConfig& c, const std::string& which, std::ostream& log);

/// Maps the library error hierarchy onto exit codes.
int exit_code_for(const std::exception& e);

/// Full command line front end; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fvp::cli
