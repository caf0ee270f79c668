#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdiv/detectors.hpp"
#include "tdiv/io.hpp"
#include "tdiv/numerics.hpp"

namespace tdiv::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 2,
  kSolverError = 3,
  kIoError = 4,
};

enum class Mode { Diversity, Simulate, Tables, Threshold, Unimodal };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view s);

/// Everything a run needs.  Built from defaults, then an optional JSON
/// config file, then command-line flags (later sources win).
struct RunConfig {
  Mode mode = Mode::Diversity;
  std::optional<std::string> noise;
  std::vector<double> deltas;
  std::vector<double> points;
  std::vector<DetectorKind> detectors{DetectorKind::ML, DetectorKind::Linear, DetectorKind::FA};
  std::vector<int> m_grid;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  io::Format format = io::Format::Csv;
  num::Tolerances tol;
  std::optional<double> lin_threshold;

  bool operator==(const RunConfig&) const = default;
};

/// JSON config file keys: mode, noise, delta, points, detectors, m, trials,
/// seed, workers, out, format, tol, lin_threshold.  Unknown keys and type
/// errors raise io::ParseError with the line and column of the offending
/// key.  `base` supplies the values for absent keys.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
/// Inverse of parse_run_config.
std::string run_config_json(const RunConfig& c);

/// "1e-10" (quadrature tolerance only) or "quad=..,root=..,min=..".
num::Tolerances parse_tolerances(std::string_view s, num::Tolerances base = {});

/// Entry point of the command-line tool.  Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tdiv::cli
