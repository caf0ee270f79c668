#pragma once

// Text formats shared by the command-line tool: the M-grid and count
// grammars, CSV (RFC 4180 quoting) and JSON writers, and readers that turn
// emitted files back into the structures that produced them.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdiv/diversity.hpp"
#include "tdiv/simulation.hpp"

namespace tdiv::io {

/// Malformed user input.  line/column are 1-based when known.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };
Format parse_format(std::string_view s);

/// "a..b", "a..b:step" and comma lists of either ("1,3,10", "1..5,10..50:10").
/// Result is sorted and de-duplicated; every M >= 1.
std::vector<int> parse_m_grid(std::string_view s);
/// Compact inverse of parse_m_grid.
std::string format_m_grid(const std::vector<int>& grid);

/// Non-negative integer, scientific notation allowed ("1e7", "2.5e6").
std::uint64_t parse_count(std::string_view s);
double parse_real(std::string_view s);
/// Comma-separated reals.
std::vector<double> parse_reals(std::string_view s);
std::vector<DetectorKind> parse_detectors(std::string_view s);

/// Six significant digits ("%.6g"); "inf", "-inf", "nan" for non-finite.
std::string sig6(double v);
/// Shortest representation that round-trips.
std::string exact(double v);

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// ---- simulation output ----

/// Analytic exponent per detector for the summary rows (absent for L > 2).
struct AnalyticExponents {
  std::optional<Exponent> ml;
  std::optional<Exponent> lin;
  std::optional<Exponent> fa;
  std::optional<Exponent> get(DetectorKind d) const;
};

AnalyticExponents analytic_exponents(const SimConfig& config);

inline constexpr const char* kSimulationColumns =
    "record,detector,M,p_hat,ci_lo,ci_hi,n_errors,n_trials,n_agree,D_hat,stderr,"
    "D_analytic,note";

std::string simulation_csv(const SimulationResult& r, const AnalyticExponents& a);
std::string simulation_json(const SimulationResult& r, const AnalyticExponents& a);

/// Config echo carried in simulation files (worker count is not part of it:
/// output must not depend on it).
std::string config_note(const SimConfig& c);
SimConfig parse_config_note(std::string_view note);

/// Rebuilds the result from its tallies; p_hat, intervals and fits are
/// recomputed exactly from the integer counts.
SimulationResult read_simulation_csv(std::string_view text);
SimulationResult read_simulation_json(std::string_view text);

// ---- analytic outputs ----

struct DiversityRow {
  std::string noise;
  double delta;
  DetectorKind detector;
  Exponent value = Exponent::infinite();
  std::optional<Exponent> closed_form;
  std::optional<double> s_star;
  std::optional<double> alpha;
  std::string status = "ok";

  /// |value - closed_form| when both are finite.
  std::optional<double> abs_dev() const;
  bool operator==(const DiversityRow&) const = default;
};

inline constexpr const char* kDiversityColumns =
    "noise,delta,detector,value,closed_form,abs_dev,s_star,alpha,status";

/// Rows for ML, linear and FA (in that order) from one analysis.
std::vector<DiversityRow> diversity_rows(const DiversityReport& r);

std::string diversity_csv(const std::vector<DiversityRow>& rows);
std::string diversity_json(const std::vector<DiversityRow>& rows);
std::vector<DiversityRow> read_diversity_csv(std::string_view text);
std::vector<DiversityRow> read_diversity_json(std::string_view text);

inline constexpr const char* kThresholdColumns = "noise,delta,M,theta,boundary";
std::string threshold_csv(const NoiseModel& n, double delta, const std::vector<FAThreshold>& t);
std::string threshold_json(const NoiseModel& n, double delta, const std::vector<FAThreshold>& t);
std::vector<FAThreshold> read_threshold_csv(std::string_view text);
std::vector<FAThreshold> read_threshold_json(std::string_view text);

inline constexpr const char* kUnimodalColumns =
    "noise,class,epsilon,xi,max_ratio,M0,certified,violation";
std::string unimodal_csv(const NoiseModel& n, const UnimodalityReport& r);
std::string unimodal_json(const NoiseModel& n, const UnimodalityReport& r);
UnimodalityReport read_unimodal_csv(std::string_view text);
UnimodalityReport read_unimodal_json(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace tdiv::io
