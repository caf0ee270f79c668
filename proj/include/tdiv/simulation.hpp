#pragma once

// Seeded Monte Carlo estimation of the error probability P(M) of each
// detector over a grid of particle counts.
//
// Every (M, trial) pair draws from its own counter-based stream, so the
// tallies depend only on (seed, config) and never on the worker count or
// scheduling.  All requested detectors see the same arrival vector.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tdiv/detectors.hpp"
#include "tdiv/distributions.hpp"
#include "tdiv/rng.hpp"

namespace tdiv {

struct SimConfig {
  NoiseModel noise;
  Constellation constellation;
  std::vector<DetectorKind> detectors;
  std::vector<int> m_grid;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Linear-detector threshold offset from xi_l (see DetectorSpec::linear).
  std::optional<double> linear_offset;
  num::Tolerances tol;

  bool operator==(const SimConfig&) const = default;
};

/// Throws std::invalid_argument on a malformed config.
void validate(const SimConfig& config);

RngStream rng_stream_for(std::uint64_t seed, int M, std::uint64_t trial);

struct Interval95 {
  double lo;
  double hi;
};

/// Wilson score interval at 95% confidence.
Interval95 wilson_interval(std::uint64_t errors, std::uint64_t trials);

struct CellEstimate {
  DetectorKind detector;
  int M;
  std::uint64_t trials;
  std::uint64_t errors;
  double p_hat;
  double ci_lo;
  double ci_hi;

  bool operator==(const CellEstimate&) const = default;
};

/// Trials on which two detectors returned the same decision.
struct PairAgreement {
  DetectorKind first;
  DetectorKind second;
  int M;
  std::uint64_t trials;
  std::uint64_t agreements;

  bool operator==(const PairAgreement&) const = default;
};

struct SlopeFit {
  DetectorKind detector;
  /// Absent when fewer than three grid points have enough errors.
  std::optional<double> d_hat;
  double std_error = 0.0;
  std::vector<int> used_m;
  /// True when some grid points were dropped for lack of errors.
  bool truncated = false;

  bool operator==(const SlopeFit&) const = default;
};

struct SimulationResult {
  SimConfig config;
  std::vector<CellEstimate> cells;
  std::vector<PairAgreement> agreements;
  std::vector<SlopeFit> fits;
  /// The linear detector ran on the median-based fallback threshold.
  bool linear_fallback = false;

  const CellEstimate& cell(DetectorKind d, int M) const;
  const SlopeFit& fit(DetectorKind d) const;

  bool operator==(const SimulationResult&) const = default;
};

SimulationResult run_trials(const SimConfig& config);

/// True when the config runs the linear detector on noise without a finite
/// mean and no explicit threshold.
bool uses_linear_fallback(const SimConfig& config);

struct LineFit {
  double slope;
  double intercept;
  double slope_std_error;
};

/// Weighted least squares of y on x.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w);

inline constexpr std::uint64_t kMinFitErrors = 100;

/// Slope of -log p_hat against M, weighted by observed error counts, over
/// grid points with at least `min_errors` errors.
SlopeFit fit_empirical_diversity(std::span<const CellEstimate> cells, DetectorKind d,
                                 std::uint64_t min_errors = kMinFitErrors);

std::vector<SlopeFit> fit_empirical_diversity(const SimulationResult& result);

}  // namespace tdiv
