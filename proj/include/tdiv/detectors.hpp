#pragma once

// Decision rules mapping the arrival times of one transmission to a
// constellation index.
//
// Tie handling:
//  - ML: equal likelihoods go to the later release time.  This is the rule
//    under which ML and first-arrival detection coincide for zero-mode noise
//    (uniform noise makes ties happen with positive probability).
//  - Linear: a sample mean equal to a threshold goes to the earlier point.
//  - First arrival: y_FA equal to a threshold goes to the later point.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tdiv/distributions.hpp"
#include "tdiv/numerics.hpp"

namespace tdiv {

/// Release-time constellation xi_0 <= ... <= xi_{L-1}, xi_0 >= 0, L >= 2.
/// Coincident points are accepted so that the degenerate delta = 0 channel
/// can be simulated.
class Constellation {
 public:
  explicit Constellation(std::vector<double> points);
  static Constellation binary(double delta);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t l) const { return points_[l]; }
  std::span<const double> points() const { return points_; }
  /// Largest release time.
  double delta() const { return points_.back(); }
  /// xi_{l+1} - xi_l.
  double gap(std::size_t l) const { return points_[l + 1] - points_[l]; }

  Constellation shifted(double s) const;

  bool operator==(const Constellation&) const = default;

 private:
  std::vector<double> points_;
};

enum class DetectorKind { ML, Linear, FA };

std::string_view detector_name(DetectorKind k);
/// Accepts "ml", "lin"/"linear", "fa" (case-insensitive).
DetectorKind parse_detector(std::string_view name);

class DetectorSpec {
 public:
  static DetectorSpec ml(const NoiseModel& noise, const Constellation& c);

  /// Thresholds xi_l + mean + alpha_l.  Noise without a finite mean uses
  /// xi_l + `offset`, where `offset` defaults to median(Z) + gap_l / 2; the
  /// spec is then flagged as a fallback.  A caller-supplied offset replaces
  /// the analytic threshold for any noise.
  static DetectorSpec linear(const NoiseModel& noise, const Constellation& c,
                             std::optional<double> offset = std::nullopt,
                             const num::Tolerances& tol = {});

  /// Thresholds xi_l + theta_M(gap_l) for the given particle count.
  static DetectorSpec first_arrival(const NoiseModel& noise, const Constellation& c,
                                    int M);

  DetectorKind kind() const { return kind_; }
  const NoiseModel& noise() const { return noise_; }
  const Constellation& constellation() const { return constellation_; }
  /// One threshold per adjacent pair (empty for ML).
  std::span<const double> thresholds() const { return thresholds_; }
  /// Particle count the first-arrival thresholds were computed for.
  int particles() const { return particles_; }
  bool fallback() const { return fallback_; }

 private:
  DetectorSpec(DetectorKind k, NoiseModel n, Constellation c)
      : kind_(k), noise_(n), constellation_(std::move(c)) {}

  DetectorKind kind_;
  NoiseModel noise_;
  Constellation constellation_;
  std::vector<double> thresholds_;
  int particles_ = 0;
  bool fallback_ = false;
};

/// Index of the constellation point maximising sum_m log f(y_m - xi_l).
std::size_t decide_ml(const DetectorSpec& spec, std::span<const double> arrivals);
std::size_t decide_linear(const DetectorSpec& spec, std::span<const double> arrivals);
/// Requires arrivals.size() == spec.particles().
std::size_t decide_fa(const DetectorSpec& spec, std::span<const double> arrivals);

std::size_t decide(const DetectorSpec& spec, std::span<const double> arrivals);

}  // namespace tdiv
