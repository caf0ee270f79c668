#pragma once

// Propagation-delay noise families.  All densities live on a right-sided
// support [lo, hi]: Uniform(0,b) on [0,b], Exp(b) on [0,inf),
// IG(mu,b) on (0,inf), Levy(mu,b) on (mu,inf).

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tdiv/numerics.hpp"
#include "tdiv/rng.hpp"

namespace tdiv {

enum class Family { Uniform, Exponential, InverseGaussian, Levy };

std::string_view family_name(Family f);

class NoiseModel {
 public:
  /// U(0, b).
  static NoiseModel uniform(double b);
  /// Exp(b), b is the rate.
  static NoiseModel exponential(double b);
  /// IG with mean mu and shape b.
  static NoiseModel inverse_gaussian(double mu, double b);
  /// Levy with location mu and scale b.
  static NoiseModel levy(double mu, double b);

  Family family() const { return family_; }
  /// Scale / rate / shape parameter, depending on family.
  double b() const { return b_; }
  /// IG mean or Levy location; 0 for the other families.
  double mu() const { return mu_; }

  /// Lower and upper end of the support (upper may be +inf).
  double support_lo() const;
  double support_hi() const;

  double pdf(double z) const;
  double log_pdf(double z) const;
  /// d/dz log f(z) on the open support interior.
  double dlog_pdf(double z) const;
  double cdf(double z) const;
  /// log(1 - F(z)).
  double log_survival(double z) const;
  double survival(double z) const;
  /// Inverse CDF for p in (0, 1).
  double quantile(double p) const;
  double median() const { return quantile(0.5); }

  /// Canonical spec string, e.g. "ig(mu=1,b=1)".  Round-trips through
  /// parse_noise.
  std::string to_string() const;

  bool operator==(const NoiseModel&) const = default;

 private:
  NoiseModel(Family f, double mu, double b) : family_(f), mu_(mu), b_(b) {}

  Family family_;
  double mu_;
  double b_;
};

class NoiseParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses `uniform(b=..)`, `exp(b=..)`, `ig(mu=..,b=..)`, `levy(mu=..,b=..)`,
/// case-insensitively, whitespace tolerant.  Throws NoiseParseError.
NoiseModel parse_noise(std::string_view text);

enum class UnimodalClass { ZeroMode, PositiveModePositiveLimit, PositiveModeZeroLimit };

std::string_view unimodal_class_name(UnimodalClass c);

struct ModeInfo {
  double mode = 0.0;
  /// lim f(z) as z approaches the lower support edge from above.
  double density_at_zero_limit = 0.0;
  UnimodalClass unimodal_class = UnimodalClass::ZeroMode;
};

ModeInfo mode_info(const NoiseModel& model);

/// Cumulant generating function of Z, where it exists.
struct CgfSpec {
  num::LambdaRange domain;
  num::RealFn cgf;  ///< +inf outside `domain`
  double mean;
  double variance;
};

/// nullopt for Levy noise: no finite mean, so no linear-detector exponent.
std::optional<CgfSpec> cgf_spec(const NoiseModel& model);

/// Fills `out` with i.i.d. draws.  Uniform and Exp use the inverse CDF, IG
/// the Michael-Schucany-Haas transform, Levy mu + b/G^2.
void sample(const NoiseModel& model, std::span<double> out, RngStream& stream);

/// f'(z) / f(z)^2.  `overflow` is set (and value = +inf) when f(z) is too
/// small for the ratio to be represented.
struct Lemma1Ratio {
  double value;
  bool overflow;
};

Lemma1Ratio lemma1_ratio(const NoiseModel& model, double z);

}  // namespace tdiv
