#pragma once

// Analytic diversity gains (error exponents per released particle) of the
// ML, linear and first-arrival detectors for the binary constellation
// {0, delta}, plus the first-arrival threshold, its exact error
// probability, and the unimodality certificate of the first-arrival density.

#include <optional>
#include <stdexcept>
#include <string>

#include "tdiv/distributions.hpp"
#include "tdiv/numerics.hpp"

namespace tdiv {

/// An error exponent: either a finite non-negative number or the tagged
/// "infinite" value of the zero-error regime.  Never holds a floating-point
/// infinity.
class Exponent {
 public:
  static Exponent finite(double v);
  static Exponent infinite() { return Exponent(true, 0.0); }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Throws std::logic_error when infinite.
  double value() const;
  /// Finite value, or +inf for numeric comparisons.
  double as_double() const;
  std::string to_string() const;

  bool operator==(const Exponent&) const = default;

 private:
  Exponent(bool inf, double v) : infinite_(inf), value_(v) {}
  bool infinite_;
  double value_;
};

struct ChernoffResult {
  Exponent d_ml = Exponent::infinite();
  double s_star = 0.0;
  num::SolverDiagnostics diagnostics;
};

/// log of the integral of f(y)^s f(y - delta)^(1-s) over the overlap of the
/// two shifted supports.  -inf when the supports are disjoint.
double chernoff_log_integral(const NoiseModel& noise, double delta, double s,
                             double rel_tol = 1e-9);

/// D_ML: Chernoff information between f(y) and f(y - delta).
ChernoffResult chernoff_diversity(const NoiseModel& noise, double delta,
                                  const num::Tolerances& tol = {});

struct LinearResult {
  Exponent d_lin = Exponent::finite(0.0);
  /// Threshold offset: the detector compares the sample mean to mean + alpha.
  std::optional<double> alpha;
  /// True when the noise has no finite mean and the exponent is zero.
  bool heavy_tailed = false;
  num::SolverDiagnostics diagnostics;
};

/// Thrown when the rate function cannot be evaluated inside the alpha
/// bracket.
class RateFunctionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cramer rate function of Z (numerical Legendre transform of the CGF).
/// nullopt when Z has no CGF.
std::optional<double> rate_function(const NoiseModel& noise, double v);

LinearResult linear_diversity(const NoiseModel& noise, double delta,
                              const num::Tolerances& tol = {});

/// D_FA = -log(1 - F(delta)).
Exponent fa_diversity(const NoiseModel& noise, double delta);

struct FAThreshold {
  int M = 1;
  double theta = 0.0;
  /// True when the balance equation has no root and theta = delta.
  bool boundary = false;
};

/// First-arrival decision threshold: root of
///   log f(y) - log f(y-delta) = (M-1) [log S(y-delta) - log S(y)]
/// between the two hypothesis modes, S = 1 - F.
FAThreshold fa_threshold(const NoiseModel& noise, double delta, int M);

/// Exact error probability of the first-arrival detector at threshold
/// theta_M, equiprobable binary signalling.
double fa_error_probability(const NoiseModel& noise, double delta, int M);
/// Same, for a caller-supplied threshold.
double fa_error_probability_at(const NoiseModel& noise, double delta, int M,
                               double theta);
/// Natural log of the above; stays finite where the probability underflows.
double log_fa_error_probability(const NoiseModel& noise, double delta, int M);
double log_fa_error_probability_at(const NoiseModel& noise, double delta, int M,
                                   double theta);

struct UnimodalityReport {
  UnimodalClass unimodal_class = UnimodalClass::ZeroMode;
  /// Half-width of the near-edge region checked for monotone f'/f^2,
  /// measured from the lower support edge.
  double epsilon = 0.0;
  /// Location of the maximum of f'(1-F)/f^2 beyond epsilon.
  double xi = 0.0;
  /// That maximum (0 for zero-mode noise).
  double max_ratio = 0.0;
  /// First-arrival density certified unimodal for all M > M0.
  int M0 = 1;
  bool certified = false;
  /// When the grid check fails: the offending z.
  std::optional<double> violation;
};

/// Density callbacks needed by the certificate.  Lets the certificate run
/// on densities other than the four built-in families.
struct DensityView {
  num::RealFn log_pdf;
  num::RealFn dlog_pdf;
  num::RealFn log_survival;
  double support_lo = 0.0;
  /// Upper end of the M0 search (a far quantile).
  double search_hi = 1.0;
};

UnimodalityReport unimodality_certificate(const NoiseModel& noise);
UnimodalityReport unimodality_certificate(const DensityView& density,
                                          const ModeInfo& mode);

class NoClosedForm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact-formula values for the families that have them.
struct ClosedForms {
  std::optional<Exponent> d_ml;
  std::optional<Exponent> d_fa;
  std::optional<Exponent> d_lin;
  std::optional<double> alpha;
};

/// Throws NoClosedForm if the family has none of the three.
ClosedForms closed_form_diversity(const NoiseModel& noise, double delta);

/// Closed-form Cramer rate function (Exp and IG).  Throws NoClosedForm.
double closed_form_rate_function(const NoiseModel& noise, double v);

struct DiversityReport {
  NoiseModel noise;
  double delta;
  ChernoffResult ml;
  Exponent d_fa = Exponent::infinite();
  LinearResult lin;
  ClosedForms closed_form;
};

DiversityReport analyze(const NoiseModel& noise, double delta,
                        const num::Tolerances& tol = {});

}  // namespace tdiv
