#pragma once

// Real-analysis kernel: adaptive quadrature, bracketed roots, bounded 1-D
// minimization, numerical Legendre transform and a few special functions.
// Everything here is a pure function of its arguments.

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace tdiv::num {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Integration / search domain.  `lo` is finite, `hi` may be +infinity.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_);

  bool bounded() const { return hi < kInf; }
  double width() const { return hi - lo; }
};

struct SolverDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Default tolerances used across the library.
struct Tolerances {
  double quad_rel = 1e-9;
  double root_width = 1e-10;
  double minimize = 1e-8;

  bool operator==(const Tolerances&) const = default;
};

/// Thrown when adaptive quadrature hits its subdivision cap.  Carries the
/// best estimate so callers can still report something.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const { return estimate_; }
  double error_estimate() const { return error_; }

 private:
  double estimate_;
  double error_;
};

struct IntegrationResult {
  double value = 0.0;
  double abs_error = 0.0;
  int segments = 0;
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7/15) quadrature with global subdivision.
//
// Semi-infinite domains [lo, inf) use y = lo + t/(1-t).  The t-integral is
// further mapped by t = 1 - (1-u)^2 so that integrands with algebraic tails
// (Levy: y^{-3/2}) become bounded at the far end.
//
// Throws std::invalid_argument if f returns NaN or an infinite value, and
// IntegrationError if the requested accuracy cannot be reached.
IntegrationResult integrate_detailed(const RealFn& f, Interval domain,
                                     double rel_tol = 1e-9);

inline double integrate(const RealFn& f, Interval domain,
                        double rel_tol = 1e-9) {
  return integrate_detailed(f, domain, rel_tol).value;
}

struct Root {
  double x;
  SolverDiagnostics diagnostics;
};

// Bisection with secant (false-position) acceleration.  Stops when the
// bracket is narrower than `x_tol` or |h(x)| <= f_tol (f_tol defaults to
// x_tol; pass 0 to insist on the bracket criterion).  Returns nullopt when
// h(lo) and h(hi) have the same strict sign.  h may return +/-infinity.
std::optional<Root> find_root(const RealFn& h, Interval bracket,
                              double x_tol = 1e-10,
                              std::optional<double> f_tol = std::nullopt);

struct Minimum {
  double argmin;
  double value;
};

/// Golden-section search on [lo, hi] plus both endpoints.  Assumes g is
/// unimodal on the domain; the smaller of interior optimum and endpoints
/// is returned.
Minimum minimize_1d(const RealFn& g, Interval domain, double tol = 1e-8);

/// Range of the CGF argument over which the search may move.  Either end
/// may be infinite.  The CGF itself returns +infinity where it is undefined.
struct LambdaRange {
  double lo = -kInf;
  double hi = kInf;
};

/// sup_lambda { lambda * v - cgf(lambda) }.  Returns +infinity when the
/// supremum diverges.
double legendre_transform(const RealFn& cgf, LambdaRange range, double v);

// Special functions.

/// log(erfc(x)), accurate for large positive x where erfc underflows.
double log_erfc(double x);
/// Standard normal CDF.
double ndtr(double x);
/// log of the standard normal CDF, accurate in the far left tail.
double log_ndtr(double x);

}  // namespace tdiv::num
