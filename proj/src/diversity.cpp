#include "tdiv/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace tdiv {

Exponent Exponent::finite(double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument("finite exponent must be a non-negative number");
  }
  return Exponent(false, v);
}

double Exponent::value() const {
  if (infinite_) throw std::logic_error("exponent is infinite");
  return value_;
}

double Exponent::as_double() const { return infinite_ ? num::kInf : value_; }

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

namespace {

Exponent nonneg(double v) { return Exponent::finite(std::max(0.0, v)); }

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be a positive number");
  }
}

}  // namespace

double chernoff_log_integral(const NoiseModel& noise, double delta, double s,
                             double rel_tol) {
  const double lo = noise.support_lo() + delta;
  const double hi = noise.support_hi();
  if (!(lo < hi)) return -num::kInf;
  auto integrand = [&](double y) {
    double e = 0.0;
    if (s != 0.0) e += s * noise.log_pdf(y);
    if (s != 1.0) e += (1.0 - s) * noise.log_pdf(y - delta);
    return std::exp(e);
  };
  return std::log(num::integrate(integrand, num::Interval(lo, hi), rel_tol));
}

ChernoffResult chernoff_diversity(const NoiseModel& noise, double delta,
                                  const num::Tolerances& tol) {
  require_delta(delta);
  ChernoffResult out;
  if (!(noise.support_lo() + delta < noise.support_hi())) {
    out.d_ml = Exponent::infinite();
    out.diagnostics = {0, 0.0, true};
    return out;
  }
  int evals = 0;
  auto objective = [&](double s) {
    ++evals;
    return chernoff_log_integral(noise, delta, s, tol.quad_rel);
  };
  const num::Minimum m = num::minimize_1d(objective, num::Interval(0.0, 1.0), tol.minimize);
  if (std::isnan(m.value)) {
    throw std::runtime_error("Chernoff objective evaluated to NaN");
  }
  out.d_ml = nonneg(-m.value);
  out.s_star = m.argmin;
  out.diagnostics = {evals, tol.minimize, true};
  return out;
}

std::optional<double> rate_function(const NoiseModel& noise, double v) {
  auto spec = cgf_spec(noise);
  if (!spec) return std::nullopt;
  return num::legendre_transform(spec->cgf, spec->domain, v);
}

LinearResult linear_diversity(const NoiseModel& noise, double delta,
                              const num::Tolerances& tol) {
  require_delta(delta);
  LinearResult out;
  auto spec = cgf_spec(noise);
  if (!spec) {
    out.d_lin = Exponent::finite(0.0);
    out.heavy_tailed = true;
    out.diagnostics = {0, 0.0, true};
    return out;
  }
  const double mean = spec->mean;
  const double width = noise.support_hi() - noise.support_lo();
  if (delta >= width) {
    // sample means under the two hypotheses cannot overlap
    out.d_lin = Exponent::infinite();
    out.alpha = 0.5 * (noise.support_hi() + noise.support_lo() + delta) - mean;
    out.diagnostics = {0, 0.0, true};
    return out;
  }
  auto rate = [&](double v) {
    return num::legendre_transform(spec->cgf, spec->domain, v);
  };
  // Balance the right tail under x = 0 against the left tail under
  // x = delta.
  auto balance = [&](double alpha) {
    const double h = rate(mean + alpha) - rate(mean - delta + alpha);
    if (std::isnan(h)) {
      throw RateFunctionError("rate functions are both infinite at alpha = " +
                              std::to_string(alpha));
    }
    return h;
  };
  const double lo = std::max(delta - mean, 0.0);
  auto root = num::find_root(balance, num::Interval(lo, delta), tol.root_width, 0.0);
  if (!root) {
    out.d_lin = Exponent::infinite();
    out.diagnostics = {0, 0.0, true};
    return out;
  }
  const double d = rate(mean + root->x);
  out.alpha = root->x;
  out.d_lin = std::isfinite(d) ? nonneg(d) : Exponent::infinite();
  out.diagnostics = root->diagnostics;
  return out;
}

Exponent fa_diversity(const NoiseModel& noise, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  const double log_s = noise.log_survival(delta);
  if (log_s == -num::kInf) return Exponent::infinite();
  return nonneg(-log_s);
}

FAThreshold fa_threshold(const NoiseModel& noise, double delta, int M) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  FAThreshold out{M, delta, true};
  if (delta == 0.0) return out;

  const double mode = mode_info(noise).mode;
  const double eta = 1e-12 * (delta + mode);
  const double lower = delta + noise.support_lo() + eta;
  const double upper = delta + mode;
  if (!(lower < upper)) return out;

  const double m1 = static_cast<double>(M - 1);
  auto h = [&](double y) {
    double v = noise.log_pdf(y) - noise.log_pdf(y - delta);
    if (M > 1) v -= m1 * (noise.log_survival(y - delta) - noise.log_survival(y));
    return v;
  };
  const double x_tol = 4.0 * std::numeric_limits<double>::epsilon() * upper;
  auto root = num::find_root(h, num::Interval(lower, upper), x_tol, 0.0);
  if (!root) return out;
  out.theta = std::clamp(root->x, delta, upper);
  out.boundary = false;
  return out;
}

double log_fa_error_probability_at(const NoiseModel& noise, double delta, int M,
                                   double theta) {
  const double m = static_cast<double>(M);
  const double a = m * noise.log_survival(theta);
  const double b = std::log(-std::expm1(m * noise.log_survival(theta - delta)));
  const double hi = std::max(a, b);
  if (hi == -num::kInf) return hi;
  return std::log(0.5) + hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double fa_error_probability_at(const NoiseModel& noise, double delta, int M,
                               double theta) {
  return std::exp(log_fa_error_probability_at(noise, delta, M, theta));
}

double log_fa_error_probability(const NoiseModel& noise, double delta, int M) {
  const FAThreshold t = fa_threshold(noise, delta, M);
  return log_fa_error_probability_at(noise, delta, M, t.theta);
}

double fa_error_probability(const NoiseModel& noise, double delta, int M) {
  return std::exp(log_fa_error_probability(noise, delta, M));
}

namespace {

struct Argmax {
  double x;
  double value;
};

// Grid search followed by golden-section refinement between the grid
// neighbours of the best point.
Argmax maximize_on_grid(const num::RealFn& f, const std::vector<double>& grid) {
  std::size_t best = 0;
  double best_v = -num::kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  Argmax out{grid[best], best_v};
  if (a < b) {
    const num::Minimum m = num::minimize_1d([&](double z) { return -f(z); },
                                            num::Interval(a, b), 1e-12 * b);
    if (-m.value > out.value) out = {m.argmin, -m.value};
  }
  return out;
}

std::vector<double> log_grid(double lo, double from, double to, int n) {
  // Points lo + d with d log-spaced on [from - lo, to - lo].
  std::vector<double> g(n);
  const double l0 = std::log(from - lo);
  const double l1 = std::log(to - lo);
  for (int i = 0; i < n; ++i) {
    g[i] = lo + std::exp(l0 + (l1 - l0) * i / (n - 1));
  }
  return g;
}

int m0_from_max(double max_ratio) {
  if (!(max_ratio > 0.0)) return 1;
  return static_cast<int>(std::ceil(max_ratio)) + 1;
}

}  // namespace

UnimodalityReport unimodality_certificate(const DensityView& d,
                                          const ModeInfo& mode) {
  UnimodalityReport out;
  out.unimodal_class = mode.unimodal_class;
  if (mode.unimodal_class == UnimodalClass::ZeroMode) {
    out.M0 = 1;
    out.certified = true;
    return out;
  }

  const double lo = d.support_lo;
  // f'(z)(1 - F(z)) / f(z)^2
  auto ratio = [&](double z) {
    const double slope = d.dlog_pdf(z);
    if (slope == 0.0) return 0.0;
    return slope * std::exp(d.log_survival(z) - d.log_pdf(z));
  };

  if (mode.unimodal_class == UnimodalClass::PositiveModePositiveLimit) {
    const double start = lo + 1e-9 * (mode.mode - lo);
    const Argmax best = maximize_on_grid(ratio, log_grid(lo, start, mode.mode, 2000));
    out.xi = best.x;
    out.max_ratio = best.value;
    out.M0 = m0_from_max(best.value);
    out.certified = std::isfinite(best.value);
    return out;
  }

  // Zero limit at the support edge: f'/f^2 must decrease on (lo, lo + eps].
  const double eps = 0.5 * (mode.mode - lo);
  out.epsilon = eps;
  const double edge = lo + eps;
  constexpr double kLogFloor = -700.0;
  double z_start = edge;
  if (d.log_pdf(edge) > kLogFloor) {
    auto r = num::find_root([&](double z) { return d.log_pdf(z) - kLogFloor; },
                            num::Interval(lo + 1e-300, edge), 1e-14 * eps, 0.0);
    if (r) z_start = std::max(r->x, lo + 1e-12 * eps);
  }
  // g = f'/f^2 overflows near the edge, so order it by (sign, log|g|).
  auto g = [&](double z) -> std::pair<int, double> {
    const double s = d.dlog_pdf(z);
    if (s == 0.0) return {0, 0.0};
    const double mag = std::log(std::fabs(s)) - d.log_pdf(z);
    return s > 0.0 ? std::pair{1, mag} : std::pair{-1, -mag};
  };
  const auto grid = log_grid(lo, z_start, edge, 400);
  auto prev = g(grid.front());
  bool ok = std::isfinite(prev.second);
  for (std::size_t i = 1; ok && i < grid.size(); ++i) {
    const auto cur = g(grid[i]);
    if (!(cur < prev) || !std::isfinite(cur.second)) {
      out.violation = grid[i];
      ok = false;
    }
    prev = cur;
  }
  if (!ok && !out.violation) out.violation = grid.front();

  const double start = edge + 1e-9 * eps;
  const Argmax best = maximize_on_grid(ratio, log_grid(lo, start, d.search_hi, 4000));
  out.xi = best.x;
  out.max_ratio = best.value;
  out.M0 = m0_from_max(best.value);
  out.certified = ok;
  return out;
}

UnimodalityReport unimodality_certificate(const NoiseModel& noise) {
  DensityView view{
      [&](double z) { return noise.log_pdf(z); },
      [&](double z) { return noise.dlog_pdf(z); },
      [&](double z) { return noise.log_survival(z); },
      noise.support_lo(),
      noise.quantile(0.9999),
  };
  return unimodality_certificate(view, mode_info(noise));
}

ClosedForms closed_form_diversity(const NoiseModel& noise, double delta) {
  require_delta(delta);
  ClosedForms out;
  const double b = noise.b();
  const double mu = noise.mu();
  switch (noise.family()) {
    case Family::Uniform: {
      const Exponent d = delta < b ? Exponent::finite(std::log(b / (b - delta)))
                                   : Exponent::infinite();
      out.d_ml = d;
      out.d_fa = d;
      break;
    }
    case Family::Exponential: {
      const double x = b * delta;
      const double em = std::exp(-x);
      out.d_ml = Exponent::finite(x);
      out.d_fa = Exponent::finite(x);
      // Both expressions divided through by e^{b delta} to stay finite.
      out.alpha = (em - (1.0 - x)) / ((1.0 - em) * b);
      out.d_lin = nonneg((em + (x - 1.0) - (1.0 - em) * std::log(x / (1.0 - em))) /
                         (1.0 - em));
      break;
    }
    case Family::InverseGaussian: {
      const double r = std::sqrt(b / delta);
      const double surv = 1.0 - num::ndtr(r * (delta / mu - 1.0)) -
                          std::exp(2.0 * b / mu) * num::ndtr(-r * (delta / mu + 1.0));
      out.d_fa = surv > 0.0 ? nonneg(-std::log(surv)) : Exponent::infinite();
      break;
    }
    case Family::Levy: {
      const double x = delta - mu;
      out.d_fa = x > 0.0 ? nonneg(-std::log(1.0 - std::erfc(std::sqrt(b / (2.0 * x)))))
                         : Exponent::finite(0.0);
      out.d_lin = Exponent::finite(0.0);
      break;
    }
  }
  if (!out.d_ml && !out.d_fa && !out.d_lin) {
    throw NoClosedForm("no closed form for " + noise.to_string());
  }
  return out;
}

double closed_form_rate_function(const NoiseModel& noise, double v) {
  const double b = noise.b();
  const double mu = noise.mu();
  switch (noise.family()) {
    case Family::Exponential:
      return v > 0.0 ? b * v - 1.0 - std::log(b * v) : num::kInf;
    case Family::InverseGaussian:
      return v > 0.0 ? b * (v - mu) * (v - mu) / (2.0 * mu * mu * v) : num::kInf;
    default:
      throw NoClosedForm("no closed-form rate function for " + noise.to_string());
  }
}

DiversityReport analyze(const NoiseModel& noise, double delta,
                        const num::Tolerances& tol) {
  DiversityReport r{noise, delta, chernoff_diversity(noise, delta, tol),
                    fa_diversity(noise, delta), linear_diversity(noise, delta, tol),
                    {}};
  try {
    r.closed_form = closed_form_diversity(noise, delta);
  } catch (const NoClosedForm&) {
  }
  return r;
}

}  // namespace tdiv
