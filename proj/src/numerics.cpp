#include "tdiv/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace tdiv::num {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!std::isfinite(lo) || std::isnan(hi) || !(lo < hi)) {
    throw std::invalid_argument("Interval requires finite lo < hi");
  }
}

namespace {

// Kronrod 15-point abscissae (non-negative half) and weights; every second
// abscissa starting at index 1 is a Gauss 7-point node.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr int kMaxSegments = 4000;

struct Segment {
  double a;
  double b;
  double value;
  double error;
};

struct ByError {
  bool operator()(const Segment& x, const Segment& y) const {
    return x.error < y.error;
  }
};

double checked(const RealFn& f, double x) {
  const double v = f(x);
  if (std::isnan(v)) {
    throw std::invalid_argument("integrand returned NaN at x = " +
                                std::to_string(x));
  }
  if (!std::isfinite(v)) {
    throw std::invalid_argument("integrand is not finite at x = " +
                                std::to_string(x));
  }
  return v;
}

Segment kronrod15(const RealFn& f, double a, double b, int& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked(f, center);
  double gauss = fc * kWg[3];
  double kronrod = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = checked(f, center - dx);
    const double f2 = checked(f, center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

IntegrationResult integrate_finite(const RealFn& f, double lo, double hi,
                                   double rel_tol) {
  IntegrationResult out;
  std::priority_queue<Segment, std::vector<Segment>, ByError> open;
  std::vector<Segment> frozen;

  Segment first = kronrod15(f, lo, hi, out.evaluations);
  double total = first.value;
  double total_err = first.error;
  open.push(first);
  int segments = 1;

  auto converged = [&] {
    return total_err <= std::max(rel_tol * std::abs(total), 1e-300);
  };

  while (!converged() && !open.empty()) {
    if (segments >= kMaxSegments) {
      throw IntegrationError("quadrature did not converge within " +
                                 std::to_string(kMaxSegments) + " segments",
                             total, total_err);
    }
    Segment s = open.top();
    open.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      frozen.push_back(s);
      continue;
    }
    Segment left = kronrod15(f, s.a, mid, out.evaluations);
    Segment right = kronrod15(f, mid, s.b, out.evaluations);
    total += left.value + right.value - s.value;
    total_err += left.error + right.error - s.error;
    open.push(left);
    open.push(right);
    ++segments;
  }

  // Re-sum to shed the drift of the running totals.
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : frozen) {
    total += s.value;
    total_err += s.error;
  }
  while (!open.empty()) {
    total += open.top().value;
    total_err += open.top().error;
    open.pop();
  }
  if (total_err > std::max(rel_tol * std::abs(total), 1e-300)) {
    throw IntegrationError("quadrature stalled at floating-point resolution",
                           total, total_err);
  }
  out.value = total;
  out.abs_error = total_err;
  out.segments = segments;
  return out;
}

}  // namespace

IntegrationResult integrate_detailed(const RealFn& f, Interval domain,
                                     double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) {
    throw std::invalid_argument("rel_tol must lie in (0, 1e-2]");
  }
  if (domain.bounded()) return integrate_finite(f, domain.lo, domain.hi, rel_tol);

  const double lo = domain.lo;
  // y = lo + t/(1-t), t = 1 - w^2, w = 1 - u  =>  y = lo + u(2-u)/w^2,
  // dy/du = 2/w^3.
  RealFn mapped = [&f, lo](double u) {
    const double w = 1.0 - u;
    const double y = lo + u * (2.0 - u) / (w * w);
    const double v = f(y);
    if (v == 0.0) return 0.0;
    return v * 2.0 / (w * w * w);
  };
  return integrate_finite(mapped, 0.0, 1.0, rel_tol);
}

std::optional<Root> find_root(const RealFn& h, Interval bracket, double x_tol,
                              std::optional<double> f_tol) {
  if (!bracket.bounded()) {
    throw std::invalid_argument("find_root needs a bounded bracket");
  }
  const double ftol = f_tol.value_or(x_tol);
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = h(a);
  double fb = h(b);
  if (std::isnan(fa) || std::isnan(fb)) {
    throw std::invalid_argument("find_root: h is NaN at a bracket end");
  }
  if (fa == 0.0) return Root{a, {0, 0.0, true}};
  if (fb == 0.0) return Root{b, {0, 0.0, true}};
  if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;

  SolverDiagnostics diag;
  bool bisect_next = false;
  constexpr int kMaxIter = 500;
  while (diag.iterations < kMaxIter) {
    const double width = b - a;
    if (width <= x_tol) break;
    const double mid = a + 0.5 * width;
    double x = mid;
    if (!bisect_next && std::isfinite(fa) && std::isfinite(fb)) {
      const double secant = a - fa * width / (fb - fa);
      if (secant > a && secant < b) x = secant;
    }
    if (!(x > a && x < b)) break;  // bracket exhausted at double resolution
    ++diag.iterations;
    const double fx = h(x);
    if (std::isnan(fx)) {
      throw std::invalid_argument("find_root: h returned NaN");
    }
    if (std::abs(fx) <= ftol) {
      diag.residual = std::abs(fx);
      diag.converged = true;
      return Root{x, diag};
    }
    if ((fx > 0.0) == (fa > 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    bisect_next = (b - a) > 0.5 * width;
  }
  diag.residual = b - a;
  diag.converged = diag.residual <= x_tol || diag.iterations < kMaxIter;
  const double x = std::abs(fa) <= std::abs(fb) ? a : b;
  return Root{x, diag};
}

Minimum minimize_1d(const RealFn& g, Interval domain, double tol) {
  if (!domain.bounded()) {
    throw std::invalid_argument("minimize_1d needs a bounded domain");
  }
  constexpr double kInvPhi = 0.6180339887498948482;
  const double g_lo = g(domain.lo);
  const double g_hi = g(domain.hi);

  double a = domain.lo;
  double b = domain.hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c);
  double gd = g(d);
  bool saw_nan = std::isnan(g_lo) || std::isnan(g_hi) || std::isnan(gc) ||
                 std::isnan(gd);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
      saw_nan |= std::isnan(gc);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
      saw_nan |= std::isnan(gd);
    }
    if (!(c < d)) break;
  }
  Minimum best = gc < gd ? Minimum{c, gc} : Minimum{d, gd};
  if (g_lo < best.value) best = {domain.lo, g_lo};
  if (g_hi < best.value) best = {domain.hi, g_hi};
  if (saw_nan) best.value = std::numeric_limits<double>::quiet_NaN();
  return best;
}

double legendre_transform(const RealFn& cgf, LambdaRange range, double v) {
  if (!(range.lo <= 0.0 && range.hi >= 0.0)) {
    throw std::invalid_argument("CGF range must contain 0");
  }
  RealFn negated = [&](double lambda) {
    const double c = cgf(lambda);
    if (c == kInf) return kInf;
    return c - lambda * v;
  };

  double a = std::max(range.lo, -1.0);
  double c = std::min(range.hi, 1.0);
  if (a == c) return 0.0;
  constexpr double kDivergenceWidth = 1e13;
  for (int expansion = 0; expansion < 200; ++expansion) {
    const double width = c - a;
    const Minimum m = minimize_1d(negated, Interval(a, c), 1e-12 * std::max(1.0, width));
    const bool stuck_left = (m.argmin - a) <= 1e-6 * width && a > range.lo;
    const bool stuck_right = (c - m.argmin) <= 1e-6 * width && c < range.hi;
    if (!stuck_left && !stuck_right) return -m.value;
    if (width > kDivergenceWidth) return kInf;
    if (stuck_left) a = std::max(range.lo, a - 2.0 * width);
    if (stuck_right) c = std::min(range.hi, c + 2.0 * width);
  }
  return kInf;
}

double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // erfc(x) ~ exp(-x^2)/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 7; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    series += term;
  }
  return -x * x - std::log(x) - 0.5 * std::log(M_PI) + std::log(series);
}

double ndtr(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double log_ndtr(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * M_SQRT1_2));
  return std::log(0.5) + log_erfc(-x * M_SQRT1_2);
}

}  // namespace tdiv::num
