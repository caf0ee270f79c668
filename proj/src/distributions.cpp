#include "tdiv/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <vector>

namespace tdiv {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double log_ig_second_term(double mu, double b, double z) {
  // log( exp(2b/mu) * Phi(-sqrt(b/z)(z/mu + 1)) ), kept in log space so that
  // large b/mu does not overflow.
  const double c = std::sqrt(b / z) * (z / mu + 1.0);
  return 2.0 * b / mu + num::log_ndtr(-c);
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::Exponential: return "exp";
    case Family::InverseGaussian: return "ig";
    case Family::Levy: return "levy";
  }
  return "?";
}

std::string_view unimodal_class_name(UnimodalClass c) {
  switch (c) {
    case UnimodalClass::ZeroMode: return "ZeroMode";
    case UnimodalClass::PositiveModePositiveLimit: return "PositiveModePositiveLimit";
    case UnimodalClass::PositiveModeZeroLimit: return "PositiveModeZeroLimit";
  }
  return "?";
}

NoiseModel NoiseModel::uniform(double b) {
  require(std::isfinite(b) && b > 0.0, "uniform: b must be positive");
  return NoiseModel(Family::Uniform, 0.0, b);
}

NoiseModel NoiseModel::exponential(double b) {
  require(std::isfinite(b) && b > 0.0, "exp: rate b must be positive");
  return NoiseModel(Family::Exponential, 0.0, b);
}

NoiseModel NoiseModel::inverse_gaussian(double mu, double b) {
  require(std::isfinite(mu) && mu > 0.0, "ig: mean mu must be positive");
  require(std::isfinite(b) && b > 0.0, "ig: shape b must be positive");
  return NoiseModel(Family::InverseGaussian, mu, b);
}

NoiseModel NoiseModel::levy(double mu, double b) {
  require(std::isfinite(mu) && mu >= 0.0, "levy: location mu must be >= 0");
  require(std::isfinite(b) && b > 0.0, "levy: scale b must be positive");
  return NoiseModel(Family::Levy, mu, b);
}

double NoiseModel::support_lo() const {
  return family_ == Family::Levy ? mu_ : 0.0;
}

double NoiseModel::support_hi() const {
  return family_ == Family::Uniform ? b_ : num::kInf;
}

double NoiseModel::log_pdf(double z) const {
  switch (family_) {
    case Family::Uniform:
      return (z >= 0.0 && z <= b_) ? -std::log(b_) : -num::kInf;
    case Family::Exponential:
      return z >= 0.0 ? std::log(b_) - b_ * z : -num::kInf;
    case Family::InverseGaussian: {
      if (!(z > 0.0)) return -num::kInf;
      const double d = z - mu_;
      return 0.5 * std::log(b_) - kLogSqrt2Pi - 1.5 * std::log(z) -
             b_ * d * d / (2.0 * mu_ * mu_ * z);
    }
    case Family::Levy: {
      const double x = z - mu_;
      if (!(x > 0.0)) return -num::kInf;
      return 0.5 * std::log(b_) - kLogSqrt2Pi - b_ / (2.0 * x) - 1.5 * std::log(x);
    }
  }
  return -num::kInf;
}

double NoiseModel::pdf(double z) const { return std::exp(log_pdf(z)); }

double NoiseModel::dlog_pdf(double z) const {
  switch (family_) {
    case Family::Uniform: return 0.0;
    case Family::Exponential: return -b_;
    case Family::InverseGaussian:
      return -1.5 / z - b_ / (2.0 * mu_ * mu_) * (1.0 - mu_ * mu_ / (z * z));
    case Family::Levy: {
      const double x = z - mu_;
      return b_ / (2.0 * x * x) - 1.5 / x;
    }
  }
  return 0.0;
}

double NoiseModel::cdf(double z) const {
  switch (family_) {
    case Family::Uniform:
      return std::clamp(z / b_, 0.0, 1.0);
    case Family::Exponential:
      return z > 0.0 ? -std::expm1(-b_ * z) : 0.0;
    case Family::InverseGaussian: {
      if (!(z > 0.0)) return 0.0;
      const double a = std::sqrt(b_ / z) * (z / mu_ - 1.0);
      const double direct = num::ndtr(a) + std::exp(log_ig_second_term(mu_, b_, z));
      if (direct <= 0.5) return direct;
      return -std::expm1(log_survival(z));
    }
    case Family::Levy: {
      const double x = z - mu_;
      if (!(x > 0.0)) return 0.0;
      return std::erfc(std::sqrt(b_ / (2.0 * x)));
    }
  }
  return 0.0;
}

double NoiseModel::log_survival(double z) const {
  switch (family_) {
    case Family::Uniform:
      if (z <= 0.0) return 0.0;
      return z >= b_ ? -num::kInf : std::log1p(-z / b_);
    case Family::Exponential:
      return z > 0.0 ? -b_ * z : 0.0;
    case Family::InverseGaussian: {
      if (!(z > 0.0)) return 0.0;
      const double a = std::sqrt(b_ / z) * (z / mu_ - 1.0);
      const double first = num::log_ndtr(-a);
      const double ratio = std::exp(log_ig_second_term(mu_, b_, z) - first);
      return first + std::log1p(-ratio);
    }
    case Family::Levy: {
      const double x = z - mu_;
      if (!(x > 0.0)) return 0.0;
      return std::log(std::erf(std::sqrt(b_ / (2.0 * x))));
    }
  }
  return 0.0;
}

double NoiseModel::survival(double z) const {
  if (family_ == Family::Levy) {
    const double x = z - mu_;
    return x > 0.0 ? std::erf(std::sqrt(b_ / (2.0 * x))) : 1.0;
  }
  return std::exp(log_survival(z));
}

double NoiseModel::quantile(double p) const {
  require(p > 0.0 && p < 1.0, "quantile: p must lie in (0, 1)");
  switch (family_) {
    case Family::Uniform: return p * b_;
    case Family::Exponential: return -std::log1p(-p) / b_;
    default: break;
  }
  const double lo = support_lo();
  const double scale = family_ == Family::Levy ? b_ : mu_;
  double hi = lo + scale;
  while (cdf(hi) < p) hi = lo + 2.0 * (hi - lo);
  auto root = num::find_root([&](double z) { return cdf(z) - p; },
                             num::Interval(lo, hi), 1e-15 * hi, 0.0);
  return root->x;
}

std::string NoiseModel::to_string() const {
  switch (family_) {
    case Family::Uniform: return "uniform(b=" + format_number(b_) + ")";
    case Family::Exponential: return "exp(b=" + format_number(b_) + ")";
    case Family::InverseGaussian:
      return "ig(mu=" + format_number(mu_) + ",b=" + format_number(b_) + ")";
    case Family::Levy:
      return "levy(mu=" + format_number(mu_) + ",b=" + format_number(b_) + ")";
  }
  return "";
}

NoiseModel parse_noise(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  const auto open = s.find('(');
  if (open == std::string::npos || s.empty() || s.back() != ')') {
    throw NoiseParseError("noise spec must look like name(key=value,...): '" +
                          std::string(text) + "'");
  }
  const std::string name = s.substr(0, open);
  const std::string body = s.substr(open + 1, s.size() - open - 2);

  std::map<std::string, double> params;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    const std::string item = body.substr(pos, comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw NoiseParseError("expected key=value in noise spec, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double v = 0.0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
      throw NoiseParseError("bad number '" + val + "' for key '" + key + "'");
    }
    if (!params.emplace(key, v).second) {
      throw NoiseParseError("duplicate key '" + key + "' in noise spec");
    }
    pos = comma + 1;
  }

  auto take = [&](std::initializer_list<const char*> keys) {
    std::map<std::string, double> left = params;
    std::vector<double> values;
    for (const char* k : keys) {
      auto it = left.find(k);
      if (it == left.end()) {
        throw NoiseParseError("noise '" + name + "' requires parameter '" + k + "'");
      }
      values.push_back(it->second);
      left.erase(it);
    }
    if (!left.empty()) {
      throw NoiseParseError("unknown parameter '" + left.begin()->first +
                            "' for noise '" + name + "'");
    }
    return values;
  };

  try {
    if (name == "uniform") return NoiseModel::uniform(take({"b"})[0]);
    if (name == "exp" || name == "exponential") {
      return NoiseModel::exponential(take({"b"})[0]);
    }
    if (name == "ig") {
      auto v = take({"mu", "b"});
      return NoiseModel::inverse_gaussian(v[0], v[1]);
    }
    if (name == "levy") {
      auto v = take({"mu", "b"});
      return NoiseModel::levy(v[0], v[1]);
    }
  } catch (const NoiseParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw NoiseParseError(e.what());
  }
  throw NoiseParseError("unknown noise family '" + name + "'");
}

ModeInfo mode_info(const NoiseModel& m) {
  switch (m.family()) {
    case Family::Uniform:
      return {0.0, 1.0 / m.b(), UnimodalClass::ZeroMode};
    case Family::Exponential:
      return {0.0, m.b(), UnimodalClass::ZeroMode};
    case Family::InverseGaussian: {
      const double mu = m.mu();
      const double r = mu / m.b();
      const double mode = mu * (std::sqrt(1.0 + 2.25 * r * r) - 1.5 * r);
      return {mode, 0.0, UnimodalClass::PositiveModeZeroLimit};
    }
    case Family::Levy:
      return {m.mu() + m.b() / 3.0, 0.0, UnimodalClass::PositiveModeZeroLimit};
  }
  return {};
}

std::optional<CgfSpec> cgf_spec(const NoiseModel& m) {
  const double b = m.b();
  switch (m.family()) {
    case Family::Uniform: {
      auto cgf = [b](double lambda) {
        const double x = lambda * b;
        if (std::abs(x) < 1e-8) return x / 2.0 + x * x / 24.0;
        if (x > 30.0) return x + std::log(-std::expm1(-x)) - std::log(x);
        return std::log(std::expm1(x) / x);
      };
      return CgfSpec{{-num::kInf, num::kInf}, cgf, b / 2.0, b * b / 12.0};
    }
    case Family::Exponential: {
      auto cgf = [b](double lambda) {
        return lambda < b ? -std::log1p(-lambda / b) : num::kInf;
      };
      return CgfSpec{{-num::kInf, b}, cgf, 1.0 / b, 1.0 / (b * b)};
    }
    case Family::InverseGaussian: {
      const double mu = m.mu();
      const double edge = b / (2.0 * mu * mu);
      auto cgf = [mu, b, edge](double lambda) {
        if (lambda > edge) return num::kInf;
        return b / mu * (1.0 - std::sqrt(std::max(0.0, 1.0 - lambda / edge)));
      };
      return CgfSpec{{-num::kInf, edge}, cgf, mu, mu * mu * mu / b};
    }
    case Family::Levy:
      return std::nullopt;
  }
  return std::nullopt;
}

void sample(const NoiseModel& m, std::span<double> out, RngStream& rng) {
  const double b = m.b();
  const double mu = m.mu();
  switch (m.family()) {
    case Family::Uniform:
      for (double& z : out) z = b * rng.uniform();
      break;
    case Family::Exponential:
      for (double& z : out) z = -std::log(rng.uniform()) / b;
      break;
    case Family::InverseGaussian:
      for (double& z : out) {
        const double nu = rng.normal();
        const double w = mu * nu * nu / (2.0 * b);
        // mu (1 + w - sqrt(w^2 + 2w)), written without cancellation.
        const double x = mu / (1.0 + w + std::sqrt(w * w + 2.0 * w));
        z = rng.uniform() <= mu / (mu + x) ? x : mu * mu / x;
      }
      break;
    case Family::Levy:
      for (double& z : out) {
        const double g = rng.normal();
        z = mu + b / (g * g);
      }
      break;
  }
}

Lemma1Ratio lemma1_ratio(const NoiseModel& m, double z) {
  if (!(z > m.support_lo() && z < m.support_hi())) {
    throw std::domain_error("lemma1_ratio: z must lie in the open support");
  }
  const double slope = m.dlog_pdf(z);
  if (slope == 0.0) return {0.0, false};
  // f'/f^2 = (d log f / dz) * exp(-log f)
  const double v = slope * std::exp(-m.log_pdf(z));
  if (!std::isfinite(v)) return {slope > 0 ? num::kInf : -num::kInf, true};
  return {v, false};
}

}  // namespace tdiv
