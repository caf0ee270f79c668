#include "tdiv/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tdiv/diversity.hpp"

namespace tdiv {

Constellation::Constellation(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("constellation needs at least two points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) {
      throw std::invalid_argument("constellation points must be finite");
    }
    if (i > 0 && points_[i] < points_[i - 1]) {
      throw std::invalid_argument("constellation points must be sorted");
    }
  }
  if (points_.front() < 0.0) {
    throw std::invalid_argument("constellation points must be non-negative");
  }
}

Constellation Constellation::binary(double delta) { return Constellation({0.0, delta}); }

Constellation Constellation::shifted(double s) const {
  std::vector<double> p = points_;
  for (double& x : p) x += s;
  return Constellation(std::move(p));
}

std::string_view detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::ML: return "ml";
    case DetectorKind::Linear: return "lin";
    case DetectorKind::FA: return "fa";
  }
  return "?";
}

DetectorKind parse_detector(std::string_view name) {
  std::string s;
  for (char ch : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "ml") return DetectorKind::ML;
  if (s == "lin" || s == "linear") return DetectorKind::Linear;
  if (s == "fa") return DetectorKind::FA;
  throw std::invalid_argument("unknown detector '" + std::string(name) + "'");
}

DetectorSpec DetectorSpec::ml(const NoiseModel& noise, const Constellation& c) {
  return DetectorSpec(DetectorKind::ML, noise, c);
}

DetectorSpec DetectorSpec::linear(const NoiseModel& noise, const Constellation& c,
                                  std::optional<double> offset,
                                  const num::Tolerances& tol) {
  DetectorSpec spec(DetectorKind::Linear, noise, c);
  const auto cgf = cgf_spec(noise);
  spec.fallback_ = !cgf.has_value();
  std::map<double, double> per_gap;  // gap -> offset from xi_l
  const double median = cgf ? 0.0 : noise.median();
  for (std::size_t l = 0; l + 1 < c.size(); ++l) {
    const double gap = c.gap(l);
    double off;
    if (offset) {
      off = *offset;
    } else if (gap == 0.0) {
      off = -num::kInf;
    } else if (!cgf) {
      off = median + 0.5 * gap;
    } else if (auto it = per_gap.find(gap); it != per_gap.end()) {
      off = it->second;
    } else {
      const LinearResult r = linear_diversity(noise, gap, tol);
      // Without a balancing alpha the two sample-mean ranges do not
      // overlap; any point between them separates perfectly.
      off = cgf->mean + r.alpha.value_or(0.5 * gap);
      per_gap.emplace(gap, off);
    }
    spec.thresholds_.push_back(c[l] + off);
  }
  if (!std::is_sorted(spec.thresholds_.begin(), spec.thresholds_.end())) {
    throw std::invalid_argument("linear thresholds are not increasing for this constellation");
  }
  return spec;
}

DetectorSpec DetectorSpec::first_arrival(const NoiseModel& noise, const Constellation& c,
                                         int M) {
  DetectorSpec spec(DetectorKind::FA, noise, c);
  spec.particles_ = M;
  std::map<double, double> per_gap;
  for (std::size_t l = 0; l + 1 < c.size(); ++l) {
    const double gap = c.gap(l);
    auto it = per_gap.find(gap);
    if (it == per_gap.end()) {
      it = per_gap.emplace(gap, fa_threshold(noise, gap, M).theta).first;
    }
    // theta is measured from xi_l, the earlier hypothesis.
    spec.thresholds_.push_back(c[l] + it->second);
  }
  if (!std::is_sorted(spec.thresholds_.begin(), spec.thresholds_.end())) {
    throw std::invalid_argument(
        "first-arrival thresholds are not increasing; constellation gaps are "
        "smaller than the noise mode");
  }
  return spec;
}

std::size_t decide_ml(const DetectorSpec& spec, std::span<const double> y) {
  const auto& c = spec.constellation();
  const NoiseModel& noise = spec.noise();
  const double y_min = *std::min_element(y.begin(), y.end());
  std::size_t best = 0;
  double best_ll = -num::kInf;
  bool any = false;
  for (std::size_t l = 0; l < c.size(); ++l) {
    // Causality: an arrival before the release time rules the point out.
    if (y_min < c[l] + noise.support_lo()) continue;
    double ll = 0.0;
    for (double ym : y) {
      ll += noise.log_pdf(ym - c[l]);
      if (ll == -num::kInf) break;
    }
    if (!any || ll >= best_ll) {
      best = l;
      best_ll = ll;
      any = true;
    }
  }
  return best;
}

std::size_t decide_linear(const DetectorSpec& spec, std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const auto t = spec.thresholds();
  // Number of thresholds strictly below the mean.
  return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), mean) - t.begin());
}

std::size_t decide_fa(const DetectorSpec& spec, std::span<const double> y) {
  if (static_cast<int>(y.size()) != spec.particles()) {
    throw std::invalid_argument("first-arrival thresholds were computed for M = " +
                                std::to_string(spec.particles()) + ", got " +
                                std::to_string(y.size()) + " arrivals");
  }
  const double y_fa = *std::min_element(y.begin(), y.end());
  const auto t = spec.thresholds();
  // Number of thresholds at or below y_FA.
  return static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), y_fa) - t.begin());
}

std::size_t decide(const DetectorSpec& spec, std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("empty arrival set");
  switch (spec.kind()) {
    case DetectorKind::ML: return decide_ml(spec, y);
    case DetectorKind::Linear: return decide_linear(spec, y);
    case DetectorKind::FA: return decide_fa(spec, y);
  }
  return 0;
}

}  // namespace tdiv
