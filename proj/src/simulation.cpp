#include "tdiv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace tdiv {
namespace {

constexpr std::uint64_t kChunk = 1u << 14;
constexpr double kZ95 = 1.959963984540054;

struct WorkItem {
  std::size_t m_index;
  std::uint64_t first;
  std::uint64_t last;
};

struct Tally {
  std::vector<std::uint64_t> errors;   // per detector
  std::vector<std::uint64_t> agree;    // per detector pair
};

std::size_t pair_count(std::size_t k) { return k * (k - 1) / 2; }

}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.trials < 1000) {
    throw std::invalid_argument("trials must be at least 1000, got " + std::to_string(cfg.trials));
  }
  if (cfg.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (cfg.detectors.empty()) throw std::invalid_argument("no detectors requested");
  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.detectors[i] == cfg.detectors[j]) {
        throw std::invalid_argument("detector '" + std::string(detector_name(cfg.detectors[i])) +
                                    "' listed twice");
      }
    }
  }
  if (cfg.m_grid.empty()) throw std::invalid_argument("empty M grid");
  for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) {
    if (cfg.m_grid[i] < 1) {
      throw std::invalid_argument("M must be positive, got " + std::to_string(cfg.m_grid[i]));
    }
    if (i > 0 && cfg.m_grid[i] <= cfg.m_grid[i - 1]) {
      throw std::invalid_argument("M grid must be strictly increasing");
    }
  }
}

RngStream rng_stream_for(std::uint64_t seed, int M, std::uint64_t trial) {
  return RngStream(seed, static_cast<std::uint32_t>(M), trial);
}

Interval95 wilson_interval(std::uint64_t errors, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson interval needs trials > 0");
  if (errors > trials) throw std::invalid_argument("more errors than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

const CellEstimate& SimulationResult::cell(DetectorKind d, int M) const {
  for (const auto& c : cells) {
    if (c.detector == d && c.M == M) return c;
  }
  throw std::out_of_range("no cell for detector " + std::string(detector_name(d)) + " at M = " +
                          std::to_string(M));
}

const SlopeFit& SimulationResult::fit(DetectorKind d) const {
  for (const auto& f : fits) {
    if (f.detector == d) return f;
  }
  throw std::out_of_range("no fit for detector " + std::string(detector_name(d)));
}

bool uses_linear_fallback(const SimConfig& cfg) {
  const bool has_lin = std::find(cfg.detectors.begin(), cfg.detectors.end(),
                                 DetectorKind::Linear) != cfg.detectors.end();
  return has_lin && !cfg.linear_offset && !cgf_spec(cfg.noise).has_value();
}

SimulationResult run_trials(const SimConfig& cfg) {
  validate(cfg);
  const std::size_t K = cfg.detectors.size();
  const std::size_t L = cfg.constellation.size();

  // Thresholds are solved up front on this thread, once per M.
  std::vector<std::vector<DetectorSpec>> specs(cfg.m_grid.size());
  const bool fallback = uses_linear_fallback(cfg);
  std::optional<DetectorSpec> lin;
  for (DetectorKind d : cfg.detectors) {
    if (d == DetectorKind::Linear) {
      lin = DetectorSpec::linear(cfg.noise, cfg.constellation, cfg.linear_offset, cfg.tol);
    }
  }
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    for (DetectorKind d : cfg.detectors) {
      switch (d) {
        case DetectorKind::ML:
          specs[mi].push_back(DetectorSpec::ml(cfg.noise, cfg.constellation));
          break;
        case DetectorKind::Linear:
          specs[mi].push_back(*lin);
          break;
        case DetectorKind::FA:
          try {
            specs[mi].push_back(
                DetectorSpec::first_arrival(cfg.noise, cfg.constellation, cfg.m_grid[mi]));
          } catch (const std::exception& e) {
            throw std::runtime_error("first-arrival threshold at M = " +
                                     std::to_string(cfg.m_grid[mi]) + ": " + e.what());
          }
          break;
      }
    }
  }

  std::vector<WorkItem> items;
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    for (std::uint64_t t = 0; t < cfg.trials; t += kChunk) {
      items.push_back({mi, t, std::min(cfg.trials, t + kChunk)});
    }
  }
  std::vector<Tally> tallies(items.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    std::vector<double> y;
    std::vector<std::size_t> dec(K);
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const WorkItem& item = items[i];
      const int M = cfg.m_grid[item.m_index];
      const auto& sp = specs[item.m_index];
      Tally t{std::vector<std::uint64_t>(K, 0), std::vector<std::uint64_t>(pair_count(K), 0)};
      y.resize(static_cast<std::size_t>(M));
      try {
        for (std::uint64_t trial = item.first; trial < item.last; ++trial) {
          RngStream rng = rng_stream_for(cfg.seed, M, trial);
          const std::size_t x = static_cast<std::size_t>(rng.below(L));
          sample(cfg.noise, y, rng);
          for (double& v : y) v += cfg.constellation[x];
          for (std::size_t k = 0; k < K; ++k) {
            dec[k] = decide(sp[k], y);
            t.errors[k] += dec[k] != x;
          }
          std::size_t p = 0;
          for (std::size_t a = 0; a < K; ++a) {
            for (std::size_t b = a + 1; b < K; ++b) t.agree[p++] += dec[a] == dec[b];
          }
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(items.size());
        return;
      }
      tallies[i] = std::move(t);
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(cfg.workers, items.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SimulationResult res{cfg, {}, {}, {}, fallback};
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    std::vector<std::uint64_t> errors(K, 0), agree(pair_count(K), 0);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].m_index != mi) continue;
      for (std::size_t k = 0; k < K; ++k) errors[k] += tallies[i].errors[k];
      for (std::size_t p = 0; p < agree.size(); ++p) agree[p] += tallies[i].agree[p];
    }
    const int M = cfg.m_grid[mi];
    for (std::size_t k = 0; k < K; ++k) {
      const auto ci = wilson_interval(errors[k], cfg.trials);
      res.cells.push_back({cfg.detectors[k], M, cfg.trials, errors[k],
                           static_cast<double>(errors[k]) / static_cast<double>(cfg.trials),
                           ci.lo, ci.hi});
    }
    std::size_t p = 0;
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = a + 1; b < K; ++b) {
        res.agreements.push_back({cfg.detectors[a], cfg.detectors[b], M, cfg.trials, agree[p++]});
      }
    }
  }
  res.fits = fit_empirical_diversity(res);
  return res;
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw std::invalid_argument("weighted_line_fit: size mismatch");
  }
  if (x.size() < 2) throw std::invalid_argument("weighted_line_fit: need two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0)) throw std::invalid_argument("weighted_line_fit: weights must be positive");
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xb = sx / sw, yb = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xb) * (x[i] - xb);
    sxy += w[i] * (x[i] - xb) * (y[i] - yb);
  }
  if (!(sxx > 0)) throw std::invalid_argument("weighted_line_fit: x values are all equal");
  const double slope = sxy / sxx;
  // Var(-log p_hat) ~ 1/errors, so the weights are inverse variances.
  return {slope, yb - slope * xb, std::sqrt(1.0 / sxx)};
}

SlopeFit fit_empirical_diversity(std::span<const CellEstimate> cells, DetectorKind d,
                                 std::uint64_t min_errors) {
  SlopeFit fit;
  fit.detector = d;
  std::vector<double> x, y, w;
  for (const auto& c : cells) {
    if (c.detector != d) continue;
    if (c.errors < std::max<std::uint64_t>(min_errors, 1) || c.p_hat <= 0.0) {
      fit.truncated = true;
      continue;
    }
    fit.used_m.push_back(c.M);
    x.push_back(c.M);
    y.push_back(-std::log(c.p_hat));
    w.push_back(static_cast<double>(c.errors));
  }
  if (x.size() >= 3) {
    const LineFit lf = weighted_line_fit(x, y, w);
    fit.d_hat = lf.slope;
    fit.std_error = lf.slope_std_error;
  }
  return fit;
}

std::vector<SlopeFit> fit_empirical_diversity(const SimulationResult& result) {
  std::vector<SlopeFit> out;
  for (DetectorKind d : result.config.detectors) {
    out.push_back(fit_empirical_diversity(result.cells, d));
  }
  return out;
}

}  // namespace tdiv
