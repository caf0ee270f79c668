#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tdiv/distributions.hpp"
#include "tdiv/rng.hpp"

using namespace tdiv;
using tdiv::num::kInf;

namespace {

std::vector<NoiseModel> zoo() {
  return {NoiseModel::uniform(1),          NoiseModel::uniform(2.5),
          NoiseModel::exponential(1),      NoiseModel::exponential(3),
          NoiseModel::inverse_gaussian(1, 1), NoiseModel::inverse_gaussian(2, 0.5),
          NoiseModel::inverse_gaussian(0.5, 4), NoiseModel::levy(0, 1),
          NoiseModel::levy(0.5, 2)};
}

// Integrate the pdf over [lo, x], splitting at the mode so the kink of the
// density near the support edge is resolved.
double integrate_pdf(const NoiseModel& n, double x) {
  auto f = [&](double z) { return n.pdf(z); };
  const double lo = n.support_lo();
  const double m = mode_info(n).mode;
  if (x <= lo) return 0.0;
  if (m > lo && m < x) {
    return num::integrate(f, {lo, m}, 1e-12) + num::integrate(f, {m, x}, 1e-12);
  }
  return num::integrate(f, {lo, x}, 1e-12);
}

}  // namespace

TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStreamTest, UniformIsOpenAndReproducible) {
  RngStream a(42, 3, 9), b(42, 3, 9), c(43, 3, 9);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
    differs = differs || u != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(RngStreamTest, BelowIsUnbiased) {
  RngStream s(1, 0, 0);
  std::vector<int> hits(3, 0);
  const int n = 300000;
  for (int i = 0; i < n; ++i) ++hits[s.below(3)];
  for (int h : hits) EXPECT_NEAR(h / double(n), 1.0 / 3, 3e-3);
}

TEST(Pdf, Examples) {
  EXPECT_DOUBLE_EQ(NoiseModel::uniform(1).pdf(0.5), 1.0);
  EXPECT_DOUBLE_EQ(NoiseModel::exponential(1).pdf(0.0), 1.0);
  EXPECT_NEAR(NoiseModel::inverse_gaussian(1, 1).pdf(1.0), 0.3989422804014327, 1e-15);
  EXPECT_EQ(NoiseModel::uniform(1).pdf(1.5), 0.0);
  EXPECT_EQ(NoiseModel::exponential(1).pdf(-0.1), 0.0);
  EXPECT_EQ(NoiseModel::levy(0.5, 1).pdf(0.4), 0.0);
  EXPECT_EQ(NoiseModel::inverse_gaussian(1, 1).log_pdf(0.0), -kInf);
}

TEST(Cdf, Examples) {
  EXPECT_DOUBLE_EQ(NoiseModel::uniform(1).cdf(0.25), 0.25);
  EXPECT_NEAR(NoiseModel::levy(0, 1).cdf(1.0), 0.3173105078629141, 1e-15);
  // Phi(0) + e^2 Phi(-2)
  EXPECT_NEAR(NoiseModel::inverse_gaussian(1, 1).cdf(1.0), 0.6681020012231706, 1e-14);
}

TEST(Cdf, LargeShapeDoesNotOverflow) {
  const auto n = NoiseModel::inverse_gaussian(1, 2000);
  for (double z : {0.8, 0.95, 1.0, 1.05, 1.3}) {
    const double F = n.cdf(z);
    ASSERT_TRUE(std::isfinite(F));
    EXPECT_NEAR(F, integrate_pdf(n, z), 1e-7) << z;
    EXPECT_NEAR(std::exp(n.log_survival(z)), 1 - F, 1e-12);
  }
}

TEST(Pdf, IntegratesToOne) {
  for (const auto& n : zoo()) {
    auto f = [&](double z) { return n.pdf(z); };
    const double lo = n.support_lo(), m = mode_info(n).mode;
    double total;
    if (n.support_hi() < kInf) {
      total = num::integrate(f, {lo, n.support_hi()}, 1e-12);
    } else if (m > lo) {
      total = num::integrate(f, {lo, m}, 1e-12) + num::integrate(f, {m, kInf}, 1e-12);
    } else {
      total = num::integrate(f, {lo, kInf}, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-8) << n.to_string();
  }
}

TEST(Cdf, MatchesIntegratedPdf) {
  for (const auto& n : zoo()) {
    const double lo = n.support_lo();
    const double hi = n.quantile(0.999);
    for (int i = 1; i <= 50; ++i) {
      const double z = lo + (hi - lo) * i / 50.0;
      EXPECT_NEAR(n.cdf(z), integrate_pdf(n, z), 1e-7) << n.to_string() << " z=" << z;
    }
  }
}

TEST(Quantile, InvertsCdf) {
  for (const auto& n : zoo()) {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
      EXPECT_NEAR(n.cdf(n.quantile(p)), p, 1e-10 * std::max(1.0, p / (1 - p))) << n.to_string();
    }
  }
  EXPECT_THROW(NoiseModel::exponential(1).quantile(1.0), std::invalid_argument);
}

TEST(ModeInfoTest, Examples) {
  const auto e = mode_info(NoiseModel::exponential(1));
  EXPECT_EQ(e.mode, 0.0);
  EXPECT_EQ(e.unimodal_class, UnimodalClass::ZeroMode);
  const auto ig = mode_info(NoiseModel::inverse_gaussian(1, 1));
  EXPECT_NEAR(ig.mode, 0.30277563773199465, 1e-14);
  EXPECT_EQ(ig.unimodal_class, UnimodalClass::PositiveModeZeroLimit);
  EXPECT_EQ(ig.density_at_zero_limit, 0.0);
  const auto lv = mode_info(NoiseModel::levy(0, 1));
  EXPECT_NEAR(lv.mode, 1.0 / 3, 1e-15);
  EXPECT_EQ(lv.unimodal_class, UnimodalClass::PositiveModeZeroLimit);
  EXPECT_EQ(mode_info(NoiseModel::uniform(1)).unimodal_class, UnimodalClass::ZeroMode);
}

TEST(ModeInfoTest, AgreesWithGridArgmax) {
  for (const auto& n : zoo()) {
    if (mode_info(n).unimodal_class == UnimodalClass::ZeroMode) continue;
    const double lo = n.support_lo(), hi = n.quantile(0.9);
    const int N = 200000;
    const double step = (hi - lo) / N;
    double best = lo, best_v = -kInf;
    for (int i = 1; i <= N; ++i) {
      const double z = lo + i * step;
      if (n.log_pdf(z) > best_v) best_v = n.log_pdf(z), best = z;
    }
    EXPECT_NEAR(mode_info(n).mode, best, step) << n.to_string();
    // and the mode is a stationary point of the log-density
    EXPECT_NEAR(n.dlog_pdf(mode_info(n).mode), 0.0, 1e-9) << n.to_string();
  }
}

TEST(Cgf, Examples) {
  auto e = cgf_spec(NoiseModel::exponential(1));
  ASSERT_TRUE(e);
  EXPECT_NEAR(e->cgf(0.5), std::log(2.0), 1e-15);
  EXPECT_EQ(e->cgf(1.5), kInf);
  for (const auto& n : zoo()) {
    auto c = cgf_spec(n);
    if (n.family() == Family::Levy) {
      EXPECT_FALSE(c) << n.to_string();
      continue;
    }
    ASSERT_TRUE(c);
    EXPECT_EQ(c->cgf(0.0), 0.0) << n.to_string();
  }
}

TEST(Cgf, DerivativeAtZeroIsMean) {
  for (const auto& n : zoo()) {
    auto c = cgf_spec(n);
    if (!c) continue;
    const double h = 1e-5;
    const double d = (c->cgf(h) - c->cgf(-h)) / (2 * h);
    EXPECT_NEAR(d, c->mean, 1e-6) << n.to_string();
    const double d2 = (c->cgf(h) - 2 * c->cgf(0) + c->cgf(-h)) / (h * h);
    EXPECT_NEAR(d2, c->variance, 1e-3 * c->variance + 1e-4) << n.to_string();
  }
}

TEST(Cgf, UniformAtLargeArguments) {
  auto c = cgf_spec(NoiseModel::uniform(1));
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->cgf(800.0), 800.0 - std::log(800.0), 1e-9);
  EXPECT_NEAR(c->cgf(-800.0), -std::log(800.0), 1e-9);
  EXPECT_NEAR(c->cgf(1e-9), 0.5e-9, 1e-18);
}

TEST(Sample, UniformStaysInSupport) {
  RngStream s(3, 0, 0);
  std::vector<double> x(100000);
  sample(NoiseModel::uniform(1), x, s);
  for (double v : x) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Sample, ExponentialMean) {
  RngStream s(4, 0, 0);
  std::vector<double> x(1000000);
  sample(NoiseModel::exponential(1), x, s);
  EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0) / x.size(), 1.0, 0.005);
}

TEST(Sample, LevyEmpiricalCdf) {
  RngStream s(5, 0, 0);
  std::vector<double> x(1000000);
  sample(NoiseModel::levy(0, 1), x, s);
  const double frac = std::count_if(x.begin(), x.end(), [](double v) { return v <= 1.0; }) /
                      double(x.size());
  EXPECT_NEAR(frac, 0.3173105078629141, 0.002);
}

TEST(Sample, KolmogorovSmirnov) {
  const int n = 100000;
  // 0.999 quantile of the Kolmogorov distribution over sqrt(n)
  const double critical = 1.94947 / std::sqrt(double(n));
  std::uint64_t stream = 0;
  for (const auto& m : zoo()) {
    RngStream s(2024, 1, stream++);
    std::vector<double> x(n);
    sample(m, x, s);
    std::sort(x.begin(), x.end());
    double d = 0;
    for (int i = 0; i < n; ++i) {
      const double F = m.cdf(x[i]);
      d = std::max({d, (i + 1.0) / n - F, F - double(i) / n});
    }
    EXPECT_LT(d, critical) << m.to_string();
  }
}

TEST(Lemma1, Examples) {
  const auto e = lemma1_ratio(NoiseModel::exponential(1), 0.5);
  EXPECT_NEAR(e.value, -std::exp(0.5), 1e-14);
  EXPECT_FALSE(e.overflow);
  EXPECT_EQ(lemma1_ratio(NoiseModel::uniform(1), 0.5).value, 0.0);

  const auto lv = NoiseModel::levy(0, 1);
  const double z = 0.1, h = 1e-6;
  const double fd = (lv.pdf(z + h) - lv.pdf(z - h)) / (2 * h) / (lv.pdf(z) * lv.pdf(z));
  const auto r = lemma1_ratio(lv, z);
  EXPECT_GT(r.value, 100.0);
  EXPECT_NEAR(r.value, fd, 1e-6 * fd);
}

TEST(Lemma1, EdgeOverflowAndDomain) {
  const auto r = lemma1_ratio(NoiseModel::levy(0, 1), 1e-4);
  EXPECT_TRUE(r.overflow);
  EXPECT_EQ(r.value, kInf);
  EXPECT_THROW(lemma1_ratio(NoiseModel::exponential(1), 0.0), std::domain_error);
  EXPECT_THROW(lemma1_ratio(NoiseModel::uniform(1), 1.0), std::domain_error);
}

TEST(ParseNoise, Grammar) {
  EXPECT_EQ(parse_noise("uniform(b=1)"), NoiseModel::uniform(1));
  EXPECT_EQ(parse_noise("EXP( b = 2.5 )"), NoiseModel::exponential(2.5));
  EXPECT_EQ(parse_noise("ig(mu=1,b=1)"), NoiseModel::inverse_gaussian(1, 1));
  EXPECT_EQ(parse_noise("Levy(b=2, mu=0.5)"), NoiseModel::levy(0.5, 2));
  for (const auto& n : zoo()) EXPECT_EQ(parse_noise(n.to_string()), n);
  for (const char* bad : {"gauss(b=1)", "exp(b=0)", "exp(b=-1)", "exp(rate=1)", "ig(mu=1)",
                          "exp(b=1,b=2)", "exp b=1", "levy(mu=-1,b=1)", "uniform(b=nan)", ""}) {
    EXPECT_THROW(parse_noise(bad), NoiseParseError) << bad;
  }
}
