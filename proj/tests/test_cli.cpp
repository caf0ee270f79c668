#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "tdiv/cli.hpp"
#include "tdiv/io.hpp"

using namespace tdiv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "timing_diversity");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tdiv_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv, const std::string& record) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : io::parse_csv(csv)) {
    if (!r.empty() && r[0] == record) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(Grammar, MGrid) {
  EXPECT_EQ(io::parse_m_grid("1..5"), (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(io::parse_m_grid("2..10:4"), (std::vector<int>{2, 6, 10}));
  EXPECT_EQ(io::parse_m_grid("7,1..3,3"), (std::vector<int>{1, 2, 3, 7}));
  EXPECT_THROW(io::parse_m_grid("0..3"), io::ParseError);
  EXPECT_THROW(io::parse_m_grid("5..2"), io::ParseError);
  EXPECT_THROW(io::parse_m_grid("a"), io::ParseError);
  EXPECT_EQ(io::parse_m_grid(io::format_m_grid({1, 2, 3, 7, 9})), (std::vector<int>{1, 2, 3, 7, 9}));
}

TEST(Grammar, CountsAndReals) {
  EXPECT_EQ(io::parse_count("1e7"), 10000000u);
  EXPECT_EQ(io::parse_count("250000"), 250000u);
  EXPECT_THROW(io::parse_count("1.5"), io::ParseError);
  EXPECT_THROW(io::parse_count("-3"), io::ParseError);
  EXPECT_EQ(io::parse_reals("0.5,1,1.5"), (std::vector<double>{0.5, 1, 1.5}));
  EXPECT_THROW(io::parse_real("x"), io::ParseError);
  EXPECT_THROW(io::parse_detectors("ml,ml"), io::ParseError);
}

TEST(Grammar, CsvQuoting) {
  EXPECT_EQ(io::csv_row({"a", "b,c", "d\"e"}), "a,\"b,c\",\"d\"\"e\"\n");
  const auto rows = io::parse_csv("a,\"b,c\",\"d\"\"e\"\nx,,y\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[0][2], "d\"e");
  EXPECT_EQ(rows[1][1], "");
}

TEST(Grammar, Tolerances) {
  EXPECT_EQ(cli::parse_tolerances("1e-10").quad_rel, 1e-10);
  const auto t = cli::parse_tolerances("quad=1e-8,root=1e-12,min=1e-7");
  EXPECT_EQ(t.quad_rel, 1e-8);
  EXPECT_EQ(t.root_width, 1e-12);
  EXPECT_EQ(t.minimize, 1e-7);
  EXPECT_THROW(cli::parse_tolerances("quad=0"), io::ParseError);
  EXPECT_THROW(cli::parse_tolerances("speed=1"), io::ParseError);
}

TEST(RoundTrip, Simulation) {
  SimConfig cfg{NoiseModel::inverse_gaussian(1, 1), Constellation::binary(1),
                {DetectorKind::ML, DetectorKind::Linear, DetectorKind::FA}, {1, 2, 3, 4}, 20000, 5, 2,
                std::nullopt, {}};
  const auto r = run_trials(cfg);
  const auto a = io::analytic_exponents(cfg);
  auto expect_same = [&](const SimulationResult& b) {
    EXPECT_EQ(b.cells, r.cells);
    EXPECT_EQ(b.agreements, r.agreements);
    EXPECT_EQ(b.fits, r.fits);
    EXPECT_EQ(b.config.noise, cfg.noise);
    EXPECT_EQ(b.config.m_grid, cfg.m_grid);
    EXPECT_EQ(b.config.seed, cfg.seed);
    EXPECT_EQ(b.config.trials, cfg.trials);
  };
  expect_same(io::read_simulation_csv(io::simulation_csv(r, a)));
  expect_same(io::read_simulation_json(io::simulation_json(r, a)));
  EXPECT_EQ(io::simulation_csv(io::read_simulation_csv(io::simulation_csv(r, a)), a),
            io::simulation_csv(r, a));
}

TEST(RoundTrip, Diversity) {
  const auto rows = io::diversity_rows(analyze(NoiseModel::exponential(1), 1.5));
  EXPECT_EQ(io::read_diversity_json(io::diversity_json(rows)), rows);
  const auto back = io::read_diversity_csv(io::diversity_csv(rows));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].detector, rows[i].detector);
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_NEAR(back[i].value.value(), rows[i].value.value(), 1e-5 * rows[i].value.value());
  }
  const auto inf = io::diversity_rows(analyze(NoiseModel::uniform(1), 1.5));
  EXPECT_EQ(io::read_diversity_json(io::diversity_json(inf)), inf);
  EXPECT_NE(io::diversity_csv(inf).find(",inf,"), std::string::npos);
}

TEST(RoundTrip, ThresholdAndUnimodal) {
  const auto n = NoiseModel::levy(0, 1);
  std::vector<FAThreshold> t;
  for (int M : {1, 2, 10, 100}) t.push_back(fa_threshold(n, 1.0, M));
  const auto j = io::read_threshold_json(io::threshold_json(n, 1.0, t));
  ASSERT_EQ(j.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(j[i].theta, t[i].theta);
    EXPECT_EQ(j[i].M, t[i].M);
    EXPECT_EQ(j[i].boundary, t[i].boundary);
  }
  const auto u = unimodality_certificate(n);
  const auto uj = io::read_unimodal_json(io::unimodal_json(n, u));
  EXPECT_EQ(uj.M0, u.M0);
  EXPECT_EQ(uj.epsilon, u.epsilon);
  EXPECT_EQ(uj.certified, u.certified);
  EXPECT_EQ(io::read_unimodal_csv(io::unimodal_csv(n, u)).M0, u.M0);
}

TEST(RoundTrip, RunConfig) {
  cli::RunConfig c;
  c.mode = cli::Mode::Simulate;
  c.noise = "ig(mu=1,b=1)";
  c.deltas = {1.0};
  c.m_grid = {1, 2, 5};
  c.trials = 123456;
  c.seed = 99;
  c.workers = 3;
  c.format = io::Format::Json;
  c.lin_threshold = 1.25;
  cli::RunConfig base;
  base.mode = cli::Mode::Simulate;
  EXPECT_EQ(cli::parse_run_config(cli::run_config_json(c), base), c);
}

TEST(RunConfigFile, UnknownKeyHasPosition) {
  try {
    cli::parse_run_config("{\n  \"seed\": 4,\n  \"trails\": 5\n}");
    FAIL();
  } catch (const io::ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 3);
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"diversity", "--noise", "exp(b=1)", "--delta", "0.5"}).code, 0);
  EXPECT_EQ(run({"diversity", "--noise", "gamma(k=2)", "--delta", "0.5"}).code, 2);
  EXPECT_EQ(run({"diversity", "--noise", "exp(b=1)"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"simulate", "--noise", "exp(b=1)", "--delta", "1", "--m", "1..3", "--trials", "10"}).code, 2);
  EXPECT_EQ(run({"diversity", "--noise", "exp(b=1)", "--delta", "0.5", "--out", "/nonexistent/dir/x.csv"}).code, 4);
  EXPECT_EQ(run({"diversity", "--config", "/nonexistent/cfg.json"}).code, 4);

  const auto cfg = scratch("bad.json");
  io::write_file(cfg.string(), "{\n  \"noise\": \"exp(b=1)\",\n  \"delat\": 1\n}\n");
  const auto r = run({"diversity", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("3"), std::string::npos);
}

TEST(Cli, SimulateExponential) {
  const std::vector<std::string> args{"simulate", "--noise", "exp(b=1)", "--delta", "1.0", "--m", "1..10",
                                      "--trials", "1e5", "--seed", "42", "--detectors", "ml,fa"};
  auto a = args, b = args;
  a.insert(a.end(), {"--workers", "1"});
  b.insert(b.end(), {"--workers", "4"});
  const auto ra = run(a), rb = run(b);
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_EQ(ra.out, rb.out);

  const auto points = rows_of(ra.out, "point");
  ASSERT_EQ(points.size(), 20u);
  for (std::size_t i = 0; i < points.size(); i += 2) {
    EXPECT_EQ(points[i][1], "ml");
    EXPECT_EQ(points[i + 1][1], "fa");
    for (std::size_t k = 2; k < points[i].size(); ++k) EXPECT_EQ(points[i][k], points[i + 1][k]);
  }
  for (const auto& ag : rows_of(ra.out, "agreement")) EXPECT_EQ(ag[8], ag[7]);
}

TEST(Cli, SimulateWritesFileAndSummary) {
  const auto path = scratch("sim.json");
  const auto r = run({"simulate", "--noise", "levy(mu=0,b=1)", "--delta", "1", "--m", "1..4", "--trials",
                      "5000", "--format", "json", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("D_hat"), std::string::npos);
  const auto back = io::read_simulation_json(io::read_file(path.string()));
  EXPECT_EQ(back.cells.size(), 12u);
  EXPECT_TRUE(back.linear_fallback);
}

TEST(Cli, ThresholdZeroMode) {
  const auto r = run({"threshold", "--noise", "exp(b=1)", "--delta", "1", "--m", "1..20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = io::read_threshold_csv(r.out);
  ASSERT_EQ(t.size(), 20u);
  for (const auto& x : t) {
    EXPECT_EQ(x.theta, 1.0);
    EXPECT_TRUE(x.boundary);
  }
}

TEST(Cli, UnimodalUniform) {
  const auto r = run({"unimodal", "--noise", "uniform(b=1)"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto u = io::read_unimodal_csv(r.out);
  EXPECT_EQ(u.unimodal_class, UnimodalClass::ZeroMode);
  EXPECT_EQ(u.M0, 1);
}

TEST(Cli, DiversityRows) {
  const auto r = run({"diversity", "--noise", "levy(mu=0,b=1)", "--delta", "0.5,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = io::read_diversity_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].detector, DetectorKind::Linear);
  EXPECT_EQ(rows[1].status, "heavy_tailed");
  EXPECT_EQ(rows[1].value.value(), 0.0);
}

TEST(Cli, TablesWritesAllFamilies) {
  const auto dir = scratch("tables");
  fs::create_directories(dir);
  const auto r = run({"tables", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"table_uniform", "table_exp", "table_ig", "table_levy"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string(f) + ".csv"))) << f;
  }
  const auto ig = io::read_diversity_csv(io::read_file((dir / "table_ig.csv").string()));
  EXPECT_EQ(ig.size(), 9u);
}
