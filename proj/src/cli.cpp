#include "tdiv/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdiv/diversity.hpp"
#include "tdiv/simulation.hpp"

namespace tdiv::cli {

using ojson = nlohmann::ordered_json;

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Diversity: return "diversity";
    case Mode::Simulate: return "simulate";
    case Mode::Tables: return "tables";
    case Mode::Threshold: return "threshold";
    case Mode::Unimodal: return "unimodal";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  for (Mode m : {Mode::Diversity, Mode::Simulate, Mode::Tables, Mode::Threshold, Mode::Unimodal}) {
    if (mode_name(m) == s) return m;
  }
  throw io::ParseError("unknown mode '" + std::string(s) + "'");
}

num::Tolerances parse_tolerances(std::string_view s, num::Tolerances t) {
  if (s.find('=') == std::string_view::npos) {
    t.quad_rel = io::parse_real(s);
  } else {
    std::string_view rest = s;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw io::ParseError("bad tolerance item '" + std::string(item) + "'");
      }
      const std::string key(item.substr(0, eq));
      const double v = io::parse_real(item.substr(eq + 1));
      if (key == "quad") t.quad_rel = v;
      else if (key == "root") t.root_width = v;
      else if (key == "min") t.minimize = v;
      else throw io::ParseError("unknown tolerance '" + key + "' (expected quad, root, min)");
    }
  }
  if (!(t.quad_rel > 0 && t.quad_rel <= 1e-2)) {
    throw io::ParseError("quadrature tolerance must lie in (0, 1e-2]");
  }
  if (!(t.root_width > 0) || !(t.minimize > 0)) {
    throw io::ParseError("tolerances must be positive");
  }
  return t;
}

namespace {

std::pair<int, int> line_column(std::string_view text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::vector<double> reals_from(const ojson& v) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_string()) return io::parse_reals(v.get<std::string>());
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

std::uint64_t count_from(const ojson& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) return io::parse_count(v.get<std::string>());
  if (v.is_number()) return io::parse_count(io::exact(v.get<double>()));
  throw io::ParseError("expected a count");
}

}  // namespace

RunConfig parse_run_config(std::string_view text, RunConfig c) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw io::ParseError(std::string("invalid JSON config: ") + e.what(), line, col);
  }
  if (!doc.is_object()) throw io::ParseError("config must be a JSON object", 1, 1);

  for (const auto& [key, v] : doc.items()) {
    const std::size_t at = text.find("\"" + key + "\"");
    const auto [line, col] = line_column(text, at == std::string_view::npos ? 0 : at);
    try {
      if (key == "mode") {
        const Mode m = parse_mode(v.get<std::string>());
        if (m != c.mode) {
          throw io::ParseError("config is for '" + std::string(mode_name(m)) + "', not '" +
                               std::string(mode_name(c.mode)) + "'");
        }
      } else if (key == "noise") {
        if (v.is_null()) c.noise.reset();
        else c.noise = v.get<std::string>();
      } else if (key == "delta") {
        c.deltas = reals_from(v);
      } else if (key == "points") {
        c.points = reals_from(v);
      } else if (key == "detectors") {
        if (v.is_string()) {
          c.detectors = io::parse_detectors(v.get<std::string>());
        } else {
          std::string joined;
          for (const auto& d : v) joined += (joined.empty() ? "" : ",") + d.get<std::string>();
          c.detectors = v.empty() ? std::vector<DetectorKind>{} : io::parse_detectors(joined);
        }
      } else if (key == "m") {
        if (v.is_string()) {
          c.m_grid = io::parse_m_grid(v.get<std::string>());
        } else if (v.is_number_integer()) {
          c.m_grid = io::parse_m_grid(std::to_string(v.get<long>()));
        } else {
          std::string joined;
          for (const auto& m : v) joined += (joined.empty() ? "" : ",") + std::to_string(m.get<long>());
          c.m_grid = v.empty() ? std::vector<int>{} : io::parse_m_grid(joined);
        }
      } else if (key == "trials") {
        c.trials = count_from(v);
      } else if (key == "seed") {
        c.seed = count_from(v);
      } else if (key == "workers") {
        if (v.is_null()) {
          c.workers.reset();
        } else {
          const std::uint64_t w = count_from(v);
          if (w < 1 || w > 4096) throw io::ParseError("workers must be in [1, 4096]");
          c.workers = static_cast<unsigned>(w);
        }
      } else if (key == "out") {
        if (v.is_null()) c.out.reset();
        else c.out = v.get<std::string>();
      } else if (key == "format") {
        c.format = io::parse_format(v.get<std::string>());
      } else if (key == "tol") {
        if (v.is_number()) {
          c.tol = parse_tolerances(io::exact(v.get<double>()), c.tol);
        } else if (v.is_string()) {
          c.tol = parse_tolerances(v.get<std::string>(), c.tol);
        } else {
          std::string joined;
          for (const auto& [k, x] : v.items()) {
            joined += (joined.empty() ? "" : ",") + k + "=" + io::exact(x.get<double>());
          }
          c.tol = parse_tolerances(joined, c.tol);
        }
      } else if (key == "lin_threshold") {
        if (v.is_null()) c.lin_threshold.reset();
        else c.lin_threshold = v.get<double>();
      } else {
        throw io::ParseError("unknown key '" + key + "'");
      }
    } catch (const io::ParseError& e) {
      throw io::ParseError(e.line() > 0 ? e.what() : std::string(e.what()), line, col);
    } catch (const nlohmann::json::exception& e) {
      throw io::ParseError("bad value for '" + key + "': " + e.what(), line, col);
    }
  }
  return c;
}

std::string run_config_json(const RunConfig& c) {
  ojson o = ojson::object();
  o["mode"] = mode_name(c.mode);
  o["noise"] = c.noise ? ojson(*c.noise) : ojson(nullptr);
  o["delta"] = c.deltas;
  o["points"] = c.points;
  ojson dets = ojson::array();
  for (DetectorKind d : c.detectors) dets.push_back(detector_name(d));
  o["detectors"] = dets;
  o["m"] = c.m_grid;
  o["trials"] = c.trials;
  o["seed"] = c.seed;
  o["workers"] = c.workers ? ojson(*c.workers) : ojson(nullptr);
  o["out"] = c.out ? ojson(*c.out) : ojson(nullptr);
  o["format"] = c.format == io::Format::Csv ? "csv" : "json";
  o["tol"] = {{"quad", c.tol.quad_rel}, {"root", c.tol.root_width}, {"min", c.tol.minimize}};
  o["lin_threshold"] = c.lin_threshold ? ojson(*c.lin_threshold) : ojson(nullptr);
  return o.dump(2) + "\n";
}

namespace {

struct Flags {
  std::string config, noise, delta, points, detectors, m, trials, seed, workers, out, format, tol,
      lin_threshold;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_flags(CLI::App* sub, Mode mode, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file (flags override it)");
  sub->add_option("--out", f.out,
                  mode == Mode::Tables ? "Output directory (default: current)"
                                       : "Output file (default: stdout)");
  sub->add_option("--format", f.format, "csv or json");
  if (mode != Mode::Tables) {
    sub->add_option("--noise", f.noise, "uniform(b=..), exp(b=..), ig(mu=..,b=..), levy(mu=..,b=..)");
  }
  if (mode == Mode::Diversity || mode == Mode::Simulate || mode == Mode::Threshold) {
    sub->add_option("--delta", f.delta,
                    mode == Mode::Diversity ? "Symbol spacing; comma list allowed" : "Symbol spacing");
  }
  if (mode == Mode::Diversity || mode == Mode::Simulate || mode == Mode::Tables) {
    sub->add_option("--tol", f.tol, "Quadrature tolerance, or quad=..,root=..,min=..");
  }
  if (mode == Mode::Diversity || mode == Mode::Simulate) {
    sub->add_option("--detectors", f.detectors, "Comma list of ml, lin, fa");
  }
  if (mode == Mode::Simulate || mode == Mode::Threshold) {
    sub->add_option("--m", f.m, "Particle counts: a..b[:step] and/or comma list");
  }
  if (mode == Mode::Simulate) {
    sub->add_option("--points", f.points, "Explicit constellation, comma list");
    sub->add_option("--trials", f.trials, "Trials per M (scientific notation allowed)");
    sub->add_option("--seed", f.seed, "64-bit seed");
    sub->add_option("--workers", f.workers, "Worker threads (default: $TIMING_DIVERSITY_WORKERS)");
    sub->add_option("--lin-threshold", f.lin_threshold,
                    "Linear threshold offset from each lower point (overrides the analytic one)");
  }
}

unsigned parse_workers(std::string_view s) {
  const std::uint64_t w = io::parse_count(s);
  if (w < 1 || w > 4096) throw io::ParseError("workers must be in [1, 4096]");
  return static_cast<unsigned>(w);
}

void apply_flags(const Flags& f, RunConfig& c) {
  if (!f.noise.empty()) c.noise = f.noise;
  if (!f.delta.empty()) c.deltas = io::parse_reals(f.delta);
  if (!f.points.empty()) c.points = io::parse_reals(f.points);
  if (!f.detectors.empty()) c.detectors = io::parse_detectors(f.detectors);
  if (!f.m.empty()) c.m_grid = io::parse_m_grid(f.m);
  if (!f.trials.empty()) c.trials = io::parse_count(f.trials);
  if (!f.seed.empty()) c.seed = io::parse_count(f.seed);
  if (!f.workers.empty()) c.workers = parse_workers(f.workers);
  if (!f.out.empty()) c.out = f.out;
  if (!f.format.empty()) c.format = io::parse_format(f.format);
  if (!f.tol.empty()) c.tol = parse_tolerances(f.tol, c.tol);
  if (!f.lin_threshold.empty()) c.lin_threshold = io::parse_real(f.lin_threshold);
}

unsigned default_workers() {
  if (const char* env = std::getenv("TIMING_DIVERSITY_WORKERS"); env && *env) {
    try {
      return parse_workers(env);
    } catch (const io::ParseError& e) {
      throw io::ParseError(std::string("TIMING_DIVERSITY_WORKERS: ") + e.what());
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

NoiseModel require_noise(const RunConfig& c) {
  if (!c.noise) throw io::ParseError("--noise is required");
  return parse_noise(*c.noise);
}

void require_positive_deltas(const std::vector<double>& d) {
  if (d.empty()) throw io::ParseError("--delta is required");
  for (double x : d) {
    if (!(x > 0.0) || !std::isfinite(x)) throw io::ParseError("delta must be positive and finite");
  }
}

double single_delta(const RunConfig& c) {
  if (c.deltas.size() != 1) throw io::ParseError("exactly one --delta value is required");
  const double d = c.deltas.front();
  if (!(d >= 0.0) || !std::isfinite(d)) throw io::ParseError("delta must be non-negative and finite");
  return d;
}

void emit(const RunConfig& c, const std::string& content, std::ostream& out) {
  if (c.out) io::write_file(*c.out, content);
  else out << content;
}

std::string ext(io::Format f) { return f == io::Format::Csv ? ".csv" : ".json"; }

// ---- subcommands ----

int cmd_diversity(const RunConfig& c, const NoiseModel& noise, std::ostream& out) {
  std::vector<io::DiversityRow> rows;
  for (double delta : c.deltas) {
    for (auto& r : io::diversity_rows(analyze(noise, delta, c.tol))) {
      if (std::find(c.detectors.begin(), c.detectors.end(), r.detector) != c.detectors.end()) {
        rows.push_back(std::move(r));
      }
    }
  }
  emit(c, c.format == io::Format::Csv ? io::diversity_csv(rows) : io::diversity_json(rows), out);
  const bool ok = std::all_of(rows.begin(), rows.end(),
                              [](const auto& r) { return r.status == "ok" || r.status == "heavy_tailed"; });
  return ok ? kOk : kSolverError;
}

struct TableSpec {
  const char* file;
  NoiseModel noise;
  std::vector<double> deltas;
  std::vector<DetectorKind> detectors;
};

std::vector<TableSpec> table_specs() {
  using D = DetectorKind;
  return {
      {"table_uniform", NoiseModel::uniform(1), {0.25, 0.5, 0.75}, {D::ML, D::FA, D::Linear}},
      {"table_exp", NoiseModel::exponential(1), {0.5, 1.5, 2.5}, {D::ML, D::FA, D::Linear}},
      {"table_ig", NoiseModel::inverse_gaussian(1, 1), {0.5, 1.0, 1.5}, {D::ML, D::FA, D::Linear}},
      {"table_levy", NoiseModel::levy(0, 1), {0.5, 1.0, 1.5}, {D::ML, D::FA, D::Linear}},
  };
}

int cmd_tables(const RunConfig& c, std::ostream& out) {
  const std::filesystem::path dir = c.out.value_or(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  bool ok = true;
  for (const auto& t : table_specs()) {
    std::vector<io::DiversityRow> rows;
    for (double delta : t.deltas) {
      DiversityReport rep{t.noise, delta, {}, Exponent::infinite(), {}, {}};
      std::vector<io::DiversityRow> cell;
      try {
        rep = analyze(t.noise, delta, c.tol);
        cell = io::diversity_rows(rep);
      } catch (const std::exception& e) {
        ok = false;
        for (DetectorKind d : t.detectors) {
          cell.push_back({t.noise.to_string(), delta, d, Exponent::infinite(), std::nullopt,
                          std::nullopt, std::nullopt, std::string("failed: ") + e.what()});
        }
      }
      for (DetectorKind d : t.detectors) {
        for (auto& r : cell) {
          if (r.detector == d) rows.push_back(r);
        }
      }
    }
    for (const auto& r : rows) ok = ok && (r.status == "ok" || r.status == "heavy_tailed");
    io::write_file((dir / (std::string(t.file) + ext(c.format))).string(),
                   c.format == io::Format::Csv ? io::diversity_csv(rows) : io::diversity_json(rows));

    out << t.noise.to_string() << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-10s", "detector");
    out << buf;
    for (double d : t.deltas) {
      std::snprintf(buf, sizeof buf, "%14s", ("delta=" + io::sig6(d)).c_str());
      out << buf;
    }
    out << "\n";
    for (DetectorKind d : t.detectors) {
      std::snprintf(buf, sizeof buf, "%-10s", std::string(detector_name(d)).c_str());
      out << buf;
      for (const auto& r : rows) {
        if (r.detector != d) continue;
        std::snprintf(buf, sizeof buf, "%14s",
                      r.value.is_infinite() ? "inf" : io::sig6(r.value.value()).c_str());
        out << buf;
      }
      out << "\n";
    }
    out << "\n";
  }
  return ok ? kOk : kSolverError;
}

SimConfig sim_config(const RunConfig& c, const NoiseModel& noise) {
  std::optional<Constellation> con;
  if (!c.points.empty()) {
    if (!c.deltas.empty()) throw io::ParseError("give either --delta or --points, not both");
    con = Constellation(c.points);
  } else {
    con = Constellation::binary(single_delta(c));
  }
  if (c.m_grid.empty()) throw io::ParseError("--m is required");
  SimConfig s{noise, *con, c.detectors, c.m_grid, c.trials, c.seed,
              c.workers.value_or(default_workers()), c.lin_threshold, c.tol};
  validate(s);
  return s;
}

int cmd_simulate(const RunConfig& c, const SimConfig& s, std::ostream& out) {
  SimulationResult r = run_trials(s);
  const io::AnalyticExponents a = io::analytic_exponents(s);
  emit(c, c.format == io::Format::Csv ? io::simulation_csv(r, a) : io::simulation_json(r, a), out);
  if (c.out) {
    for (const auto& f : r.fits) {
      out << detector_name(f.detector) << ": D_hat = "
          << (f.d_hat ? io::sig6(*f.d_hat) + " +/- " + io::sig6(f.std_error)
                      : std::string("n/a (too few errors)"));
      if (auto an = a.get(f.detector)) out << ", analytic " << (an->is_infinite() ? "inf" : io::sig6(an->value()));
      out << "\n";
    }
  }
  return kOk;
}

int cmd_threshold(const RunConfig& c, const NoiseModel& noise, double delta, std::ostream& out) {
  std::vector<FAThreshold> t;
  for (int M : c.m_grid) t.push_back(fa_threshold(noise, delta, M));
  emit(c, c.format == io::Format::Csv ? io::threshold_csv(noise, delta, t)
                                      : io::threshold_json(noise, delta, t),
       out);
  return kOk;
}

int cmd_unimodal(const RunConfig& c, const NoiseModel& noise, std::ostream& out) {
  const UnimodalityReport r = unimodality_certificate(noise);
  emit(c, c.format == io::Format::Csv ? io::unimodal_csv(noise, r) : io::unimodal_json(noise, r),
       out);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diversity gains of ML, linear and first-arrival detectors on molecular timing channels"};
  app.name("timing_diversity");
  app.require_subcommand(1, 1);
  Flags flags;
  const std::pair<Mode, const char*> modes[] = {
      {Mode::Diversity, "Analytic exponents D_ML, D_LIN, D_FA for the binary constellation {0, delta}"},
      {Mode::Simulate, "Monte Carlo error rates and fitted empirical exponents"},
      {Mode::Tables, "Write the four reference tables (uniform, exp, ig, levy)"},
      {Mode::Threshold, "First-arrival threshold theta_M over an M grid"},
      {Mode::Unimodal, "Unimodality certificate of the first-arrival density"},
  };
  std::vector<std::pair<Mode, CLI::App*>> subs;
  for (const auto& [mode, desc] : modes) {
    CLI::App* sub = app.add_subcommand(std::string(mode_name(mode)), desc);
    add_flags(sub, mode, flags);
    subs.emplace_back(mode, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kParseError;
  }

  RunConfig cfg;
  for (const auto& [mode, sub] : subs) {
    if (sub->parsed()) cfg.mode = mode;
  }

  std::optional<NoiseModel> noise;
  std::optional<SimConfig> sim;
  double delta = 0.0;
  try {
    if (!flags.config.empty()) cfg = parse_run_config(io::read_file(flags.config), cfg);
    apply_flags(flags, cfg);
    switch (cfg.mode) {
      case Mode::Diversity:
        noise = require_noise(cfg);
        require_positive_deltas(cfg.deltas);
        if (cfg.detectors.empty()) throw io::ParseError("no detectors requested");
        break;
      case Mode::Simulate:
        noise = require_noise(cfg);
        sim = sim_config(cfg, *noise);
        break;
      case Mode::Threshold:
        noise = require_noise(cfg);
        delta = single_delta(cfg);
        if (cfg.m_grid.empty()) throw io::ParseError("--m is required");
        break;
      case Mode::Unimodal:
        noise = require_noise(cfg);
        break;
      case Mode::Tables:
        break;
    }
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  try {
    switch (cfg.mode) {
      case Mode::Diversity: return cmd_diversity(cfg, *noise, out);
      case Mode::Simulate: return cmd_simulate(cfg, *sim, out);
      case Mode::Tables: return cmd_tables(cfg, out);
      case Mode::Threshold: return cmd_threshold(cfg, *noise, delta, out);
      case Mode::Unimodal: return cmd_unimodal(cfg, *noise, out);
    }
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kOk;
}

}  // namespace tdiv::cli
