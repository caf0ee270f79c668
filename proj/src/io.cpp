#include "tdiv/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace tdiv::io {

using ojson = nlohmann::ordered_json;

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ")"
                                  : what),
      line_(line),
      column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ParseError("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  const std::string t = lower(trim(s));
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParseError("expected true/false, got '" + std::string(s) + "'");
}

std::string exponent_text(const Exponent& e) { return e.is_infinite() ? "inf" : sig6(e.value()); }

Exponent parse_exponent(std::string_view s) {
  if (lower(trim(s)) == "inf") return Exponent::infinite();
  return Exponent::finite(parse_real(s));
}

std::optional<double> opt_real(std::string_view s) {
  if (trim(s).empty()) return std::nullopt;
  return parse_real(s);
}

ojson exponent_json(const Exponent& e) {
  if (e.is_infinite()) return "inf";
  return e.value();
}

Exponent exponent_from_json(const ojson& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return Exponent::infinite();
    throw ParseError("bad exponent '" + j.get<std::string>() + "'");
  }
  return Exponent::finite(j.get<double>());
}

template <class T>
ojson opt_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::optional<double> opt_from_json(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ojson parse_json_text(std::string_view text) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

// Rows after the header, which must match `columns`.
std::vector<std::vector<std::string>> csv_body(std::string_view text, std::string_view columns) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("empty CSV");
  if (csv_row(rows.front()) != std::string(columns) + "\n") {
    throw ParseError("unexpected CSV header", 1, 1);
  }
  const std::size_t width = rows.front().size();
  rows.erase(rows.begin());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw ParseError("wrong number of fields", static_cast<int>(i) + 2, 1);
    }
  }
  return rows;
}

UnimodalClass parse_unimodal_class(std::string_view s) {
  for (auto c : {UnimodalClass::ZeroMode, UnimodalClass::PositiveModePositiveLimit,
                 UnimodalClass::PositiveModeZeroLimit}) {
    if (unimodal_class_name(c) == s) return c;
  }
  throw ParseError("unknown unimodality class '" + std::string(s) + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

Format parse_format(std::string_view s) {
  const std::string t = lower(trim(s));
  if (t == "csv") return Format::Csv;
  if (t == "json") return Format::Json;
  throw ParseError("unknown format '" + std::string(s) + "' (expected csv or json)");
}

std::vector<int> parse_m_grid(std::string_view s) {
  std::vector<int> out;
  if (trim(s).empty()) throw ParseError("empty M grid");
  for (std::string_view tok : split(s, ',')) {
    tok = trim(tok);
    const std::size_t dots = tok.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_int(tok));
    } else {
      std::string_view rest = tok.substr(dots + 2);
      int step = 1;
      if (const std::size_t colon = rest.find(':'); colon != std::string_view::npos) {
        step = parse_int(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      const int a = parse_int(tok.substr(0, dots));
      const int b = parse_int(rest);
      if (step < 1) throw ParseError("M grid step must be positive in '" + std::string(tok) + "'");
      if (a > b) throw ParseError("empty M range '" + std::string(tok) + "'");
      if ((static_cast<long>(b) - a) / step > 1000000) {
        throw ParseError("M range '" + std::string(tok) + "' is too long");
      }
      for (long m = a; m <= b; m += step) out.push_back(static_cast<int>(m));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.front() < 1) throw ParseError("M must be at least 1");
  return out;
}

std::string format_m_grid(const std::vector<int>& g) {
  std::string out;
  std::size_t i = 0;
  while (i < g.size()) {
    std::size_t j = i + 1;
    if (j < g.size()) {
      const int step = g[j] - g[i];
      while (j + 1 < g.size() && g[j + 1] - g[j] == step) ++j;
    }
    if (!out.empty()) out += ',';
    if (j - i >= 2) {
      const int step = g[i + 1] - g[i];
      out += std::to_string(g[i]) + ".." + std::to_string(g[j]);
      if (step != 1) out += ":" + std::to_string(step);
      i = j + 1;
    } else {
      out += std::to_string(g[i]);
      ++i;
    }
  }
  return out;
}

std::uint64_t parse_count(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) return v;
  double d = 0.0;
  try {
    d = parse_real(s);
  } catch (const ParseError&) {
    throw ParseError("expected a count, got '" + std::string(s) + "'");
  }
  if (!(d >= 0.0) || d >= 0x1p63 || d != std::floor(d)) {
    throw ParseError("expected a non-negative integer count, got '" + std::string(s) + "'");
  }
  return static_cast<std::uint64_t>(d);
}

double parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ParseError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_reals(std::string_view s) {
  std::vector<double> out;
  for (auto tok : split(s, ',')) out.push_back(parse_real(tok));
  return out;
}

std::vector<DetectorKind> parse_detectors(std::string_view s) {
  std::vector<DetectorKind> out;
  for (auto tok : split(s, ',')) {
    try {
      const DetectorKind d = parse_detector(trim(tok));
      if (std::find(out.begin(), out.end(), d) != out.end()) {
        throw ParseError("detector '" + std::string(trim(tok)) + "' listed twice");
      }
      out.push_back(d);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  return out;
}

std::string sig6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string csv_escape(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  return out + '\n';
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  int line = 1, col = 0;
  auto end_row = [&] {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
    row.clear();
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    ++col;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
          if (i + 1 < text.size() && text[i + 1] != ',' && text[i + 1] != '\n' &&
              text[i + 1] != '\r') {
            throw ParseError("stray character after closing quote", line, col + 1);
          }
        }
      } else {
        if (c == '\n') ++line, col = 0;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) throw ParseError("quote inside unquoted field", line, col);
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        col = 0;
        break;
      default:
        field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line, col);
  if (!field.empty() || field_started || !row.empty()) end_row();
  return rows;
}

// ---- simulation output ----

std::optional<Exponent> AnalyticExponents::get(DetectorKind d) const {
  switch (d) {
    case DetectorKind::ML: return ml;
    case DetectorKind::Linear: return lin;
    case DetectorKind::FA: return fa;
  }
  return std::nullopt;
}

AnalyticExponents analytic_exponents(const SimConfig& c) {
  AnalyticExponents a;
  if (c.constellation.size() != 2) return a;
  const double delta = c.constellation.gap(0);
  if (delta == 0.0) {
    a.ml = a.lin = a.fa = Exponent::finite(0.0);
    return a;
  }
  for (DetectorKind d : c.detectors) {
    switch (d) {
      case DetectorKind::ML:
        a.ml = chernoff_diversity(c.noise, delta, c.tol).d_ml;
        break;
      case DetectorKind::Linear:
        // An explicit threshold is not the optimal one the exponent refers
        // to, except for heavy tails where every threshold gives zero.
        if (!c.linear_offset || !cgf_spec(c.noise)) {
          a.lin = linear_diversity(c.noise, delta, c.tol).d_lin;
        }
        break;
      case DetectorKind::FA:
        a.fa = fa_diversity(c.noise, delta);
        break;
    }
  }
  return a;
}

std::string config_note(const SimConfig& c) {
  std::string pts;
  for (double x : c.constellation.points()) pts += (pts.empty() ? "" : ",") + exact(x);
  std::string dets;
  for (DetectorKind d : c.detectors) dets += (dets.empty() ? "" : ",") + std::string(detector_name(d));
  std::string out = "noise=" + c.noise.to_string() + ";points=" + pts + ";detectors=" + dets +
                    ";m=" + format_m_grid(c.m_grid) + ";trials=" + std::to_string(c.trials) +
                    ";seed=" + std::to_string(c.seed);
  if (c.linear_offset) out += ";lin_threshold=" + exact(*c.linear_offset);
  return out;
}

SimConfig parse_config_note(std::string_view note) {
  std::map<std::string, std::string> kv;
  for (auto part : split(note, ';')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos) throw ParseError("bad config field '" + std::string(part) + "'");
    kv[std::string(trim(part.substr(0, eq)))] = std::string(trim(part.substr(eq + 1)));
  }
  auto need = [&](const char* k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError(std::string("config echo lacks '") + k + "'");
    return it->second;
  };
  std::optional<double> lin;
  if (auto it = kv.find("lin_threshold"); it != kv.end()) lin = parse_real(it->second);
  try {
    return SimConfig{parse_noise(need("noise")),
                     Constellation(parse_reals(need("points"))),
                     parse_detectors(need("detectors")),
                     parse_m_grid(need("m")),
                     parse_count(need("trials")),
                     parse_count(need("seed")),
                     1,
                     lin,
                     {}};
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("bad config echo: ") + e.what());
  }
}

namespace {

std::string detector_pair(DetectorKind a, DetectorKind b) {
  return std::string(detector_name(a)) + "|" + std::string(detector_name(b));
}

std::string fit_note(const SimulationResult& r, const SlopeFit& f) {
  std::vector<std::string> tags;
  if (!f.used_m.empty()) tags.push_back("used_m=" + format_m_grid(f.used_m));
  if (!f.d_hat) tags.push_back("insufficient_errors");
  if (f.truncated) tags.push_back("truncated");
  if (f.d_hat && *f.d_hat < 2.0 * f.std_error) tags.push_back("no_decay");
  if (f.detector == DetectorKind::Linear && r.linear_fallback) tags.push_back("linear_fallback");
  std::string out;
  for (const auto& t : tags) out += (out.empty() ? "" : ";") + t;
  return out;
}

// One record as the 13 CSV columns; std::nullopt means an empty field.
using Record = std::vector<std::optional<std::string>>;

std::vector<Record> simulation_records(const SimulationResult& r, const AnalyticExponents& a,
                                       bool full_precision) {
  auto num = [&](double v) { return full_precision ? exact(v) : sig6(v); };
  auto n = std::nullopt;
  std::vector<Record> out;
  out.push_back({"config", n, n, n, n, n, n, n, n, n, n, n, config_note(r.config)});
  for (const auto& c : r.cells) {
    out.push_back({"point", std::string(detector_name(c.detector)), std::to_string(c.M),
                   num(c.p_hat), num(c.ci_lo), num(c.ci_hi), std::to_string(c.errors),
                   std::to_string(c.trials), n, n, n, n, n});
  }
  for (const auto& g : r.agreements) {
    out.push_back({"agreement", detector_pair(g.first, g.second), std::to_string(g.M), n, n, n, n,
                   std::to_string(g.trials), std::to_string(g.agreements), n, n, n, n});
  }
  for (const auto& f : r.fits) {
    const auto an = a.get(f.detector);
    std::optional<std::string> d_an;
    if (an) d_an = an->is_infinite() ? "inf" : num(an->value());
    out.push_back({"summary", std::string(detector_name(f.detector)), n, n, n, n, n, n, n,
                   f.d_hat ? std::optional(num(*f.d_hat)) : n,
                   f.d_hat ? std::optional(num(f.std_error)) : n, d_an, fit_note(r, f)});
  }
  return out;
}

const std::vector<std::string>& simulation_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> v;
    for (auto s : split(kSimulationColumns, ',')) v.emplace_back(s);
    return v;
  }();
  return cols;
}

SimulationResult rebuild(const SimConfig& cfg, std::vector<CellEstimate> cells,
                         std::vector<PairAgreement> agreements) {
  for (auto& c : cells) {
    if (c.trials == 0 || c.errors > c.trials) throw ParseError("inconsistent tallies");
    c.p_hat = static_cast<double>(c.errors) / static_cast<double>(c.trials);
    const auto ci = wilson_interval(c.errors, c.trials);
    c.ci_lo = ci.lo;
    c.ci_hi = ci.hi;
  }
  SimulationResult r{cfg, std::move(cells), std::move(agreements), {}, uses_linear_fallback(cfg)};
  r.fits = fit_empirical_diversity(r);
  return r;
}

std::pair<DetectorKind, DetectorKind> parse_pair(std::string_view s) {
  const std::size_t bar = s.find('|');
  if (bar == std::string_view::npos) throw ParseError("bad detector pair '" + std::string(s) + "'");
  try {
    return {parse_detector(s.substr(0, bar)), parse_detector(s.substr(bar + 1))};
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

DetectorKind detector_field(std::string_view s) {
  try {
    return parse_detector(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

std::string simulation_csv(const SimulationResult& r, const AnalyticExponents& a) {
  std::string out = std::string(kSimulationColumns) + "\n";
  for (const auto& rec : simulation_records(r, a, false)) {
    std::vector<std::string> f;
    for (const auto& v : rec) f.push_back(v.value_or(""));
    out += csv_row(f);
  }
  return out;
}

std::string simulation_json(const SimulationResult& r, const AnalyticExponents& a) {
  // Same records as the CSV, typed.
  static const std::vector<std::string> counts = {"M", "n_errors", "n_trials", "n_agree"};
  static const std::vector<std::string> reals = {"p_hat", "ci_lo", "ci_hi", "D_hat", "stderr"};
  ojson records = ojson::array();
  const auto& cols = simulation_columns();
  for (const auto& rec : simulation_records(r, a, true)) {
    ojson o = ojson::object();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& v = rec[i];
      const std::string& k = cols[i];
      if (!v) {
        o[k] = nullptr;
      } else if (std::find(counts.begin(), counts.end(), k) != counts.end()) {
        o[k] = parse_count(*v);
      } else if (std::find(reals.begin(), reals.end(), k) != reals.end()) {
        o[k] = parse_real(*v);
      } else if (k == "D_analytic") {
        o[k] = *v == "inf" ? ojson("inf") : ojson(parse_real(*v));
      } else {
        o[k] = *v;
      }
    }
    records.push_back(std::move(o));
  }
  ojson doc = ojson::object();
  doc["columns"] = cols;
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

SimulationResult read_simulation_csv(std::string_view text) {
  const auto rows = csv_body(text, kSimulationColumns);
  std::optional<SimConfig> cfg;
  std::vector<CellEstimate> cells;
  std::vector<PairAgreement> agreements;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    try {
      if (f[0] == "config") {
        cfg = parse_config_note(f[12]);
      } else if (f[0] == "point") {
        cells.push_back({detector_field(f[1]), parse_int(f[2]), parse_count(f[7]),
                         parse_count(f[6]), 0, 0, 0});
      } else if (f[0] == "agreement") {
        auto [a, b] = parse_pair(f[1]);
        agreements.push_back({a, b, parse_int(f[2]), parse_count(f[7]), parse_count(f[8])});
      } else if (f[0] != "summary") {
        throw ParseError("unknown record '" + f[0] + "'");
      }
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<int>(i) + 2, 1);
    }
  }
  if (!cfg) throw ParseError("missing config record");
  return rebuild(*cfg, std::move(cells), std::move(agreements));
}

SimulationResult read_simulation_json(std::string_view text) {
  const ojson doc = parse_json_text(text);
  std::optional<SimConfig> cfg;
  std::vector<CellEstimate> cells;
  std::vector<PairAgreement> agreements;
  try {
    for (const auto& o : doc.at("records")) {
      const std::string kind = o.at("record").get<std::string>();
      if (kind == "config") {
        cfg = parse_config_note(o.at("note").get<std::string>());
      } else if (kind == "point") {
        cells.push_back({detector_field(o.at("detector").get<std::string>()), o.at("M").get<int>(),
                         o.at("n_trials").get<std::uint64_t>(),
                         o.at("n_errors").get<std::uint64_t>(), 0, 0, 0});
      } else if (kind == "agreement") {
        auto [a, b] = parse_pair(o.at("detector").get<std::string>());
        agreements.push_back({a, b, o.at("M").get<int>(), o.at("n_trials").get<std::uint64_t>(),
                              o.at("n_agree").get<std::uint64_t>()});
      } else if (kind != "summary") {
        throw ParseError("unknown record '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed simulation JSON: ") + e.what());
  }
  if (!cfg) throw ParseError("missing config record");
  return rebuild(*cfg, std::move(cells), std::move(agreements));
}

// ---- analytic outputs ----

std::optional<double> DiversityRow::abs_dev() const {
  if (!closed_form || closed_form->is_infinite() || value.is_infinite()) return std::nullopt;
  return std::fabs(value.value() - closed_form->value());
}

std::vector<DiversityRow> diversity_rows(const DiversityReport& r) {
  const std::string noise = r.noise.to_string();
  std::vector<DiversityRow> rows;
  rows.push_back({noise, r.delta, DetectorKind::ML, r.ml.d_ml, r.closed_form.d_ml, r.ml.s_star,
                  std::nullopt, r.ml.diagnostics.converged ? "ok" : "unconverged"});
  rows.push_back({noise, r.delta, DetectorKind::Linear, r.lin.d_lin, r.closed_form.d_lin,
                  std::nullopt, r.lin.alpha,
                  r.lin.heavy_tailed ? "heavy_tailed"
                                     : (r.lin.diagnostics.converged ? "ok" : "unconverged")});
  rows.push_back({noise, r.delta, DetectorKind::FA, r.d_fa, r.closed_form.d_fa, std::nullopt,
                  std::nullopt, "ok"});
  return rows;
}

std::string diversity_csv(const std::vector<DiversityRow>& rows) {
  std::string out = std::string(kDiversityColumns) + "\n";
  auto opt = [](const std::optional<double>& v) { return v ? sig6(*v) : std::string(); };
  for (const auto& r : rows) {
    out += csv_row({r.noise, sig6(r.delta), std::string(detector_name(r.detector)),
                    exponent_text(r.value), r.closed_form ? exponent_text(*r.closed_form) : "",
                    opt(r.abs_dev()), opt(r.s_star), opt(r.alpha), r.status});
  }
  return out;
}

std::string diversity_json(const std::vector<DiversityRow>& rows) {
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    ojson o = ojson::object();
    o["noise"] = r.noise;
    o["delta"] = r.delta;
    o["detector"] = detector_name(r.detector);
    o["value"] = exponent_json(r.value);
    o["closed_form"] = r.closed_form ? exponent_json(*r.closed_form) : ojson(nullptr);
    o["abs_dev"] = opt_json(r.abs_dev());
    o["s_star"] = opt_json(r.s_star);
    o["alpha"] = opt_json(r.alpha);
    o["status"] = r.status;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::vector<DiversityRow> read_diversity_csv(std::string_view text) {
  std::vector<DiversityRow> out;
  const auto rows = csv_body(text, kDiversityColumns);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& f = rows[i];
    try {
      std::optional<Exponent> cf;
      if (!f[4].empty()) cf = parse_exponent(f[4]);
      out.push_back({f[0], parse_real(f[1]), detector_field(f[2]), parse_exponent(f[3]), cf,
                     opt_real(f[6]), opt_real(f[7]), f[8]});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), static_cast<int>(i) + 2, 1);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<int>(i) + 2, 1);
    }
  }
  return out;
}

std::vector<DiversityRow> read_diversity_json(std::string_view text) {
  std::vector<DiversityRow> out;
  try {
    for (const auto& o : parse_json_text(text)) {
      std::optional<Exponent> cf;
      if (!o.at("closed_form").is_null()) cf = exponent_from_json(o.at("closed_form"));
      out.push_back({o.at("noise").get<std::string>(), o.at("delta").get<double>(),
                     detector_field(o.at("detector").get<std::string>()),
                     exponent_from_json(o.at("value")), cf, opt_from_json(o.at("s_star")),
                     opt_from_json(o.at("alpha")), o.at("status").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed diversity JSON: ") + e.what());
  }
  return out;
}

std::string threshold_csv(const NoiseModel& n, double delta, const std::vector<FAThreshold>& t) {
  std::string out = std::string(kThresholdColumns) + "\n";
  for (const auto& x : t) {
    out += csv_row({n.to_string(), sig6(delta), std::to_string(x.M), sig6(x.theta),
                    bool_text(x.boundary)});
  }
  return out;
}

std::string threshold_json(const NoiseModel& n, double delta, const std::vector<FAThreshold>& t) {
  ojson arr = ojson::array();
  for (const auto& x : t) {
    ojson o = ojson::object();
    o["noise"] = n.to_string();
    o["delta"] = delta;
    o["M"] = x.M;
    o["theta"] = x.theta;
    o["boundary"] = x.boundary;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::vector<FAThreshold> read_threshold_csv(std::string_view text) {
  std::vector<FAThreshold> out;
  const auto rows = csv_body(text, kThresholdColumns);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.push_back({parse_int(rows[i][2]), parse_real(rows[i][3]), parse_bool(rows[i][4])});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<int>(i) + 2, 1);
    }
  }
  return out;
}

std::vector<FAThreshold> read_threshold_json(std::string_view text) {
  std::vector<FAThreshold> out;
  try {
    for (const auto& o : parse_json_text(text)) {
      out.push_back({o.at("M").get<int>(), o.at("theta").get<double>(), o.at("boundary").get<bool>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed threshold JSON: ") + e.what());
  }
  return out;
}

std::string unimodal_csv(const NoiseModel& n, const UnimodalityReport& r) {
  return std::string(kUnimodalColumns) + "\n" +
         csv_row({n.to_string(), std::string(unimodal_class_name(r.unimodal_class)),
                  sig6(r.epsilon), sig6(r.xi), sig6(r.max_ratio), std::to_string(r.M0),
                  bool_text(r.certified), r.violation ? sig6(*r.violation) : ""});
}

std::string unimodal_json(const NoiseModel& n, const UnimodalityReport& r) {
  ojson o = ojson::object();
  o["noise"] = n.to_string();
  o["class"] = unimodal_class_name(r.unimodal_class);
  o["epsilon"] = r.epsilon;
  o["xi"] = r.xi;
  o["max_ratio"] = r.max_ratio;
  o["M0"] = r.M0;
  o["certified"] = r.certified;
  o["violation"] = opt_json(r.violation);
  return o.dump(2) + "\n";
}

UnimodalityReport read_unimodal_csv(std::string_view text) {
  const auto rows = csv_body(text, kUnimodalColumns);
  if (rows.size() != 1) throw ParseError("expected exactly one unimodality record");
  const auto& f = rows[0];
  UnimodalityReport r;
  r.unimodal_class = parse_unimodal_class(f[1]);
  r.epsilon = parse_real(f[2]);
  r.xi = parse_real(f[3]);
  r.max_ratio = parse_real(f[4]);
  r.M0 = parse_int(f[5]);
  r.certified = parse_bool(f[6]);
  r.violation = opt_real(f[7]);
  return r;
}

UnimodalityReport read_unimodal_json(std::string_view text) {
  const ojson o = parse_json_text(text);
  UnimodalityReport r;
  try {
    r.unimodal_class = parse_unimodal_class(o.at("class").get<std::string>());
    r.epsilon = o.at("epsilon").get<double>();
    r.xi = o.at("xi").get<double>();
    r.max_ratio = o.at("max_ratio").get<double>();
    r.M0 = o.at("M0").get<int>();
    r.certified = o.at("certified").get<bool>();
    r.violation = opt_from_json(o.at("violation"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed unimodality JSON: ") + e.what());
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace tdiv::io
