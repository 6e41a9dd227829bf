#include "commands.hpp"

#include "ere/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace ere::cli {

using nlohmann::json;

GaussianScale parse_gaussian_scale(const std::string& name) {
  if (name == "profiled") return GaussianScale::profiled;
  if (name == "shared") return GaussianScale::shared;
  throw ConfigError("gaussian scale must be 'profiled' or 'shared', got '" + name + "'");
}

PenaltyKind parse_penalty(const std::string& name) {
  if (name == "scad") return PenaltyKind::scad;
  if (name == "mcp") return PenaltyKind::mcp;
  throw ConfigError("penalty must be 'scad' or 'mcp', got '" + name + "'");
}

void apply_config_json(const json& j, AnalysisConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (!j.contains("response")) throw ConfigError("config is missing \"response\"");
    c.response = j.at("response").get<std::string>();
    if (!j.contains("modalities") || !j.at("modalities").is_array() || j.at("modalities").empty()) {
      throw ConfigError("config needs a non-empty \"modalities\" array");
    }
    c.modalities.clear();
    for (const auto& m : j.at("modalities")) {
      c.modalities.emplace_back(m.at("name").get<std::string>(), m.at("columns").get<std::vector<std::string>>());
    }
    if (j.contains("family")) c.family = j.at("family").get<std::string>();
    if (j.contains("targets")) c.targets = j.at("targets").get<std::vector<std::string>>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("threshold") && !j.at("threshold").is_null()) c.threshold = j.at("threshold").get<double>();
    if (j.contains("lambda1_grid")) c.lambda1_grid = j.at("lambda1_grid").get<std::vector<double>>();
    if (j.contains("lambda2_grid")) c.lambda2_grid = j.at("lambda2_grid").get<std::vector<double>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("one_sided")) c.one_sided = j.at("one_sided").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void load_config_file(const std::string& path, AnalysisConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  apply_config_json(j, config);
}

namespace {

double parse_cell(const std::string& raw, std::size_t line, const std::string& column) {
  std::size_t a = 0, b = raw.size();
  while (a < b && std::isspace(static_cast<unsigned char>(raw[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(raw[b - 1]))) --b;
  const std::string_view s(raw.data() + a, b - a);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null" || ec != std::errc() ||
      ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError("row at line " + std::to_string(line) + ", column '" + column + "': missing or non-numeric value '" +
                    std::string(s) + "'");
  }
  return v;
}

}  // namespace

Ingested ingest_table(const CsvTable& table, const AnalysisConfig& c) {
  std::map<std::string, std::size_t> where;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (!where.emplace(table.header[k], k).second) throw DataError("duplicate column name '" + table.header[k] + "'");
  }
  if (c.response.empty()) throw ConfigError("no response column configured");
  if (!where.count(c.response)) throw ConfigError("response column '" + c.response + "' is not in the data header");
  if (c.modalities.empty()) throw ConfigError("no modalities configured");

  Ingested g;
  g.family = parse_family(c.family);
  std::vector<std::size_t> source;  // CSV column of each design column
  std::vector<std::string> names;
  if (c.intercept) {
    names.push_back("(intercept)");
    g.always_include.push_back(0);
  }
  std::set<std::string> used, modality_names;
  for (const auto& [name, cols] : c.modalities) {
    if (name.empty()) throw ConfigError("modality with an empty name");
    if (!modality_names.insert(name).second) throw ConfigError("duplicate modality name '" + name + "'");
    if (cols.empty()) throw ConfigError("modality '" + name + "' has no columns");
    Modality m;
    m.name = name;
    for (const auto& col : cols) {
      auto it = where.find(col);
      if (it == where.end()) throw ConfigError("modality '" + name + "' names column '" + col + "' absent from the header");
      if (col == c.response) throw ConfigError("response column '" + col + "' cannot belong to a modality");
      if (!used.insert(col).second) throw ConfigError("column '" + col + "' appears in more than one modality");
      m.columns.push_back(static_cast<Index>(names.size()));
      names.push_back(col);
      source.push_back(it->second);
    }
    g.modalities.modalities.push_back(std::move(m));
  }

  const auto n = static_cast<Index>(table.rows.size());
  const auto p = static_cast<Index>(names.size());
  if (n < 3) throw DataError("need at least 3 data rows, found " + std::to_string(n));
  g.data.X.resize(n, p);
  g.data.y.resize(n);
  const Index off = c.intercept ? 1 : 0;
  const std::size_t ycol = where.at(c.response);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t line = table.line_of_row[static_cast<std::size_t>(i)];
    g.data.y[i] = parse_cell(row[ycol], line, c.response);
    if (c.intercept) g.data.X(i, 0) = 1.0;
    for (std::size_t k = 0; k < source.size(); ++k) {
      g.data.X(i, off + static_cast<Index>(k)) = parse_cell(row[source[k]], line, names[static_cast<std::size_t>(off) + k]);
    }
  }
  g.data.column_names = names;

  g.center.assign(static_cast<std::size_t>(p), 0.0);
  g.scale.assign(static_cast<std::size_t>(p), 1.0);
  if (c.standardize) {
    for (Index j = off; j < p; ++j) {
      auto col = g.data.X.col(j);
      const double mu = col.mean();
      const double sd = std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n));
      if (!(sd > 0.0)) throw DataError("column '" + names[static_cast<std::size_t>(j)] + "' is constant");
      col = (col.array() - mu) / sd;
      g.center[static_cast<std::size_t>(j)] = mu;
      g.scale[static_cast<std::size_t>(j)] = sd;
    }
  }
  validate_dataset(g.data, g.family);
  g.modalities.validate(p);
  return g;
}

Ingested ingest(const AnalysisConfig& config) { return ingest_table(read_csv_file(config.data_path), config); }

namespace {

json names_of(const Dataset& d, const IndexSet& idx, const IndexSet& skip = {}) {
  json a = json::array();
  for (Index j : idx) {
    if (!contains(skip, j)) a.push_back(d.column_names[static_cast<std::size_t>(j)]);
  }
  return a;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::size_t> target_indices(const Ingested& g, const AnalysisConfig& c) {
  std::vector<std::size_t> out;
  if (c.targets.empty()) {
    for (std::size_t m = 0; m < g.modalities.size(); ++m) out.push_back(m);
    return out;
  }
  for (const auto& t : c.targets) {
    auto m = g.modalities.find(t);
    if (!m) throw ConfigError("target modality '" + t + "' is not configured");
    out.push_back(*m);
  }
  return out;
}

json settings_json(const AnalysisConfig& c, const Ingested& g) {
  return json{{"family", std::string(g.family.name())},
              {"response", c.response},
              {"alpha", c.alpha},
              {"two_sided", !c.one_sided},
              {"intercept", c.intercept},
              {"standardize", c.standardize},
              {"penalty", c.penalty},
              {"refit", c.refit},
              {"gaussian_scale", c.gaussian_scale},
              {"seed", c.seed},
              {"n", g.data.n()},
              {"p", g.data.p() - static_cast<Index>(g.always_include.size())}};
}

json screening_json(const ScreeningStage& st, const Dataset& d) {
  json trace = json::array();
  for (const auto& b : st.stats.bic_trace) trace.push_back({{"threshold", b.threshold}, {"size", b.model_size}, {"bic", b.bic}});
  return json{{"gamma", st.gamma},
              {"gamma_overridden", st.gamma_overridden},
              {"s_tilde", st.stats.selected.size()},
              {"selected", names_of(d, st.stats.selected)},
              {"bic_trace", trace}};
}

std::string fmt(double v, int prec = 3) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::string fmt_p(const EreInference& r) {
  char buf[64];
  if (r.p_value > 0.0) {
    std::snprintf(buf, sizeof buf, "%.3g", r.p_value);
  } else {
    const double l10 = r.log_p_value / std::log(10.0);
    std::snprintf(buf, sizeof buf, "10^%.1f", l10);
  }
  return buf;
}

}  // namespace

json infer_command(const AnalysisConfig& c, std::ostream& log, std::ostream& table) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const Ingested g = ingest(c);
  const auto targets = target_indices(g, c);
  const Dataset& d = g.data;
  log << "ingest: n=" << d.n() << " p=" << d.p() - static_cast<Index>(g.always_include.size())
      << " family=" << g.family.name() << " intercept=" << c.intercept << " standardize=" << c.standardize << "\n";

  const ScreeningStage st = run_screening(d, g.family, g.modalities.all_columns(), g.always_include, c.threshold);
  log << "screening: gamma=" << st.gamma << (st.gamma_overridden ? " (override)" : "")
      << " s_tilde=" << st.stats.selected.size() << "\n";
  for (const auto& w : st.warnings) log << "screening warning: " << w << "\n";
  if (st.stats.selected.empty()) log << "screening warning: no columns survived screening\n";

  AnalysisOptions ao;
  ao.alpha = c.alpha;
  ao.two_sided = !c.one_sided;
  ao.refit = c.refit;
  ao.penalty = parse_penalty(c.penalty);
  ao.lambda1_grid = c.lambda1_grid;
  ao.lambda2_grid = c.lambda2_grid;
  ao.gaussian_scale = parse_gaussian_scale(c.gaussian_scale);

  json report;
  report["schema_version"] = 1;
  report["command"] = "infer";
  report["settings"] = settings_json(c, g);
  report["screening"] = screening_json(st, d);
  report["modalities"] = json::array();

  const int level = static_cast<int>(std::lround(100.0 * (1.0 - c.alpha)));
  table << std::left << std::setw(16) << "Modality" << std::setw(10) << "H_m" << std::setw(24)
        << (std::to_string(level) + "% CI") << std::setw(12) << "p-value" << std::setw(10) << "R2" << "s_m\n";
  for (std::size_t m : targets) {
    const Modality& mod = g.modalities[m];
    const ModalityAnalysis a = analyze_modality(d, g.family, st, mod.columns, ao);
    const EreInference& r = a.inference;
    log << "modality " << mod.name << ": s_tilde_m=" << a.screened_m.size() << " lambda1=" << a.lambda1
        << " lambda2=" << a.lambda2 << " full_converged=" << a.full.converged
        << " reduced_converged=" << a.reduced.converged << " h_hat=" << r.h_hat
        << (a.estimate.clamped ? " (clamped)" : "") << (r.screened_out ? " screened out" : "") << "\n";
    for (const auto& w : a.warnings) log << "modality " << mod.name << " warning: " << w << "\n";

    json lt1 = json::array(), lt2 = json::array();
    for (const auto& t : a.lambda1_trace) lt1.push_back({{"lambda", t.lambda}, {"bic", t.bic}, {"df", t.df}, {"converged", t.converged}});
    for (const auto& t : a.lambda2_trace) lt2.push_back({{"lambda", t.lambda}, {"bic", t.bic}, {"df", t.df}, {"converged", t.converged}});
    json entry{{"name", mod.name},
               {"h_hat", r.h_hat},
               {"raw_diff", a.estimate.raw_diff},
               {"clamped", a.estimate.clamped},
               {"ci_lower", r.ci_lower},
               {"ci_upper", number_or_null(r.ci_upper)},
               {"p_value", r.p_value},
               {"log_p_value", r.log_p_value},
               {"r2_hat", r.r2_hat},
               {"r2_ci", {r.r2_ci_lower, r.r2_ci_upper}},
               {"s_tilde_m", r.s_tilde_m},
               {"screened_out", r.screened_out},
               {"screened_columns", names_of(d, a.screened_m)},
               {"selected_columns", names_of(d, a.full.support, g.always_include)},
               {"method", {{"gamma", st.gamma},
                           {"lambda1", a.lambda1},
                           {"lambda2", a.lambda2},
                           {"full_converged", a.full.converged},
                           {"reduced_converged", a.reduced.converged},
                           {"lambda1_trace", lt1},
                           {"lambda2_trace", lt2}}}};
    report["modalities"].push_back(entry);

    const std::string ci = r.screened_out ? "screened out"
                                          : "(" + fmt(r.ci_lower) + ", " + fmt(r.ci_upper) + ")";
    table << std::left << std::setw(16) << mod.name << std::setw(10) << fmt(r.h_hat) << std::setw(24) << ci
          << std::setw(12) << fmt_p(r) << std::setw(10) << fmt(r.r2_hat) << r.s_tilde_m << "\n";
  }
  if (!c.one_sided) {
    log << "note: the two-sided interval assumes the reduced-model bias is negligible; use --one-sided for a lower bound\n";
  }
  return report;
}

json screen_command(const AnalysisConfig& c, std::ostream& log, std::ostream& table) {
  const Ingested g = ingest(c);
  const Dataset& d = g.data;
  const ScreeningStage st = run_screening(d, g.family, g.modalities.all_columns(), g.always_include, c.threshold);
  log << "screening: gamma=" << st.gamma << " s_tilde=" << st.stats.selected.size() << "\n";
  for (const auto& w : st.warnings) log << "screening warning: " << w << "\n";

  json report;
  report["schema_version"] = 1;
  report["command"] = "screen";
  report["settings"] = settings_json(c, g);
  report["screening"] = screening_json(st, d);
  json cols = json::array();
  for (Index j : st.stats.candidates) {
    cols.push_back({{"column", d.column_names[static_cast<std::size_t>(j)]},
                    {"mmle", st.stats.mmle[j]},
                    {"selected", contains(st.stats.selected, j)}});
  }
  report["columns"] = cols;

  table << "threshold " << st.gamma << ", " << st.stats.selected.size() << " of " << st.stats.candidates.size()
        << " columns kept\n";
  for (const auto& b : st.stats.bic_trace) {
    table << "  gamma " << std::setw(12) << b.threshold << " size " << std::setw(5) << b.model_size << " BIC " << b.bic
          << (b.threshold == st.gamma ? "  <-" : "") << "\n";
  }
  for (const auto& mod : g.modalities.modalities) {
    table << mod.name << ": " << set_intersection(st.stats.selected, mod.columns).size() << " kept\n";
  }
  return report;
}

std::string simulate_command(const SimulateConfig& s, std::ostream& log) {
  CoverageConfig cc;
  cc.model = s.model;
  if (s.small) {
    cc.n = 200;
    cc.p = 400;
    cc.reps = 200;
  }
  if (s.n) cc.n = *s.n;
  if (s.p) cc.p = *s.p;
  if (s.reps) cc.reps = *s.reps;
  cc.deltas = s.deltas;
  cc.methods.clear();
  for (const auto& m : s.methods) cc.methods.push_back(parse_method(m));
  cc.modalities = s.modalities;
  cc.alpha = s.alpha;
  cc.seed = s.seed;
  cc.threads = std::max(1u, s.threads);
  if (s.fit_family) cc.method_options.fit_family = parse_family(*s.fit_family);
  cc.method_options.gaussian_scale = parse_gaussian_scale(s.gaussian_scale);
  for (double d : cc.deltas) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("delta values must be positive");
  }
  log << "simulate: model=" << cc.model << " n=" << cc.n << " p=" << cc.p << " reps=" << cc.reps
      << " seed=" << cc.seed << " threads=" << cc.threads << "\n";
  const auto rows = run_coverage(cc);
  for (const auto& r : rows) {
    if (r.failures > 0 || r.screened_out > 0) {
      log << "model " << r.model << " delta " << r.delta << " " << method_name(r.method) << " modality " << r.modality
          << ": " << r.failures << " failed replications excluded, " << r.screened_out << " screened out\n";
    }
  }
  return coverage_csv(rows);
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

}  // namespace ere::cli
