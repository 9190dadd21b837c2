#include "npcvx/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "npcvx/bounds.hpp"
#include "npcvx/ccp.hpp"
#include "npcvx/error.hpp"
#include "npcvx/harness.hpp"
#include "npcvx/np_solver.hpp"
#include "npcvx/risk.hpp"

namespace npc {

namespace {

using nlohmann::json;

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w, true) {}
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  const std::string where = "line " + std::to_string(line_no) + ", column '" + column + "'";
  if (cell.empty()) throw SchemaError("empty cell at " + where);
  const char* first = cell.data();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec == std::errc::result_out_of_range) throw NonFiniteValue("value out of range at " + where);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw SchemaError("not a number at " + where);
  if (!std::isfinite(v)) throw NonFiniteValue("non-finite value at " + where);
  return v;
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

RawCsv read_raw(std::istream& in) {
  RawCsv csv;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      for (const auto& c : cells) {
        if (c.empty()) throw SchemaError("empty column name in header");
      }
      csv.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != csv.header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(csv.header.size()));
    }
    csv.rows.push_back(std::move(cells));
    csv.line_numbers.push_back(line_no);
  }
  if (!have_header) throw SchemaError("missing header row");
  return csv;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

json read_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  std::string out;
  bool no_timestamp = false;
  std::uint64_t seed = 0;
};

void write_report(json report, const Common& common, std::ostream& out) {
  if (!common.no_timestamp) report["generated_at"] = timestamp_utc();
  const std::string text = report.dump(2) + "\n";
  if (common.out.empty() || common.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(common.out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + common.out + "'");
  f << text;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
}

int status_exit(SolveStatus s) { return s == SolveStatus::optimal ? 0 : 1; }

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string data, config, dictionary;
  std::optional<double> alpha, delta;
  std::optional<std::string> surrogate;
  std::size_t stumps = 3;
};

int run_solve(const SolveArgs& a, const Common& common, std::ostream& out) {
  NPConfig cfg = a.config.empty() ? NPConfig{} : NPConfig::from_json(read_json_file(a.config));
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.delta) cfg.delta = *a.delta;
  if (a.surrogate) cfg.surrogate = Surrogate::from_name(*a.surrogate);
  cfg.validate();

  const LabeledData pooled = load_csv(a.data);
  const Sample sample = split_pooled(pooled);
  const BaseDictionary dict = a.dictionary.empty() ? build_stump_dictionary(pooled.features, a.stumps)
                                                   : dictionary_from_json(read_json_file(a.dictionary));
  if (dict.dim() != sample.negatives.cols()) throw DimensionMismatch("dictionary and data dimensions differ");

  NPSolution sol = solve_np(sample, dict, cfg);

  ResponseTable tn = ResponseTable::from_points(dict, sample.negatives);
  SurrogateRiskFunction g(tn, cfg.surrogate, ClassSide::negative);
  const double min_r_minus = minimize_on_simplex(g, cfg.solver).objective;
  const double kap = cfg.kappa_for(dict.size());
  const double eps_bar = (min_r_minus + kap / std::sqrt(static_cast<double>(sample.n_minus()))) / cfg.alpha;
  json bound = nullptr;
  if (kap > 0.0 && eps_bar < 1.0) {
    bound = n0_and_bound(kap, eps_bar, cfg.alpha, sample.n_minus(), sample.n_plus(), cfg.surrogate.value_at_one())
                .to_json();
  }

  json report = {{"command", "solve"},
                 {"seed", common.seed},
                 {"config", cfg.to_json()},
                 {"dictionary", to_json(dict)},
                 {"solution", sol.to_json()},
                 {"min_empirical_r_minus_phi", min_r_minus},
                 {"bound", bound}};
  if (sol.weights) {
    CombinedClassifier h(dict, *sol.weights);
    report["empirical_risks"] = empirical_risks(h, cfg.surrogate, sample).to_json();
  }
  write_report(std::move(report), common, out);
  return status_exit(sol.status);
}

// ---------------------------------------------------------------------------

struct CcpArgs {
  std::string data, config;
  std::optional<double> alpha, delta;
  std::optional<std::string> surrogate;
};

int run_ccp(const CcpArgs& a, const Common& common, std::ostream& out) {
  if (a.config.empty()) throw ConfigError("ccp needs --config with an objective vector");
  const json cfg = read_json_file(a.config);
  if (!cfg.is_object() || !cfg.contains("objective")) throw ConfigError("config needs 'objective'");
  std::vector<double> coeffs;
  double alpha = 0.1, delta = 0.1;
  std::string surrogate = "hinge";
  std::optional<double> kappa;
  try {
    coeffs = cfg.at("objective").get<std::vector<double>>();
    alpha = cfg.value("alpha", alpha);
    delta = cfg.value("delta", delta);
    surrogate = cfg.value("surrogate", surrogate);
    if (cfg.contains("kappa") && !cfg.at("kappa").is_null()) kappa = cfg.at("kappa").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad ccp config: ") + e.what());
  }
  if (a.alpha) alpha = *a.alpha;
  if (a.delta) delta = *a.delta;
  if (a.surrogate) surrogate = *a.surrogate;

  const FeatureMatrix values = load_value_csv(a.data);
  if (values.cols() != coeffs.size()) {
    throw DimensionMismatch("objective has " + std::to_string(coeffs.size()) + " coefficients, data has " +
                            std::to_string(values.cols()) + " columns");
  }
  auto objective = std::make_shared<LinearFunction>(coeffs);
  CCPInstance inst = CCPInstance::from_values(objective, values, alpha, delta, Surrogate::from_name(surrogate));
  inst.kappa_override = kappa;
  inst.validate();
  CCPSolution sol = solve_ccp(inst);

  json report = {{"command", "ccp"},
                 {"seed", common.seed},
                 {"alpha", alpha},
                 {"delta", delta},
                 {"surrogate", surrogate},
                 {"objective", coeffs},
                 {"n", values.rows()},
                 {"solution", sol.to_json()}};
  if (sol.weights) {
    std::vector<double> lam(sol.weights->values().begin(), sol.weights->values().end());
    report["training_chance"] = chance_feasibility_estimate(lam, values, alpha).to_json();
  }
  write_report(std::move(report), common, out);
  return status_exit(sol.status);
}

// ---------------------------------------------------------------------------

struct LemmaArgs {
  std::uint64_t n_max = 200;
  std::size_t q_count = 50;
  std::size_t t_points = 10;
};

int run_verify(const LemmaArgs& a, const Common& common, std::ostream& out) {
  if (a.n_max == 0 || a.q_count == 0 || a.t_points == 0) throw DomainError("sweep sizes must be positive");
  LemmaSweepReport rep = sweep_binomial_lemmas(a.n_max, a.q_count, a.t_points);
  json report = {{"command", "verify-lemmas"}, {"seed", common.seed}, {"sweep", rep.to_json()},
                 {"holds", rep.all_hold()}};
  write_report(std::move(report), common, out);
  return rep.all_hold() ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string kind, config, csv;
};

int experiment_command(const ExperimentArgs& a, const Common& common, std::ostream& out) {
  const json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
  ExperimentResult res = npc::run_experiment(a.kind, cfg, common.seed);
  std::string csv_path = a.csv;
  if (csv_path.empty() && !common.out.empty() && common.out != "-") {
    csv_path = std::filesystem::path(common.out).replace_extension(".csv").string();
  }
  json report = {{"command", "experiment"}, {"kind", a.kind}, {"seed", common.seed}, {"summary", res.summary}};
  if (!csv_path.empty()) {
    write_text(csv_path, res.trials.to_string());
    report["trials_csv"] = std::filesystem::path(csv_path).filename().string();
  }
  write_report(std::move(report), common, out);
  return 0;
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------

LabeledData parse_labeled_csv(std::istream& in) {
  RawCsv raw = read_raw(in);
  std::size_t label_col = raw.header.size();
  for (std::size_t j = 0; j < raw.header.size(); ++j) {
    if (raw.header[j] == "y") {
      if (label_col != raw.header.size()) throw SchemaError("duplicate label column 'y'");
      label_col = j;
    }
  }
  if (label_col == raw.header.size()) throw SchemaError("missing label column 'y'");
  if (raw.header.size() < 2) throw SchemaError("no feature columns");
  if (raw.rows.empty()) throw EmptyData("CSV has no data rows");

  LabeledData d{FeatureMatrix(raw.header.size() - 1), {}};
  d.features.reserve(raw.rows.size());
  d.labels.reserve(raw.rows.size());
  std::vector<double> x(raw.header.size() - 1);
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& cells = raw.rows[i];
    const std::size_t line_no = raw.line_numbers[i];
    std::size_t k = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == label_col) continue;
      x[k++] = parse_cell(cells[j], line_no, raw.header[j]);
    }
    double y = 0.0;
    try {
      y = parse_cell(cells[label_col], line_no, "y");
    } catch (const Error&) {
      throw UnknownLabel("label '" + cells[label_col] + "' at line " + std::to_string(line_no));
    }
    if (y != 1.0 && y != -1.0) {
      throw UnknownLabel("label '" + cells[label_col] + "' at line " + std::to_string(line_no));
    }
    d.features.append_row(x);
    d.labels.push_back(static_cast<int>(y));
  }
  return d;
}

LabeledData load_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_labeled_csv(in);
}

FeatureMatrix parse_value_csv(std::istream& in) {
  RawCsv raw = read_raw(in);
  if (raw.rows.empty()) throw EmptyData("CSV has no data rows");
  FeatureMatrix m(raw.header.size());
  m.reserve(raw.rows.size());
  std::vector<double> x(raw.header.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = parse_cell(raw.rows[i][j], raw.line_numbers[i], raw.header[j]);
    m.append_row(x);
  }
  return m;
}

FeatureMatrix load_value_csv(const std::string& path) {
  auto in = open_input(path);
  return parse_value_csv(in);
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neyman-Pearson classification by convex aggregation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "npcvx 0.1.0");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output path for the JSON report (default stdout)");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_flag("--no-timestamp", common.no_timestamp, "Omit the generated_at field");
  };

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Fit an NP classifier to a labeled CSV");
  s->add_option("--data", solve.data, "CSV with label column y")->required();
  s->add_option("--alpha", solve.alpha, "Type-I level");
  s->add_option("--delta", solve.delta, "Confidence parameter");
  s->add_option("--surrogate", solve.surrogate, "hinge | logit | exp");
  s->add_option("--stumps", solve.stumps, "Stump thresholds per feature")->check(CLI::PositiveNumber);
  s->add_option("--dictionary", solve.dictionary, "JSON dictionary (overrides --stumps)");
  s->add_option("--config", solve.config, "NPConfig JSON");
  add_common(s);

  CcpArgs ccp;
  auto* c = app.add_subcommand("ccp", "Solve a convexified chance-constrained program");
  c->add_option("--data", ccp.data, "CSV of g_j values, one column per j")->required();
  c->add_option("--config", ccp.config, "JSON with objective, alpha, delta, surrogate")->required();
  c->add_option("--alpha", ccp.alpha, "Violation level");
  c->add_option("--delta", ccp.delta, "Confidence parameter");
  c->add_option("--surrogate", ccp.surrogate, "hinge | logit | exp");
  add_common(c);

  LemmaArgs lemma;
  auto* v = app.add_subcommand("verify-lemmas", "Exact check of the binomial tail lemmas");
  v->add_option("--n-max", lemma.n_max, "Largest n")->check(CLI::PositiveNumber);
  v->add_option("--q-count", lemma.q_count, "Number of q values in (0, 1/2]")->check(CLI::PositiveNumber);
  v->add_option("--t-points", lemma.t_points, "t grid size per (n, q)")->check(CLI::PositiveNumber);
  add_common(v);

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a simulation experiment");
  e->add_option("--kind", exp.kind, "counterexample | coverage | rate | sampling | ccp")
      ->required()
      ->check(CLI::IsMember({"counterexample", "coverage", "rate", "sampling", "ccp"}));
  e->add_option("--config", exp.config, "Experiment JSON");
  e->add_option("--csv", exp.csv, "Per-trial CSV path (default: --out with .csv)");
  add_common(e);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "npcvx 0.1.0\n";
    return 0;
  } catch (const CLI::ParseError& ex) {
    emit_error(err, "usage", ex.what());
    return 2;
  }

  try {
    if (s->parsed()) return run_solve(solve, common, out);
    if (c->parsed()) return run_ccp(ccp, common, out);
    if (v->parsed()) return run_verify(lemma, common, out);
    return experiment_command(exp, common, out);
  } catch (const Error& ex) {
    emit_error(err, ex.code(), ex.what());
    return ex.is_validation() ? 2 : 1;
  } catch (const std::exception& ex) {
    emit_error(err, "runtime", ex.what());
    return 1;
  }
}

int parse_and_dispatch(int argc, const char* const* argv) {
  return parse_and_dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace npc
