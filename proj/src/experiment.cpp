#include "qens/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "qens/ansatz.hpp"
#include "qens/error.hpp"
#include "qens/model_io.hpp"
#include "qens/parallel.hpp"
#include "qens/vqc.hpp"

namespace qens {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCategory::validation, what); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) invalid(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      invalid("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get_as(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::parse, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCategory::io, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string utc_stamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::uint64_t hash_json(const json& j) {
  const std::string s = j.dump();
  return fnv1a(s.data(), s.size());
}

fs::path fresh_run_dir(const fs::path& root, std::uint64_t hash) {
  const std::string stem = hex64(hash).substr(0, 12) + "-" + utc_stamp();
  fs::path dir = root / stem;
  for (int k = 1; fs::exists(dir); ++k) dir = root / (stem + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DataSource data_source_from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"source", "n_phishing", "n_non_phishing", "seed", "path", "labels"}, "data");
  DataSource d;
  d.source = get_as<std::string>(j, "source", d.source, "data");
  d.n_phishing = get_as<std::size_t>(j, "n_phishing", d.n_phishing, "data");
  d.n_non_phishing = get_as<std::size_t>(j, "n_non_phishing", d.n_non_phishing, "data");
  if (j.contains("seed")) d.seed = get_as<std::uint64_t>(j, "seed", 0, "data");
  d.path = resolve(get_as<std::string>(j, "path", "", "data"), base_dir);
  d.labels = resolve(get_as<std::string>(j, "labels", "", "data"), base_dir);
  if (d.source == "synthetic") {
    if (d.n_phishing == 0 || d.n_non_phishing == 0) invalid("synthetic data needs both classes");
  } else if (d.source == "features" || d.source == "edges") {
    if (d.path.empty()) invalid("data.path is required for source '" + d.source + "'");
    if (!fs::exists(d.path)) invalid("data.path does not exist: " + d.path.string());
    if (!d.labels.empty() && !fs::exists(d.labels)) invalid("data.labels does not exist: " + d.labels.string());
  } else {
    invalid("data.source must be synthetic, features or edges");
  }
  return d;
}

json to_json(const DataSource& d) {
  json j{{"source", d.source}};
  if (d.source == "synthetic") {
    j["n_phishing"] = d.n_phishing;
    j["n_non_phishing"] = d.n_non_phishing;
    if (d.seed) j["seed"] = *d.seed;
  } else {
    j["path"] = d.path.string();
    if (!d.labels.empty()) j["labels"] = d.labels.string();
  }
  return j;
}

NodeFeatureTable load_data(const DataSource& d, std::uint64_t fallback_seed) {
  if (d.source == "synthetic") return synth_dataset(d.n_phishing, d.n_non_phishing, d.seed.value_or(fallback_seed));
  if (d.source == "features") return load_feature_table(d.path);
  return extract_features(ingest_edges(d.path, d.labels));
}

SplitSpec split_spec_from_json(const json& j, std::uint64_t fallback_seed) {
  check_keys(j, {"train_positive", "train_negative", "test_positive", "test_negative", "seed"}, "split");
  SplitSpec s;
  s.train_positive = get_as<std::size_t>(j, "train_positive", s.train_positive, "split");
  s.train_negative = get_as<std::size_t>(j, "train_negative", s.train_negative, "split");
  s.test_positive = get_as<std::size_t>(j, "test_positive", s.test_positive, "split");
  s.test_negative = get_as<std::size_t>(j, "test_negative", s.test_negative, "split");
  s.seed = get_as<std::uint64_t>(j, "seed", fallback_seed, "split");
  if (s.train_positive == 0 || s.train_negative == 0) invalid("split needs training rows of both classes");
  if (s.test_positive + s.test_negative == 0) invalid("split needs test rows");
  return s;
}

json to_json(const SplitSpec& s) {
  return {{"train_positive", s.train_positive},
          {"train_negative", s.train_negative},
          {"test_positive", s.test_positive},
          {"test_negative", s.test_negative},
          {"seed", s.seed}};
}

void validate_model_spec(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string()) invalid("model spec needs a kind");
  const std::string kind = spec.at("kind").get<std::string>();
  const std::string where = "model(" + kind + ")";
  if (kind == "vqc") {
    check_keys(spec, {"kind", "encoder", "repetitions", "ansatz", "layers", "ansatz_qubits", "optimizer",
                      "max_evaluations", "rho_begin", "rho_end", "shots", "seed", "fitted"}, where);
  } else if (kind == "qsvm-kernel" || kind == "qsvm-anneal" || kind == "classical-svm") {
    check_keys(spec, {"kind", "kernel", "sigma", "encoder", "repetitions", "solver", "scaled", "C", "tolerance",
                      "max_sweeps", "bias_rule", "precision", "T0", "alpha", "t_min", "sweeps", "restarts", "seed",
                      "fitted"}, where);
  } else if (kind == "logistic") {
    check_keys(spec, {"kind", "l2", "epochs", "seed", "frozen_features", "fitted"}, where);
  } else if (kind == "gbt") {
    check_keys(spec, {"kind", "n_rounds", "learning_rate", "max_depth", "min_samples_leaf", "l2_leaf", "seed", "fitted"},
               where);
  } else if (kind == "stack") {
    check_keys(spec, {"kind", "level0", "level1", "meta", "probability_columns", "fitted"}, where);
    if (!spec.contains("level0") || !spec.at("level0").is_array() || spec.at("level0").empty())
      invalid("stack needs a non-empty level0 list");
    for (const auto& m : spec.at("level0")) validate_model_spec(m);
    if (spec.contains("level1")) {
      if (!spec.at("level1").is_array()) invalid("stack level1 must be a list");
      for (const auto& m : spec.at("level1")) validate_model_spec(m);
    }
    if (!spec.contains("meta")) invalid("stack needs a meta model");
    validate_model_spec(spec.at("meta"));
  } else if (kind == "bag") {
    check_keys(spec, {"kind", "prototype", "n_models", "combine", "holdout_fraction", "n_positive", "n_negative", "seed",
                      "fitted"}, where);
    if (!spec.contains("prototype")) invalid("bag needs a prototype model");
    validate_model_spec(spec.at("prototype"));
  } else {
    invalid("unknown model kind: " + kind);
  }
  if (spec.value("fitted", false)) invalid("model spec must not carry fitted state");
  try {
    (void)classifier_from_json(spec);
  } catch (const Error& e) {
    invalid(where + ": " + e.what());
  } catch (const json::exception& e) {
    invalid(where + ": " + e.what());
  }
}

json seed_model_spec(json spec, std::uint64_t seed) {
  const std::string kind = spec.value("kind", std::string());
  if (kind == "stack") {
    auto& l0 = spec["level0"];
    for (std::size_t i = 0; i < l0.size(); ++i) l0[i] = seed_model_spec(l0[i], mix_seed(seed, 100 + i));
    if (spec.contains("level1")) {
      auto& l1 = spec["level1"];
      for (std::size_t i = 0; i < l1.size(); ++i) l1[i] = seed_model_spec(l1[i], mix_seed(seed, 200 + i));
    }
    spec["meta"] = seed_model_spec(spec["meta"], mix_seed(seed, 300));
    return spec;
  }
  if (kind == "bag") spec["prototype"] = seed_model_spec(spec["prototype"], mix_seed(seed, 400));
  if (!spec.contains("seed")) spec["seed"] = seed;
  return spec;
}

json ExperimentConfig::resolved() const {
  return {{"name", name},       {"seed", seed},           {"repeats", repeats},
          {"workers", workers}, {"output_dir", output_dir.string()},
          {"data", to_json(data)}, {"split", to_json(split)}, {"model", model}};
}

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"name", "seed", "repeats", "workers", "output_dir", "data", "split", "model"}, "experiment");
  ExperimentConfig c;
  c.name = get_as<std::string>(j, "name", c.name, "experiment");
  c.seed = get_as<std::uint64_t>(j, "seed", c.seed, "experiment");
  c.repeats = get_as<int>(j, "repeats", c.repeats, "experiment");
  if (c.repeats < 1) invalid("repeats must be at least 1");
  c.workers = get_as<std::size_t>(j, "workers", c.workers, "experiment");
  c.output_dir = resolve(get_as<std::string>(j, "output_dir", c.output_dir.string(), "experiment"), base_dir);
  c.data = data_source_from_json(j.value("data", json::object()), base_dir);
  if (c.data.source == "synthetic" && !c.data.seed) c.data.seed = mix_seed(c.seed, 0xda7a);
  c.split = split_spec_from_json(j.value("split", json::object()), mix_seed(c.seed, 0x5b1));
  if (!j.contains("model")) invalid("experiment needs a model spec");
  c.model = j.at("model");
  validate_model_spec(c.model);
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return experiment_config_from_json(read_json_file(path), path.parent_path());
}

std::uint64_t repeat_seed(std::uint64_t seed, int repeat) noexcept {
  return repeat == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(repeat));
}

namespace {

void write_report_rows(std::ostream& out, const std::vector<SeedReport>& runs, const ClassificationReport* mean) {
  out << "run,seed,macro_precision,macro_recall,macro_f1,phishing_precision,phishing_recall,phishing_f1,tp,fp,tn,fn\n";
  out.precision(17);
  auto row = [&](const std::string& run, const std::string& seed, const ClassificationReport& r) {
    out << run << ',' << seed << ',' << r.macro_precision << ',' << r.macro_recall << ',' << r.macro_f1 << ','
        << r.phishing.precision << ',' << r.phishing.recall << ',' << r.phishing.f1 << ',' << r.confusion.tp << ','
        << r.confusion.fp << ',' << r.confusion.tn << ',' << r.confusion.fn << '\n';
  };
  for (const auto& s : runs) row(std::to_string(s.repeat), std::to_string(s.seed), s.report);
  if (mean) row("mean", "", *mean);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const json resolved = config.resolved();
  NodeFeatureTable table = load_data(config.data, config.seed);
  Split split = sample_split(table, config.split);

  ExperimentResult result;
  result.warnings = split.warnings;
  result.run_dir = fresh_run_dir(config.output_dir, hash_json(resolved));
  write_text(result.run_dir / "config.json", resolved.dump(2) + "\n");
  if (!split.warnings.empty()) write_text(result.run_dir / "warnings.txt", split.warnings.front() + "\n");

  const bool is_bag = config.model.value("kind", std::string()) == "bag";
  const Dataset pool = is_bag ? concat(split.train, split.reserve) : Dataset{};

  const auto n = static_cast<std::size_t>(config.repeats);
  std::vector<std::optional<SeedReport>> slots(n);
  std::vector<std::string> errors(n);
  parallel_for(
      n,
      [&](std::size_t r) {
        try {
          SeedReport rep;
          rep.repeat = static_cast<int>(r);
          rep.seed = repeat_seed(config.seed, rep.repeat);
          ClassifierPtr model = classifier_from_json(seed_model_spec(config.model, rep.seed));
          auto t0 = std::chrono::steady_clock::now();
          model->train(is_bag ? pool : split.train);
          rep.train_seconds = seconds_since(t0);
          t0 = std::chrono::steady_clock::now();
          const auto pred = model->predict_batch(split.test);
          rep.predict_seconds = seconds_since(t0);
          rep.report = classification_report(split.test.y, pred);

          const fs::path dir = result.run_dir / ("seed-" + std::to_string(r));
          fs::create_directories(dir);
          save_classifier(*model, dir / "model.json");
          write_text(dir / "report.json", to_json(rep.report).dump(2) + "\n");
          slots[r] = rep;
        } catch (const std::exception& e) {
          errors[r] = e.what();
        }
      },
      config.workers);

  for (std::size_t r = 0; r < n; ++r) {
    if (slots[r]) result.runs.push_back(*slots[r]);
    if (!errors[r].empty() && !result.failed) {
      result.failed = true;
      result.failure = "repeat " + std::to_string(r) + ": " + errors[r];
    }
  }
  if (!result.runs.empty()) {
    std::vector<ClassificationReport> reports;
    for (const auto& s : result.runs) reports.push_back(s.report);
    result.mean = mean_report(reports);
  }

  std::ostringstream table_csv;
  write_report_rows(table_csv, result.runs, result.mean ? &*result.mean : nullptr);
  write_text(result.run_dir / "reports.csv", table_csv.str());

  std::ostringstream timing;
  timing << "run,seed,train_seconds,predict_seconds\n";
  for (const auto& s : result.runs)
    timing << s.repeat << ',' << s.seed << ',' << s.train_seconds << ',' << s.predict_seconds << '\n';
  write_text(result.run_dir / "timing.csv", timing.str());

  json summary{{"name", config.name},
               {"train_rows", split.train.size()},
               {"test_rows", split.test.size()},
               {"per_seed", json::array()},
               {"completed", result.runs.size()},
               {"requested", n}};
  for (const auto& s : result.runs) summary["per_seed"].push_back({{"repeat", s.repeat}, {"seed", s.seed}, {"report", to_json(s.report)}});
  if (result.mean) summary["mean"] = to_json(*result.mean);
  if (result.failed) summary["failure"] = result.failure;
  write_text(result.run_dir / "summary.json", summary.dump(2) + "\n");
  if (result.failed) write_text(result.run_dir / "FAILED", result.failure + "\n");
  return result;
}

json AnsatzStudyConfig::base_json() const {
  return {{"seed", seed},
          {"data", to_json(data)},
          {"split", to_json(split)},
          {"vqc", vqc},
          {"metrics",
           {{"n_pairs", metrics.n_pairs},
            {"n_bins", metrics.n_bins},
            {"n_param_samples", metrics.n_param_samples},
            {"seed", metrics.seed}}}};
}

json AnsatzStudyConfig::resolved() const {
  json j = base_json();
  j["circuits"] = circuits;
  json enc = json::array();
  for (auto e : encoders) enc.push_back(encoder_name(e));
  j["encoders"] = enc;
  j["layers"] = layers;
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  return j;
}

AnsatzStudyConfig ansatz_study_config_from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"circuits", "encoders", "layers", "seed", "workers", "output_dir", "data", "split", "vqc", "metrics"},
             "ansatz-study");
  AnsatzStudyConfig c;
  c.circuits = get_as<std::vector<int>>(j, "circuits", AnsatzRegistry::builtin().ids(), "ansatz-study");
  if (j.contains("encoders")) {
    c.encoders.clear();
    for (const auto& name : get_as<std::vector<std::string>>(j, "encoders", {}, "ansatz-study")) {
      try {
        c.encoders.push_back(parse_encoder_kind(name));
      } catch (const Error& e) {
        invalid(e.what());
      }
    }
  }
  c.layers = get_as<std::vector<int>>(j, "layers", c.layers, "ansatz-study");
  if (c.circuits.empty() || c.encoders.empty() || c.layers.empty()) invalid("study grid has an empty axis");
  for (int id : c.circuits)
    if (!AnsatzRegistry::builtin().contains(id)) invalid("unknown circuit id " + std::to_string(id));
  for (int l : c.layers)
    if (l < 1) invalid("layers must be positive");
  c.seed = get_as<std::uint64_t>(j, "seed", c.seed, "ansatz-study");
  c.workers = get_as<std::size_t>(j, "workers", c.workers, "ansatz-study");
  c.output_dir = resolve(get_as<std::string>(j, "output_dir", c.output_dir.string(), "ansatz-study"), base_dir);
  c.data = data_source_from_json(j.value("data", json::object()), base_dir);
  if (c.data.source == "synthetic" && !c.data.seed) c.data.seed = mix_seed(c.seed, 0xda7a);
  c.split = split_spec_from_json(j.value("split", json::object()), mix_seed(c.seed, 0x5b1));
  c.vqc = j.value("vqc", json::object());
  check_keys(c.vqc, {"repetitions", "optimizer", "max_evaluations", "rho_begin", "rho_end", "shots", "seed"}, "vqc");
  json probe = c.vqc;
  probe["kind"] = "vqc";
  validate_model_spec(probe);
  const json m = j.value("metrics", json::object());
  check_keys(m, {"n_pairs", "n_bins", "n_param_samples", "seed"}, "metrics");
  c.metrics.n_pairs = get_as<int>(m, "n_pairs", c.metrics.n_pairs, "metrics");
  c.metrics.n_bins = get_as<int>(m, "n_bins", c.metrics.n_bins, "metrics");
  c.metrics.n_param_samples = get_as<int>(m, "n_param_samples", c.metrics.n_param_samples, "metrics");
  c.metrics.seed = get_as<std::uint64_t>(m, "seed", c.metrics.seed, "metrics");
  if (c.metrics.n_pairs < 1 || c.metrics.n_bins < 1 || c.metrics.n_param_samples < 1)
    invalid("metric sample counts must be positive");
  return c;
}

AnsatzStudyConfig load_ansatz_study_config(const fs::path& path) {
  return ansatz_study_config_from_json(read_json_file(path), path.parent_path());
}

namespace {

struct Cell {
  int circuit;
  EncoderKind encoder;
  int layers;
};

json cell_key(const AnsatzStudyConfig& c, const Cell& cell) {
  json k = c.base_json();
  k["cell"] = {{"circuit", cell.circuit}, {"encoder", encoder_name(cell.encoder)}, {"layers", cell.layers}};
  return k;
}

json metrics_row_json(const MetricsRow& m) {
  return {{"circuit_id", m.circuit_id},       {"layers", m.layers},           {"encoder", m.encoder},
          {"n_qubits", m.n_qubits},           {"expressibility_kl", m.expressibility_kl},
          {"meyer_wallach", m.meyer_wallach}, {"von_neumann", m.von_neumann}};
}

MetricsRow metrics_row_from(const json& j) {
  return {j.at("circuit_id").get<int>(),          j.at("layers").get<int>(),
          j.at("encoder").get<std::string>(),     j.at("n_qubits").get<int>(),
          j.at("expressibility_kl").get<double>(), j.at("meyer_wallach").get<double>(),
          j.at("von_neumann").get<double>()};
}

json score_row_json(const ScoreRow& s) {
  return {{"circuit_id", s.circuit_id}, {"layers", s.layers},   {"encoder", s.encoder},
          {"precision", s.precision},   {"recall", s.recall},   {"f1", s.f1},
          {"phishing_f1", s.phishing_f1}, {"false_positives", s.false_positives}};
}

ScoreRow score_row_from(const json& j) {
  return {j.at("circuit_id").get<int>(),   j.at("layers").get<int>(),   j.at("encoder").get<std::string>(),
          j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
          j.at("phishing_f1").get<double>(), j.at("false_positives").get<std::size_t>()};
}

void write_layer_comparison(const fs::path& path, std::span<const ScoreRow> scores) {
  std::set<int> layer_set;
  std::map<std::pair<int, std::string>, std::map<int, double>> table;
  for (const auto& s : scores) {
    layer_set.insert(s.layers);
    table[{s.circuit_id, s.encoder}][s.layers] = s.f1;
  }
  std::ostringstream out;
  out.precision(17);
  out << "circuit_id,encoder";
  for (int l : layer_set) out << ",macro_f1_layers_" << l;
  out << '\n';
  for (const auto& [key, by_layer] : table) {
    out << key.first << ',' << key.second;
    for (int l : layer_set) {
      out << ',';
      if (auto it = by_layer.find(l); it != by_layer.end()) out << it->second;
    }
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<CorrelationEntry> write_study_tables(const fs::path& dir, std::span<const MetricsRow> metrics,
                                                 std::span<const ScoreRow> scores, std::vector<std::string>& warnings) {
  std::ostringstream m, s;
  write_metrics_table(m, metrics);
  write_score_table(s, scores);
  write_text(dir / "metrics.csv", m.str());
  write_text(dir / "scores.csv", s.str());
  write_layer_comparison(dir / "layer_comparison.csv", scores);
  std::vector<CorrelationEntry> corr;
  try {
    corr = correlation_report(metrics, scores);
  } catch (const Error& e) {
    warnings.push_back(std::string("correlation report skipped: ") + e.what());
  }
  std::ostringstream c;
  write_correlation_table(c, corr);
  write_text(dir / "correlation.csv", c.str());
  return corr;
}

}  // namespace

AnsatzStudyResult run_ansatz_study(const AnsatzStudyConfig& config) {
  NodeFeatureTable table = load_data(config.data, config.seed);
  Split split = sample_split(table, config.split);
  const int n_features = static_cast<int>(split.train.n_features());

  AnsatzStudyResult result;
  result.warnings = split.warnings;
  result.study_dir = config.output_dir / ("study-" + hex64(hash_json(config.base_json())).substr(0, 12));
  const fs::path cell_dir = result.study_dir / "cells";
  fs::create_directories(cell_dir);
  write_text(result.study_dir / "config.json", config.resolved().dump(2) + "\n");

  std::vector<Cell> cells;
  for (int id : config.circuits)
    for (auto enc : config.encoders)
      for (int l : config.layers) cells.push_back({id, enc, l});

  std::vector<fs::path> paths(cells.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto h = hash_json(cell_key(config, cells[i]));
    paths[i] = cell_dir / ("cell-" + hex64(h) + ".json");
    if (fs::exists(paths[i]))
      ++result.cells_skipped;
    else
      todo.push_back(i);
  }

  // Metrics depend only on (circuit, width, layers); compute each once.
  using MetricKey = std::tuple<int, int, int>;
  std::map<MetricKey, std::pair<double, EntanglingCapacityEstimate>> metric_cache;
  for (std::size_t i : todo) {
    const int nq = encoder_qubits(cells[i].encoder, n_features);
    metric_cache[{cells[i].circuit, nq, cells[i].layers}] = {};
  }
  std::vector<MetricKey> metric_keys;
  for (const auto& [k, v] : metric_cache) metric_keys.push_back(k);
  std::vector<std::pair<double, EntanglingCapacityEstimate>> metric_vals(metric_keys.size());
  parallel_for(
      metric_keys.size(),
      [&](std::size_t k) {
        const auto [id, nq, layers] = metric_keys[k];
        const CircuitSpec ansatz = build_ansatz(id, nq, layers);
        const double kl = expressibility(ansatz, config.metrics.n_pairs, config.metrics.n_bins, config.metrics.seed).kl_divergence;
        EntanglingCapacityEstimate ent{};
        if (nq >= 2) ent = entangling_capacity(ansatz, config.metrics.n_param_samples, config.metrics.seed);
        metric_vals[k] = {kl, ent};
      },
      config.workers);
  for (std::size_t k = 0; k < metric_keys.size(); ++k) metric_cache[metric_keys[k]] = metric_vals[k];

  std::vector<std::string> errors(cells.size());
  parallel_for(
      todo.size(),
      [&](std::size_t t) {
        const std::size_t i = todo[t];
        const Cell& cell = cells[i];
        try {
          json spec = config.vqc;
          spec["kind"] = "vqc";
          spec["encoder"] = encoder_name(cell.encoder);
          spec["ansatz"] = cell.circuit;
          spec["layers"] = cell.layers;
          if (!spec.contains("seed")) spec["seed"] = mix_seed(config.seed, hash_json(cell_key(config, cell)));
          VqcClassifier model(vqc_config_from_json(spec));
          model.train(split.train);
          const auto pred = model.predict_batch(split.test);
          const auto rep = classification_report(split.test.y, pred);

          const int nq = model.n_qubits();
          const auto& [kl, ent] = metric_cache.at({cell.circuit, nq, cell.layers});
          MetricsRow m{cell.circuit, cell.layers, std::string(encoder_name(cell.encoder)), nq, kl, ent.meyer_wallach,
                       ent.von_neumann_bits};
          ScoreRow s{cell.circuit,   cell.layers,       m.encoder,          rep.macro_precision,
                     rep.macro_recall, rep.macro_f1, rep.phishing.f1, rep.confusion.fp};
          json doc{{"key", cell_key(config, cell)}, {"metrics", metrics_row_json(m)}, {"scores", score_row_json(s)}};
          write_text(paths[i], doc.dump(2) + "\n");
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      },
      config.workers);
  result.cells_run = todo.size();

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) {
      result.failures.push_back("circuit " + std::to_string(cells[i].circuit) + " " +
                                std::string(encoder_name(cells[i].encoder)) + " layers " +
                                std::to_string(cells[i].layers) + ": " + errors[i]);
      continue;
    }
    const json doc = read_json_file(paths[i]);
    result.metrics.push_back(metrics_row_from(doc.at("metrics")));
    result.scores.push_back(score_row_from(doc.at("scores")));
  }
  if (result.cells_run > 0 && result.failures.size() == result.cells_run) result.cells_run = 0;

  result.correlations = write_study_tables(result.study_dir, result.metrics, result.scores, result.warnings);
  std::ostringstream f;
  f << "cell\n";
  for (const auto& msg : result.failures) f << '"' << msg << "\"\n";
  write_text(result.study_dir / "failures.csv", f.str());

  json summary{{"cells", cells.size()},
               {"cells_run", result.cells_run},
               {"cells_reused", result.cells_skipped},
               {"failures", result.failures},
               {"warnings", result.warnings},
               {"f1_vs_meyer_wallach_sign", json::object()}};
  for (const auto& e : result.correlations) {
    if (e.metric == "meyer_wallach" && e.score == "f1")
      summary["f1_vs_meyer_wallach_sign"][e.encoder] = e.defined ? (e.r > 0 ? "positive" : e.r < 0 ? "negative" : "zero") : "undefined";
  }
  write_text(result.study_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

std::vector<CorrelationEntry> rebuild_study_reports(const fs::path& study_dir) {
  std::ifstream m(study_dir / "metrics.csv"), s(study_dir / "scores.csv");
  if (!m || !s) throw Error(ErrorCategory::io, "study directory lacks metrics.csv or scores.csv: " + study_dir.string());
  const auto metrics = read_metrics_table(m);
  const auto scores = read_score_table(s);
  std::vector<std::string> warnings;
  auto corr = write_study_tables(study_dir, metrics, scores, warnings);
  if (!warnings.empty()) throw Error(ErrorCategory::input, warnings.front());
  return corr;
}

TimingConfig timing_config_from_json(const json& j, const fs::path& base_dir) {
  check_keys(j, {"sizes", "models", "seed", "output"}, "bench");
  TimingConfig c;
  c.sizes = get_as<std::vector<std::size_t>>(j, "sizes", c.sizes, "bench");
  if (c.sizes.empty()) invalid("bench needs at least one size");
  if (!std::is_sorted(c.sizes.begin(), c.sizes.end())) invalid("bench sizes must be ascending");
  for (auto n : c.sizes)
    if (n < 2) invalid("bench sizes must be at least 2");
  if (j.contains("models")) {
    if (!j.at("models").is_array() || j.at("models").empty()) invalid("bench models must be a non-empty list");
    c.models.assign(j.at("models").begin(), j.at("models").end());
  }
  for (const auto& m : c.models) validate_model_spec(m);
  c.seed = get_as<std::uint64_t>(j, "seed", c.seed, "bench");
  if (j.contains("output")) c.output = resolve(get_as<std::string>(j, "output", "", "bench"), base_dir);
  return c;
}

std::vector<TimingRow> run_timing_benchmark(const TimingConfig& config) {
  const std::size_t largest = config.sizes.back();
  const std::size_t half = (largest + 1) / 2;
  const NodeFeatureTable table = synth_dataset(half, half, config.seed);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < table.rows.size(); ++i) (table.rows[i].label > 0 ? pos : neg).push_back(i);

  std::vector<TimingRow> rows;
  for (const auto& spec : config.models) {
    const std::string kind = spec.at("kind").get<std::string>();
    const bool kernel_model = kind == "qsvm-kernel" || kind == "qsvm-anneal" || kind == "classical-svm";
    for (std::size_t n : config.sizes) {
      std::vector<std::size_t> idx(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>((n + 1) / 2));
      idx.insert(idx.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n / 2));
      const Dataset d = table.to_dataset(idx);
      ClassifierPtr model = classifier_from_json(seed_model_spec(spec, config.seed));
      const auto t0 = std::chrono::steady_clock::now();
      model->train(d);
      rows.push_back({kind, n, seconds_since(t0), kernel_model ? n * (n + 1) / 2 : 0});
    }
  }
  return rows;
}

void write_timing_table(std::ostream& out, std::span<const TimingRow> rows) {
  out << "model,size,train_seconds,kernel_entries\n";
  out.precision(9);
  for (const auto& r : rows) out << r.model << ',' << r.size << ',' << r.train_seconds << ',' << r.kernel_entries << '\n';
}

}  // namespace qens
