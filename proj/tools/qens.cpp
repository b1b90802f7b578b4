// Command-line front end: one subcommand per pipeline stage.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qens/data.hpp"
#include "qens/error.hpp"
#include "qens/eval.hpp"
#include "qens/experiment.hpp"
#include "qens/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qens;

namespace {

json read_json(const fs::path& path) {
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

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCategory::io, "cannot write " + out);
  f << j.dump(2) << '\n';
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

Dataset read_rows(const fs::path& path) { return load_feature_table(path).to_dataset(); }

template <class T>
std::vector<T> csv_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if constexpr (std::is_same_v<T, std::string>)
      out.push_back(item);
    else
      out.push_back(static_cast<T>(std::stoll(item)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical ensemble toolkit for transaction-graph phishing detection"};
  app.require_subcommand(1);

  // ingest
  std::string edges, labels, out, features, dir, config, model_path, data_path, spec_path;
  auto* ingest = app.add_subcommand("ingest", "Parse an edge list (and labels) and summarise the graph");
  ingest->add_option("--edges", edges, "Edge file with header from,to,value")->required();
  ingest->add_option("--labels", labels, "Labels file with header address,label");
  ingest->add_option("--out", out, "Also write the node feature table here");

  // features
  bool synthetic = false;
  std::size_t n_phishing = 1165, n_non_phishing = 20000;
  std::uint64_t seed = 1;
  auto* feat = app.add_subcommand("features", "Build the node feature table from edges or the synthesiser");
  feat->add_option("--edges", edges, "Edge file");
  feat->add_option("--labels", labels, "Labels file");
  feat->add_flag("--synthetic", synthetic, "Draw rows from the calibrated synthesiser");
  feat->add_option("--n-phishing", n_phishing, "Synthetic phishing rows");
  feat->add_option("--n-non-phishing", n_non_phishing, "Synthetic non-phishing rows");
  feat->add_option("--seed", seed, "Synthesiser seed");
  feat->add_option("--out", out, "Output CSV")->required();

  // split
  SplitSpec split_spec;
  auto* split = app.add_subcommand("split", "Sample disjoint train/test sets from a feature table");
  split->add_option("--features", features, "Feature table CSV")->required();
  split->add_option("--out-dir", dir, "Directory for train.csv, test.csv and reserve.csv")->required();
  split->add_option("--train-positive", split_spec.train_positive);
  split->add_option("--train-negative", split_spec.train_negative);
  split->add_option("--test-positive", split_spec.test_positive);
  split->add_option("--test-negative", split_spec.test_negative);
  split->add_option("--seed", split_spec.seed);

  // train
  std::optional<std::uint64_t> seed_override;
  std::optional<int> repeats_override;
  std::string output_dir;
  auto* train = app.add_subcommand("train", "Run an experiment config, or fit one model spec on a table");
  train->add_option("--config", config, "Experiment config (JSON)");
  train->add_option("--seed", seed_override, "Override the config seed");
  train->add_option("--repeats", repeats_override, "Override the repeat count");
  train->add_option("--output-dir", output_dir, "Override the output directory");
  train->add_option("--model-spec", spec_path, "Model spec (JSON) for a single fit");
  train->add_option("--train", data_path, "Training feature table for a single fit");
  train->add_option("--out", out, "Model file for a single fit");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a feature table");
  evaluate->add_option("--model", model_path, "Model file")->required();
  evaluate->add_option("--data", data_path, "Feature table CSV")->required();
  evaluate->add_option("--out", out, "Report destination (stdout if absent)");

  // ansatz-study
  std::string circuits, encoders, layers;
  auto* study = app.add_subcommand("ansatz-study", "Circuit x encoder x layer VQC grid with ansatz metrics");
  study->add_option("--config", config, "Study config (JSON)");
  study->add_option("--circuits", circuits, "Comma-separated circuit ids");
  study->add_option("--encoders", encoders, "Comma-separated encoders (amplitude,z,zz)");
  study->add_option("--layers", layers, "Comma-separated layer counts");
  study->add_option("--output-dir", output_dir, "Override the output directory");

  // bench
  std::string sizes, model_kind;
  auto* bench = app.add_subcommand("bench", "Training time against training-set size");
  bench->add_option("--config", config, "Bench config (JSON)");
  bench->add_option("--sizes", sizes, "Comma-separated ascending sizes");
  bench->add_option("--model", model_kind, "Model kind to time");
  bench->add_option("--seed", seed_override, "Data and model seed");
  bench->add_option("--out", out, "Timing CSV (stdout if absent)");

  // report
  auto* report = app.add_subcommand("report", "Print an experiment summary or rebuild study reports");
  report->add_option("--dir", dir, "Run or study directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", category_name(ErrorCategory::usage)}, {"message", e.what()}}.dump() << '\n';
    return exit_code(ErrorCategory::usage);
  }

  try {
    if (*ingest) {
      TransactionGraph g = ingest_edges(edges, labels);
      NodeFeatureTable t = extract_features(g);
      if (!out.empty()) save_feature_table(t, out);
      emit({{"edges", g.edges.size()},
            {"nodes", t.size()},
            {"labelled", g.labels.size()},
            {"phishing", t.count_label(1)}},
           "");
    } else if (*feat) {
      NodeFeatureTable t;
      if (synthetic) {
        if (!edges.empty()) throw Error(ErrorCategory::usage, "--synthetic and --edges are exclusive");
        t = synth_dataset(n_phishing, n_non_phishing, seed);
      } else {
        if (edges.empty()) throw Error(ErrorCategory::usage, "features needs --edges or --synthetic");
        t = extract_features(ingest_edges(edges, labels));
      }
      save_feature_table(t, out);
      emit({{"rows", t.size()}, {"phishing", t.count_label(1)}, {"out", out}}, "");
    } else if (*split) {
      const NodeFeatureTable t = load_feature_table(features);
      Split s = sample_split(t, split_spec);
      warn(s.warnings);
      fs::create_directories(dir);
      save_feature_table(table_from_dataset(s.train), fs::path(dir) / "train.csv");
      save_feature_table(table_from_dataset(s.test), fs::path(dir) / "test.csv");
      save_feature_table(table_from_dataset(s.reserve), fs::path(dir) / "reserve.csv");
      emit({{"train", s.train.size()}, {"test", s.test.size()}, {"reserve", s.reserve.size()}, {"split", to_json(s.effective)}},
           "");
    } else if (*train) {
      if (!config.empty()) {
        json j = read_json(config);
        if (seed_override) j["seed"] = *seed_override;
        if (repeats_override) j["repeats"] = *repeats_override;
        if (!output_dir.empty()) j["output_dir"] = fs::absolute(output_dir).string();
        const ExperimentConfig c = experiment_config_from_json(j, fs::path(config).parent_path());
        ExperimentResult r = run_experiment(c);
        warn(r.warnings);
        json summary{{"run_dir", r.run_dir.string()}, {"completed", r.runs.size()}};
        if (r.mean) summary["mean"] = to_json(*r.mean);
        if (r.failed) {
          summary["failure"] = r.failure;
          emit(summary, "");
          throw Error(ErrorCategory::data, "run failed: " + r.failure);
        }
        emit(summary, "");
      } else {
        if (spec_path.empty() || data_path.empty() || out.empty()) {
          throw Error(ErrorCategory::usage, "train needs --config, or --model-spec with --train and --out");
        }
        json spec = read_json(spec_path);
        validate_model_spec(spec);
        ClassifierPtr m = classifier_from_json(seed_model_spec(spec, seed_override.value_or(1)));
        const Dataset d = read_rows(data_path);
        m->train(d);
        save_classifier(*m, out);
        emit({{"model", out}, {"kind", m->kind()}, {"train_accuracy", accuracy(*m, d)}}, "");
      }
    } else if (*evaluate) {
      ClassifierPtr m = load_classifier(model_path);
      if (!m->fitted()) throw Error(ErrorCategory::usage, "model file holds no fitted state");
      const Dataset d = read_rows(data_path);
      emit(to_json(classification_report(d.y, m->predict_batch(d))), out);
    } else if (*study) {
      json j = config.empty() ? json::object() : read_json(config);
      if (!circuits.empty()) j["circuits"] = csv_list<int>(circuits);
      if (!encoders.empty()) j["encoders"] = csv_list<std::string>(encoders);
      if (!layers.empty()) j["layers"] = csv_list<int>(layers);
      if (!output_dir.empty()) j["output_dir"] = fs::absolute(output_dir).string();
      const fs::path base = config.empty() ? fs::path() : fs::path(config).parent_path();
      const AnsatzStudyConfig c = ansatz_study_config_from_json(j, base);
      AnsatzStudyResult r = run_ansatz_study(c);
      warn(r.warnings);
      emit({{"study_dir", r.study_dir.string()},
            {"cells", c.cell_count()},
            {"cells_run", r.cells_run},
            {"cells_reused", r.cells_skipped},
            {"failures", r.failures}},
           "");
    } else if (*bench) {
      json j = config.empty() ? json::object() : read_json(config);
      if (!sizes.empty()) j["sizes"] = csv_list<std::size_t>(sizes);
      if (!model_kind.empty()) j["models"] = json::array({{{"kind", model_kind}}});
      if (seed_override) j["seed"] = *seed_override;
      if (!out.empty()) j["output"] = fs::absolute(out).string();
      const TimingConfig c = timing_config_from_json(j, config.empty() ? fs::path() : fs::path(config).parent_path());
      const auto rows = run_timing_benchmark(c);
      if (c.output) {
        std::ofstream f(*c.output);
        if (!f) throw Error(ErrorCategory::io, "cannot write " + c.output->string());
        write_timing_table(f, rows);
      } else {
        write_timing_table(std::cout, rows);
      }
    } else if (*report) {
      const fs::path d(dir);
      if (fs::exists(d / "metrics.csv") && fs::exists(d / "scores.csv")) {
        const auto corr = rebuild_study_reports(d);
        write_correlation_table(std::cout, corr);
      } else if (fs::exists(d / "summary.json")) {
        emit(read_json(d / "summary.json"), "");
      } else {
        throw Error(ErrorCategory::io, "not a run or study directory: " + dir);
      }
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", category_name(e.category())}, {"message", e.what()}}.dump() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
