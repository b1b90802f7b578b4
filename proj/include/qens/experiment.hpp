#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qens/circuit_metrics.hpp"
#include "qens/data.hpp"
#include "qens/encoders.hpp"
#include "qens/eval.hpp"

namespace qens {

struct DataSource {
  std::string source = "synthetic";  // synthetic | features | edges
  std::size_t n_phishing = 1165;
  std::size_t n_non_phishing = 20000;
  std::optional<std::uint64_t> seed;  // synthetic only; derived when absent
  std::filesystem::path path;         // features table, or edge file
  std::filesystem::path labels;       // edges only, optional
};

DataSource data_source_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const DataSource& d);
NodeFeatureTable load_data(const DataSource& d, std::uint64_t fallback_seed);

SplitSpec split_spec_from_json(const nlohmann::json& j, std::uint64_t fallback_seed);
nlohmann::json to_json(const SplitSpec& s);

/// Rejects keys the model kind does not know, recursing into nested
/// members, and builds nothing else.
void validate_model_spec(const nlohmann::json& spec);

/// Fills every absent "seed" in a model spec (including nested members)
/// from `seed`, each nested slot with its own derived value.
nlohmann::json seed_model_spec(nlohmann::json spec, std::uint64_t seed);

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  int repeats = 1;
  std::size_t workers = 0;
  std::filesystem::path output_dir = "runs";
  DataSource data;
  SplitSpec split;
  nlohmann::json model;

  /// Fully resolved document, echoed into the run directory.
  nlohmann::json resolved() const;
};

/// Parses and validates; any problem is a validation (or configuration)
/// error raised before anything touches the disk.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SeedReport {
  int repeat = 0;
  std::uint64_t seed = 0;
  ClassificationReport report;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct ExperimentResult {
  std::filesystem::path run_dir;
  std::vector<SeedReport> runs;
  std::optional<ClassificationReport> mean;
  std::vector<std::string> warnings;
  bool failed = false;
  std::string failure;
};

/// Repeat seed r: the config seed for r = 0, a derived one afterwards.
std::uint64_t repeat_seed(std::uint64_t seed, int repeat) noexcept;

/// Trains and evaluates `repeats` times on one split. Artifacts land in
/// <output_dir>/<config-hash>-<UTC timestamp>/. A failing repeat leaves the
/// finished ones in place plus a FAILED marker.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct AnsatzStudyConfig {
  std::vector<int> circuits;  // default 1..19
  std::vector<EncoderKind> encoders{EncoderKind::Amplitude, EncoderKind::ZFeatureMap, EncoderKind::ZZFeatureMap};
  std::vector<int> layers{1, 2};
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::filesystem::path output_dir = "runs";
  DataSource data;
  SplitSpec split;
  /// VQC settings shared by every cell; encoder, ansatz and layers come from the grid.
  nlohmann::json vqc = nlohmann::json::object();
  MetricsConfig metrics;

  std::size_t cell_count() const noexcept { return circuits.size() * encoders.size() * layers.size(); }
  /// Everything except the grid lists, output location and worker count.
  nlohmann::json base_json() const;
  nlohmann::json resolved() const;
};

AnsatzStudyConfig ansatz_study_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
AnsatzStudyConfig load_ansatz_study_config(const std::filesystem::path& path);

struct AnsatzStudyResult {
  std::filesystem::path study_dir;
  std::vector<MetricsRow> metrics;
  std::vector<ScoreRow> scores;
  std::vector<CorrelationEntry> correlations;
  std::size_t cells_run = 0;
  std::size_t cells_skipped = 0;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
};

/// Grid of VQC trainings plus ansatz metrics. Cells already on disk (same
/// cell hash) are reused, so an interrupted study resumes where it stopped.
AnsatzStudyResult run_ansatz_study(const AnsatzStudyConfig& config);

/// Rebuilds correlation.csv and layer_comparison.csv from the metrics and
/// score tables in a study directory.
std::vector<CorrelationEntry> rebuild_study_reports(const std::filesystem::path& study_dir);

struct TimingRow {
  std::string model;
  std::size_t size = 0;
  double train_seconds = 0.0;
  std::size_t kernel_entries = 0;  // N(N+1)/2 for kernel models, else 0
};

struct TimingConfig {
  std::vector<std::size_t> sizes{40, 80, 160};
  std::vector<nlohmann::json> models{nlohmann::json{{"kind", "qsvm-kernel"}}};
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> output;  // CSV destination
};

TimingConfig timing_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Wall-clock training time per (size, model) on balanced synthetic data.
std::vector<TimingRow> run_timing_benchmark(const TimingConfig& config);
void write_timing_table(std::ostream& out, std::span<const TimingRow> rows);

std::string hex64(std::uint64_t v);

}  // namespace qens
