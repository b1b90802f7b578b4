#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qens/circuit_metrics.hpp"

namespace qens {

/// Counts with phishing (+1) as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  /// Set when a zero denominator forced a metric to 0.
  bool zero_division = false;
};

struct ClassificationReport {
  ClassMetrics phishing;      // label +1
  ClassMetrics non_phishing;  // label -1
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
  bool zero_division = false;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred);
std::size_t false_positive_count(std::span<const int> y_true, std::span<const int> y_pred);

nlohmann::json to_json(const ClassificationReport& r);
/// Field-wise mean of several reports; confusion counts are summed.
ClassificationReport mean_report(std::span<const ClassificationReport> reports);

/// VQC scores for one study cell.
struct ScoreRow {
  int circuit_id = 0;
  int layers = 0;
  std::string encoder;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  double phishing_f1 = 0.0;
  std::size_t false_positives = 0;
};

void write_score_table(std::ostream& out, std::span<const ScoreRow> rows);
std::vector<ScoreRow> read_score_table(std::istream& in);

struct CorrelationEntry {
  std::string encoder;
  std::string metric;  // expressibility | meyer_wallach | von_neumann
  std::string score;   // precision | recall | f1
  int n = 0;
  double r = 0.0;
  bool defined = false;
};

/// Pearson r per (encoder, metric, score), pairing rows on (circuit, layers,
/// encoder). Needs at least 3 distinct circuits overall; constant columns
/// give undefined entries rather than failures.
std::vector<CorrelationEntry> correlation_report(std::span<const MetricsRow> metrics,
                                                 std::span<const ScoreRow> scores);

void write_correlation_table(std::ostream& out, std::span<const CorrelationEntry> rows);

}  // namespace qens
