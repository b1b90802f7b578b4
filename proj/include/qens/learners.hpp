#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "qens/dataset.hpp"

namespace qens {

// ------------------------------------------------------------- logistic

struct LogisticConfig {
  double l2 = 1e-3;
  int epochs = 2000;
  /// Feature indices whose weights stay pinned at zero.
  std::set<std::size_t> frozen_features;
  std::uint64_t seed = 1;
};

/// Mean log-loss plus (l2/2)|w|^2 on standardised features; the bias is not
/// regularised. Exposed for gradient checks.
double logistic_objective(std::span<const double> weights, double bias,
                          const std::vector<std::vector<double>>& z, std::span<const int> y, double l2);

/// Full-batch gradient descent with backtracking on logistic_objective.
class LogisticClassifier final : public Classifier {
 public:
  explicit LogisticClassifier(LogisticConfig config = {});

  std::string kind() const override { return "logistic"; }
  void train(const Dataset& data) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;
  std::optional<double> probability(std::span<const double> x) const override;

  /// Standardised copy of a raw row.
  std::vector<double> standardize(std::span<const double> x) const;
  const std::vector<double>& weights() const noexcept { return w_; }
  double bias() const noexcept { return b_; }
  const LogisticConfig& config() const noexcept { return config_; }

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static LogisticClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  LogisticConfig config_;
  std::vector<double> mean_, scale_;
  std::vector<double> w_;
  double b_ = 0.0;
  bool fitted_ = false;
};

// ------------------------------------------------------------------ GBT

struct GbtConfig {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 1;
  double l2_leaf = 1e-6;
  std::uint64_t seed = 1;
};

struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double eval(std::span<const double> x) const;
  int depth() const;
};

/// Gradient boosting on the logistic loss with exact-split regression trees.
/// A round whose tree would raise the training loss is shrunk until it does not.
class GbtClassifier final : public Classifier {
 public:
  explicit GbtClassifier(GbtConfig config = {});

  std::string kind() const override { return "gbt"; }
  void train(const Dataset& data) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;
  std::optional<double> probability(std::span<const double> x) const override;

  double raw_score(std::span<const double> x) const;
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  /// Training log-loss before any tree, then after each round.
  const std::vector<double>& loss_trace() const noexcept { return loss_trace_; }
  const GbtConfig& config() const noexcept { return config_; }

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static GbtClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  GbtConfig config_;
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> loss_trace_;
  bool fitted_ = false;
};

LogisticConfig logistic_config_from_json(const nlohmann::json& j);
GbtConfig gbt_config_from_json(const nlohmann::json& j);

}  // namespace qens
