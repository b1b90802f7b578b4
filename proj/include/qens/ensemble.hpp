#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qens/dataset.hpp"

namespace qens {

enum class CombineRule { MaxVote, WeightedAverage };

std::string_view combine_name(CombineRule r) noexcept;
CombineRule parse_combine_rule(std::string_view s);

/// Majority label (ties -> +1), or sign(sum w_m * pred_m) with sign(0) = +1.
/// Weighted mode needs non-negative weights that are not all zero.
int combine_votes(std::span<const int> predictions, std::span<const double> weights, CombineRule rule);

int bag_predict(std::span<const Classifier* const> members, std::span<const double> weights, CombineRule rule,
                std::span<const double> x);

/// Appends one column per model, in order: its +-1 prediction, or its P(+1)
/// when `probability_columns` is set and the model exposes one.
Dataset augment_features(std::span<const Classifier* const> models, const Dataset& data,
                         bool probability_columns = false);

struct StackingPlan {
  std::vector<ClassifierPtr> level0;
  std::vector<ClassifierPtr> level1;  // empty for two-level stacking
  ClassifierPtr meta;
  bool probability_columns = false;
};

/// Two- or three-level stacking. Base models are fitted on the training
/// data and their in-sample predictions become extra columns for the next
/// level.
class StackClassifier final : public Classifier {
 public:
  explicit StackClassifier(StackingPlan plan);

  std::string kind() const override { return "stack"; }
  std::string name() const override;
  void train(const Dataset& data) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;
  std::vector<int> predict_batch(const Dataset& data) const override;
  std::optional<double> probability(std::span<const double> x) const override;

  /// Column names the meta classifier was trained on.
  const std::vector<std::string>& signature() const noexcept { return signature_; }
  const StackingPlan& plan() const noexcept { return plan_; }
  /// Raw row -> fully augmented meta input.
  Dataset meta_inputs(const Dataset& data) const;

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static StackClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  std::vector<std::string> build_signature(std::size_t n_features) const;

  StackingPlan plan_;
  std::vector<std::string> signature_;
  std::size_t n_features_ = 0;
  bool fitted_ = false;
};

struct BaggingConfig {
  std::size_t n_models = 5;
  CombineRule combine = CombineRule::MaxVote;
  /// Stratified slice of the pool held out to score members (weighted mode).
  double holdout_fraction = 0.2;
  /// Positives shared by every member (0 = all remaining positives).
  std::size_t n_positive = 160;
  /// Negatives drawn per member (0 = same as the positive count).
  std::size_t n_negative = 0;
  std::uint64_t seed = 1;
};

/// Same-kind members trained on a shared positive sample and per-member
/// negative resamples drawn from the training pool passed to train().
class BaggingClassifier final : public Classifier {
 public:
  BaggingClassifier(ClassifierPtr prototype, BaggingConfig config);

  std::string kind() const override { return "bag"; }
  std::string name() const override;
  void train(const Dataset& pool) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;

  std::size_t size() const noexcept { return members_.size(); }
  const Classifier& member(std::size_t i) const { return *members_.at(i); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const BaggingConfig& config() const noexcept { return config_; }

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static BaggingClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  ClassifierPtr prototype_;
  BaggingConfig config_;
  std::vector<ClassifierPtr> members_;
  std::vector<double> weights_;
  bool fitted_ = false;
};

}  // namespace qens
