#include "qens/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "qens/error.hpp"
#include "qens/eval.hpp"
#include "qens/model_io.hpp"

namespace qens {

std::string_view combine_name(CombineRule r) noexcept {
  return r == CombineRule::MaxVote ? "max_vote" : "weighted";
}

CombineRule parse_combine_rule(std::string_view s) {
  if (s == "max_vote" || s == "max" || s == "vote") return CombineRule::MaxVote;
  if (s == "weighted" || s == "weighted_average") return CombineRule::WeightedAverage;
  throw Error(ErrorCategory::configuration, "unknown combine rule: " + std::string(s));
}

int combine_votes(std::span<const int> predictions, std::span<const double> weights, CombineRule rule) {
  if (predictions.empty()) throw Error(ErrorCategory::input, "no member predictions");
  if (rule == CombineRule::MaxVote) {
    long sum = 0;
    for (int p : predictions) sum += p > 0 ? 1 : -1;
    return sum >= 0 ? 1 : -1;
  }
  if (weights.size() != predictions.size()) throw Error(ErrorCategory::parameter, "one weight per member required");
  double total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw Error(ErrorCategory::parameter, "member weights must be non-negative");
    total += weights[i];
    acc += weights[i] * (predictions[i] > 0 ? 1.0 : -1.0);
  }
  if (total == 0.0) throw Error(ErrorCategory::parameter, "member weights are all zero");
  return acc >= 0.0 ? 1 : -1;
}

int bag_predict(std::span<const Classifier* const> members, std::span<const double> weights, CombineRule rule,
                std::span<const double> x) {
  std::vector<int> preds;
  preds.reserve(members.size());
  for (const auto* m : members) preds.push_back(m->predict(x));
  return combine_votes(preds, weights, rule);
}

Dataset augment_features(std::span<const Classifier* const> models, const Dataset& data, bool probability_columns) {
  Dataset out = data;
  for (const auto* m : models) {
    if (!m->fitted()) throw Error(ErrorCategory::usage, "cannot augment with an unfitted model: " + m->name());
    const std::vector<int> preds = m->predict_batch(data);
    for (std::size_t i = 0; i < data.size(); ++i) {
      double v = preds[i];
      if (probability_columns) {
        if (auto p = m->probability(data.x[i])) v = *p;
      }
      out.x[i].push_back(v);
    }
  }
  return out;
}

namespace {

std::vector<const Classifier*> raw(const std::vector<ClassifierPtr>& v) {
  std::vector<const Classifier*> out;
  for (const auto& p : v) out.push_back(p.get());
  return out;
}

Dataset single_row(std::span<const double> x) {
  Dataset d;
  d.x.emplace_back(x.begin(), x.end());
  d.y.push_back(1);
  return d;
}

nlohmann::json docs(const std::vector<ClassifierPtr>& v, bool fitted_state) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : v) a.push_back(fitted_state ? p->to_json() : p->config_json());
  return a;
}

std::vector<ClassifierPtr> from_docs(const nlohmann::json& a) {
  std::vector<ClassifierPtr> out;
  for (const auto& d : a) out.push_back(classifier_from_json(d));
  return out;
}

}  // namespace

StackClassifier::StackClassifier(StackingPlan plan) : plan_(std::move(plan)) {
  if (plan_.level0.empty()) throw Error(ErrorCategory::configuration, "stacking needs at least one level-0 model");
  if (!plan_.meta) throw Error(ErrorCategory::configuration, "stacking needs a meta classifier");
}

std::string StackClassifier::name() const {
  std::string s = "stack[";
  for (std::size_t i = 0; i < plan_.level0.size(); ++i) s += (i ? "," : "") + plan_.level0[i]->name();
  if (!plan_.level1.empty()) {
    s += "|";
    for (std::size_t i = 0; i < plan_.level1.size(); ++i) s += (i ? "," : "") + plan_.level1[i]->name();
  }
  return s + "->" + plan_.meta->name() + "]";
}

std::vector<std::string> StackClassifier::build_signature(std::size_t n_features) const {
  std::vector<std::string> sig;
  for (std::size_t i = 0; i < n_features; ++i) sig.push_back("f" + std::to_string(i));
  for (const auto& m : plan_.level0) sig.push_back("L0:" + m->name());
  for (const auto& m : plan_.level1) sig.push_back("L1:" + m->name());
  return sig;
}

void StackClassifier::train(const Dataset& data) {
  data.validate();
  if (data.empty()) throw Error(ErrorCategory::input, "empty training set");
  fitted_ = false;
  n_features_ = data.n_features();
  for (auto& m : plan_.level0) m->train(data);
  Dataset d = augment_features(raw(plan_.level0), data, plan_.probability_columns);
  if (!plan_.level1.empty()) {
    for (auto& m : plan_.level1) m->train(d);
    d = augment_features(raw(plan_.level1), d, plan_.probability_columns);
  }
  plan_.meta->train(d);
  signature_ = build_signature(n_features_);
  fitted_ = true;
}

Dataset StackClassifier::meta_inputs(const Dataset& data) const {
  require_fitted();
  if (data.n_features() != n_features_) {
    throw Error(ErrorCategory::contract, "stack expects " + std::to_string(n_features_) + " features, got " +
                                             std::to_string(data.n_features()));
  }
  Dataset d = augment_features(raw(plan_.level0), data, plan_.probability_columns);
  if (!plan_.level1.empty()) d = augment_features(raw(plan_.level1), d, plan_.probability_columns);
  if (d.n_features() != signature_.size()) throw Error(ErrorCategory::contract, "meta input width drifted");
  return d;
}

int StackClassifier::predict(std::span<const double> x) const {
  return plan_.meta->predict(meta_inputs(single_row(x)).x.front());
}

std::vector<int> StackClassifier::predict_batch(const Dataset& data) const {
  if (data.empty()) return {};
  return plan_.meta->predict_batch(meta_inputs(data));
}

std::optional<double> StackClassifier::probability(std::span<const double> x) const {
  return plan_.meta->probability(meta_inputs(single_row(x)).x.front());
}

nlohmann::json StackClassifier::config_json() const {
  nlohmann::json j{{"kind", "stack"},
                   {"level0", docs(plan_.level0, false)},
                   {"meta", plan_.meta->config_json()},
                   {"probability_columns", plan_.probability_columns}};
  if (!plan_.level1.empty()) j["level1"] = docs(plan_.level1, false);
  return j;
}

nlohmann::json StackClassifier::to_json() const {
  nlohmann::json j{{"kind", "stack"},
                   {"level0", docs(plan_.level0, true)},
                   {"meta", plan_.meta->to_json()},
                   {"probability_columns", plan_.probability_columns},
                   {"fitted", fitted_}};
  if (!plan_.level1.empty()) j["level1"] = docs(plan_.level1, true);
  if (fitted_) {
    j["n_features"] = n_features_;
    j["signature"] = signature_;
  }
  return j;
}

StackClassifier StackClassifier::from_json(const nlohmann::json& j) {
  StackingPlan plan;
  plan.level0 = from_docs(j.at("level0"));
  if (j.contains("level1")) plan.level1 = from_docs(j.at("level1"));
  plan.meta = classifier_from_json(j.at("meta"));
  plan.probability_columns = j.value("probability_columns", false);
  StackClassifier s(std::move(plan));
  if (j.value("fitted", false)) {
    s.n_features_ = j.at("n_features").get<std::size_t>();
    s.signature_ = j.at("signature").get<std::vector<std::string>>();
    auto all_fitted = [](const std::vector<ClassifierPtr>& v) {
      return std::all_of(v.begin(), v.end(), [](const auto& p) { return p->fitted(); });
    };
    if (!all_fitted(s.plan_.level0) || !all_fitted(s.plan_.level1) || !s.plan_.meta->fitted()) {
      throw Error(ErrorCategory::parse, "fitted stack document has unfitted members");
    }
    if (s.signature_ != s.build_signature(s.n_features_)) {
      throw Error(ErrorCategory::contract, "stack signature does not match its members");
    }
    s.fitted_ = true;
  }
  return s;
}

std::unique_ptr<Classifier> StackClassifier::clone_untrained() const {
  StackingPlan plan;
  for (const auto& m : plan_.level0) plan.level0.push_back(m->clone_untrained());
  for (const auto& m : plan_.level1) plan.level1.push_back(m->clone_untrained());
  plan.meta = plan_.meta->clone_untrained();
  plan.probability_columns = plan_.probability_columns;
  return std::make_unique<StackClassifier>(std::move(plan));
}

BaggingClassifier::BaggingClassifier(ClassifierPtr prototype, BaggingConfig config)
    : prototype_(std::move(prototype)), config_(config) {
  if (!prototype_) throw Error(ErrorCategory::configuration, "bagging needs a member prototype");
  if (config_.n_models == 0) throw Error(ErrorCategory::configuration, "bagging needs at least one member");
  if (!(config_.holdout_fraction >= 0.0 && config_.holdout_fraction < 1.0)) {
    throw Error(ErrorCategory::configuration, "holdout fraction must be in [0, 1)");
  }
}

std::string BaggingClassifier::name() const {
  return "bag" + std::to_string(config_.n_models) + "[" + prototype_->name() + "," +
         std::string(combine_name(config_.combine)) + "]";
}

void BaggingClassifier::train(const Dataset& pool) {
  pool.validate();
  fitted_ = false;
  members_.clear();
  weights_.clear();

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < pool.size(); ++i) (pool.y[i] > 0 ? pos : neg).push_back(i);
  std::mt19937_64 rng(config_.seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  std::vector<std::size_t> holdout;
  const bool weighted = config_.combine == CombineRule::WeightedAverage;
  if (weighted) {
    auto take = [&](std::vector<std::size_t>& v) {
      std::size_t k = static_cast<std::size_t>(config_.holdout_fraction * static_cast<double>(v.size()));
      if (k == 0 && config_.holdout_fraction > 0.0 && v.size() > 1) k = 1;
      holdout.insert(holdout.end(), v.end() - static_cast<std::ptrdiff_t>(k), v.end());
      v.resize(v.size() - k);
    };
    take(pos);
    take(neg);
  }
  if (pos.empty() || neg.empty()) throw Error(ErrorCategory::data, "bagging pool needs both classes");

  if (config_.n_positive > 0 && pos.size() > config_.n_positive) pos.resize(config_.n_positive);
  const std::size_t n_neg = std::min(config_.n_negative > 0 ? config_.n_negative : pos.size(), neg.size());

  for (std::size_t m = 0; m < config_.n_models; ++m) {
    std::mt19937_64 mrng(mix_seed(config_.seed, m + 1));
    std::vector<std::size_t> negs = neg;
    for (std::size_t i = 0; i < n_neg; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, negs.size() - 1);
      std::swap(negs[i], negs[pick(mrng)]);
    }
    std::vector<std::size_t> rows = pos;
    rows.insert(rows.end(), negs.begin(), negs.begin() + static_cast<std::ptrdiff_t>(n_neg));
    std::sort(rows.begin(), rows.end());
    auto member = prototype_->clone_untrained();
    member->train(pool.subset(rows));
    members_.push_back(std::move(member));
  }

  weights_.assign(members_.size(), 1.0);
  if (weighted && !holdout.empty()) {
    const Dataset h = pool.subset(holdout);
    for (std::size_t m = 0; m < members_.size(); ++m) {
      weights_[m] = classification_report(h.y, members_[m]->predict_batch(h)).phishing.f1;
    }
    // A holdout no member can score on leaves nothing to weight by.
    if (std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 0.0; })) {
      weights_.assign(members_.size(), 1.0);
    }
  }
  fitted_ = true;
}

int BaggingClassifier::predict(std::span<const double> x) const {
  require_fitted();
  return bag_predict(raw(members_), weights_, config_.combine, x);
}

nlohmann::json BaggingClassifier::config_json() const {
  return {{"kind", "bag"},
          {"prototype", prototype_->config_json()},
          {"n_models", config_.n_models},
          {"combine", combine_name(config_.combine)},
          {"holdout_fraction", config_.holdout_fraction},
          {"n_positive", config_.n_positive},
          {"n_negative", config_.n_negative},
          {"seed", config_.seed}};
}

nlohmann::json BaggingClassifier::to_json() const {
  nlohmann::json j = config_json();
  j["fitted"] = fitted_;
  if (fitted_) {
    j["members"] = docs(members_, true);
    j["weights"] = weights_;
  }
  return j;
}

BaggingClassifier BaggingClassifier::from_json(const nlohmann::json& j) {
  BaggingConfig c;
  c.n_models = j.value("n_models", c.n_models);
  c.combine = parse_combine_rule(j.value("combine", std::string("max_vote")));
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  c.n_positive = j.value("n_positive", c.n_positive);
  c.n_negative = j.value("n_negative", c.n_negative);
  c.seed = j.value("seed", c.seed);
  BaggingClassifier b(classifier_from_json(j.at("prototype")), c);
  if (j.value("fitted", false)) {
    b.members_ = from_docs(j.at("members"));
    b.weights_ = j.at("weights").get<std::vector<double>>();
    if (b.members_.size() != b.weights_.size() || b.members_.empty()) {
      throw Error(ErrorCategory::parse, "bagging members and weights disagree");
    }
    b.fitted_ = true;
  }
  return b;
}

std::unique_ptr<Classifier> BaggingClassifier::clone_untrained() const {
  return std::make_unique<BaggingClassifier>(prototype_->clone_untrained(), config_);
}

}  // namespace qens
