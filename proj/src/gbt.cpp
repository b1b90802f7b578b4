#include <algorithm>
#include <cmath>
#include <numeric>

#include "qens/error.hpp"
#include "qens/learners.hpp"

namespace qens {

namespace {

double sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

double log_loss(std::span<const double> score, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = y[i] * score[i];
    s += t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  }
  return s / static_cast<double>(y.size());
}

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  std::span<const double> grad, hess;
  const GbtConfig& cfg;
  RegressionTree tree;

  double leaf_value(const std::vector<std::size_t>& rows) const {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad[r];
      h += hess[r];
    }
    return -g / (h + cfg.l2_leaf);
  }

  int build(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].value = leaf_value(rows);
    if (depth >= cfg.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf)) return id;

    // Identical gradients cannot be separated by any split.
    const bool uniform = std::all_of(rows.begin(), rows.end(), [&](auto r) { return grad[r] == grad[rows.front()]; });
    if (uniform) return id;

    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += grad[r];
      H += hess[r];
    }
    const double parent = G * G / (H + cfg.l2_leaf);
    const std::size_t m = x[rows.front()].size();
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order = rows;
    for (std::size_t f = 0; f < m; ++f) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a][f] < x[b][f]; });
      double gl = 0.0, hl = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        gl += grad[order[k]];
        hl += hess[order[k]];
        const double v = x[order[k]][f], next = x[order[k + 1]][f];
        if (v == next) continue;
        const std::size_t nl = k + 1, nr = order.size() - nl;
        if (nl < static_cast<std::size_t>(cfg.min_samples_leaf) || nr < static_cast<std::size_t>(cfg.min_samples_leaf)) continue;
        const double gr = G - gl, hr = H - hl;
        const double gain = gl * gl / (hl + cfg.l2_leaf) + gr * gr / (hr + cfg.l2_leaf) - parent;
        // Zero-gain splits are allowed so interactions such as XOR stay reachable.
        if (gain >= -1e-12 && (best_feature < 0 || gain > best_gain + 1e-12)) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x[r][best_feature] <= best_threshold ? left : right).push_back(r);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    const int l = build(std::move(left), depth + 1);
    const int rgt = build(std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = rgt;
    return id;
  }
};

}  // namespace

double RegressionTree::eval(std::span<const double> x) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

GbtClassifier::GbtClassifier(GbtConfig config) : config_(config) {
  if (config_.n_rounds < 0) throw Error(ErrorCategory::parameter, "n_rounds must be non-negative");
  if (config_.max_depth < 0) throw Error(ErrorCategory::parameter, "max_depth must be non-negative");
  if (!(config_.learning_rate > 0.0)) throw Error(ErrorCategory::parameter, "learning_rate must be positive");
  if (config_.min_samples_leaf < 1) throw Error(ErrorCategory::parameter, "min_samples_leaf must be >= 1");
}

void GbtClassifier::train(const Dataset& data) {
  data.validate();
  if (data.empty()) throw Error(ErrorCategory::input, "cannot train on an empty dataset");
  const std::size_t n = data.size();
  const double pos = static_cast<double>(data.count_label(1)) / static_cast<double>(n);
  const double p = std::clamp(pos, 1e-6, 1.0 - 1e-6);
  // Scores live on the +-1 margin scale: P(+1) = sigmoid(score).
  base_score_ = std::log(p / (1.0 - p));
  trees_.clear();
  std::vector<double> score(n, base_score_), grad(n), hess(n), step(n);
  loss_trace_ = {log_loss(score, data.y)};

  for (int round = 0; round < config_.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pr = sigmoid(score[i]);
      const double t = data.y[i] > 0 ? 1.0 : 0.0;
      grad[i] = pr - t;
      hess[i] = std::max(pr * (1.0 - pr), 1e-12);
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    TreeBuilder builder{data.x, grad, hess, config_, {}};
    builder.build(std::move(rows), 0);
    RegressionTree tree = std::move(builder.tree);

    for (std::size_t i = 0; i < n; ++i) step[i] = tree.eval(data.x[i]);
    double shrink = config_.learning_rate;
    double loss = 0.0;
    std::vector<double> trial(n);
    for (int tries = 0;; ++tries) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = score[i] + shrink * step[i];
      loss = log_loss(trial, data.y);
      if (loss <= loss_trace_.back()) break;
      if (tries == 30) {
        shrink = 0.0;
        trial = score;
        loss = loss_trace_.back();
        break;
      }
      shrink *= 0.5;
    }
    for (auto& node : tree.nodes) node.value *= shrink;
    score = std::move(trial);
    trees_.push_back(std::move(tree));
    loss_trace_.push_back(loss);
  }
  fitted_ = true;
}

double GbtClassifier::raw_score(std::span<const double> x) const {
  require_fitted();
  double s = base_score_;
  for (const auto& t : trees_) s += t.eval(x);
  return s;
}

int GbtClassifier::predict(std::span<const double> x) const { return raw_score(x) >= 0.0 ? 1 : -1; }

std::optional<double> GbtClassifier::probability(std::span<const double> x) const {
  return sigmoid(raw_score(x));
}

GbtConfig gbt_config_from_json(const nlohmann::json& j) {
  GbtConfig c;
  c.n_rounds = j.value("n_rounds", c.n_rounds);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
  c.l2_leaf = j.value("l2_leaf", c.l2_leaf);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json GbtClassifier::config_json() const {
  return {{"kind", "gbt"},
          {"n_rounds", config_.n_rounds},
          {"learning_rate", config_.learning_rate},
          {"max_depth", config_.max_depth},
          {"min_samples_leaf", config_.min_samples_leaf},
          {"l2_leaf", config_.l2_leaf},
          {"seed", config_.seed}};
}

nlohmann::json GbtClassifier::to_json() const {
  nlohmann::json j = config_json();
  j["fitted"] = fitted_;
  if (fitted_) {
    j["base_score"] = base_score_;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : trees_) {
      auto nodes = nlohmann::json::array();
      for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      trees.push_back(std::move(nodes));
    }
  }
  return j;
}

GbtClassifier GbtClassifier::from_json(const nlohmann::json& j) {
  GbtClassifier c(gbt_config_from_json(j));
  if (j.value("fitted", false)) {
    c.base_score_ = j.at("base_score").get<double>();
    for (const auto& tj : j.at("trees")) {
      RegressionTree t;
      for (const auto& nj : tj) {
        t.nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(), nj.at(3).get<int>(),
                           nj.at(4).get<double>()});
      }
      if (t.nodes.empty()) throw Error(ErrorCategory::parse, "empty regression tree");
      c.trees_.push_back(std::move(t));
    }
    c.fitted_ = true;
  }
  return c;
}

std::unique_ptr<Classifier> GbtClassifier::clone_untrained() const {
  return std::make_unique<GbtClassifier>(config_);
}

}  // namespace qens
