#include <cmath>

#include "qens/error.hpp"
#include "qens/learners.hpp"

namespace qens {

namespace {

double sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

// log(1 + exp(-t)) without overflow.
double softplus_neg(double t) { return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double logistic_objective(std::span<const double> w, double bias, const std::vector<std::vector<double>>& z,
                          std::span<const int> y, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) loss += softplus_neg(y[i] * (dot(w, z[i]) + bias));
  loss /= static_cast<double>(z.size());
  return loss + 0.5 * l2 * dot(w, w);
}

LogisticClassifier::LogisticClassifier(LogisticConfig config) : config_(std::move(config)) {
  if (config_.l2 < 0.0) throw Error(ErrorCategory::parameter, "l2 must be non-negative");
  if (config_.epochs < 0) throw Error(ErrorCategory::parameter, "epochs must be non-negative");
}

std::vector<double> LogisticClassifier::standardize(std::span<const double> x) const {
  if (x.size() != mean_.size()) throw Error(ErrorCategory::input, "feature count does not match the fitted model");
  std::vector<double> z(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) z[k] = (x[k] - mean_[k]) / scale_[k];
  return z;
}

void LogisticClassifier::train(const Dataset& data) {
  data.validate();
  if (data.empty()) throw Error(ErrorCategory::input, "cannot train on an empty dataset");
  const std::size_t m = data.n_features(), n = data.size();
  mean_.assign(m, 0.0);
  scale_.assign(m, 0.0);
  for (const auto& row : data.x)
    for (std::size_t k = 0; k < m; ++k) mean_[k] += row[k];
  for (auto& v : mean_) v /= static_cast<double>(n);
  for (const auto& row : data.x)
    for (std::size_t k = 0; k < m; ++k) scale_[k] += (row[k] - mean_[k]) * (row[k] - mean_[k]);
  for (auto& v : scale_) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0)) v = 1.0;
  }
  std::vector<std::vector<double>> z;
  z.reserve(n);
  for (const auto& row : data.x) z.push_back(standardize(row));

  w_.assign(m, 0.0);
  b_ = 0.0;
  const double l2 = config_.l2;
  auto objective = [&](std::span<const double> w, double b) { return logistic_objective(w, b, z, data.y, l2); };

  double step = 1.0;
  double f = objective(w_, b_);
  std::vector<double> gw(m), trial_w(m);
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double margin = data.y[i] * (dot(w_, z[i]) + b_);
      const double c = -data.y[i] * sigmoid(-margin) / static_cast<double>(n);
      for (std::size_t k = 0; k < m; ++k) gw[k] += c * z[i][k];
      gb += c;
    }
    for (std::size_t k = 0; k < m; ++k) {
      gw[k] += l2 * w_[k];
      if (config_.frozen_features.count(k)) gw[k] = 0.0;
    }
    const double gnorm2 = dot(gw, gw) + gb * gb;
    if (gnorm2 < 1e-24) break;

    // Armijo backtracking; the step grows again after each accepted move.
    step = std::min(step * 2.0, 1e3);
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t k = 0; k < m; ++k) trial_w[k] = w_[k] - step * gw[k];
      const double trial_b = b_ - step * gb;
      const double ft = objective(trial_w, trial_b);
      if (ft <= f - 0.5 * step * gnorm2) {
        w_ = trial_w;
        b_ = trial_b;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  fitted_ = true;
}

std::optional<double> LogisticClassifier::probability(std::span<const double> x) const {
  require_fitted();
  const auto z = standardize(x);
  return sigmoid(dot(w_, z) + b_);
}

int LogisticClassifier::predict(std::span<const double> x) const {
  require_fitted();
  const auto z = standardize(x);
  return dot(w_, z) + b_ >= 0.0 ? 1 : -1;
}

LogisticConfig logistic_config_from_json(const nlohmann::json& j) {
  LogisticConfig c;
  c.l2 = j.value("l2", c.l2);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("frozen_features")) {
    for (auto k : j.at("frozen_features").get<std::vector<std::size_t>>()) c.frozen_features.insert(k);
  }
  return c;
}

nlohmann::json LogisticClassifier::config_json() const {
  return {{"kind", "logistic"},
          {"l2", config_.l2},
          {"epochs", config_.epochs},
          {"seed", config_.seed},
          {"frozen_features", std::vector<std::size_t>(config_.frozen_features.begin(), config_.frozen_features.end())}};
}

nlohmann::json LogisticClassifier::to_json() const {
  nlohmann::json j = config_json();
  j["fitted"] = fitted_;
  if (fitted_) {
    j["weights"] = w_;
    j["bias"] = b_;
    j["mean"] = mean_;
    j["scale"] = scale_;
  }
  return j;
}

LogisticClassifier LogisticClassifier::from_json(const nlohmann::json& j) {
  LogisticClassifier c(logistic_config_from_json(j));
  if (j.value("fitted", false)) {
    c.w_ = j.at("weights").get<std::vector<double>>();
    c.b_ = j.at("bias").get<double>();
    c.mean_ = j.at("mean").get<std::vector<double>>();
    c.scale_ = j.at("scale").get<std::vector<double>>();
    if (c.w_.size() != c.mean_.size() || c.w_.size() != c.scale_.size()) {
      throw Error(ErrorCategory::parse, "logistic document has inconsistent arrays");
    }
    c.fitted_ = true;
  }
  return c;
}

std::unique_ptr<Classifier> LogisticClassifier::clone_untrained() const {
  return std::make_unique<LogisticClassifier>(config_);
}

}  // namespace qens
