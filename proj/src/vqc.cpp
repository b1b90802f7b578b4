#include "qens/vqc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "qens/ansatz.hpp"
#include "qens/error.hpp"
#include "qens/parallel.hpp"

namespace qens {

double parity_label_probability(std::span<const double> probs) {
  double p = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (std::popcount(i) % 2 == 0) p += probs[i];
  return p;
}

double binary_cross_entropy(double p_plus, int label) {
  const double p = std::clamp(p_plus, 1e-9, 1.0 - 1e-9);
  return label > 0 ? -std::log(p) : -std::log(1.0 - p);
}

namespace {

double cost_over_states(std::span<const double> params, const std::vector<StateVector>& encoded,
                        std::span<const int> labels, const CircuitSpec& ansatz) {
  std::vector<double> loss(encoded.size());
  parallel_for(encoded.size(), [&](std::size_t i) {
    const StateVector out = apply_circuit(encoded[i], ansatz, params);
    loss[i] = binary_cross_entropy(parity_label_probability(outcome_probabilities(out)), labels[i]);
  });
  double total = 0.0;
  for (double l : loss) total += l;
  return total / static_cast<double>(loss.size());
}

}  // namespace

double vqc_cost(std::span<const double> params, const std::vector<std::vector<double>>& xs,
                std::span<const int> labels, const VqcShape& shape) {
  if (xs.empty()) throw Error(ErrorCategory::input, "empty batch");
  if (xs.size() != labels.size()) throw Error(ErrorCategory::input, "batch features and labels differ in length");
  std::vector<StateVector> encoded;
  encoded.reserve(xs.size());
  for (const auto& x : xs) encoded.push_back(encode(x, shape.encoder));
  return cost_over_states(params, encoded, labels, shape.ansatz);
}

VqcClassifier::VqcClassifier(VqcConfig config) : config_(std::move(config)) {
  if (config_.layers < 1) throw Error(ErrorCategory::configuration, "vqc layers must be positive");
  if (config_.encoder.repetitions < 1) throw Error(ErrorCategory::configuration, "encoder repetitions must be positive");
  if (!AnsatzRegistry::builtin().contains(config_.ansatz_id)) {
    throw Error(ErrorCategory::registry, "no ansatz with id " + std::to_string(config_.ansatz_id));
  }
  if (config_.optimizer.max_evaluations < 1) {
    throw Error(ErrorCategory::configuration, "optimizer budget must be >= 1");
  }
}

std::string VqcClassifier::name() const {
  return "vqc[" + std::string(encoder_name(config_.encoder.kind)) + ",ansatz" +
         std::to_string(config_.ansatz_id) + ",L" + std::to_string(config_.layers) + "]";
}

void VqcClassifier::train(const Dataset& data) {
  data.validate();
  if (data.empty()) throw Error(ErrorCategory::input, "cannot train on an empty dataset");
  const int width = encoder_qubits(config_.encoder.kind, static_cast<int>(data.n_features()));
  if (config_.ansatz_qubits && *config_.ansatz_qubits != width) {
    throw Error(ErrorCategory::configuration,
                "ansatz width " + std::to_string(*config_.ansatz_qubits) +
                    " does not match encoder width " + std::to_string(width));
  }
  if (config_.encoder.kind == EncoderKind::ZZFeatureMap && data.n_features() < 2) {
    throw Error(ErrorCategory::configuration, "ZZ feature map needs at least 2 features");
  }
  ansatz_ = build_ansatz(config_.ansatz_id, width, config_.layers);
  ranges_ = fit_ranges(data.x);

  // The encoder does not depend on the trainable angles.
  std::vector<StateVector> encoded;
  encoded.reserve(data.size());
  for (const auto& row : data.x) encoded.push_back(encode(scale_features(row, ranges_), config_.encoder));

  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  initial_params_.resize(static_cast<std::size_t>(ansatz_.n_params()));
  for (auto& p : initial_params_) p = angle(rng);

  OptimizerOptions opts = config_.optimizer;
  opts.seed = config_.seed;
  const auto objective = [&](std::span<const double> params) {
    return cost_over_states(params, encoded, data.y, ansatz_);
  };
  OptimizeResult res = minimize(objective, initial_params_, opts);
  params_ = std::move(res.best_params);
  trace_ = std::move(res.trace);
  fitted_ = true;
}

StateVector VqcClassifier::output_state(std::span<const double> raw) const {
  require_fitted();
  return apply_circuit(encode(scale_features(raw, ranges_), config_.encoder), ansatz_, params_);
}

double VqcClassifier::p_plus(std::span<const double> x) const {
  return parity_label_probability(outcome_probabilities(output_state(x)));
}

std::optional<double> VqcClassifier::probability(std::span<const double> x) const { return p_plus(x); }

int VqcClassifier::predict_with_shots(std::span<const double> x, std::uint64_t shots,
                                      std::mt19937_64& rng) const {
  const auto counts = sample_counts(output_state(x), shots, rng);
  std::uint64_t even = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (std::popcount(i) % 2 == 0) even += counts[i];
  return 2 * even >= shots ? 1 : -1;
}

int VqcClassifier::predict(std::span<const double> x) const {
  if (config_.shots == 0) return p_plus(x) >= 0.5 ? 1 : -1;
  // Per-point stream so batch predictions do not depend on evaluation order.
  std::mt19937_64 rng(mix_seed(config_.seed, fnv1a(x.data(), x.size() * sizeof(double))));
  return predict_with_shots(x, config_.shots, rng);
}

nlohmann::json to_json(const VqcConfig& c) {
  nlohmann::json j{{"kind", "vqc"},
                   {"encoder", encoder_name(c.encoder.kind)},
                   {"repetitions", c.encoder.repetitions},
                   {"ansatz", c.ansatz_id},
                   {"layers", c.layers},
                   {"optimizer", optimizer_name(c.optimizer.kind)},
                   {"max_evaluations", c.optimizer.max_evaluations},
                   {"rho_begin", c.optimizer.rho_begin},
                   {"rho_end", c.optimizer.rho_end},
                   {"shots", c.shots},
                   {"seed", c.seed}};
  if (c.ansatz_qubits) j["ansatz_qubits"] = *c.ansatz_qubits;
  return j;
}

VqcConfig vqc_config_from_json(const nlohmann::json& j) {
  VqcConfig c;
  c.encoder.kind = parse_encoder_kind(j.value("encoder", std::string("z")));
  c.encoder.repetitions = j.value("repetitions", 2);
  c.ansatz_id = j.value("ansatz", 1);
  c.layers = j.value("layers", 1);
  if (j.contains("ansatz_qubits")) c.ansatz_qubits = j.at("ansatz_qubits").get<int>();
  c.optimizer.kind = parse_optimizer_kind(j.value("optimizer", std::string("cobyla")));
  c.optimizer.max_evaluations = j.value("max_evaluations", 100);
  c.optimizer.rho_begin = j.value("rho_begin", 1.0);
  c.optimizer.rho_end = j.value("rho_end", 1e-6);
  c.shots = j.value("shots", std::uint64_t{0});
  c.seed = j.value("seed", std::uint64_t{1});
  return c;
}

nlohmann::json VqcClassifier::config_json() const { return qens::to_json(config_); }

nlohmann::json VqcClassifier::to_json() const {
  nlohmann::json j = config_json();
  j["fitted"] = fitted_;
  if (fitted_) {
    j["params"] = params_;
    j["initial_params"] = initial_params_;
    j["feature_min"] = ranges_.min;
    j["feature_max"] = ranges_.max;
    j["n_qubits"] = ansatz_.n_qubits();
  }
  return j;
}

VqcClassifier VqcClassifier::from_json(const nlohmann::json& j) {
  VqcClassifier m(vqc_config_from_json(j));
  if (j.value("fitted", false)) {
    m.ranges_.min = j.at("feature_min").get<std::vector<double>>();
    m.ranges_.max = j.at("feature_max").get<std::vector<double>>();
    m.ansatz_ = build_ansatz(m.config_.ansatz_id, j.at("n_qubits").get<int>(), m.config_.layers);
    m.params_ = j.at("params").get<std::vector<double>>();
    m.initial_params_ = j.value("initial_params", std::vector<double>{});
    if (static_cast<int>(m.params_.size()) != m.ansatz_.n_params()) {
      throw Error(ErrorCategory::parse, "vqc parameter count does not match its ansatz");
    }
    m.fitted_ = true;
  }
  return m;
}

std::unique_ptr<Classifier> VqcClassifier::clone_untrained() const {
  return std::make_unique<VqcClassifier>(config_);
}

}  // namespace qens
