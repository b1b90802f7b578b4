#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qens/dataset.hpp"
#include "qens/encoders.hpp"
#include "qens/optimize.hpp"
#include "qens/qsim.hpp"

namespace qens {

/// Probability of label +1: total mass on basis states with even parity.
double parity_label_probability(std::span<const double> probs);

/// -[t log p + (1 - t) log(1 - p)] with t = (label + 1) / 2 and p clamped
/// to [1e-9, 1 - 1e-9].
double binary_cross_entropy(double p_plus, int label);

/// Encoder + trainable ansatz pair defining a VQC circuit family.
struct VqcShape {
  EncoderSpec encoder;
  CircuitSpec ansatz;
};

/// Mean cross-entropy of the parity readout over a batch of already-scaled
/// feature vectors.
double vqc_cost(std::span<const double> params, const std::vector<std::vector<double>>& xs,
                std::span<const int> labels, const VqcShape& shape);

struct VqcConfig {
  EncoderSpec encoder{EncoderKind::ZFeatureMap, 2};
  int ansatz_id = 1;
  int layers = 1;
  /// When set, must equal the encoder's register width.
  std::optional<int> ansatz_qubits;
  OptimizerOptions optimizer{};
  /// 0 = exact probabilities; otherwise predictions use seeded shot sampling.
  std::uint64_t shots = 0;
  std::uint64_t seed = 1;
};

class VqcClassifier final : public Classifier {
 public:
  explicit VqcClassifier(VqcConfig config = {});

  std::string kind() const override { return "vqc"; }
  std::string name() const override;

  void train(const Dataset& data) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;
  std::optional<double> probability(std::span<const double> x) const override;

  /// Exact p(+1) for a raw (unscaled) feature vector.
  double p_plus(std::span<const double> x) const;
  /// Label from `shots` samples drawn with `rng`; ties go to +1.
  int predict_with_shots(std::span<const double> x, std::uint64_t shots, std::mt19937_64& rng) const;

  const VqcConfig& config() const noexcept { return config_; }
  const std::vector<double>& initial_params() const noexcept { return initial_params_; }
  const std::vector<double>& trained_params() const noexcept { return params_; }
  const std::vector<double>& cost_trace() const noexcept { return trace_; }
  const FeatureRanges& feature_ranges() const noexcept { return ranges_; }
  int n_qubits() const noexcept { return ansatz_.n_qubits(); }
  const CircuitSpec& ansatz() const noexcept { return ansatz_; }

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static VqcClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  StateVector output_state(std::span<const double> raw) const;

  VqcConfig config_;
  CircuitSpec ansatz_;
  FeatureRanges ranges_;
  std::vector<double> initial_params_;
  std::vector<double> params_;
  std::vector<double> trace_;
  bool fitted_ = false;
};

VqcConfig vqc_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VqcConfig& c);

}  // namespace qens
