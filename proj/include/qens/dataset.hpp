#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qens {

/// Labelled rows. Labels are +1 (phishing, the positive class) or -1.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<std::string> ids;  // optional row identifiers

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
  std::size_t n_features() const noexcept { return x.empty() ? 0 : x.front().size(); }

  /// Throws input errors for ragged rows, mismatched lengths or labels
  /// outside {-1, +1}.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  std::size_t count_label(int label) const;
};

/// Concatenates two datasets with the same feature count.
Dataset concat(const Dataset& a, const Dataset& b);

/// Shared train/predict contract for every quantum, classical and ensemble
/// model.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Registry kind, e.g. "vqc" or "stack".
  virtual std::string kind() const = 0;
  virtual std::string name() const { return kind(); }

  virtual void train(const Dataset& data) = 0;
  virtual bool fitted() const = 0;

  /// +1 or -1. Throws a usage error before train().
  virtual int predict(std::span<const double> x) const = 0;
  virtual std::vector<int> predict_batch(const Dataset& data) const;

  /// Estimated P(label = +1) for learners that expose one.
  virtual std::optional<double> probability(std::span<const double> x) const;

  /// Settings only; enough to rebuild an untrained copy.
  virtual nlohmann::json config_json() const = 0;
  /// Settings plus fitted state.
  virtual nlohmann::json to_json() const = 0;

  virtual std::unique_ptr<Classifier> clone_untrained() const = 0;

 protected:
  void require_fitted() const;
};

using ClassifierPtr = std::unique_ptr<Classifier>;

/// Builds a fresh, untrained member. The index lets factories derive
/// per-member seeds.
using ClassifierFactory = std::function<ClassifierPtr(std::size_t index)>;

double accuracy(const Classifier& model, const Dataset& data);

/// Stable 64-bit mixing for seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t hash_dataset(const Dataset& data) noexcept;

}  // namespace qens
