#include "qens/dataset.hpp"

#include <algorithm>

#include "qens/error.hpp"
#include "qens/parallel.hpp"

namespace qens {

void Dataset::validate() const {
  if (x.size() != y.size()) throw Error(ErrorCategory::input, "feature and label counts differ");
  if (!ids.empty() && ids.size() != y.size()) throw Error(ErrorCategory::input, "id and label counts differ");
  const std::size_t m = n_features();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != m) throw Error(ErrorCategory::input, "ragged feature rows");
    if (y[i] != 1 && y[i] != -1) throw Error(ErrorCategory::input, "labels must be +1 or -1");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    out.x.push_back(x.at(r));
    out.y.push_back(y.at(r));
    if (!ids.empty()) out.ids.push_back(ids.at(r));
  }
  return out;
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (!a.empty() && !b.empty() && a.n_features() != b.n_features()) {
    throw Error(ErrorCategory::input, "cannot concatenate datasets with different widths");
  }
  Dataset out = a;
  out.x.insert(out.x.end(), b.x.begin(), b.x.end());
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  if (!a.ids.empty() || !b.ids.empty()) {
    out.ids.resize(a.size());
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    out.ids.resize(out.y.size());
  }
  return out;
}

std::vector<int> Classifier::predict_batch(const Dataset& data) const {
  require_fitted();
  std::vector<int> out(data.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = predict(data.x[i]); });
  return out;
}

std::optional<double> Classifier::probability(std::span<const double>) const { return std::nullopt; }

void Classifier::require_fitted() const {
  if (!fitted()) throw Error(ErrorCategory::usage, name() + ": predict called before train");
}

double accuracy(const Classifier& model, const Dataset& data) {
  if (data.empty()) throw Error(ErrorCategory::input, "accuracy of an empty dataset");
  const auto pred = model.predict_batch(data);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == data.y[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  // splitmix64 finaliser over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_dataset(const Dataset& data) noexcept {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    h = fnv1a(data.x[i].data(), data.x[i].size() * sizeof(double), h);
    h = fnv1a(&data.y[i], sizeof(int), h);
  }
  return h;
}

}  // namespace qens
