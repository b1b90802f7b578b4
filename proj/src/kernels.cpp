#include <cmath>
#include <string>

#include "qens/error.hpp"
#include "qens/parallel.hpp"
#include "qens/qsvm.hpp"

namespace qens {

std::string KernelSpec::describe() const {
  if (type == Type::Rbf) return "rbf(sigma=" + std::to_string(sigma) + ")";
  return "quantum(" + std::string(encoder_name(encoder.kind)) + ",reps=" +
         std::to_string(encoder.repetitions) + ")";
}

namespace {

void check_same_width(const std::vector<std::vector<double>>& xs) {
  for (const auto& x : xs) {
    if (x.size() != xs.front().size()) throw Error(ErrorCategory::input, "feature vectors differ in length");
  }
}

// Row-major upper-triangle pair list, so work can be split evenly.
std::vector<std::pair<Eigen::Index, Eigen::Index>> upper_pairs(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> p;
  p.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) p.emplace_back(i, j);
  return p;
}

}  // namespace

KernelMatrix quantum_kernel(const std::vector<std::vector<double>>& xs, const EncoderSpec& encoder) {
  check_same_width(xs);
  const auto n = static_cast<Eigen::Index>(xs.size());
  KernelMatrix K{Eigen::MatrixXd::Zero(n, n), KernelSpec::quantum(encoder)};
  if (n == 0) return K;
  const int m = static_cast<int>(xs.front().size());
  if (encoder.kind == EncoderKind::ZZFeatureMap && m < 2) {
    throw Error(ErrorCategory::configuration, "ZZ feature map needs at least 2 features");
  }

  const auto pairs = upper_pairs(n);
  if (encoder.kind == EncoderKind::Amplitude) {
    std::vector<StateVector> states;
    states.reserve(xs.size());
    for (const auto& x : xs) states.push_back(amplitude_encode(x));
    parallel_for(pairs.size(), [&](std::size_t k) {
      auto [i, j] = pairs[k];
      K.values(i, j) = fidelity(states[j], states[i]);
    });
  } else {
    // phi(x_i)|0> once per row; each entry then runs phi(x_j)^dagger on a copy.
    std::vector<StateVector> forward;
    std::vector<CircuitSpec> inverse;
    forward.reserve(xs.size());
    inverse.reserve(xs.size());
    for (const auto& x : xs) {
      const CircuitSpec c = encoder_circuit(x, encoder);
      forward.push_back(apply_circuit(zero_state(c.n_qubits()), c));
      inverse.push_back(c.inverse());
    }
    parallel_for(pairs.size(), [&](std::size_t k) {
      auto [i, j] = pairs[k];
      K.values(i, j) = probability_of_zero(apply_circuit(forward[i], inverse[j]));
    });
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) K.values(j, i) = K.values(i, j);
  return K;
}

double rbf_value(std::span<const double> a, std::span<const double> b, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCategory::parameter, "rbf sigma must be positive");
  if (a.size() != b.size()) throw Error(ErrorCategory::input, "feature vectors differ in length");
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

KernelMatrix rbf_kernel(const std::vector<std::vector<double>>& xs, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCategory::parameter, "rbf sigma must be positive");
  check_same_width(xs);
  const auto n = static_cast<Eigen::Index>(xs.size());
  KernelMatrix K{Eigen::MatrixXd::Zero(n, n), KernelSpec::rbf(sigma)};
  for (Eigen::Index i = 0; i < n; ++i) {
    K.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      K.values(i, j) = K.values(j, i) = rbf_value(xs[i], xs[j], sigma);
    }
  }
  return K;
}

}  // namespace qens
