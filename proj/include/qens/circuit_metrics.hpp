#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qens/qsim.hpp"

namespace qens {

struct ExpressibilityEstimate {
  double kl_divergence = 0.0;  // nats, against the Haar fidelity distribution
  int n_fidelity_samples = 0;
  int n_bins = 0;
};

struct EntanglingCapacityEstimate {
  double meyer_wallach = 0.0;
  double von_neumann_bits = 0.0;  // mean single-qubit entropy
  int n_param_samples = 0;
};

struct MetricsConfig {
  int n_pairs = 5000;
  int n_bins = 75;
  int n_param_samples = 1000;
  std::uint64_t seed = 7;
};

/// Mass of the Haar fidelity density (N-1)(1-F)^(N-2) on [lo, hi], N = 2^n.
double haar_bin_mass(double lo, double hi, int n_qubits);

/// KL(empirical || Haar) of the state-fidelity histogram over random
/// parameter pairs drawn uniformly from [0, 2pi). Empty bins get 1e-12 mass.
ExpressibilityEstimate expressibility(const CircuitSpec& ansatz, int n_pairs, int n_bins,
                                      std::uint64_t seed);

/// Sample means of the Meyer-Wallach measure and of the per-qubit von Neumann
/// entropy (bits) over uniformly drawn parameter vectors, starting from |0...0>.
EntanglingCapacityEstimate entangling_capacity(const CircuitSpec& ansatz, int n_param_samples,
                                               std::uint64_t seed);

/// Tr(rho^2) of a single-qubit density matrix.
double purity(const Eigen::Matrix2cd& rho);
/// -Tr(rho log2 rho) with eigenvalues clipped to [0, 1] and 0 log 0 = 0.
double von_neumann_entropy_bits(const Eigen::Matrix2cd& rho);

/// Pearson product-moment correlation.
double pearson(std::span<const double> x, std::span<const double> y);
inline double correlate_metrics(std::span<const double> metric_values, std::span<const double> scores) {
  return pearson(metric_values, scores);
}

struct MetricsRow {
  int circuit_id = 0;
  int layers = 0;
  std::string encoder;
  int n_qubits = 0;
  double expressibility_kl = 0.0;
  double meyer_wallach = 0.0;
  double von_neumann = 0.0;
};

void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_table(std::istream& in);

}  // namespace qens
