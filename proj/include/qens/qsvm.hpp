#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qens/dataset.hpp"
#include "qens/encoders.hpp"
#include "qens/qsim.hpp"

namespace qens {

// ---------------------------------------------------------------- kernels

/// Which similarity a kernel matrix (or SVM) uses.
struct KernelSpec {
  enum class Type { Quantum, Rbf };
  Type type = Type::Rbf;
  double sigma = 150.0;   // Rbf only
  EncoderSpec encoder{};  // Quantum only

  static KernelSpec rbf(double sigma) { return {Type::Rbf, sigma, {}}; }
  static KernelSpec quantum(EncoderSpec e) { return {Type::Quantum, 0.0, e}; }
  std::string describe() const;
};

struct KernelMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;

  Eigen::Index size() const noexcept { return values.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
};

/// Fidelity kernel K_ij = |<psi(x_j)|psi(x_i)>|^2. For the Z and ZZ maps each
/// entry is the probability of |0...0> after running phi(x_i) followed by the
/// inverse of phi(x_j); amplitude encoding has no circuit, so its entries are
/// overlaps of the loaded states. Upper triangle computed, then mirrored.
KernelMatrix quantum_kernel(const std::vector<std::vector<double>>& xs, const EncoderSpec& encoder);

/// K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).
KernelMatrix rbf_kernel(const std::vector<std::vector<double>>& xs, double sigma);

double rbf_value(std::span<const double> a, std::span<const double> b, double sigma);

// -------------------------------------------------------------- SVM model

enum class BiasRule {
  /// Mean over points with lambda > 0, or over all points if there are none.
  SupportVectors,
  /// Mean over every training point.
  AllPoints,
};

struct SvmModel {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> train_x;
  std::vector<int> train_y;
  double bias = 0.0;
  KernelSpec kernel;
  /// Set when every training label was the same; predictions return it.
  std::optional<int> single_label;
  /// Encoded training states (quantum kernels only); rebuilt on demand.
  std::vector<StateVector> train_states;
  bool converged = true;

  /// K(x, x_i) against every retained training point.
  std::vector<double> kernel_row(std::span<const double> x) const;
  double decision_value(std::span<const double> x) const;
  void prepare_states();
};

/// b = mean_i (y_i - sum_j lambda_j y_j K_ji) over the rule's index set.
double compute_bias(const Eigen::MatrixXd& K, std::span<const int> y, std::span<const double> lambdas,
                    BiasRule rule);

struct DualSolverOptions {
  double C = 1000.0;
  double tolerance = 1e-6;
  int max_sweeps = 20000;
  BiasRule bias_rule = BiasRule::SupportVectors;
};

/// Minimises 1/2 l'(K o yy')l - 1'l over 0 <= l <= C by projected coordinate
/// descent until the projected gradient is below tolerance. K must be
/// symmetric; small negative eigenvalues (>= -1e-8) are clipped to zero.
SvmModel solve_dual_svm(const KernelMatrix& K, std::span<const int> y, const DualSolverOptions& opts = {});

double dual_objective(const Eigen::MatrixXd& K, std::span<const int> y, std::span<const double> lambdas);

/// sign(sum_i lambda_i y_i K(x, x_i) + b), with sign(0) = +1.
int svm_predict(const SvmModel& model, std::span<const double> x);

// ------------------------------------------------------------------- QUBO

struct QuboProblem {
  /// Symmetric; the linear terms sit on the diagonal (b_i^2 = b_i).
  Eigen::MatrixXd Q;
  std::vector<double> precision{1.0, 2.0};
  int n_points = 0;

  int n_bits() const noexcept { return static_cast<int>(Q.rows()); }
  double objective(std::span<const std::uint8_t> bits) const;
  /// lambda = (I_N kron p) bits.
  std::vector<double> decode(std::span<const std::uint8_t> bits) const;
};

QuboProblem build_qubo(const Eigen::MatrixXd& K, std::span<const int> y,
                       std::vector<double> precision = {1.0, 2.0});

/// Reference value 1/2 l'P'(K o yy')Pl - l'P'1 computed from the dense formula.
double qubo_dense_objective(const Eigen::MatrixXd& K, std::span<const int> y,
                            std::span<const double> precision, std::span<const std::uint8_t> bits);

struct AnnealSchedule {
  double t0 = 10.0;
  double alpha = 0.995;
  double t_min = 1e-3;
  int sweeps_per_temperature = 20;
  int restarts = 5;
};

struct AnnealResult {
  std::vector<std::uint8_t> bits;
  double objective = 0.0;
};

/// Simulated annealing with single-bit flips, geometric cooling and a final
/// greedy descent; best of all restarts (and of the all-zero vector).
AnnealResult anneal(const QuboProblem& qubo, const AnnealSchedule& schedule, std::uint64_t seed);

/// Enumerates all 2^n assignments (n <= 24). Ties keep the first found.
AnnealResult solve_qubo_exhaustive(const QuboProblem& qubo);

// ------------------------------------------------------------ classifiers

enum class SvmSolver { Dual, Anneal, Exhaustive };

struct SvmConfig {
  std::string kind = "classical-svm";  // qsvm-kernel | qsvm-anneal | classical-svm
  KernelSpec kernel = KernelSpec::rbf(150.0);
  SvmSolver solver = SvmSolver::Dual;
  /// Min-max scale features into [0, pi] before the kernel.
  bool scale_features = false;
  DualSolverOptions dual{};
  AnnealSchedule schedule{};
  std::vector<double> precision{1.0, 2.0};
  std::uint64_t seed = 1;
};

/// Kernel-path QSVM defaults: ZZ fidelity kernel on scaled features, dual solver.
SvmConfig qsvm_kernel_config(EncoderSpec encoder = {EncoderKind::ZZFeatureMap, 2});
/// Annealer-path QSVM defaults: RBF sigma=150 on raw features, QUBO + annealing.
SvmConfig qsvm_anneal_config(double sigma = 150.0);
/// Classical RBF SVM through the same dual solver.
SvmConfig classical_svm_config(double sigma = 150.0, double C = 1000.0);

class SvmClassifier final : public Classifier {
 public:
  explicit SvmClassifier(SvmConfig config);

  std::string kind() const override { return config_.kind; }
  void train(const Dataset& data) override;
  bool fitted() const noexcept override { return fitted_; }
  int predict(std::span<const double> x) const override;

  const SvmModel& model() const;
  const SvmConfig& config() const noexcept { return config_; }

  nlohmann::json config_json() const override;
  nlohmann::json to_json() const override;
  static SvmClassifier from_json(const nlohmann::json& j);
  std::unique_ptr<Classifier> clone_untrained() const override;

 private:
  std::vector<double> transform(std::span<const double> x) const;

  SvmConfig config_;
  std::optional<FeatureRanges> ranges_;
  SvmModel model_;
  bool fitted_ = false;
};

SvmConfig svm_config_from_json(const nlohmann::json& j);

// ----------------------------------------------------------- kernel cache

/// Directory of quantum kernel matrices keyed by (dataset hash, encoder,
/// repetitions). Entries are raw little-endian doubles, so a hit is
/// bit-identical to the matrix that was stored.
class KernelCache {
 public:
  explicit KernelCache(std::filesystem::path dir);

  std::filesystem::path path_for(std::uint64_t data_hash, const EncoderSpec& encoder) const;
  std::optional<Eigen::MatrixXd> load(std::uint64_t data_hash, const EncoderSpec& encoder) const;
  void store(std::uint64_t data_hash, const EncoderSpec& encoder, const Eigen::MatrixXd& K) const;

  /// Loads or computes-and-stores.
  KernelMatrix quantum_kernel(const std::vector<std::vector<double>>& xs, const EncoderSpec& encoder) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace qens
