#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "qens/error.hpp"
#include "qens/qsvm.hpp"

namespace qens {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPsdTol = 1e-8;

Eigen::MatrixXd label_gram(const Eigen::MatrixXd& K, std::span<const int> y) {
  Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
  return K.cwiseProduct(yv * yv.transpose());
}

void check_labels(std::span<const int> y, Eigen::Index n) {
  if (static_cast<Eigen::Index>(y.size()) != n) throw Error(ErrorCategory::input, "label count does not match kernel size");
  for (int v : y)
    if (v != 1 && v != -1) throw Error(ErrorCategory::input, "labels must be +1 or -1");
}

std::optional<int> common_label(std::span<const int> y) {
  if (y.empty()) return std::nullopt;
  for (int v : y)
    if (v != y.front()) return std::nullopt;
  return y.front();
}

}  // namespace

double dual_objective(const Eigen::MatrixXd& K, std::span<const int> y, std::span<const double> lambdas) {
  const Eigen::Map<const Eigen::VectorXd> l(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  return 0.5 * l.dot(label_gram(K, y) * l) - l.sum();
}

double compute_bias(const Eigen::MatrixXd& K, std::span<const int> y, std::span<const double> lambdas,
                    BiasRule rule) {
  const auto n = static_cast<Eigen::Index>(y.size());
  bool any_support = false;
  for (double l : lambdas) any_support |= l > 0.0;
  const bool all = rule == BiasRule::AllPoints || !any_support;
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!all && !(lambdas[i] > 0.0)) continue;
    double w = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) w += lambdas[j] * y[j] * K(j, i);
    sum += y[i] - w;
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

SvmModel solve_dual_svm(const KernelMatrix& K, std::span<const int> y, const DualSolverOptions& opts) {
  const Eigen::Index n = K.size();
  if (K.values.cols() != n) throw Error(ErrorCategory::input, "kernel matrix is not square");
  check_labels(y, n);
  if (!(opts.C > 0.0)) throw Error(ErrorCategory::parameter, "box bound C must be positive");
  if (((K.values - K.values.transpose()).cwiseAbs().maxCoeff()) > kSymmetryTol) {
    throw Error(ErrorCategory::input, "kernel matrix is not symmetric");
  }

  Eigen::MatrixXd Kc = K.values;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Kc);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (min_ev < -kPsdTol) {
      throw Error(ErrorCategory::input, "kernel matrix has eigenvalue " + std::to_string(min_ev) +
                                            " below the PSD tolerance");
    }
    if (min_ev < 0.0) {
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      Kc = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    }
  }

  const Eigen::MatrixXd H = label_gram(Kc, y);
  std::vector<double> lambda(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXd grad = -Eigen::VectorXd::Ones(n);  // H*lambda - 1 at lambda = 0
  bool converged = n == 0;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    double violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double hii = H(i, i);
      if (!(hii > 0.0)) continue;
      const double old = lambda[i];
      const double next = std::clamp(old - grad[i] / hii, 0.0, opts.C);
      const double delta = next - old;
      if (delta != 0.0) {
        lambda[i] = next;
        grad += delta * H.col(i);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double pg = grad[i];
      if (lambda[i] <= 0.0) pg = std::min(pg, 0.0);
      if (lambda[i] >= opts.C) pg = std::max(pg, 0.0);
      violation = std::max(violation, std::abs(pg));
    }
    converged = violation < opts.tolerance;
  }

  SvmModel m;
  m.lambdas = std::move(lambda);
  m.train_y.assign(y.begin(), y.end());
  m.kernel = K.spec;
  m.single_label = common_label(y);
  m.bias = compute_bias(Kc, y, m.lambdas, opts.bias_rule);
  m.converged = converged;
  return m;
}

void SvmModel::prepare_states() {
  if (kernel.type != KernelSpec::Type::Quantum || train_states.size() == train_x.size()) return;
  train_states.clear();
  train_states.reserve(train_x.size());
  for (const auto& x : train_x) train_states.push_back(encode(x, kernel.encoder));
}

std::vector<double> SvmModel::kernel_row(std::span<const double> x) const {
  std::vector<double> row(train_x.size());
  if (kernel.type == KernelSpec::Type::Rbf) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = rbf_value(x, train_x[i], kernel.sigma);
    return row;
  }
  if (train_states.size() != train_x.size()) {
    throw Error(ErrorCategory::usage, "quantum SVM model has no prepared training states");
  }
  const StateVector psi = encode(x, kernel.encoder);
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = fidelity(train_states[i], psi);
  return row;
}

double SvmModel::decision_value(std::span<const double> x) const {
  if (train_x.size() != lambdas.size()) throw Error(ErrorCategory::usage, "SVM model has no retained training data");
  double s = bias;
  const bool quantum = kernel.type == KernelSpec::Type::Quantum;
  std::optional<StateVector> psi;
  if (quantum) {
    if (train_states.size() != train_x.size()) {
      throw Error(ErrorCategory::usage, "quantum SVM model has no prepared training states");
    }
    psi = encode(x, kernel.encoder);
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] == 0.0) continue;
    const double k = quantum ? fidelity(train_states[i], *psi) : rbf_value(x, train_x[i], kernel.sigma);
    s += lambdas[i] * train_y[i] * k;
  }
  return s;
}

int svm_predict(const SvmModel& model, std::span<const double> x) {
  if (model.single_label) return *model.single_label;
  return model.decision_value(x) >= 0.0 ? 1 : -1;
}

// ------------------------------------------------------------ classifier

SvmConfig qsvm_kernel_config(EncoderSpec encoder) {
  SvmConfig c;
  c.kind = "qsvm-kernel";
  c.kernel = KernelSpec::quantum(encoder);
  c.solver = SvmSolver::Dual;
  c.scale_features = true;
  return c;
}

SvmConfig qsvm_anneal_config(double sigma) {
  SvmConfig c;
  c.kind = "qsvm-anneal";
  c.kernel = KernelSpec::rbf(sigma);
  c.solver = SvmSolver::Anneal;
  c.scale_features = false;
  return c;
}

SvmConfig classical_svm_config(double sigma, double C) {
  SvmConfig c;
  c.kind = "classical-svm";
  c.kernel = KernelSpec::rbf(sigma);
  c.solver = SvmSolver::Dual;
  c.dual.C = C;
  return c;
}

SvmClassifier::SvmClassifier(SvmConfig config) : config_(std::move(config)) {
  if (config_.kernel.type == KernelSpec::Type::Rbf && !(config_.kernel.sigma > 0.0)) {
    throw Error(ErrorCategory::parameter, "rbf sigma must be positive");
  }
  if (!(config_.dual.C > 0.0)) throw Error(ErrorCategory::parameter, "box bound C must be positive");
  if (config_.precision.empty()) throw Error(ErrorCategory::parameter, "empty precision vector");
  if (config_.schedule.restarts < 1 || !(config_.schedule.alpha > 0.0 && config_.schedule.alpha < 1.0)) {
    throw Error(ErrorCategory::parameter, "invalid annealing schedule");
  }
}

std::vector<double> SvmClassifier::transform(std::span<const double> x) const {
  if (ranges_) return scale_features(x, *ranges_);
  return {x.begin(), x.end()};
}

void SvmClassifier::train(const Dataset& data) {
  data.validate();
  if (data.empty()) throw Error(ErrorCategory::input, "cannot train on an empty dataset");
  ranges_.reset();
  if (config_.scale_features) ranges_ = fit_ranges(data.x);
  std::vector<std::vector<double>> xs;
  xs.reserve(data.size());
  for (const auto& row : data.x) xs.push_back(transform(row));

  const KernelMatrix K = config_.kernel.type == KernelSpec::Type::Quantum
                             ? quantum_kernel(xs, config_.kernel.encoder)
                             : rbf_kernel(xs, config_.kernel.sigma);
  if (config_.solver == SvmSolver::Dual) {
    model_ = solve_dual_svm(K, data.y, config_.dual);
  } else {
    const QuboProblem q = build_qubo(K.values, data.y, config_.precision);
    const AnnealResult r = config_.solver == SvmSolver::Anneal ? anneal(q, config_.schedule, config_.seed)
                                                                : solve_qubo_exhaustive(q);
    model_ = SvmModel{};
    model_.lambdas = q.decode(r.bits);
    model_.train_y = data.y;
    model_.kernel = K.spec;
    model_.single_label = common_label(data.y);
    model_.bias = compute_bias(K.values, data.y, model_.lambdas, config_.dual.bias_rule);
  }
  model_.train_x = std::move(xs);
  model_.prepare_states();
  fitted_ = true;
}

int SvmClassifier::predict(std::span<const double> x) const {
  require_fitted();
  return svm_predict(model_, transform(x));
}

const SvmModel& SvmClassifier::model() const {
  require_fitted();
  return model_;
}

namespace {

std::string_view solver_name(SvmSolver s) {
  switch (s) {
    case SvmSolver::Dual: return "dual";
    case SvmSolver::Anneal: return "anneal";
    case SvmSolver::Exhaustive: return "exhaustive";
  }
  return "?";
}

SvmSolver parse_solver(const std::string& s) {
  if (s == "dual") return SvmSolver::Dual;
  if (s == "anneal") return SvmSolver::Anneal;
  if (s == "exhaustive") return SvmSolver::Exhaustive;
  throw Error(ErrorCategory::configuration, "unknown SVM solver '" + s + "'");
}

}  // namespace

nlohmann::json SvmClassifier::config_json() const {
  nlohmann::json j{{"kind", config_.kind},
                   {"solver", solver_name(config_.solver)},
                   {"scaled", config_.scale_features},
                   {"C", config_.dual.C},
                   {"tolerance", config_.dual.tolerance},
                   {"max_sweeps", config_.dual.max_sweeps},
                   {"bias_rule", config_.dual.bias_rule == BiasRule::SupportVectors ? "support_vectors" : "all_points"},
                   {"precision", config_.precision},
                   {"T0", config_.schedule.t0},
                   {"alpha", config_.schedule.alpha},
                   {"t_min", config_.schedule.t_min},
                   {"sweeps", config_.schedule.sweeps_per_temperature},
                   {"restarts", config_.schedule.restarts},
                   {"seed", config_.seed}};
  if (config_.kernel.type == KernelSpec::Type::Rbf) {
    j["kernel"] = "rbf";
    j["sigma"] = config_.kernel.sigma;
  } else {
    j["kernel"] = "quantum";
    j["encoder"] = encoder_name(config_.kernel.encoder.kind);
    j["repetitions"] = config_.kernel.encoder.repetitions;
  }
  return j;
}

SvmConfig svm_config_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", std::string("classical-svm"));
  SvmConfig c;
  if (kind == "qsvm-kernel")
    c = qsvm_kernel_config();
  else if (kind == "qsvm-anneal")
    c = qsvm_anneal_config();
  else if (kind == "classical-svm")
    c = classical_svm_config();
  else
    throw Error(ErrorCategory::configuration, "not an SVM kind: '" + kind + "'");

  const std::string kernel = j.value("kernel", c.kernel.type == KernelSpec::Type::Rbf ? "rbf" : "quantum");
  if (kernel == "rbf") {
    c.kernel = KernelSpec::rbf(j.value("sigma", c.kernel.type == KernelSpec::Type::Rbf ? c.kernel.sigma : 150.0));
  } else if (kernel == "quantum") {
    EncoderSpec e = c.kernel.type == KernelSpec::Type::Quantum ? c.kernel.encoder : EncoderSpec{EncoderKind::ZZFeatureMap, 2};
    if (j.contains("encoder")) e.kind = parse_encoder_kind(j.at("encoder").get<std::string>());
    e.repetitions = j.value("repetitions", e.repetitions);
    if (e.repetitions < 1) throw Error(ErrorCategory::configuration, "encoder repetitions must be positive");
    c.kernel = KernelSpec::quantum(e);
  } else {
    throw Error(ErrorCategory::configuration, "unknown kernel '" + kernel + "'");
  }
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver").get<std::string>());
  c.scale_features = j.value("scaled", c.scale_features);
  c.dual.C = j.value("C", c.dual.C);
  c.dual.tolerance = j.value("tolerance", c.dual.tolerance);
  c.dual.max_sweeps = j.value("max_sweeps", c.dual.max_sweeps);
  const std::string bias = j.value("bias_rule", std::string("support_vectors"));
  if (bias == "support_vectors")
    c.dual.bias_rule = BiasRule::SupportVectors;
  else if (bias == "all_points")
    c.dual.bias_rule = BiasRule::AllPoints;
  else
    throw Error(ErrorCategory::configuration, "unknown bias rule '" + bias + "'");
  c.precision = j.value("precision", c.precision);
  c.schedule.t0 = j.value("T0", c.schedule.t0);
  c.schedule.alpha = j.value("alpha", c.schedule.alpha);
  c.schedule.t_min = j.value("t_min", c.schedule.t_min);
  c.schedule.sweeps_per_temperature = j.value("sweeps", c.schedule.sweeps_per_temperature);
  c.schedule.restarts = j.value("restarts", c.schedule.restarts);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json SvmClassifier::to_json() const {
  nlohmann::json j = config_json();
  j["fitted"] = fitted_;
  if (fitted_) {
    j["lambdas"] = model_.lambdas;
    j["train_x"] = model_.train_x;
    j["train_y"] = model_.train_y;
    j["bias"] = model_.bias;
    j["converged"] = model_.converged;
    if (model_.single_label) j["single_label"] = *model_.single_label;
    if (ranges_) {
      j["feature_min"] = ranges_->min;
      j["feature_max"] = ranges_->max;
    }
  }
  return j;
}

SvmClassifier SvmClassifier::from_json(const nlohmann::json& j) {
  SvmClassifier c(svm_config_from_json(j));
  if (j.value("fitted", false)) {
    c.model_.lambdas = j.at("lambdas").get<std::vector<double>>();
    c.model_.train_x = j.at("train_x").get<std::vector<std::vector<double>>>();
    c.model_.train_y = j.at("train_y").get<std::vector<int>>();
    c.model_.bias = j.at("bias").get<double>();
    c.model_.converged = j.value("converged", true);
    c.model_.kernel = c.config_.kernel;
    if (j.contains("single_label")) c.model_.single_label = j.at("single_label").get<int>();
    if (j.contains("feature_min")) {
      c.ranges_ = FeatureRanges{j.at("feature_min").get<std::vector<double>>(),
                                j.at("feature_max").get<std::vector<double>>()};
    }
    if (c.model_.lambdas.size() != c.model_.train_x.size() || c.model_.train_y.size() != c.model_.train_x.size()) {
      throw Error(ErrorCategory::parse, "SVM document has inconsistent training arrays");
    }
    c.model_.prepare_states();
    c.fitted_ = true;
  }
  return c;
}

std::unique_ptr<Classifier> SvmClassifier::clone_untrained() const {
  return std::make_unique<SvmClassifier>(config_);
}

}  // namespace qens
