#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace qens {

using Objective = std::function<double(std::span<const double>)>;

struct OptimizeResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  int n_evaluations = 0;
  bool converged = false;
  /// Best-so-far objective after each evaluation; non-increasing.
  std::vector<double> trace;
};

enum class OptimizerKind { Cobyla, NelderMead };

std::string_view optimizer_name(OptimizerKind k) noexcept;
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::Cobyla;
  int max_evaluations = 100;
  double rho_begin = 1.0;
  /// Trust-region radius (or simplex size) at which the run counts as converged.
  double rho_end = 1e-6;
  /// Neither method draws random numbers; kept so every optimizer shares one
  /// seeded contract.
  std::uint64_t seed = 0;
};

/// Unconstrained COBYLA: linear interpolation on an (n+1)-point simplex
/// inside a shrinking trust region. Non-finite objective values after the
/// first evaluation count as +inf.
OptimizeResult minimize_cobyla(const Objective& f, std::span<const double> x0,
                               const OptimizerOptions& opts);

OptimizeResult minimize_nelder_mead(const Objective& f, std::span<const double> x0,
                                    const OptimizerOptions& opts);

/// Dispatches on opts.kind.
OptimizeResult minimize(const Objective& f, std::span<const double> x0, const OptimizerOptions& opts);

namespace detail {

/// Counts evaluations, enforces the budget and keeps the best point seen.
class EvaluationLog {
 public:
  EvaluationLog(const Objective& f, int budget) : f_(f), budget_(budget) {}

  bool exhausted() const noexcept { return count_ >= budget_; }
  int count() const noexcept { return count_; }
  double operator()(std::span<const double> x);

  OptimizeResult finish(bool converged) &&;

 private:
  const Objective& f_;
  int budget_;
  int count_ = 0;
  std::vector<double> best_x_;
  double best_f_ = 0.0;
  std::vector<double> trace_;
};

}  // namespace detail

}  // namespace qens
