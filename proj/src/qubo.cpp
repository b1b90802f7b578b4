#include <algorithm>
#include <cmath>
#include <random>

#include "qens/error.hpp"
#include "qens/parallel.hpp"
#include "qens/qsvm.hpp"

namespace qens {

double QuboProblem::objective(std::span<const std::uint8_t> bits) const {
  const Eigen::Index n = Q.rows();
  if (static_cast<Eigen::Index>(bits.size()) != n) throw Error(ErrorCategory::input, "bit vector has the wrong length");
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!bits[i]) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      if (bits[j]) e += Q(i, j);
  }
  return e;
}

std::vector<double> QuboProblem::decode(std::span<const std::uint8_t> bits) const {
  const std::size_t k = precision.size();
  if (bits.size() != static_cast<std::size_t>(n_points) * k) throw Error(ErrorCategory::input, "bit vector has the wrong length");
  std::vector<double> lambda(static_cast<std::size_t>(n_points), 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    for (std::size_t b = 0; b < k; ++b) lambda[i] += precision[b] * bits[i * k + b];
  return lambda;
}

QuboProblem build_qubo(const Eigen::MatrixXd& K, std::span<const int> y, std::vector<double> precision) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || static_cast<Eigen::Index>(y.size()) != n) {
    throw Error(ErrorCategory::input, "kernel and label sizes disagree");
  }
  if (precision.empty()) throw Error(ErrorCategory::parameter, "empty precision vector");
  const auto k = static_cast<Eigen::Index>(precision.size());
  QuboProblem q;
  q.precision = std::move(precision);
  q.n_points = static_cast<int>(n);
  q.Q = Eigen::MatrixXd::Zero(n * k, n * k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 0.5 * y[i] * y[j] * K(i, j);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) q.Q(i * k + a, j * k + b) = h * q.precision[a] * q.precision[b];
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < k; ++a) q.Q(i * k + a, i * k + a) -= q.precision[a];
  return q;
}

double qubo_dense_objective(const Eigen::MatrixXd& K, std::span<const int> y, std::span<const double> precision,
                            std::span<const std::uint8_t> bits) {
  const Eigen::Index n = K.rows();
  const auto k = static_cast<Eigen::Index>(precision.size());
  // P = I_N kron p, shape N x (N k).
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n * k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < k; ++a) P(i, i * k + a) = precision[a];
  Eigen::VectorXd yv(n), b(n * k);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[i];
  for (Eigen::Index i = 0; i < n * k; ++i) b[i] = bits[i];
  const Eigen::MatrixXd H = K.cwiseProduct(yv * yv.transpose());
  return 0.5 * b.dot(P.transpose() * H * P * b) - b.dot(P.transpose() * Eigen::VectorXd::Ones(n));
}

namespace {

// Local fields h = Q b let a single flip be scored in O(1).
struct FlipState {
  std::vector<std::uint8_t> bits;
  Eigen::VectorXd field;
  double energy = 0.0;

  FlipState(const Eigen::MatrixXd& Q, std::vector<std::uint8_t> b) : bits(std::move(b)) {
    Eigen::VectorXd bv(Q.rows());
    for (Eigen::Index i = 0; i < Q.rows(); ++i) bv[i] = bits[i];
    field = Q * bv;
    energy = bv.dot(field);
  }

  double delta(const Eigen::MatrixXd& Q, Eigen::Index i) const {
    const double s = bits[i];
    return (1.0 - 2.0 * s) * (Q(i, i) + 2.0 * (field[i] - Q(i, i) * s));
  }

  void flip(const Eigen::MatrixXd& Q, Eigen::Index i, double d) {
    const double sign = bits[i] ? -1.0 : 1.0;
    bits[i] ^= 1;
    field += sign * Q.col(i);
    energy += d;
  }
};

void greedy_descent(const Eigen::MatrixXd& Q, FlipState& st) {
  for (bool improved = true; improved;) {
    improved = false;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      const double d = st.delta(Q, i);
      if (d < -1e-15) {
        st.flip(Q, i, d);
        improved = true;
      }
    }
  }
}

}  // namespace

AnnealResult anneal(const QuboProblem& qubo, const AnnealSchedule& sch, std::uint64_t seed) {
  const Eigen::MatrixXd& Q = qubo.Q;
  const Eigen::Index n = Q.rows();
  if (sch.restarts < 1 || !(sch.alpha > 0.0 && sch.alpha < 1.0) || !(sch.t0 > 0.0) || sch.sweeps_per_temperature < 1) {
    throw Error(ErrorCategory::parameter, "invalid annealing schedule");
  }
  AnnealResult best{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), 0.0};
  if (n == 0) return best;

  std::vector<AnnealResult> runs(static_cast<std::size_t>(sch.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    std::mt19937_64 rng(mix_seed(seed, r));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::uint8_t> start(static_cast<std::size_t>(n));
    for (auto& b : start) b = unif(rng) < 0.5 ? 1 : 0;
    FlipState st(Q, std::move(start));
    std::vector<std::uint8_t> run_best = st.bits;
    double run_best_e = st.energy;
    for (double t = sch.t0; t >= sch.t_min; t *= sch.alpha) {
      for (int sweep = 0; sweep < sch.sweeps_per_temperature; ++sweep) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = st.delta(Q, i);
          if (d <= 0.0 || unif(rng) < std::exp(-d / t)) {
            st.flip(Q, i, d);
            if (st.energy < run_best_e) {
              run_best_e = st.energy;
              run_best = st.bits;
            }
          }
        }
      }
    }
    FlipState polished(Q, run_best);
    greedy_descent(Q, polished);
    runs[r] = AnnealResult{polished.bits, qubo.objective(polished.bits)};
  });
  for (const auto& r : runs) {
    if (r.objective < best.objective) best = r;
  }
  return best;
}

AnnealResult solve_qubo_exhaustive(const QuboProblem& qubo) {
  const int n = qubo.n_bits();
  if (n > 24) throw Error(ErrorCategory::capacity, "exhaustive QUBO search limited to 24 bits");
  AnnealResult best{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), 0.0};
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    for (int i = 0; i < n; ++i) bits[i] = (mask >> i) & 1U;
    const double e = qubo.objective(bits);
    if (e < best.objective) best = AnnealResult{bits, e};
  }
  return best;
}

}  // namespace qens
