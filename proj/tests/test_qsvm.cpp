#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qens/error.hpp"
#include "qens/qsvm.hpp"

using namespace qens;
using std::numbers::pi;

namespace {

std::vector<std::vector<double>> random_points(std::size_t n, std::size_t m, std::uint64_t seed, double hi = pi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, hi);
  std::vector<std::vector<double>> xs(n, std::vector<double>(m));
  for (auto& x : xs)
    for (auto& v : x) v = u(rng);
  return xs;
}

// Literal matrix form: 1/2 l'P'(K o yy')Pl - l'P'1.
double dense_form(const Eigen::MatrixXd& K, const std::vector<int>& y, const std::vector<double>& p,
                  const std::vector<std::uint8_t>& bits) {
  const Eigen::Index n = K.rows(), k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n * k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < k; ++a) P(i, i * k + a) = p[a];
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) H(i, j) = K(i, j) * y[i] * y[j];
  Eigen::VectorXd b(n * k);
  for (Eigen::Index i = 0; i < n * k; ++i) b(i) = bits[i];
  const Eigen::VectorXd lam = P * b;
  return 0.5 * lam.dot(H * lam) - lam.sum();
}

std::vector<std::uint8_t> bits_of(unsigned mask, int n) {
  std::vector<std::uint8_t> b(n);
  for (int i = 0; i < n; ++i) b[i] = mask >> i & 1;
  return b;
}

Dataset six_points() {
  Dataset d;
  d.x = {{0, 0}, {20, 10}, {10, 30}, {300, 280}, {320, 310}, {290, 330}};
  d.y = {-1, -1, -1, 1, 1, 1};
  return d;
}

}  // namespace

TEST_SUITE("qsvm") {
  TEST_CASE("quantum kernel examples") {
    const std::vector<std::vector<double>> two{{0.0}, {pi / 2}};
    auto K = quantum_kernel(two, {EncoderKind::ZFeatureMap, 1});
    CHECK(K(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(K(0, 1)) < 1e-12);

    auto xs = random_points(6, 1, 4);
    auto Kz = quantum_kernel(xs, {EncoderKind::ZFeatureMap, 1});
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double c = std::cos(xs[i][0] - xs[j][0]);
        CHECK(std::abs(Kz(i, j) - c * c) < 1e-12);
      }

    const std::vector<std::vector<double>> ortho{{1, 0, 0}, {0, 1, 0}};
    auto Ka = quantum_kernel(ortho, {EncoderKind::Amplitude, 1});
    CHECK(Ka(0, 1) == 0.0);
    CHECK(Ka(0, 0) == doctest::Approx(1.0));

    const std::vector<std::vector<double>> ragged{{1, 2}, {1}};
    CHECK_THROWS_AS(quantum_kernel(ragged, {EncoderKind::ZFeatureMap, 1}), Error);
    const std::vector<std::vector<double>> narrow{{1}, {2}};
    CHECK_THROWS_AS(quantum_kernel(narrow, {EncoderKind::ZZFeatureMap, 1}), Error);
  }

  TEST_CASE("quantum kernel equals separately simulated overlaps") {
    for (auto kind : {EncoderKind::ZFeatureMap, EncoderKind::ZZFeatureMap}) {
      for (int m = 2; m <= 4; ++m) {
        auto xs = random_points(8, m, 30 + m);
        const EncoderSpec e{kind, 2};
        auto K = quantum_kernel(xs, e);
        std::vector<oracle::Vec> states;
        for (const auto& x : xs) states.push_back(oracle::run(encoder_circuit(x, e), oracle::zero(m)));
        for (std::size_t i = 0; i < xs.size(); ++i)
          for (std::size_t j = 0; j < xs.size(); ++j) {
            const double f = std::norm(states[j].dot(states[i]));
            CHECK(std::abs(K(i, j) - f) < 1e-10);
            CHECK(K(i, j) == K(j, i));
            CHECK(K(i, j) >= -1e-12);
            CHECK(K(i, j) <= 1 + 1e-12);
          }
      }
    }
    auto xs = random_points(8, 5, 3);
    auto K = quantum_kernel(xs, {EncoderKind::Amplitude, 1});
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < xs.size(); ++j) {
        double dot = 0, ni = 0, nj = 0;
        for (int k = 0; k < 5; ++k) {
          dot += xs[i][k] * xs[j][k];
          ni += xs[i][k] * xs[i][k];
          nj += xs[j][k] * xs[j][k];
        }
        CHECK(std::abs(K(i, j) - dot * dot / (ni * nj)) < 1e-10);
      }
  }

  TEST_CASE("rbf kernel") {
    const std::vector<double> a{0, 0}, b{150, 150};
    CHECK(rbf_value(a, a, 150) == 1.0);
    CHECK(rbf_value(a, std::vector<double>{150 * std::sqrt(2.0), 0}, 150) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(rbf_value(a, b, 150) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK_THROWS_AS(rbf_value(a, b, 0.0), Error);
    CHECK(classical_svm_config().kernel.sigma == 150.0);
    CHECK(qsvm_anneal_config().kernel.sigma == 150.0);
  }

  TEST_CASE("two-point dual") {
    KernelMatrix K{Eigen::MatrixXd::Identity(2, 2), KernelSpec::rbf(1.0)};
    const std::vector<int> y{1, -1};
    DualSolverOptions o;
    o.C = 10;
    auto m = solve_dual_svm(K, y, o);
    CHECK(m.lambdas[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.lambdas[1] == doctest::Approx(1.0).epsilon(1e-6));

    KernelMatrix asym{Eigen::MatrixXd::Identity(2, 2), KernelSpec::rbf(1.0)};
    asym.values(0, 1) = 0.5;
    CHECK_THROWS_AS(solve_dual_svm(asym, y, o), Error);
  }

  TEST_CASE("dual solver matches a grid search") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::vector<double>> xs{{u(rng), u(rng)}, {u(rng), u(rng)}};
      auto K = rbf_kernel(xs, 1.0);
      const std::vector<int> y{1, t % 2 ? 1 : -1};
      DualSolverOptions o;
      o.C = 5;
      auto m = solve_dual_svm(K, y, o);
      double best = 1e300;
      for (int a = 0; a <= 50; ++a)
        for (int b = 0; b <= 50; ++b) {
          const std::vector<double> l{a * 0.1, b * 0.1};
          best = std::min(best, dual_objective(K.values, y, l));
        }
      const double got = dual_objective(K.values, y, m.lambdas);
      CHECK(got <= best + 1e-3);
      for (double l : m.lambdas) {
        CHECK(l >= 0.0);
        CHECK(l <= o.C);
      }
    }
  }

  TEST_CASE("one-class training predicts that class") {
    Dataset d;
    d.x = {{1, 2}, {3, 4}, {5, 1}};
    d.y = {-1, -1, -1};
    SvmClassifier m(classical_svm_config());
    m.train(d);
    CHECK(m.predict(std::vector<double>{100, 100}) == -1);
    CHECK(m.predict(std::vector<double>{1, 2}) == -1);
  }

  TEST_CASE("QUBO examples") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const std::vector<int> y{1, -1};
    auto q = build_qubo(I, y);
    CHECK(q.n_bits() == 4);
    CHECK(q.objective(std::vector<std::uint8_t>(4, 0)) == 0.0);
    const std::vector<std::uint8_t> b{1, 0, 1, 0};
    CHECK(q.decode(b) == std::vector<double>{1, 1});
    CHECK(q.objective(b) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK((q.Q - q.Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("QUBO objective equals the matrix form for every assignment") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int n = 1; n <= 4; ++n) {
      auto xs = random_points(n, 2, 50 + n, 3.0);
      auto K = rbf_kernel(xs, 1.5).values;
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) y[i] = u(rng) > 0 ? 1 : -1;
      const std::vector<double> p{1, 2};
      auto q = build_qubo(K, y, p);
      for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
        auto bits = bits_of(mask, 2 * n);
        const double want = dense_form(K, y, p, bits);
        CHECK(std::abs(q.objective(bits) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        CHECK(std::abs(qubo_dense_objective(K, y, p, bits) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
      }
    }
  }

  TEST_CASE("annealing finds the exhaustive optimum on small problems") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 20; ++t) {
      const int n = 2 + t % 3;
      auto xs = random_points(n, 2, 100 + t, 2.0);
      auto K = rbf_kernel(xs, 1.0).values;
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) y[i] = u(rng) > 0 ? 1 : -1;
      auto q = build_qubo(K, y);
      auto best = solve_qubo_exhaustive(q);
      auto a1 = anneal(q, {}, 1);
      auto a2 = anneal(q, {}, 2);
      CHECK(std::abs(a1.objective - best.objective) <= 1e-9);
      CHECK(std::abs(a2.objective - best.objective) <= 1e-9);
      CHECK(a1.objective <= 0.0);
      auto again = anneal(q, {}, 1);
      CHECK(again.bits == a1.bits);
    }
  }

  TEST_CASE("zero QUBO is deterministic per seed") {
    QuboProblem q;
    q.Q = Eigen::MatrixXd::Zero(6, 6);
    q.n_points = 3;
    auto a = anneal(q, {}, 5), b = anneal(q, {}, 5);
    CHECK(a.bits == b.bits);
    CHECK(a.objective == 0.0);
  }

  TEST_CASE("prediction rule") {
    SvmModel m;
    m.lambdas = {1.0};
    m.train_x = {{0.0, 0.0}};
    m.train_y = {1};
    m.bias = 0.0;
    m.kernel = KernelSpec::rbf(150);
    CHECK(svm_predict(m, std::vector<double>{0.0, 0.0}) == 1);
    m.train_y = {-1};
    m.bias = 1.0;
    CHECK(svm_predict(m, std::vector<double>{0.0, 0.0}) == 1);
  }

  TEST_CASE("six separable points through the exhaustive QUBO") {
    auto d = six_points();
    auto cfg = qsvm_anneal_config();
    cfg.solver = SvmSolver::Exhaustive;
    SvmClassifier m(cfg);
    m.train(d);
    CHECK(accuracy(m, d) == 1.0);
    for (double l : m.model().lambdas) CHECK((l == 0 || l == 1 || l == 2 || l == 3));

    SvmClassifier annealed(qsvm_anneal_config());
    annealed.train(d);
    CHECK(accuracy(annealed, d) == 1.0);

    SvmClassifier classical(classical_svm_config());
    classical.train(d);
    CHECK(classical.predict_batch(d) == m.predict_batch(d));
  }

  TEST_CASE("negating labels negates predictions") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n(0, 1);
    Dataset d, neg;
    for (int i = 0; i < 30; ++i) {
      const int y = i % 2 ? 1 : -1;
      d.x.push_back({n(rng) + 1.5 * y, n(rng)});
      d.y.push_back(y);
    }
    neg = d;
    for (auto& y : neg.y) y = -y;
    for (auto cfg : {classical_svm_config(1.0, 10.0), qsvm_kernel_config()}) {
      SvmClassifier a(cfg), b(cfg);
      a.train(d);
      b.train(neg);
      for (int t = 0; t < 40; ++t) {
        const std::vector<double> x{n(rng), n(rng)};
        if (std::abs(a.model().decision_value(x)) < 1e-9) continue;
        CHECK(a.predict(x) == -b.predict(x));
      }
    }
  }

  TEST_CASE("bias is invariant to permuting training points") {
    auto xs = random_points(7, 2, 8, 2.0);
    auto K = rbf_kernel(xs, 1.0).values;
    const std::vector<int> y{1, -1, 1, 1, -1, -1, 1};
    const std::vector<double> lam{0.5, 0.0, 1.2, 0.0, 0.7, 2.0, 0.0};
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd Kp(7, 7);
    std::vector<int> yp(7);
    std::vector<double> lp(7);
    for (int i = 0; i < 7; ++i) {
      yp[i] = y[perm[i]];
      lp[i] = lam[perm[i]];
      for (int j = 0; j < 7; ++j) Kp(i, j) = K(perm[i], perm[j]);
    }
    for (auto rule : {BiasRule::SupportVectors, BiasRule::AllPoints}) {
      CHECK(compute_bias(K, y, lam, rule) == doctest::Approx(compute_bias(Kp, yp, lp, rule)).epsilon(1e-12));
    }
    CHECK(compute_bias(K, y, lam, BiasRule::SupportVectors) != doctest::Approx(compute_bias(K, y, lam, BiasRule::AllPoints)));
  }

  TEST_CASE("kernel cache is bit-identical") {
    const auto dir = std::filesystem::temp_directory_path() / "qens_kernel_cache_test";
    std::filesystem::remove_all(dir);
    KernelCache cache(dir);
    auto xs = random_points(10, 3, 2);
    const EncoderSpec e{EncoderKind::ZZFeatureMap, 2};
    auto first = cache.quantum_kernel(xs, e);
    auto second = cache.quantum_kernel(xs, e);
    auto direct = quantum_kernel(xs, e);
    CHECK(first.values == direct.values);
    CHECK(second.values == direct.values);
    Dataset d;
    d.x = xs;
    d.y.assign(xs.size(), 1);
    CHECK((std::filesystem::exists(cache.path_for(hash_dataset(d), e)) || !std::filesystem::is_empty(dir)));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("kernel and annealer models share the classifier contract") {
    auto d = six_points();
    for (auto cfg : {qsvm_kernel_config(), qsvm_anneal_config(), classical_svm_config()}) {
      SvmClassifier m(cfg);
      CHECK_THROWS_AS((void)m.predict(d.x[0]), Error);
      m.train(d);
      auto back = SvmClassifier::from_json(m.to_json());
      CHECK(back.predict_batch(d) == m.predict_batch(d));
      CHECK(m.clone_untrained()->fitted() == false);
    }
  }
}
