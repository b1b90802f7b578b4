#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qens/error.hpp"
#include "qens/optimize.hpp"

using namespace qens;

namespace {

OptimizerOptions opts(OptimizerKind k, int budget) {
  OptimizerOptions o;
  o.kind = k;
  o.max_evaluations = budget;
  return o;
}

void check_trace(const OptimizeResult& r) {
  REQUIRE(!r.trace.empty());
  CHECK(static_cast<int>(r.trace.size()) == r.n_evaluations);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  CHECK(r.trace.back() == r.best_value);
}

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("one-dimensional parabola") {
    Objective f = [](std::span<const double> x) { return (x[0] - 3) * (x[0] - 3); };
    const std::vector<double> x0{0.0};
    for (auto k : {OptimizerKind::Cobyla, OptimizerKind::NelderMead}) {
      auto r = minimize(f, x0, opts(k, 100));
      CHECK(std::abs(r.best_params[0] - 3.0) < 1e-3);
      CHECK(r.n_evaluations <= 100);
      CHECK(r.best_value == f(r.best_params));
      check_trace(r);
    }
  }

  TEST_CASE("constant objective") {
    Objective f = [](std::span<const double>) { return 4.5; };
    const std::vector<double> x0{1.0, 2.0};
    for (auto k : {OptimizerKind::Cobyla, OptimizerKind::NelderMead}) {
      auto r = minimize(f, x0, opts(k, 1000));
      CHECK(r.best_value == 4.5);
      CHECK(r.converged);
      CHECK(r.n_evaluations < 1000);
    }
  }

  TEST_CASE("budget of one returns the start") {
    Objective f = [](std::span<const double> x) { return x[0] * x[0] + 1; };
    const std::vector<double> x0{2.0};
    auto r = minimize(f, x0, opts(OptimizerKind::Cobyla, 1));
    CHECK(r.n_evaluations == 1);
    CHECK(r.best_params == x0);
    CHECK(r.best_value == 5.0);
    CHECK_THROWS_AS(minimize(f, x0, opts(OptimizerKind::Cobyla, 0)), Error);
  }

  TEST_CASE("non-finite objective") {
    Objective bad = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
    const std::vector<double> x0{0.0};
    CHECK_THROWS_AS(minimize(bad, x0, opts(OptimizerKind::Cobyla, 10)), Error);

    Objective wall = [](std::span<const double> x) {
      return x[0] < -0.5 ? std::numeric_limits<double>::infinity() : (x[0] - 1) * (x[0] - 1);
    };
    auto r = minimize(wall, x0, opts(OptimizerKind::Cobyla, 100));
    CHECK(std::isfinite(r.best_value));
    CHECK(std::abs(r.best_params[0] - 1.0) < 1e-3);
  }

  TEST_CASE("convex quadratics up to ten dimensions") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2, 2), d(0.5, 3);
    for (int n = 1; n <= 10; ++n) {
      std::vector<double> c(n), w(n);
      for (int i = 0; i < n; ++i) {
        c[i] = u(rng);
        w[i] = d(rng);
      }
      Objective f = [&](std::span<const double> x) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += w[i] * (x[i] - c[i]) * (x[i] - c[i]);
        return s;
      };
      const std::vector<double> x0(n, 0.0);
      auto r = minimize(f, x0, opts(OptimizerKind::Cobyla, 500));
      CHECK(r.best_value < 1e-2);
      check_trace(r);
    }
  }

  TEST_CASE("seeded determinism") {
    Objective f = [](std::span<const double> x) { return std::sin(3 * x[0]) + (x[1] - 0.5) * (x[1] - 0.5) + 0.1 * x[0] * x[0]; };
    const std::vector<double> x0{0.3, -1.0};
    for (auto k : {OptimizerKind::Cobyla, OptimizerKind::NelderMead}) {
      auto a = minimize(f, x0, opts(k, 80));
      auto b = minimize(f, x0, opts(k, 80));
      CHECK(a.best_params == b.best_params);
      CHECK(a.trace == b.trace);
    }
  }

  TEST_CASE("optimizer names") {
    CHECK(parse_optimizer_kind("cobyla") == OptimizerKind::Cobyla);
    CHECK(parse_optimizer_kind(optimizer_name(OptimizerKind::NelderMead)) == OptimizerKind::NelderMead);
    CHECK_THROWS_AS(parse_optimizer_kind("adam"), Error);
  }
}
