#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qens/ansatz.hpp"
#include "qens/circuit_metrics.hpp"
#include "qens/error.hpp"

using namespace qens;

namespace {

CircuitSpec bell() {
  CircuitSpec c(2);
  c.add(GateKind::H, {0}).add(GateKind::CNOT, {0, 1});
  return c;
}

CircuitSpec product_ry() {
  CircuitSpec c(2, 2);
  c.add_param(GateKind::RY, {0}, 0).add_param(GateKind::RY, {1}, 1);
  return c;
}

CircuitSpec partial_cz() {
  CircuitSpec c(2, 2);
  c.add_param(GateKind::RY, {0}, 0).add_param(GateKind::RY, {1}, 1).add(GateKind::CZ, {0, 1});
  return c;
}

CircuitSpec equator() {
  CircuitSpec c(1, 1);
  c.add(GateKind::H, {0}).add_param(GateKind::RZ, {0}, 0);
  return c;
}

CircuitSpec two_axis() {
  CircuitSpec c(1, 2);
  c.add(GateKind::H, {0}).add_param(GateKind::RZ, {0}, 1).add_param(GateKind::RY, {0}, 0);
  return c;
}

CircuitSpec fixed_state() {
  CircuitSpec c(1, 1);
  c.add_param(GateKind::RZ, {0}, 0);
  return c;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("entangling capacity ground truth") {
    auto b = entangling_capacity(bell(), 10, 1);
    CHECK(std::abs(b.meyer_wallach - 1.0) < 1e-9);
    CHECK(std::abs(b.von_neumann_bits - 1.0) < 1e-9);

    auto p = entangling_capacity(build_ansatz(1, 4, 2), 200, 1);
    CHECK(std::abs(p.meyer_wallach) < 1e-9);
    CHECK(std::abs(p.von_neumann_bits) < 1e-9);
  }

  TEST_CASE("battery ranking agrees between measures") {
    auto a = entangling_capacity(product_ry(), 500, 3);
    auto b = entangling_capacity(partial_cz(), 500, 3);
    auto c = entangling_capacity(bell(), 500, 3);
    CHECK(a.meyer_wallach < b.meyer_wallach);
    CHECK(b.meyer_wallach < c.meyer_wallach);
    CHECK(a.von_neumann_bits < b.von_neumann_bits);
    CHECK(b.von_neumann_bits < c.von_neumann_bits);
  }

  TEST_CASE("entangling capacity bounds and determinism") {
    for (int id = 1; id <= 19; ++id) {
      auto c = build_ansatz(id, 3, 1);
      auto e1 = entangling_capacity(c, 50, 9);
      auto e2 = entangling_capacity(c, 50, 9);
      CHECK(e1.meyer_wallach == e2.meyer_wallach);
      CHECK(e1.von_neumann_bits == e2.von_neumann_bits);
      CHECK(e1.meyer_wallach >= -1e-9);
      CHECK(e1.meyer_wallach <= 1 + 1e-9);
      CHECK(e1.von_neumann_bits >= 0.0);
      CHECK(e1.von_neumann_bits <= 1 + 1e-9);
    }
    CircuitSpec one(1);
    CHECK_THROWS_AS(entangling_capacity(one, 10, 1), Error);
  }

  TEST_CASE("entropy and purity helpers") {
    Eigen::Matrix2cd mixed = Eigen::Matrix2cd::Identity() * 0.5;
    CHECK(purity(mixed) == doctest::Approx(0.5));
    CHECK(von_neumann_entropy_bits(mixed) == doctest::Approx(1.0));
    Eigen::Matrix2cd pure = Eigen::Matrix2cd::Zero();
    pure(0, 0) = 1.0;
    CHECK(von_neumann_entropy_bits(pure) == 0.0);
    Eigen::Matrix2cd noisy = pure;
    noisy(1, 1) = -1e-17;
    CHECK(std::isfinite(von_neumann_entropy_bits(noisy)));
    CHECK(von_neumann_entropy_bits(noisy) >= 0.0);
  }

  TEST_CASE("Haar bin masses") {
    double total = 0.0;
    for (int k = 0; k < 75; ++k) total += haar_bin_mass(k / 75.0, (k + 1) / 75.0, 3);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(haar_bin_mass(0.0, 0.5, 1) == doctest::Approx(0.5));
  }

  TEST_CASE("expressibility ordering") {
    auto fixed = expressibility(fixed_state(), 5000, 75, 7);
    auto single = expressibility(equator(), 5000, 75, 7);
    auto both = expressibility(two_axis(), 5000, 75, 7);
    CHECK(fixed.kl_divergence > single.kl_divergence + 0.1);
    CHECK(single.kl_divergence > both.kl_divergence + 0.1);
    CHECK(both.kl_divergence >= 0.0);
    auto again = expressibility(equator(), 5000, 75, 7);
    CHECK(again.kl_divergence == single.kl_divergence);
    CircuitSpec none(1);
    none.add(GateKind::H, {0});
    CHECK_THROWS_AS(expressibility(none, 100, 75, 1), Error);
  }

  TEST_CASE("pearson examples") {
    const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{3, 2, 1};
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-15));
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
    CHECK(pearson(a, b) == doctest::Approx(0.8).epsilon(1e-14));
    const std::vector<double> c{5, 5, 5};
    CHECK_THROWS_AS(pearson(x, c), Error);
    const std::vector<double> one{1};
    CHECK_THROWS_AS(pearson(one, one), Error);
    CHECK_THROWS_AS(pearson(a, x), Error);
  }

  TEST_CASE("pearson matches the brute-force formula") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> x(3 + t % 40), y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = n(rng);
        y[i] = 0.3 * x[i] + n(rng);
      }
      CHECK(std::abs(pearson(x, y) - oracle::pearson(x, y)) < 1e-12);
    }
  }

  TEST_CASE("metrics table round trip") {
    std::vector<MetricsRow> rows{{1, 1, "z", 7, 0.25, 0.0, 0.0}, {9, 2, "zz", 7, 0.125, 0.5, 0.75}};
    std::stringstream ss;
    write_metrics_table(ss, rows);
    auto back = read_metrics_table(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].circuit_id == 9);
    CHECK(back[1].encoder == "zz");
    CHECK(back[1].meyer_wallach == 0.5);
    std::stringstream bad("header\n1,2\n");
    CHECK_THROWS_AS(read_metrics_table(bad), Error);
  }
}
