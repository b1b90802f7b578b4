#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qens/ansatz.hpp"
#include "qens/error.hpp"

using namespace qens;

TEST_SUITE("ansatz") {
  TEST_CASE("registry holds 19 templates") {
    const auto& reg = AnsatzRegistry::builtin();
    auto ids = reg.ids();
    REQUIRE(ids.size() == 19);
    for (int i = 1; i <= 19; ++i) CHECK(reg.contains(i));
    CHECK_FALSE(reg.contains(20));
    CHECK_THROWS_AS(build_ansatz(20, 4, 1), Error);
    try {
      build_ansatz(0, 4, 1);
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::registry);
    }
  }

  TEST_CASE("circuit 1 is rotation only") {
    auto c = build_ansatz(1, 4, 1);
    CHECK(c.n_params() == 8);
    CHECK(count_entangling_gates(c) == 0);
    for (const auto& g : c.gates()) CHECK((g.kind == GateKind::RX || g.kind == GateKind::RZ));
  }

  TEST_CASE("circuit 9 entangles") {
    auto c = build_ansatz(9, 4, 1);
    CHECK(count_entangling_gates(c) > 0);
    bool has_h = false, has_cz = false, has_rx = false;
    for (const auto& g : c.gates()) {
      has_h |= g.kind == GateKind::H;
      has_cz |= g.kind == GateKind::CZ;
      has_rx |= g.kind == GateKind::RX;
    }
    CHECK(has_h);
    CHECK(has_cz);
    CHECK(has_rx);
  }

  TEST_CASE("layering doubles parameters and entanglers") {
    for (int id = 1; id <= 19; ++id) {
      for (int n : {2, 3, 4, 7}) {
        auto one = build_ansatz(id, n, 1);
        auto two = build_ansatz(id, n, 2);
        CHECK(one.n_params() == AnsatzRegistry::builtin().at(id).params_per_layer(n));
        CHECK(two.n_params() == 2 * one.n_params());
        CHECK(count_entangling_gates(two) == 2 * count_entangling_gates(one));
      }
    }
  }

  TEST_CASE("layer slots are contiguous") {
    auto c = build_ansatz(13, 4, 2);
    const int ppl = c.n_params() / 2;
    const std::size_t half = c.gates().size() / 2;
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
      const auto& g = c.gates()[i];
      if (!g.slot) continue;
      if (i < half)
        CHECK(*g.slot < ppl);
      else
        CHECK(*g.slot >= ppl);
    }
  }

  TEST_CASE("building is deterministic") {
    for (int id = 1; id <= 19; ++id) CHECK(build_ansatz(id, 5, 2) == build_ansatz(id, 5, 2));
  }

  TEST_CASE("all templates preserve norm at four qubits") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
    for (int id = 1; id <= 19; ++id) {
      auto c = build_ansatz(id, 4, 2);
      std::vector<double> p(c.n_params());
      for (auto& v : p) v = u(rng);
      auto s = apply_circuit(zero_state(4), c, p);
      CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("entangler counting") {
    CircuitSpec c(2);
    c.add(GateKind::CZ, {0, 1});
    CHECK(count_entangling_gates(c) == 1);
    CHECK(entangler_pairs("chain", 4) == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  }

  TEST_CASE("registry text parse errors") {
    CHECK_THROWS_AS(AnsatzRegistry::parse("circuit x\n"), Error);
  }
}
