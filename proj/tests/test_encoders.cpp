#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qens/ansatz.hpp"
#include "qens/encoders.hpp"
#include "qens/error.hpp"
#include "qens/qsvm.hpp"

using namespace qens;
using std::numbers::pi;

namespace {

int count_kind(const CircuitSpec& c, GateKind k) {
  return static_cast<int>(std::count_if(c.gates().begin(), c.gates().end(), [&](const Gate& g) { return g.kind == k; }));
}

}  // namespace

TEST_SUITE("encoders") {
  TEST_CASE("amplitude encoding examples") {
    const std::vector<double> e0{1, 0, 0, 0, 0, 0, 0};
    auto s = amplitude_encode(e0);
    CHECK(s.n_qubits() == 3);
    CHECK(std::abs(s[0] - Complex(1, 0)) < 1e-15);
    for (std::size_t i = 1; i < 8; ++i) CHECK(std::abs(s[i]) == 0.0);

    const std::vector<double> ones(7, 1.0);
    auto u = amplitude_encode(ones);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::real(u[i]) == doctest::Approx(1 / std::sqrt(7.0)).epsilon(1e-14));
    CHECK(std::abs(u[7]) == 0.0);

    const std::vector<double> tf{3, 4};
    auto v = amplitude_encode(tf);
    CHECK(v.n_qubits() == 1);
    CHECK(std::real(v[0]) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(std::real(v[1]) == doctest::Approx(0.8).epsilon(1e-15));

    const std::vector<double> zeros(5, 0.0);
    CHECK_THROWS_AS(amplitude_encode(zeros), Error);
    try {
      amplitude_encode(zeros);
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::normalization);
    }
  }

  TEST_CASE("amplitude norm is one for random inputs") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 100);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> x(1 + k % 9);
      for (auto& v : x) v = n(rng);
      CHECK(std::abs(amplitude_encode(x).norm_squared() - 1.0) < 1e-12);
    }
  }

  TEST_CASE("qubit requirements") {
    CHECK(encoder_qubits(EncoderKind::Amplitude, 7) == 3);
    CHECK(encoder_qubits(EncoderKind::Amplitude, 8) == 3);
    CHECK(encoder_qubits(EncoderKind::Amplitude, 9) == 4);
    CHECK(encoder_qubits(EncoderKind::Amplitude, 1) == 1);
    CHECK(encoder_qubits(EncoderKind::ZFeatureMap, 7) == 7);
    CHECK(encoder_qubits(EncoderKind::ZZFeatureMap, 7) == 7);
  }

  TEST_CASE("Z feature map structure") {
    const std::vector<double> zero{0.0};
    auto s = encode(zero, {EncoderKind::ZFeatureMap, 1});
    CHECK(std::abs(s[0] - Complex(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(s[1] - Complex(1 / std::sqrt(2.0), 0)) < 1e-15);

    const std::vector<double> ab{0.4, 1.3};
    auto c = z_feature_map(ab, 1);
    CHECK(c.gates().size() == 4);
    CHECK(count_kind(c, GateKind::H) == 2);
    CHECK(count_kind(c, GateKind::RZ) == 2);
    CHECK(count_entangling_gates(c) == 0);
    CHECK(count_entangling_gates(z_feature_map(ab, 2)) == 0);
    CHECK(z_feature_map(ab, 3).gates().size() == 12);

    const std::vector<double> p{pi / 2}, m{-pi / 2};
    auto sp = encode(p, {EncoderKind::ZFeatureMap, 1});
    auto sm = encode(m, {EncoderKind::ZFeatureMap, 1});
    CHECK(probability_of_zero(sp) == doctest::Approx(probability_of_zero(sm)).epsilon(1e-15));
    CHECK(std::abs(std::abs(sp[1]) - std::abs(sm[1])) < 1e-15);
  }

  TEST_CASE("Z map rotation is exp(+i x Z)") {
    const double x = 0.37;
    const std::vector<double> v{x};
    auto s = encode(v, {EncoderKind::ZFeatureMap, 1});
    const Complex i(0, 1);
    CHECK(std::abs(s[0] - std::exp(i * x) / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(s[1] - std::exp(-i * x) / std::sqrt(2.0)) < 1e-14);
  }

  TEST_CASE("ZZ feature map structure") {
    const std::vector<double> three{0.1, 0.2, 0.3};
    CHECK(count_entangling_gates(zz_feature_map(three, 1)) == 3);
    std::vector<double> seven(7, 0.5);
    CHECK(count_entangling_gates(zz_feature_map(seven, 1)) == 21);
    CHECK(count_entangling_gates(zz_feature_map(seven, 2)) == 42);

    const std::vector<double> one{0.1};
    CHECK_THROWS_AS(zz_feature_map(one, 1), Error);
    try {
      zz_feature_map(one, 1);
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::arity);
    }

    const std::vector<double> pq{pi, 1.1};
    auto c = zz_feature_map(pq, 1);
    for (const auto& g : c.gates())
      if (g.kind == GateKind::RZZ) CHECK(std::abs(g.angle) < 1e-15);

    const std::vector<double> all_pi(4, pi);
    auto z = zz_feature_map(all_pi, 2);
    for (const auto& g : z.gates()) {
      if (g.kind == GateKind::RZZ) CHECK(std::abs(g.angle) < 1e-15);
      if (g.kind == GateKind::RZ) CHECK(std::abs(std::abs(g.angle) - 2 * pi) < 1e-12);
    }
  }

  TEST_CASE("feature scaling") {
    const std::vector<std::vector<double>> rows{{0, 10, 5}, {4, 20, 5}, {2, 15, 5}};
    auto r = fit_ranges(rows);
    const std::vector<double> lo{0, 10, 5}, hi{4, 20, 5}, mid{2, 15, 5}, out{-3, 100, 1};
    auto a = scale_features(lo, r), b = scale_features(hi, r), c = scale_features(mid, r), d = scale_features(out, r);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    CHECK(b[0] == doctest::Approx(pi));
    CHECK(b[1] == doctest::Approx(pi));
    CHECK(c[0] == doctest::Approx(pi / 2));
    CHECK(c[1] == doctest::Approx(pi / 2));
    CHECK(a[2] == doctest::Approx(pi / 2));
    CHECK(d[0] == 0.0);
    CHECK(d[1] == doctest::Approx(pi));
  }

  TEST_CASE("Z map commutes with joint permutation of features and qubits") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, pi);
    for (int m = 1; m <= 4; ++m) {
      std::vector<double> x(m);
      for (auto& v : x) v = u(rng);
      std::vector<int> perm(m);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double> px(m);
      for (int k = 0; k < m; ++k) px[perm[k]] = x[k];
      auto p = outcome_probabilities(encode(x, {EncoderKind::ZFeatureMap, 2}));
      auto q = outcome_probabilities(encode(px, {EncoderKind::ZFeatureMap, 2}));
      for (std::size_t i = 0; i < p.size(); ++i) {
        std::size_t j = 0;
        for (int k = 0; k < m; ++k)
          if (i >> k & 1) j |= std::size_t{1} << perm[k];
        CHECK(std::abs(p[i] - q[j]) < 1e-12);
      }
    }
  }

  TEST_CASE("kernel values ignore a global phase") {
    const std::vector<std::vector<double>> xs{{0.3, 1.2}, {2.0, 0.4}};
    auto K = quantum_kernel(xs, {EncoderKind::ZZFeatureMap, 2});
    auto a = encode(xs[0], {EncoderKind::ZZFeatureMap, 2});
    auto b = encode(xs[1], {EncoderKind::ZZFeatureMap, 2});
    const Complex phase = std::exp(Complex(0, 0.77));
    for (auto& v : a.amplitudes()) v *= phase;
    CHECK(std::abs(fidelity(a, b) - K(0, 1)) < 1e-12);
  }

  TEST_CASE("encoder names") {
    CHECK(parse_encoder_kind("z") == EncoderKind::ZFeatureMap);
    CHECK(parse_encoder_kind("ZZ") == EncoderKind::ZZFeatureMap);
    CHECK(parse_encoder_kind("amplitude") == EncoderKind::Amplitude);
    CHECK_THROWS_AS(parse_encoder_kind("iqp"), Error);
  }
}
