#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qens/error.hpp"
#include "qens/eval.hpp"

using namespace qens;

namespace {

struct Tally {
  double tp = 0, fp = 0, tn = 0, fn = 0;
};

double safe(double a, double b) { return b == 0 ? 0.0 : a / b; }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("perfect and inverted predictions") {
    const std::vector<int> y{1, -1, -1, 1, -1};
    auto r = classification_report(y, y);
    CHECK(r.macro_precision == 1.0);
    CHECK(r.macro_recall == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(false_positive_count(y, y) == 0);

    std::vector<int> inv(y);
    for (auto& v : inv) v = -v;
    auto w = classification_report(y, inv);
    CHECK(w.phishing.precision == 0.0);
    CHECK(w.phishing.recall == 0.0);
    CHECK(w.phishing.f1 == 0.0);
    CHECK(w.non_phishing.f1 == 0.0);
    CHECK(w.macro_f1 == 0.0);
  }

  TEST_CASE("all-positive predictions on the test split") {
    std::vector<int> y(11000, -1);
    std::fill(y.begin(), y.begin() + 1000, 1);
    const std::vector<int> p(11000, 1);
    auto r = classification_report(y, p);
    CHECK(r.phishing.recall == 1.0);
    CHECK(r.phishing.precision == doctest::Approx(1000.0 / 11000.0).epsilon(1e-15));
    CHECK(r.non_phishing.recall == 0.0);
    CHECK(r.zero_division);
    CHECK(r.non_phishing.zero_division);
    CHECK(r.confusion.total() == 11000);
    CHECK(false_positive_count(y, p) == 10000);
  }

  TEST_CASE("hand-built false positives") {
    const std::vector<int> y{1, 1, -1, -1, -1, -1, -1, -1, 1, -1};
    const std::vector<int> p{1, -1, 1, -1, 1, -1, -1, 1, 1, -1};
    CHECK(false_positive_count(y, p) == 3);
    auto c = confusion_matrix(y, p);
    CHECK(c == ConfusionMatrix{2, 3, 4, 1});
  }

  TEST_CASE("input errors") {
    const std::vector<int> a{1, -1}, b{1};
    CHECK_THROWS_AS(classification_report(a, b), Error);
    const std::vector<int> empty;
    CHECK_THROWS_AS(classification_report(empty, empty), Error);
    const std::vector<int> bad{1, 0};
    CHECK_THROWS_AS(classification_report(a, bad), Error);
  }

  TEST_CASE("report matches a brute-force tally") {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.3), flip(0.2);
    std::vector<int> y(1000), p(1000);
    Tally t;
    for (int i = 0; i < 1000; ++i) {
      y[i] = coin(rng) ? 1 : -1;
      p[i] = flip(rng) ? -y[i] : y[i];
      if (y[i] == 1 && p[i] == 1) ++t.tp;
      if (y[i] == -1 && p[i] == 1) ++t.fp;
      if (y[i] == -1 && p[i] == -1) ++t.tn;
      if (y[i] == 1 && p[i] == -1) ++t.fn;
    }
    auto r = classification_report(y, p);
    CHECK(r.confusion.tp == t.tp);
    CHECK(r.confusion.fp == t.fp);
    CHECK(r.confusion.tn == t.tn);
    CHECK(r.confusion.fn == t.fn);
    const double pp = safe(t.tp, t.tp + t.fp), pr = safe(t.tp, t.tp + t.fn);
    const double np = safe(t.tn, t.tn + t.fn), nr = safe(t.tn, t.tn + t.fp);
    const double pf = safe(2 * pp * pr, pp + pr), nf = safe(2 * np * nr, np + nr);
    CHECK(r.phishing.precision == pp);
    CHECK(r.phishing.recall == pr);
    CHECK(r.phishing.f1 == pf);
    CHECK(r.non_phishing.precision == np);
    CHECK(r.non_phishing.recall == nr);
    CHECK(r.non_phishing.f1 == nf);
    CHECK(r.macro_f1 == (pf + nf) / 2);
    CHECK(r.macro_precision == (pp + np) / 2);
    CHECK(r.macro_recall == (pr + nr) / 2);

    std::vector<int> sy(y), sp(p);
    for (auto& v : sy) v = -v;
    for (auto& v : sp) v = -v;
    auto s = classification_report(sy, sp);
    CHECK(s.macro_f1 == doctest::Approx(r.macro_f1).epsilon(1e-15));
    CHECK(s.phishing.f1 == r.non_phishing.f1);
    CHECK(s.non_phishing.f1 == r.phishing.f1);
  }

  TEST_CASE("mean report") {
    const std::vector<int> y{1, -1, 1, -1}, p1{1, -1, -1, -1}, p2{1, 1, 1, -1};
    std::vector<ClassificationReport> rs{classification_report(y, p1), classification_report(y, p2)};
    auto m = mean_report(rs);
    CHECK(m.macro_f1 == doctest::Approx((rs[0].macro_f1 + rs[1].macro_f1) / 2));
    CHECK(m.confusion.total() == 8);
    auto j = to_json(m);
    CHECK(j["macro"].contains("f1"));
  }

  TEST_CASE("score table round trip") {
    std::vector<ScoreRow> rows{{1, 1, "z", 0.5, 0.25, 0.125, 0.3, 17}, {2, 2, "amplitude", 0.1, 0.2, 0.3, 0.4, 0}};
    std::stringstream ss;
    write_score_table(ss, rows);
    auto back = read_score_table(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].false_positives == 17);
    CHECK(back[1].encoder == "amplitude");
    CHECK(back[0].f1 == 0.125);
  }

  TEST_CASE("correlation report") {
    std::vector<MetricsRow> metrics;
    std::vector<ScoreRow> scores;
    for (int c = 1; c <= 5; ++c) {
      for (const char* enc : {"z", "zz"}) {
        metrics.push_back({c, 1, enc, 4, 0.1 * c, 0.05 * c, 0.2 * c});
        ScoreRow s;
        s.circuit_id = c;
        s.layers = 1;
        s.encoder = enc;
        s.f1 = 1.0 - 0.1 * c;
        s.precision = 0.5 + 0.02 * c;
        s.recall = 0.7;
        scores.push_back(s);
      }
    }
    auto rep = correlation_report(metrics, scores);
    CHECK(rep.size() == 2 * 3 * 3);
    for (const auto& e : rep) {
      CHECK(e.n == 5);
      if (e.score == "f1") {
        CHECK(e.defined);
        CHECK(e.r == doctest::Approx(-1.0).epsilon(1e-12));
      }
      if (e.score == "precision") CHECK(e.r == doctest::Approx(1.0).epsilon(1e-12));
      if (e.score == "recall") CHECK_FALSE(e.defined);
    }
    std::ostringstream out;
    write_correlation_table(out, rep);
    CHECK(out.str().find("nan") != std::string::npos);

    std::vector<MetricsRow> two(metrics.begin(), metrics.begin() + 4);
    std::vector<ScoreRow> two_s(scores.begin(), scores.begin() + 4);
    CHECK_THROWS_AS(correlation_report(two, two_s), Error);
  }

  TEST_CASE("shuffled pairing destroys a linear relation") {
    std::vector<double> x(19), y(19);
    for (int i = 0; i < 19; ++i) {
      x[i] = i;
      y[i] = 2.0 * i + 1.0;
    }
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    std::mt19937_64 rng(5);
    std::vector<double> rs;
    for (int t = 0; t < 100; ++t) {
      auto s = y;
      std::shuffle(s.begin(), s.end(), rng);
      rs.push_back(std::abs(pearson(x, s)));
    }
    std::nth_element(rs.begin(), rs.begin() + 50, rs.end());
    CHECK(rs[50] < 0.5);
  }
}
