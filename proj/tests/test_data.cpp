#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "qens/data.hpp"
#include "qens/error.hpp"

using namespace qens;

namespace {

TransactionGraph toy() {
  std::istringstream e("from,to,value\nA,B,2\nA,B,3\n");
  return read_edges(e);
}

std::array<double, 7> vec(std::initializer_list<double> v) {
  std::array<double, 7> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

ErrorCategory category_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an error");
  return ErrorCategory::io;
}

std::set<std::string> ids(const Dataset& d) { return {d.ids.begin(), d.ids.end()}; }

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("toy multigraph") {
    auto g = toy();
    CHECK(g.edges.size() == 2);
    auto t = extract_features(g);
    REQUIRE(t.size() == 2);
    CHECK(t.rows[0].address == "A");
    CHECK(t.rows[0].vector() == vec({0, 2, 2, 0, 5, 5, 1}));
    CHECK(t.rows[1].address == "B");
    CHECK(t.rows[1].vector() == vec({2, 0, 2, 5, 0, 5, 1}));
    CHECK(t.rows[0].label == -1);
  }

  TEST_CASE("labels") {
    auto g = toy();
    std::istringstream empty("address,label\n");
    read_labels(empty, g);
    CHECK(g.label_of("A") == -1);
    CHECK(g.label_of("B") == -1);

    std::istringstream l("address,label\nA,1\nC,0\nA,1\n");
    read_labels(l, g);
    CHECK(g.label_of("A") == 1);
    auto t = extract_features(g);
    REQUIRE(t.size() == 3);
    CHECK(t.rows[2].address == "C");
    CHECK(t.rows[2].vector() == vec({0, 0, 0, 0, 0, 0, 0}));
    CHECK(t.count_label(1) == 1);

    std::istringstream conflict("address,label\nB,1\nB,0\n");
    CHECK(category_of([&] { read_labels(conflict, g); }) == ErrorCategory::validation);
    std::istringstream bad_label("address,label\nB,2\n");
    CHECK_THROWS_AS(read_labels(bad_label, g), Error);
  }

  TEST_CASE("edge parse errors carry line numbers") {
    std::istringstream bad("from,to,value\nA,B,1\nA,B\n");
    try {
      read_edges(bad, "edges.csv");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::parse);
      CHECK(std::string(e.what()).find("edges.csv:3") != std::string::npos);
    }
    std::istringstream nan("from,to,value\nA,B,abc\n");
    CHECK(category_of([&] { read_edges(nan); }) == ErrorCategory::parse);
    std::istringstream header("src,dst,amount\nA,B,1\n");
    CHECK(category_of([&] { read_edges(header); }) == ErrorCategory::parse);
    std::istringstream negative("from,to,value\nA,B,-1\n");
    CHECK(category_of([&] { read_edges(negative); }) == ErrorCategory::validation);
  }

  TEST_CASE("self loops and neighbours") {
    std::istringstream e("from,to,value\nA,A,1\nA,B,2\nB,A,4\nC,A,1\n");
    auto t = extract_features(read_edges(e));
    const auto& a = t.rows[0];
    CHECK(a.in_degree == 3);
    CHECK(a.out_degree == 2);
    CHECK(a.degree == 5);
    CHECK(a.in_strength == 6.0);
    CHECK(a.out_strength == 3.0);
    CHECK(a.strength == 9.0);
    CHECK(a.neighbors == 2);
    for (const auto& r : t.rows) CHECK(r.identities_hold());
  }

  TEST_CASE("ingestion is order independent") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> node(0, 30);
    std::uniform_real_distribution<double> val(0, 50);
    std::vector<std::string> lines;
    for (int i = 0; i < 300; ++i) {
      std::ostringstream s;
      s << "n" << node(rng) << ",n" << node(rng) << "," << val(rng);
      lines.push_back(s.str());
    }
    auto build = [&](const std::vector<std::string>& ls) {
      std::string text = "from,to,value\n";
      for (const auto& l : ls) text += l + "\n";
      std::istringstream in(text);
      return extract_features(read_edges(in));
    };
    auto a = build(lines);
    std::shuffle(lines.begin(), lines.end(), rng);
    auto b = build(lines);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.rows[i] == b.rows[i]);
      CHECK(a.rows[i].identities_hold());
    }
  }

  TEST_CASE("feature table round trip") {
    auto t = synth_dataset(20, 50, 2);
    std::stringstream ss;
    write_feature_table(ss, t);
    auto back = read_feature_table(ss);
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.rows[i] == t.rows[i]);
    auto d = t.to_dataset();
    CHECK(d.n_features() == 7);
    auto t2 = table_from_dataset(d);
    CHECK(t2.rows[3] == t.rows[3]);
    std::stringstream broken("address,in_degree,out_degree,degree,in_strength,out_strength,strength,neighbors,label\n"
                             "x,1,1,5,0,0,0,1,0\n");
    CHECK_THROWS_AS(read_feature_table(broken), Error);
  }

  TEST_CASE("full pool split") {
    auto t = synth_dataset(1165, 20000, 1);
    SplitSpec spec;
    spec.seed = 9;
    auto s = sample_split(t, spec);
    CHECK(s.train.count_label(1) == 160);
    CHECK(s.train.count_label(-1) == 160);
    CHECK(s.test.count_label(1) == 1000);
    CHECK(s.test.count_label(-1) == 10000);
    CHECK(s.warnings.empty());
    CHECK(s.train.size() + s.test.size() + s.reserve.size() == t.size());
    auto tr = ids(s.train), te = ids(s.test), re = ids(s.reserve);
    for (const auto& id : tr) {
      CHECK(te.count(id) == 0);
      CHECK(re.count(id) == 0);
    }
    for (const auto& id : te) CHECK(re.count(id) == 0);

    auto again = sample_split(t, spec);
    CHECK(again.train.ids == s.train.ids);
    CHECK(again.test.ids == s.test.ids);
    spec.seed = 10;
    CHECK(sample_split(t, spec).train.ids != s.train.ids);
  }

  TEST_CASE("small pool downscales proportionally") {
    auto t = synth_dataset(500, 20000, 2);
    auto s = sample_split(t, SplitSpec{});
    CHECK_FALSE(s.warnings.empty());
    const double train_p = s.train.count_label(1), test_p = s.test.count_label(1);
    CHECK(train_p == 69);
    CHECK(test_p == 431);
    CHECK(s.train.count_label(-1) == 69);
    CHECK(s.test.count_label(-1) == 4310);
    CHECK(std::abs(train_p / test_p - 0.16) / 0.16 < 0.01);
    CHECK(train_p + test_p <= 500);

    auto tiny = synth_dataset(10, 1000, 3);
    CHECK(category_of([&] { sample_split(tiny, SplitSpec{}); }) == ErrorCategory::data);
  }

  TEST_CASE("synthetic marginals match the class moments") {
    const std::size_t n = 100000;
    auto t = synth_dataset(n, n, 2024);
    std::array<double, 4> sum_p{}, sum_n{};
    for (const auto& r : t.rows) {
      CHECK(r.identities_hold());
      auto& s = r.label == 1 ? sum_p : sum_n;
      s[0] += r.in_degree;
      s[1] += r.out_degree;
      s[2] += r.in_strength;
      s[3] += r.out_strength;
    }
    const auto mp = phishing_moments(), mn = non_phishing_moments();
    for (int k = 0; k < 4; ++k) {
      CAPTURE(k);
      CHECK(std::abs(sum_p[k] / n - mp.mean[k]) / mp.mean[k] < 0.10);
      CHECK(std::abs(sum_n[k] / n - mn.mean[k]) / mn.mean[k] < 0.10);
    }
    CHECK(mp.mean[0] == doctest::Approx(31.3956));
    CHECK(mp.stdev[0] == doctest::Approx(180.9905));
    CHECK(mn.mean[0] == doctest::Approx(4.5020));
    CHECK(mn.stdev[0] == doctest::Approx(154.3505));
    CHECK(mp.mean[2] + mp.mean[3] == doctest::Approx(165.3465).epsilon(1e-3));
    CHECK(mn.mean[3] == doctest::Approx(9.2551));
  }

  TEST_CASE("synthesis is deterministic") {
    auto a = synth_dataset(50, 50, 8), b = synth_dataset(50, 50, 8);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.rows[i] == b.rows[i]);
  }
}
