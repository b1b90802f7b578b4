#include "qens/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/math/special_functions/erf.hpp>

#include "qens/error.hpp"

namespace qens {

const std::array<const char*, kNodeFeatureCount> kNodeFeatureNames{
    "in_degree", "out_degree", "degree", "in_strength", "out_strength", "strength", "neighbors"};

void TransactionGraph::add_edge(std::string from, std::string to, double value) {
  if (!(value >= 0.0)) throw Error(ErrorCategory::validation, "edge value must be non-negative");
  edges.push_back({std::move(from), std::move(to), value});
}

int TransactionGraph::label_of(const std::string& address) const {
  auto it = labels.find(address);
  return it == labels.end() ? -1 : it->second;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& what) {
  throw Error(ErrorCategory::parse, source + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& s, const std::string& source, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    parse_fail(source, line, "not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& source, int line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) parse_fail(source, line, "not a count: '" + s + "'");
  return v;
}

void expect_header(std::istream& in, const std::vector<std::string>& want, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
  if (split_csv(line) != want) {
    std::string w;
    for (const auto& c : want) w += (w.empty() ? "" : ",") + c;
    parse_fail(source, 1, "expected header " + w);
  }
}

}  // namespace

TransactionGraph read_edges(std::istream& in, const std::string& source) {
  TransactionGraph g;
  expect_header(in, {"from", "to", "value"}, source);
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 3) parse_fail(source, line_no, "expected 3 columns");
    if (cells[0].empty() || cells[1].empty()) parse_fail(source, line_no, "empty address");
    const double v = parse_number(cells[2], source, line_no);
    if (v < 0.0) {
      throw Error(ErrorCategory::validation, source + ":" + std::to_string(line_no) + ": negative edge value");
    }
    g.edges.push_back({std::move(cells[0]), std::move(cells[1]), v});
  }
  return g;
}

void read_labels(std::istream& in, TransactionGraph& g, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) return;  // empty file: nothing labelled
  if (split_csv(line) != std::vector<std::string>{"address", "label"}) parse_fail(source, 1, "expected header address,label");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 2 || cells[0].empty()) parse_fail(source, line_no, "expected address,label");
    int label;
    if (cells[1] == "1")
      label = 1;
    else if (cells[1] == "0")
      label = -1;
    else
      parse_fail(source, line_no, "label must be 0 or 1");
    auto [it, inserted] = g.labels.emplace(cells[0], label);
    if (!inserted && it->second != label) {
      throw Error(ErrorCategory::validation, source + ":" + std::to_string(line_no) + ": conflicting labels for " + cells[0]);
    }
  }
}

TransactionGraph ingest_edges(const std::filesystem::path& edges_path, const std::filesystem::path& labels_path) {
  std::ifstream e(edges_path);
  if (!e) throw Error(ErrorCategory::io, "cannot read " + edges_path.string());
  TransactionGraph g = read_edges(e, edges_path.string());
  if (!labels_path.empty()) {
    std::ifstream l(labels_path);
    if (!l) throw Error(ErrorCategory::io, "cannot read " + labels_path.string());
    read_labels(l, g, labels_path.string());
  }
  return g;
}

std::array<double, kNodeFeatureCount> NodeFeatures::vector() const {
  return {static_cast<double>(in_degree), static_cast<double>(out_degree), static_cast<double>(degree),
          in_strength,                    out_strength,                    strength,
          static_cast<double>(neighbors)};
}

bool NodeFeatures::identities_hold() const noexcept {
  return degree == in_degree + out_degree && strength == in_strength + out_strength && neighbors <= degree;
}

std::size_t NodeFeatureTable::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const auto& r) { return r.label == label; }));
}

Dataset NodeFeatureTable::to_dataset() const {
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  return to_dataset(all);
}

Dataset NodeFeatureTable::to_dataset(std::span<const std::size_t> idx) const {
  Dataset d;
  for (std::size_t i : idx) {
    const auto& r = rows.at(i);
    auto v = r.vector();
    d.x.emplace_back(v.begin(), v.end());
    d.y.push_back(r.label);
    d.ids.push_back(r.address);
  }
  return d;
}

namespace {

double sorted_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

NodeFeatureTable extract_features(const TransactionGraph& g) {
  struct Acc {
    std::vector<double> in_values, out_values;
    std::set<std::string> neighbors;
  };
  std::map<std::string, Acc> acc;
  for (const auto& e : g.edges) {
    auto& src = acc[e.from];
    auto& dst = acc[e.to];
    src.out_values.push_back(e.value);
    dst.in_values.push_back(e.value);
    if (e.from != e.to) {
      src.neighbors.insert(e.to);
      dst.neighbors.insert(e.from);
    }
  }
  for (const auto& [address, label] : g.labels) acc.try_emplace(address);

  NodeFeatureTable t;
  t.rows.reserve(acc.size());
  for (auto& [address, a] : acc) {
    NodeFeatures f;
    f.address = address;
    f.in_degree = a.in_values.size();
    f.out_degree = a.out_values.size();
    f.degree = f.in_degree + f.out_degree;
    f.in_strength = sorted_sum(a.in_values);
    f.out_strength = sorted_sum(a.out_values);
    f.strength = f.in_strength + f.out_strength;
    f.neighbors = a.neighbors.size();
    f.label = g.label_of(address);
    t.rows.push_back(std::move(f));
  }
  return t;
}

NodeFeatureTable table_from_dataset(const Dataset& d) {
  d.validate();
  if (!d.empty() && d.n_features() != kNodeFeatureCount) {
    throw Error(ErrorCategory::input, "feature table rows need exactly 7 features");
  }
  auto count = [](double v) {
    if (v < 0.0 || v != std::floor(v)) throw Error(ErrorCategory::input, "degree columns must be whole numbers");
    return static_cast<std::uint64_t>(v);
  };
  NodeFeatureTable t;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& x = d.x[i];
    NodeFeatures f;
    f.address = i < d.ids.size() ? d.ids[i] : "row" + std::to_string(i);
    f.in_degree = count(x[0]);
    f.out_degree = count(x[1]);
    f.degree = count(x[2]);
    f.in_strength = x[3];
    f.out_strength = x[4];
    f.strength = x[5];
    f.neighbors = count(x[6]);
    f.label = d.y[i];
    t.rows.push_back(std::move(f));
  }
  return t;
}

void write_feature_table(std::ostream& out, const NodeFeatureTable& t) {
  out << "address";
  for (const char* n : kNodeFeatureNames) out << ',' << n;
  out << ",label\n";
  out.precision(17);
  for (const auto& r : t.rows) {
    out << r.address << ',' << r.in_degree << ',' << r.out_degree << ',' << r.degree << ',' << r.in_strength << ','
        << r.out_strength << ',' << r.strength << ',' << r.neighbors << ',' << (r.label > 0 ? 1 : 0) << '\n';
  }
}

NodeFeatureTable read_feature_table(std::istream& in, const std::string& source) {
  std::vector<std::string> header{"address"};
  for (const char* n : kNodeFeatureNames) header.emplace_back(n);
  header.emplace_back("label");
  expect_header(in, header, source);
  NodeFeatureTable t;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto c = split_csv(line);
    if (c.size() != header.size()) parse_fail(source, line_no, "expected " + std::to_string(header.size()) + " columns");
    NodeFeatures f;
    f.address = c[0];
    f.in_degree = parse_count(c[1], source, line_no);
    f.out_degree = parse_count(c[2], source, line_no);
    f.degree = parse_count(c[3], source, line_no);
    f.in_strength = parse_number(c[4], source, line_no);
    f.out_strength = parse_number(c[5], source, line_no);
    f.strength = parse_number(c[6], source, line_no);
    f.neighbors = parse_count(c[7], source, line_no);
    if (c[8] != "0" && c[8] != "1") parse_fail(source, line_no, "label must be 0 or 1");
    f.label = c[8] == "1" ? 1 : -1;
    if (f.degree != f.in_degree + f.out_degree || f.neighbors > f.degree) {
      throw Error(ErrorCategory::validation, source + ":" + std::to_string(line_no) + ": feature identities violated");
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

void save_feature_table(const NodeFeatureTable& t, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  write_feature_table(out, t);
}

NodeFeatureTable load_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
  return read_feature_table(in, path.string());
}

Split sample_split(const NodeFeatureTable& table, const SplitSpec& spec) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < table.rows.size(); ++i) (table.rows[i].label > 0 ? pos : neg).push_back(i);
  if (pos.size() < kMinPhishingPool) {
    throw Error(ErrorCategory::data, "phishing pool has " + std::to_string(pos.size()) + " rows, need at least " +
                                         std::to_string(kMinPhishingPool));
  }

  Split out;
  SplitSpec eff = spec;
  const double need_p = static_cast<double>(spec.train_positive + spec.test_positive);
  const double need_n = static_cast<double>(spec.train_negative + spec.test_negative);
  double s = 1.0;
  if (need_p > 0) s = std::min(s, static_cast<double>(pos.size()) / need_p);
  if (need_n > 0) s = std::min(s, static_cast<double>(neg.size()) / need_n);
  if (s < 1.0) {
    // Scale off the test positives and rebuild the rest from the requested
    // ratios so they survive the rounding.
    auto scaled = [s](std::size_t v) { return static_cast<std::size_t>(std::floor(static_cast<double>(v) * s)); };
    auto ratio_of = [](std::size_t base, std::size_t num, std::size_t den) {
      return static_cast<std::size_t>(std::llround(static_cast<double>(base) * static_cast<double>(num) / static_cast<double>(den)));
    };
    eff.test_positive = scaled(spec.test_positive);
    eff.train_positive = spec.test_positive > 0 ? ratio_of(eff.test_positive, spec.train_positive, spec.test_positive)
                                                : scaled(spec.train_positive);
    eff.train_negative = spec.train_positive > 0 ? ratio_of(eff.train_positive, spec.train_negative, spec.train_positive)
                                                 : scaled(spec.train_negative);
    eff.test_negative = spec.test_positive > 0 ? ratio_of(eff.test_positive, spec.test_negative, spec.test_positive)
                                               : scaled(spec.test_negative);
    eff.train_positive = std::min(eff.train_positive, pos.size());
    eff.test_positive = std::min(eff.test_positive, pos.size() - eff.train_positive);
    eff.train_negative = std::min(eff.train_negative, neg.size());
    eff.test_negative = std::min(eff.test_negative, neg.size() - eff.train_negative);
    std::ostringstream w;
    w << "pool of " << pos.size() << " phishing / " << neg.size() << " non-phishing is below the requested split; using "
      << eff.train_positive << "/" << eff.train_negative << " train and " << eff.test_positive << "/"
      << eff.test_negative << " test";
    out.warnings.push_back(w.str());
  }
  if (eff.train_positive == 0 || eff.train_negative == 0) throw Error(ErrorCategory::data, "split leaves an empty training class");

  std::mt19937_64 rng(spec.seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  auto slice = [](const std::vector<std::size_t>& v, std::size_t from, std::size_t count) {
    return std::vector<std::size_t>(v.begin() + static_cast<std::ptrdiff_t>(from),
                                    v.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  auto sorted_join = [](std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto train_idx = sorted_join(slice(pos, 0, eff.train_positive), slice(neg, 0, eff.train_negative));
  const auto test_idx = sorted_join(slice(pos, eff.train_positive, eff.test_positive),
                                    slice(neg, eff.train_negative, eff.test_negative));
  const std::size_t used_p = eff.train_positive + eff.test_positive;
  const std::size_t used_n = eff.train_negative + eff.test_negative;
  const auto reserve_idx =
      sorted_join(slice(pos, used_p, pos.size() - used_p), slice(neg, used_n, neg.size() - used_n));

  out.train = table.to_dataset(train_idx);
  out.test = table.to_dataset(test_idx);
  out.reserve = table.to_dataset(reserve_idx);
  out.effective = eff;
  return out;
}

ClassMoments phishing_moments() noexcept {
  return {{31.3956, 20.4905, 78.6105, 86.7360}, {180.9905, 96.8388, 691.2912, 860.1017}};
}

ClassMoments non_phishing_moments() noexcept {
  return {{4.5020, 4.6438, 72.5328, 9.2551}, {154.3505, 101.3266, 4409.6850, 281.0234}};
}

namespace {

struct LogNormal {
  double mu, sigma;
  LogNormal(double mean, double sd) {
    const double s2 = std::log1p(sd * sd / (mean * mean));
    sigma = std::sqrt(s2);
    mu = std::log(mean) - 0.5 * s2;
  }
};

/// n log-normal draws, one per equal-probability stratum, in shuffled order.
std::vector<double> stratified_draws(std::size_t n, const LogNormal& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = (static_cast<double>(i) + u(rng)) / static_cast<double>(n);
    q = std::clamp(q, 1e-300, 1.0 - 1e-16);
    const double z = std::sqrt(2.0) * boost::math::erf_inv(2.0 * q - 1.0);
    out[i] = std::exp(d.mu + d.sigma * z);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

void synth_class(NodeFeatureTable& t, std::size_t n, int label, const ClassMoments& m, std::mt19937_64& rng) {
  std::array<std::vector<double>, 4> cols;
  for (int k = 0; k < 4; ++k) cols[k] = stratified_draws(n, LogNormal(m.mean[k], m.stdev[k]), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto to_count = [&](double v) {
    const double f = std::floor(v);
    return static_cast<std::uint64_t>(f) + (u(rng) < v - f ? 1 : 0);
  };
  const char* prefix = label > 0 ? "p" : "n";
  for (std::size_t i = 0; i < n; ++i) {
    NodeFeatures f;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%09zu", prefix, i);
    f.address = buf;
    f.in_degree = to_count(cols[0][i]);
    f.out_degree = to_count(cols[1][i]);
    f.in_strength = cols[2][i];
    f.out_strength = cols[3][i];
    f.degree = f.in_degree + f.out_degree;
    f.strength = f.in_strength + f.out_strength;
    if (f.degree > 0) f.neighbors = std::uniform_int_distribution<std::uint64_t>(1, f.degree)(rng);
    f.label = label;
    t.rows.push_back(std::move(f));
  }
}

}  // namespace

NodeFeatureTable synth_dataset(std::size_t n_phishing, std::size_t n_non_phishing, std::uint64_t seed) {
  NodeFeatureTable t;
  t.rows.reserve(n_phishing + n_non_phishing);
  std::mt19937_64 rng_p(mix_seed(seed, 1));
  std::mt19937_64 rng_n(mix_seed(seed, 2));
  synth_class(t, n_non_phishing, -1, non_phishing_moments(), rng_n);
  synth_class(t, n_phishing, 1, phishing_moments(), rng_p);
  return t;
}

}  // namespace qens
