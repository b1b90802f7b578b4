#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qens/dataset.hpp"

namespace qens {

struct Edge {
  std::string from;
  std::string to;
  double value = 0.0;  // ether
};

/// Directed multigraph with optional phishing labels (+1 / -1).
struct TransactionGraph {
  std::vector<Edge> edges;
  std::map<std::string, int> labels;

  void add_edge(std::string from, std::string to, double value);
  /// Labels default to -1 (non-phishing) when absent.
  int label_of(const std::string& address) const;
};

/// Edge file with header `from,to,value`; optional labels file with header
/// `address,label`, label 1 = phishing, 0 = not.
TransactionGraph read_edges(std::istream& edges, const std::string& source = "edges");
void read_labels(std::istream& labels, TransactionGraph& g, const std::string& source = "labels");
TransactionGraph ingest_edges(const std::filesystem::path& edges_path, const std::filesystem::path& labels_path = {});

inline constexpr std::size_t kNodeFeatureCount = 7;
extern const std::array<const char*, kNodeFeatureCount> kNodeFeatureNames;

struct NodeFeatures {
  std::string address;
  std::uint64_t in_degree = 0;
  std::uint64_t out_degree = 0;
  std::uint64_t degree = 0;
  double in_strength = 0.0;
  double out_strength = 0.0;
  double strength = 0.0;
  std::uint64_t neighbors = 0;
  int label = -1;

  std::array<double, kNodeFeatureCount> vector() const;
  bool identities_hold() const noexcept;
  bool operator==(const NodeFeatures&) const = default;
};

struct NodeFeatureTable {
  std::vector<NodeFeatures> rows;

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t count_label(int label) const;
  Dataset to_dataset() const;
  Dataset to_dataset(std::span<const std::size_t> rows) const;
};

/// One row per address seen in an edge or a label, sorted by address.
/// Neighbours ignore edge direction; self-loops add to degree and strength
/// but never to neighbours.
NodeFeatureTable extract_features(const TransactionGraph& g);

/// Inverse of to_dataset for rows carrying the seven node features.
NodeFeatureTable table_from_dataset(const Dataset& d);

void write_feature_table(std::ostream& out, const NodeFeatureTable& t);
NodeFeatureTable read_feature_table(std::istream& in, const std::string& source = "features");
void save_feature_table(const NodeFeatureTable& t, const std::filesystem::path& path);
NodeFeatureTable load_feature_table(const std::filesystem::path& path);

struct SplitSpec {
  std::size_t train_positive = 160;
  std::size_t train_negative = 160;
  std::size_t test_positive = 1000;
  std::size_t test_negative = 10000;
  std::uint64_t seed = 1;
};

struct Split {
  Dataset train;
  Dataset test;
  Dataset reserve;  // rows used by neither side
  std::vector<std::string> warnings;
  SplitSpec effective;  // counts after any downscale
};

inline constexpr std::size_t kMinPhishingPool = 20;

/// Disjoint stratified split, deterministic per seed. A pool smaller than
/// the requested counts is scaled down proportionally, with a warning.
Split sample_split(const NodeFeatureTable& table, const SplitSpec& spec);

struct ClassMoments {
  std::array<double, 4> mean;  // in_degree, out_degree, in_strength, out_strength
  std::array<double, 4> stdev;
};

ClassMoments phishing_moments() noexcept;
ClassMoments non_phishing_moments() noexcept;

/// Log-normal draws matched to the per-class moments, stratified on the
/// quantile axis per column. Degrees are rounded stochastically so their
/// means are preserved.
NodeFeatureTable synth_dataset(std::size_t n_phishing, std::size_t n_non_phishing, std::uint64_t seed);

}  // namespace qens
