#include "qens/circuit_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "qens/error.hpp"
#include "qens/parallel.hpp"

namespace qens {

namespace {

constexpr double kEmptyBinMass = 1e-12;

std::vector<double> draw_angles(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> v(static_cast<std::size_t>(count));
  for (auto& a : v) a = angle(rng);
  return v;
}

}  // namespace

double haar_bin_mass(double lo, double hi, int n_qubits) {
  const double n_minus_1 = std::ldexp(1.0, n_qubits) - 1.0;
  return std::pow(1.0 - lo, n_minus_1) - std::pow(1.0 - hi, n_minus_1);
}

ExpressibilityEstimate expressibility(const CircuitSpec& ansatz, int n_pairs, int n_bins,
                                      std::uint64_t seed) {
  if (ansatz.n_params() < 1) {
    throw Error(ErrorCategory::degenerate,
                "circuit has no parameters; every sampled fidelity is 1");
  }
  if (n_pairs < 1 || n_bins < 1) throw Error(ErrorCategory::parameter, "n_pairs and n_bins must be positive");

  // Draw all parameters up front so results are independent of threading.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> first(n_pairs), second(n_pairs);
  for (int i = 0; i < n_pairs; ++i) {
    first[i] = draw_angles(ansatz.n_params(), rng);
    second[i] = draw_angles(ansatz.n_params(), rng);
  }
  std::vector<double> fid(static_cast<std::size_t>(n_pairs));
  const StateVector init = zero_state(ansatz.n_qubits());
  parallel_for(fid.size(), [&](std::size_t i) {
    fid[i] = fidelity(apply_circuit(init, ansatz, first[i]), apply_circuit(init, ansatz, second[i]));
  });

  std::vector<double> hist(static_cast<std::size_t>(n_bins), 0.0);
  for (double f : fid) {
    const int b = std::clamp(static_cast<int>(f * n_bins), 0, n_bins - 1);
    hist[b] += 1.0;
  }
  double kl = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    double p = hist[b] / n_pairs;
    if (p == 0.0) p = kEmptyBinMass;
    // Floor keeps the divergence finite when the Haar tail underflows.
    const double q = std::max(haar_bin_mass(double(b) / n_bins, double(b + 1) / n_bins, ansatz.n_qubits()),
                              1e-300);
    kl += p * std::log(p / q);
  }
  return {std::max(kl, 0.0), n_pairs, n_bins};
}

double purity(const Eigen::Matrix2cd& rho) { return (rho * rho).trace().real(); }

double von_neumann_entropy_bits(const Eigen::Matrix2cd& rho) {
  const double a = rho(0, 0).real(), d = rho(1, 1).real();
  const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) + 4.0 * std::norm(rho(0, 1))));
  double s = 0.0;
  for (double ev : {(a + d + disc) / 2.0, (a + d - disc) / 2.0}) {
    ev = std::clamp(ev, 0.0, 1.0);
    if (ev > 0.0) s -= ev * std::log2(ev);
  }
  return s;
}

EntanglingCapacityEstimate entangling_capacity(const CircuitSpec& ansatz, int n_param_samples,
                                               std::uint64_t seed) {
  const int n = ansatz.n_qubits();
  if (n < 2) throw Error(ErrorCategory::configuration, "entangling capacity needs at least 2 qubits");
  if (n_param_samples < 1) throw Error(ErrorCategory::parameter, "n_param_samples must be positive");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> params(n_param_samples);
  for (auto& p : params) p = draw_angles(ansatz.n_params(), rng);

  std::vector<double> mw(params.size()), vn(params.size());
  const StateVector init = zero_state(n);
  parallel_for(params.size(), [&](std::size_t s) {
    const StateVector psi = apply_circuit(init, ansatz, params[s]);
    double pur = 0.0, ent = 0.0;
    for (int k = 0; k < n; ++k) {
      const Eigen::Matrix2cd rho = reduced_density_matrix(psi, k);
      pur += purity(rho);
      ent += von_neumann_entropy_bits(rho);
    }
    mw[s] = std::clamp(2.0 * (1.0 - pur / n), 0.0, 1.0);
    vn[s] = ent / n;
  });

  // Fixed-order reduction.
  EntanglingCapacityEstimate est;
  est.n_param_samples = n_param_samples;
  for (std::size_t s = 0; s < params.size(); ++s) {
    est.meyer_wallach += mw[s];
    est.von_neumann_bits += vn[s];
  }
  est.meyer_wallach /= n_param_samples;
  est.von_neumann_bits /= n_param_samples;
  return est;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCategory::input, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCategory::input, "correlation needs at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCategory::degenerate, "correlation undefined for a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void write_metrics_table(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "circuit_id,layers,encoder,n_qubits,expressibility_kl,meyer_wallach,von_neumann\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.circuit_id << ',' << r.layers << ',' << r.encoder << ',' << r.n_qubits << ','
        << r.expressibility_kl << ',' << r.meyer_wallach << ',' << r.von_neumann << '\n';
  }
}

std::vector<MetricsRow> read_metrics_table(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(in, line);  // header
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricsRow r;
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw Error(ErrorCategory::parse, "metrics table line " + std::to_string(line_no) + ": expected 7 columns");
    }
    try {
      r.circuit_id = std::stoi(cells[0]);
      r.layers = std::stoi(cells[1]);
      r.encoder = cells[2];
      r.n_qubits = std::stoi(cells[3]);
      r.expressibility_kl = std::stod(cells[4]);
      r.meyer_wallach = std::stod(cells[5]);
      r.von_neumann = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::parse, "metrics table line " + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace qens
