#include "qens/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qens/error.hpp"

namespace qens {

namespace {

constexpr Complex kI{0.0, 1.0};

std::size_t bit(int q) { return std::size_t{1} << q; }

void check_qubits(const Gate& g, int n_qubits) {
  const int arity = gate_arity(g.kind);
  if (static_cast<int>(g.qubits.size()) != arity) {
    throw Error(ErrorCategory::arity, std::string(gate_name(g.kind)) + " expects " +
                                          std::to_string(arity) + " qubit(s)");
  }
  for (int q : g.qubits) {
    if (q < 0 || q >= n_qubits) {
      throw Error(ErrorCategory::index, "qubit " + std::to_string(q) +
                                            " outside register of width " +
                                            std::to_string(n_qubits));
    }
  }
  if (arity == 2 && g.qubits[0] == g.qubits[1]) {
    throw Error(ErrorCategory::index, "two-qubit gate on a single wire");
  }
}

double resolve_angle(const Gate& g, std::span<const double> params) {
  if (!g.slot) return g.angle;
  const auto s = static_cast<std::size_t>(*g.slot);
  if (s >= params.size()) {
    throw Error(ErrorCategory::binding, "parameter slot " + std::to_string(s) + " is unbound");
  }
  return params[s];
}

void apply_1q(std::span<Complex> a, int target, const Eigen::Matrix2cd& u) {
  const std::size_t tb = bit(target);
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i & tb) continue;
    const std::size_t j = i | tb;
    const Complex a0 = a[i], a1 = a[j];
    a[i] = u00 * a0 + u01 * a1;
    a[j] = u10 * a0 + u11 * a1;
  }
}

void apply_controlled_1q(std::span<Complex> a, int control, int target,
                         const Eigen::Matrix2cd& u) {
  const std::size_t cb = bit(control), tb = bit(target);
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((i & tb) || !(i & cb)) continue;
    const std::size_t j = i | tb;
    const Complex a0 = a[i], a1 = a[j];
    a[i] = u00 * a0 + u01 * a1;
    a[j] = u10 * a0 + u11 * a1;
  }
}

}  // namespace

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw Error(ErrorCategory::capacity,
                "register width " + std::to_string(n_qubits) + " outside [1, 20]");
  }
  if (amps_.size() != bit(n_qubits)) {
    throw Error(ErrorCategory::input, "amplitude count does not match 2^n_qubits");
  }
}

double StateVector::norm_squared() const noexcept {
  double s = 0.0;
  for (const auto& c : amps_) s += std::norm(c);
  return s;
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCategory::input, "state widths differ");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

std::string_view gate_name(GateKind k) noexcept {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::Z: return "Z";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CRX: return "CRX";
    case GateKind::CRZ: return "CRZ";
    case GateKind::P: return "P";
    case GateKind::RZZ: return "RZZ";
  }
  return "?";
}

std::optional<GateKind> parse_gate_kind(std::string_view name) noexcept {
  static constexpr GateKind all[] = {GateKind::H,  GateKind::X,    GateKind::RX,  GateKind::RY,
                                     GateKind::RZ, GateKind::Z,    GateKind::CZ,  GateKind::CNOT,
                                     GateKind::CRX, GateKind::CRZ, GateKind::P,   GateKind::RZZ};
  for (GateKind k : all) {
    if (gate_name(k) == name) return k;
  }
  return std::nullopt;
}

int gate_arity(GateKind k) noexcept {
  switch (k) {
    case GateKind::CZ:
    case GateKind::CNOT:
    case GateKind::CRX:
    case GateKind::CRZ:
    case GateKind::RZZ:
      return 2;
    default:
      return 1;
  }
}

bool gate_is_parametric(GateKind k) noexcept {
  switch (k) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CRX:
    case GateKind::CRZ:
    case GateKind::P:
    case GateKind::RZZ:
      return true;
    default:
      return false;
  }
}

bool gate_is_self_inverse(GateKind k) noexcept { return !gate_is_parametric(k); }

CircuitSpec::CircuitSpec(int n_qubits, int n_params) : n_qubits_(n_qubits), n_params_(n_params) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw Error(ErrorCategory::capacity,
                "register width " + std::to_string(n_qubits) + " outside [1, 20]");
  }
  if (n_params < 0) throw Error(ErrorCategory::binding, "negative parameter count");
}

CircuitSpec& CircuitSpec::add(Gate g) {
  check_qubits(g, n_qubits_);
  if (g.slot) {
    if (!gate_is_parametric(g.kind)) {
      throw Error(ErrorCategory::binding, std::string(gate_name(g.kind)) + " takes no angle");
    }
    if (*g.slot < 0) throw Error(ErrorCategory::binding, "negative parameter slot");
    n_params_ = std::max(n_params_, *g.slot + 1);
  }
  gates_.push_back(std::move(g));
  return *this;
}

CircuitSpec& CircuitSpec::add(GateKind kind, std::vector<int> qubits, double angle) {
  return add(Gate{kind, std::move(qubits), angle, std::nullopt});
}

CircuitSpec& CircuitSpec::add_param(GateKind kind, std::vector<int> qubits, int slot) {
  return add(Gate{kind, std::move(qubits), 0.0, slot});
}

CircuitSpec& CircuitSpec::append(const CircuitSpec& other) {
  if (other.n_qubits_ != n_qubits_) {
    throw Error(ErrorCategory::configuration, "appending circuits of different widths");
  }
  const int offset = n_params_;
  for (Gate g : other.gates_) {
    if (g.slot) *g.slot += offset;
    gates_.push_back(std::move(g));
  }
  n_params_ = offset + other.n_params_;
  return *this;
}

CircuitSpec CircuitSpec::bind(std::span<const double> params) const {
  if (static_cast<int>(params.size()) != n_params_) {
    throw Error(ErrorCategory::binding, "expected " + std::to_string(n_params_) +
                                            " parameters, got " + std::to_string(params.size()));
  }
  CircuitSpec out(n_qubits_, 0);
  out.gates_.reserve(gates_.size());
  for (Gate g : gates_) {
    if (g.slot) {
      g.angle = params[static_cast<std::size_t>(*g.slot)];
      g.slot.reset();
    }
    out.gates_.push_back(std::move(g));
  }
  return out;
}

CircuitSpec CircuitSpec::inverse() const {
  CircuitSpec out(n_qubits_, n_params_);
  out.gates_.assign(gates_.rbegin(), gates_.rend());
  for (Gate& g : out.gates_) {
    if (gate_is_parametric(g.kind)) g.angle = -g.angle;
  }
  return out;
}

StateVector zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw Error(ErrorCategory::capacity,
                "register width " + std::to_string(n_qubits) + " outside [1, 20]");
  }
  std::vector<Complex> amps(bit(n_qubits), Complex{0.0, 0.0});
  amps[0] = 1.0;
  return StateVector(n_qubits, std::move(amps));
}

Eigen::Matrix2cd single_qubit_matrix(GateKind k, double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd m;
  switch (k) {
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::X:
    case GateKind::CNOT: m << 0, 1, 1, 0; break;
    case GateKind::Z:
    case GateKind::CZ: m << 1, 0, 0, -1; break;
    case GateKind::RX:
    case GateKind::CRX: m << c, -kI * s, -kI * s, c; break;
    case GateKind::RY: m << c, -s, s, c; break;
    case GateKind::RZ:
    case GateKind::CRZ: m << std::exp(-kI * (angle / 2)), 0, 0, std::exp(kI * (angle / 2)); break;
    case GateKind::P: m << 1, 0, 0, std::exp(kI * angle); break;
    case GateKind::RZZ:
      throw Error(ErrorCategory::arity, "RZZ has no single-qubit block");
  }
  return m;
}

Eigen::MatrixXcd gate_matrix(const Gate& g) {
  if (gate_arity(g.kind) == 1) return single_qubit_matrix(g.kind, g.angle);
  // Local ordering: bit 0 = qubits[0], bit 1 = qubits[1].
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
  if (g.kind == GateKind::RZZ) {
    for (int i = 0; i < 4; ++i) {
      const int parity = (i & 1) ^ ((i >> 1) & 1);
      m(i, i) = std::exp(kI * (parity ? g.angle / 2 : -g.angle / 2));
    }
    return m;
  }
  // Controlled block acts on indices with the control bit (bit 0) set: 1 and 3.
  const Eigen::Matrix2cd u = single_qubit_matrix(g.kind, g.angle);
  m(1, 1) = u(0, 0);
  m(1, 3) = u(0, 1);
  m(3, 1) = u(1, 0);
  m(3, 3) = u(1, 1);
  return m;
}

void apply_gate(StateVector& state, const Gate& g, std::span<const double> params) {
  check_qubits(g, state.n_qubits());
  const double angle = gate_is_parametric(g.kind) ? resolve_angle(g, params) : 0.0;
  auto a = state.amplitudes();
  switch (g.kind) {
    case GateKind::Z: {
      const std::size_t tb = bit(g.qubits[0]);
      for (std::size_t i = 0; i < a.size(); ++i)
        if (i & tb) a[i] = -a[i];
      return;
    }
    case GateKind::RZ: {
      const std::size_t tb = bit(g.qubits[0]);
      const Complex lo = std::exp(-kI * (angle / 2)), hi = std::exp(kI * (angle / 2));
      for (std::size_t i = 0; i < a.size(); ++i) a[i] *= (i & tb) ? hi : lo;
      return;
    }
    case GateKind::P: {
      const std::size_t tb = bit(g.qubits[0]);
      const Complex ph = std::exp(kI * angle);
      for (std::size_t i = 0; i < a.size(); ++i)
        if (i & tb) a[i] *= ph;
      return;
    }
    case GateKind::CZ: {
      const std::size_t m = bit(g.qubits[0]) | bit(g.qubits[1]);
      for (std::size_t i = 0; i < a.size(); ++i)
        if ((i & m) == m) a[i] = -a[i];
      return;
    }
    case GateKind::RZZ: {
      const std::size_t b0 = bit(g.qubits[0]), b1 = bit(g.qubits[1]);
      const Complex even = std::exp(-kI * (angle / 2)), odd = std::exp(kI * (angle / 2));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const bool parity = ((i & b0) != 0) != ((i & b1) != 0);
        a[i] *= parity ? odd : even;
      }
      return;
    }
    case GateKind::CRZ: {
      const std::size_t cb = bit(g.qubits[0]), tb = bit(g.qubits[1]);
      const Complex lo = std::exp(-kI * (angle / 2)), hi = std::exp(kI * (angle / 2));
      for (std::size_t i = 0; i < a.size(); ++i)
        if (i & cb) a[i] *= (i & tb) ? hi : lo;
      return;
    }
    case GateKind::CNOT:
    case GateKind::CRX:
      apply_controlled_1q(a, g.qubits[0], g.qubits[1], single_qubit_matrix(g.kind, angle));
      return;
    case GateKind::H:
    case GateKind::X:
    case GateKind::RX:
    case GateKind::RY:
      apply_1q(a, g.qubits[0], single_qubit_matrix(g.kind, angle));
      return;
  }
}

StateVector apply_circuit(StateVector state, const CircuitSpec& circuit,
                          std::span<const double> params) {
  if (circuit.n_qubits() != state.n_qubits()) {
    throw Error(ErrorCategory::configuration, "circuit width " +
                                                  std::to_string(circuit.n_qubits()) +
                                                  " does not match state width " +
                                                  std::to_string(state.n_qubits()));
  }
  if (static_cast<int>(params.size()) != circuit.n_params()) {
    throw Error(ErrorCategory::binding, "expected " + std::to_string(circuit.n_params()) +
                                            " parameters, got " + std::to_string(params.size()));
  }
  for (const Gate& g : circuit.gates()) apply_gate(state, g, params);
  return state;
}

double probability_of_zero(const StateVector& state) { return std::norm(state[0]); }

std::vector<double> outcome_probabilities(const StateVector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

Eigen::Matrix2cd reduced_density_matrix(const StateVector& state, int keep) {
  if (keep < 0 || keep >= state.n_qubits()) {
    throw Error(ErrorCategory::index, "qubit " + std::to_string(keep) + " outside register");
  }
  const std::size_t kb = bit(keep);
  Complex r00{0, 0}, r01{0, 0}, r11{0, 0};
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (i & kb) continue;
    const Complex a0 = state[i], a1 = state[i | kb];
    r00 += std::norm(a0);
    r11 += std::norm(a1);
    r01 += a0 * std::conj(a1);
  }
  Eigen::Matrix2cd rho;
  rho << r00, r01, std::conj(r01), r11;
  return rho;
}

std::vector<std::uint64_t> sample_counts(const StateVector& state, std::uint64_t shots,
                                         std::mt19937_64& rng) {
  const auto probs = outcome_probabilities(state);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  std::uniform_real_distribution<double> unif(0.0, cdf.back());
  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = unif(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

}  // namespace qens
