#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qens {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 20;

/// Pure n-qubit state. Qubit 0 is the least-significant bit of the basis
/// index, so basis index 0b01 on two qubits is |q1=0, q0=1>.
class StateVector {
 public:
  StateVector(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }

  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  std::span<Complex> amplitudes() noexcept { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  Complex& operator[](std::size_t i) { return amps_[i]; }

  double norm_squared() const noexcept;

 private:
  int n_qubits_;
  std::vector<Complex> amps_;
};

/// <a|b>, conjugating the left argument.
Complex inner_product(const StateVector& a, const StateVector& b);

/// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

enum class GateKind { H, X, RX, RY, RZ, Z, CZ, CNOT, CRX, CRZ, P, RZZ };

std::string_view gate_name(GateKind k) noexcept;
std::optional<GateKind> parse_gate_kind(std::string_view name) noexcept;
int gate_arity(GateKind k) noexcept;
bool gate_is_parametric(GateKind k) noexcept;
bool gate_is_self_inverse(GateKind k) noexcept;

/// One gate instance. For controlled gates qubits[0] is the control and
/// qubits[1] the target; CZ and RZZ are symmetric. A parametric gate takes
/// its angle either from `angle` or, when `slot` is set, from the bound
/// parameter vector.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  double angle = 0.0;
  std::optional<int> slot;

  bool operator==(const Gate&) const = default;
};

/// Ordered gate list over a fixed register width. Construction validates
/// qubit indices and slot numbers against the declared shape.
class CircuitSpec {
 public:
  CircuitSpec() = default;
  CircuitSpec(int n_qubits, int n_params = 0);

  int n_qubits() const noexcept { return n_qubits_; }
  int n_params() const noexcept { return n_params_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }

  CircuitSpec& add(Gate g);
  CircuitSpec& add(GateKind kind, std::vector<int> qubits, double angle = 0.0);
  /// Parametric gate reading slot `slot` of the bound vector.
  CircuitSpec& add_param(GateKind kind, std::vector<int> qubits, int slot);
  /// Appends every gate of `other`, shifting its parameter slots by this
  /// circuit's current n_params.
  CircuitSpec& append(const CircuitSpec& other);

  /// Concrete copy with every slot replaced by its bound angle.
  CircuitSpec bind(std::span<const double> params) const;

  /// Exact inverse: reversed order, negated angles. Slots stay slots.
  CircuitSpec inverse() const;

  bool operator==(const CircuitSpec&) const = default;

 private:
  int n_qubits_ = 0;
  int n_params_ = 0;
  std::vector<Gate> gates_;
};

StateVector zero_state(int n_qubits);

/// 2x2 unitary of a single-qubit gate, or of the target block of a
/// controlled rotation.
Eigen::Matrix2cd single_qubit_matrix(GateKind k, double angle);

/// Full 2^k x 2^k unitary of a gate acting on its own qubits (k = arity),
/// with qubits[0] as the least-significant local bit.
Eigen::MatrixXcd gate_matrix(const Gate& g);

void apply_gate(StateVector& state, const Gate& g, std::span<const double> params = {});

StateVector apply_circuit(StateVector state, const CircuitSpec& circuit,
                          std::span<const double> params = {});

double probability_of_zero(const StateVector& state);
std::vector<double> outcome_probabilities(const StateVector& state);

/// Single-qubit marginal of a pure state.
Eigen::Matrix2cd reduced_density_matrix(const StateVector& state, int keep);

/// Seeded shot sampling. Returns per-basis-index counts summing to `shots`.
std::vector<std::uint64_t> sample_counts(const StateVector& state, std::uint64_t shots,
                                         std::mt19937_64& rng);

inline constexpr std::uint64_t kDefaultShots = 1024;

}  // namespace qens
