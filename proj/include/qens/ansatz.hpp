#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qens/qsim.hpp"

namespace qens {

/// One statement of a template layer, as read from the registry file.
struct AnsatzStep {
  enum class Op { Rotation, Fixed, Entangle };
  Op op = Op::Rotation;
  GateKind gate = GateKind::RX;
  std::string wires;  // wire set or pair pattern name

  bool operator==(const AnsatzStep&) const = default;
};

struct AnsatzTemplate {
  int id = 0;
  std::vector<AnsatzStep> layer;

  /// Trainable angles consumed by one layer on an n-qubit register.
  int params_per_layer(int n_qubits) const;
};

/// Immutable set of templates parsed from the registry text format.
class AnsatzRegistry {
 public:
  static AnsatzRegistry parse(std::string_view text);
  /// The registry shipped in data/ansatz_registry.txt.
  static const AnsatzRegistry& builtin();

  const AnsatzTemplate& at(int id) const;
  bool contains(int id) const noexcept;
  std::vector<int> ids() const;

  /// Layer L (0-based) occupies slots [L * ppl, (L + 1) * ppl).
  CircuitSpec build(int id, int n_qubits, int layers) const;

 private:
  std::vector<AnsatzTemplate> templates_;
};

CircuitSpec build_ansatz(int id, int n_qubits, int layers);

int count_entangling_gates(const CircuitSpec& circuit);

/// (control, target) pairs of a named pattern on n wires.
std::vector<std::pair<int, int>> entangler_pairs(std::string_view pattern, int n_qubits);

}  // namespace qens
