#include "qens/ansatz.hpp"

#include <algorithm>
#include <sstream>

#include "qens/error.hpp"
#include "registry_text.hpp"

namespace qens {

namespace {

std::vector<int> wire_set(std::string_view name, int n) {
  std::vector<int> w;
  if (name == "all") {
    for (int q = 0; q < n; ++q) w.push_back(q);
  } else if (name == "inner") {
    for (int q = 1; q + 1 < n; ++q) w.push_back(q);
  } else {
    throw Error(ErrorCategory::registry, "unknown wire set '" + std::string(name) + "'");
  }
  return w;
}

bool is_known_wire_set(std::string_view s) { return s == "all" || s == "inner"; }

bool is_known_pattern(std::string_view s) {
  return s == "chain" || s == "ring" || s == "ring_back" || s == "pairs_even" ||
         s == "pairs_odd" || s == "all_to_all";
}

}  // namespace

std::vector<std::pair<int, int>> entangler_pairs(std::string_view pattern, int n) {
  std::vector<std::pair<int, int>> p;
  if (is_known_pattern(pattern) && n < 2) return p;
  if (pattern == "chain" || pattern == "ring") {
    for (int i = 0; i + 1 < n; ++i) p.emplace_back(i, i + 1);
    if (pattern == "ring") p.emplace_back(n - 1, 0);
  } else if (pattern == "ring_back") {
    for (int i = 0; i < n; ++i) p.emplace_back(i, (i + n - 1) % n);
  } else if (pattern == "pairs_even" || pattern == "pairs_odd") {
    for (int i = pattern == "pairs_even" ? 0 : 1; i + 1 < n; i += 2) p.emplace_back(i, i + 1);
  } else if (pattern == "all_to_all") {
    for (int c = 0; c < n; ++c)
      for (int t = 0; t < n; ++t)
        if (c != t) p.emplace_back(c, t);
  } else {
    throw Error(ErrorCategory::registry, "unknown entangler pattern '" + std::string(pattern) + "'");
  }
  return p;
}

int AnsatzTemplate::params_per_layer(int n_qubits) const {
  int count = 0;
  for (const auto& s : layer) {
    if (!gate_is_parametric(s.gate)) continue;
    count += static_cast<int>(s.op == AnsatzStep::Op::Entangle
                                  ? entangler_pairs(s.wires, n_qubits).size()
                                  : wire_set(s.wires, n_qubits).size());
  }
  return count;
}

AnsatzRegistry AnsatzRegistry::parse(std::string_view text) {
  AnsatzRegistry reg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  AnsatzTemplate* open = nullptr;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCategory::registry, "registry line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "circuit") {
      if (open) fail("nested circuit block");
      int id = 0;
      if (!(ls >> id) || id < 1) fail("expected a positive circuit id");
      if (reg.contains(id)) fail("duplicate circuit id " + std::to_string(id));
      reg.templates_.push_back(AnsatzTemplate{id, {}});
      open = &reg.templates_.back();
    } else if (word == "end") {
      if (!open) fail("'end' outside a circuit block");
      if (open->layer.empty()) fail("empty circuit block");
      open = nullptr;
    } else {
      if (!open) fail("statement outside a circuit block");
      std::string gate_name_s, wires;
      if (!(ls >> gate_name_s >> wires)) fail("expected '<op> <gate> <wires>'");
      const auto gate = parse_gate_kind(gate_name_s);
      if (!gate) fail("gate '" + gate_name_s + "' is not in the simulator gate set");
      AnsatzStep step;
      step.gate = *gate;
      step.wires = wires;
      if (word == "rot") {
        step.op = AnsatzStep::Op::Rotation;
        if (gate_arity(*gate) != 1 || !gate_is_parametric(*gate)) fail("rot needs a 1-qubit rotation");
        if (!is_known_wire_set(wires)) fail("unknown wire set '" + wires + "'");
      } else if (word == "fixed") {
        step.op = AnsatzStep::Op::Fixed;
        if (gate_arity(*gate) != 1 || gate_is_parametric(*gate)) fail("fixed needs a 1-qubit constant gate");
        if (!is_known_wire_set(wires)) fail("unknown wire set '" + wires + "'");
      } else if (word == "ent") {
        step.op = AnsatzStep::Op::Entangle;
        if (gate_arity(*gate) != 2) fail("ent needs a two-qubit gate");
        if (!is_known_pattern(wires)) fail("unknown pattern '" + wires + "'");
      } else {
        fail("unknown statement '" + word + "'");
      }
      open->layer.push_back(std::move(step));
    }
  }
  if (open) throw Error(ErrorCategory::registry, "unterminated circuit block");
  std::sort(reg.templates_.begin(), reg.templates_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return reg;
}

const AnsatzRegistry& AnsatzRegistry::builtin() {
  static const AnsatzRegistry reg = parse(detail::kAnsatzRegistryText);
  return reg;
}

bool AnsatzRegistry::contains(int id) const noexcept {
  return std::any_of(templates_.begin(), templates_.end(), [id](const auto& t) { return t.id == id; });
}

const AnsatzTemplate& AnsatzRegistry::at(int id) const {
  for (const auto& t : templates_)
    if (t.id == id) return t;
  throw Error(ErrorCategory::registry, "no ansatz with id " + std::to_string(id));
}

std::vector<int> AnsatzRegistry::ids() const {
  std::vector<int> out;
  for (const auto& t : templates_) out.push_back(t.id);
  return out;
}

CircuitSpec AnsatzRegistry::build(int id, int n_qubits, int layers) const {
  const AnsatzTemplate& tpl = at(id);
  // A single wire is allowed; entangling statements then contribute nothing.
  if (n_qubits < 1) throw Error(ErrorCategory::configuration, "ansatz needs at least 1 qubit");
  if (layers < 1) throw Error(ErrorCategory::parameter, "layers must be positive");
  const int ppl = tpl.params_per_layer(n_qubits);
  CircuitSpec c(n_qubits, ppl * layers);
  int slot = 0;
  for (int l = 0; l < layers; ++l) {
    for (const auto& s : tpl.layer) {
      if (s.op == AnsatzStep::Op::Entangle) {
        for (auto [ctl, tgt] : entangler_pairs(s.wires, n_qubits)) {
          if (gate_is_parametric(s.gate))
            c.add_param(s.gate, {ctl, tgt}, slot++);
          else
            c.add(s.gate, {ctl, tgt});
        }
      } else {
        for (int q : wire_set(s.wires, n_qubits)) {
          if (s.op == AnsatzStep::Op::Rotation)
            c.add_param(s.gate, {q}, slot++);
          else
            c.add(s.gate, {q});
        }
      }
    }
  }
  return c;
}

CircuitSpec build_ansatz(int id, int n_qubits, int layers) {
  return AnsatzRegistry::builtin().build(id, n_qubits, layers);
}

int count_entangling_gates(const CircuitSpec& circuit) {
  return static_cast<int>(std::count_if(circuit.gates().begin(), circuit.gates().end(),
                                        [](const Gate& g) { return gate_arity(g.kind) == 2; }));
}

}  // namespace qens
