#include "qens/encoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "qens/error.hpp"

namespace qens {

using std::numbers::pi;

std::string_view encoder_name(EncoderKind k) noexcept {
  switch (k) {
    case EncoderKind::Amplitude: return "amplitude";
    case EncoderKind::ZFeatureMap: return "z";
    case EncoderKind::ZZFeatureMap: return "zz";
  }
  return "?";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "amplitude" || s == "amp") return EncoderKind::Amplitude;
  if (s == "z" || s == "zfeaturemap" || s == "z_feature_map") return EncoderKind::ZFeatureMap;
  if (s == "zz" || s == "zzfeaturemap" || s == "zz_feature_map") return EncoderKind::ZZFeatureMap;
  throw Error(ErrorCategory::configuration, "unknown encoder '" + std::string(name) + "'");
}

int encoder_qubits(EncoderKind kind, int n_features) {
  if (n_features < 1) throw Error(ErrorCategory::input, "empty feature vector");
  if (kind != EncoderKind::Amplitude) return n_features;
  int q = 0;
  while ((1 << q) < n_features) ++q;
  return std::max(q, 1);
}

StateVector amplitude_encode(std::span<const double> x) {
  const int n = encoder_qubits(EncoderKind::Amplitude, static_cast<int>(x.size()));
  double ss = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCategory::input, "non-finite feature value");
    ss += v * v;
  }
  if (ss == 0.0) throw Error(ErrorCategory::normalization, "cannot normalise an all-zero vector");
  const double inv = 1.0 / std::sqrt(ss);
  std::vector<Complex> amps(std::size_t{1} << n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) amps[i] = x[i] * inv;
  return StateVector(n, std::move(amps));
}

namespace {

void hadamard_layer(CircuitSpec& c) {
  for (int q = 0; q < c.n_qubits(); ++q) c.add(GateKind::H, {q});
}

// exp(+i x Z) == RZ(-2x); exp(+i phi Z Z) == RZZ(-2 phi).
void z_phases(CircuitSpec& c, std::span<const double> x) {
  for (int q = 0; q < c.n_qubits(); ++q) c.add(GateKind::RZ, {q}, -2.0 * x[q]);
}

}  // namespace

CircuitSpec z_feature_map(std::span<const double> x, int repetitions) {
  if (repetitions < 1) throw Error(ErrorCategory::parameter, "repetitions must be positive");
  CircuitSpec c(encoder_qubits(EncoderKind::ZFeatureMap, static_cast<int>(x.size())));
  for (int r = 0; r < repetitions; ++r) {
    hadamard_layer(c);
    z_phases(c, x);
  }
  return c;
}

CircuitSpec zz_feature_map(std::span<const double> x, int repetitions) {
  if (x.size() < 2) throw Error(ErrorCategory::arity, "ZZ feature map needs at least 2 features");
  if (repetitions < 1) throw Error(ErrorCategory::parameter, "repetitions must be positive");
  const int m = static_cast<int>(x.size());
  CircuitSpec c(m);
  for (int r = 0; r < repetitions; ++r) {
    hadamard_layer(c);
    z_phases(c, x);
    for (int p = 0; p < m; ++p) {
      for (int q = p + 1; q < m; ++q) {
        const double phi = (pi - x[p]) * (pi - x[q]);
        c.add(GateKind::RZZ, {p, q}, -2.0 * phi);
      }
    }
  }
  return c;
}

CircuitSpec encoder_circuit(std::span<const double> x, const EncoderSpec& spec) {
  switch (spec.kind) {
    case EncoderKind::ZFeatureMap: return z_feature_map(x, spec.repetitions);
    case EncoderKind::ZZFeatureMap: return zz_feature_map(x, spec.repetitions);
    case EncoderKind::Amplitude: break;
  }
  throw Error(ErrorCategory::configuration, "amplitude encoding is a direct state load, not a circuit");
}

StateVector encode(std::span<const double> x, const EncoderSpec& spec) {
  if (spec.kind == EncoderKind::Amplitude) return amplitude_encode(x);
  const CircuitSpec c = encoder_circuit(x, spec);
  return apply_circuit(zero_state(c.n_qubits()), c);
}

FeatureRanges fit_ranges(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCategory::input, "cannot fit ranges on an empty split");
  FeatureRanges r{rows.front(), rows.front()};
  for (const auto& row : rows) {
    if (row.size() != r.size()) throw Error(ErrorCategory::input, "ragged feature rows");
    for (std::size_t k = 0; k < row.size(); ++k) {
      r.min[k] = std::min(r.min[k], row[k]);
      r.max[k] = std::max(r.max[k], row[k]);
    }
  }
  return r;
}

std::vector<double> scale_features(std::span<const double> raw, const FeatureRanges& ranges) {
  if (raw.size() != ranges.size()) {
    throw Error(ErrorCategory::input, "feature count does not match fitted ranges");
  }
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double lo = ranges.min[k], hi = ranges.max[k];
    if (!(hi > lo)) {
      out[k] = pi / 2;
      continue;
    }
    const double v = std::clamp(raw[k], lo, hi);
    out[k] = (v - lo) / (hi - lo) * pi;
  }
  return out;
}

}  // namespace qens
