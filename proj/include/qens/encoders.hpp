#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qens/qsim.hpp"

namespace qens {

enum class EncoderKind { Amplitude, ZFeatureMap, ZZFeatureMap };

std::string_view encoder_name(EncoderKind k) noexcept;
/// Accepts "amplitude", "z", "zz" (case-insensitive) and the long names.
EncoderKind parse_encoder_kind(std::string_view name);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::ZFeatureMap;
  int repetitions = 2;

  bool operator==(const EncoderSpec&) const = default;
};

/// ceil(log2 m) (at least 1) for amplitude encoding, m for the Z and ZZ maps.
int encoder_qubits(EncoderKind kind, int n_features);

/// Zero-pads to the next power of two and L2-normalises into the amplitudes.
StateVector amplitude_encode(std::span<const double> x);

/// H on every wire, then exp(+i x_k Z_k) on wire k, repeated.
CircuitSpec z_feature_map(std::span<const double> x, int repetitions = 2);

/// H on every wire, exp(+i x_p Z_p) per wire, then exp(+i (pi - x_p)(pi - x_q) Z_p Z_q)
/// for every pair p < q, repeated.
CircuitSpec zz_feature_map(std::span<const double> x, int repetitions = 2);

/// Feature-map circuit for the Z/ZZ kinds. Amplitude encoding has no circuit.
CircuitSpec encoder_circuit(std::span<const double> x, const EncoderSpec& spec);

/// Encoded state |psi(x)> for any encoder kind.
StateVector encode(std::span<const double> x, const EncoderSpec& spec);

/// Per-feature min/max measured on a training split.
struct FeatureRanges {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const noexcept { return min.size(); }
};

FeatureRanges fit_ranges(const std::vector<std::vector<double>>& rows);

/// Min-max scales into [0, pi], clipping out-of-range values. A feature with
/// min == max maps to pi/2.
std::vector<double> scale_features(std::span<const double> raw, const FeatureRanges& ranges);

}  // namespace qens
