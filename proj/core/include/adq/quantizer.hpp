#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adq/dataset.hpp"

namespace adq {

/// Bits per element for one sample: 0 (sample dropped) or 2..16.
/// One bit is excluded because its symmetric range {-0, +0} is empty.
class BitWidth {
 public:
  constexpr BitWidth() = default;

  /// Throws ValidationError unless bits is 0 or in [2, 16].
  static BitWidth of(int bits);
  static constexpr bool valid(int bits) { return bits == 0 || (bits >= 2 && bits <= 16); }

  constexpr int bits() const { return bits_; }
  constexpr bool dropped() const { return bits_ == 0; }
  /// Largest code magnitude Q = 2^(b-1) - 1. Zero when dropped.
  constexpr std::int32_t q_max() const { return bits_ == 0 ? 0 : (std::int32_t{1} << (bits_ - 1)) - 1; }

  constexpr bool operator==(const BitWidth&) const = default;
  constexpr auto operator<=>(const BitWidth&) const = default;

 private:
  constexpr explicit BitWidth(int bits) : bits_(static_cast<std::uint8_t>(bits)) {}
  std::uint8_t bits_ = 0;
};

inline constexpr double kScaleEpsilon = 1e-12;

struct QuantizedSample {
  std::vector<std::int32_t> codes;  // empty iff bit_width is 0
  float scale = 0.0f;               // > 0 whenever codes are present
  BitWidth bit_width;
  std::uint32_t label = 0;

  bool operator==(const QuantizedSample&) const = default;
};

/// Codes stored as (code + Q) in exactly b bits, MSB-first, zero padded to a
/// whole byte. Offset 2^b - 1 is never produced and is rejected on decode.
struct PackedCodes {
  std::vector<std::uint8_t> payload;
  std::size_t count = 0;
  BitWidth bit_width;
};

/// ceil(count * bits / 8).
constexpr std::size_t packed_size_bytes(std::size_t count, BitWidth b) {
  return (count * static_cast<std::size_t>(b.bits()) + 7) / 8;
}

/// (max|z| + eps) / (2^(b-1) - 1) in double precision, before storage rounding.
double exact_scale(double max_abs, BitWidth b);

/// Per-sample scale factor rounded to float32 for storage.
float compute_scale(std::span<const float> values, BitWidth b);
float compute_scale(const Sample& sample, BitWidth b);

/// Quantizes into `codes` (same length as values) and returns the stored
/// scale. Codes are clamp(round(z / s), -Q, Q), rounding half away from
/// zero, evaluated in double against the stored float32 scale so that
/// dequantization reproduces exactly what was quantized.
float quantize_values(std::span<const float> values, BitWidth b, std::span<std::int32_t> codes);

QuantizedSample quantize_sample(const Sample& sample, BitWidth b);

/// value_i = s * code_i, accumulated in double and rounded to float32.
void dequantize_values(std::span<const std::int32_t> codes, float scale, std::span<float> out);

Sample dequantize_sample(const QuantizedSample& q);

PackedCodes pack_codes(std::span<const std::int32_t> codes, BitWidth b);
PackedCodes pack_codes(const QuantizedSample& q);

/// Decodes `count` codes from exactly packed_size_bytes(count, b) bytes.
void unpack_codes(std::span<const std::uint8_t> payload, std::size_t count, BitWidth b,
                  std::span<std::int32_t> out);
std::vector<std::int32_t> unpack_codes(const PackedCodes& packed);

}  // namespace adq
