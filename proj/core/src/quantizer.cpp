#include "adq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adq/error.hpp"

namespace adq {

BitWidth BitWidth::of(int bits) {
  if (!valid(bits)) {
    throw_validation("bit-width " + std::to_string(bits) + " is not 0 or in [2, 16]");
  }
  return BitWidth(bits);
}

namespace {

void require_codes(BitWidth b, const char* op) {
  if (b.dropped()) throw_validation(std::string(op) + " needs a bit-width >= 2, got 0");
}

double max_abs(std::span<const float> values) {
  double m = 0.0;
  for (float v : values) m = std::max(m, std::fabs(static_cast<double>(v)));
  return m;
}

}  // namespace

double exact_scale(double max_abs, BitWidth b) {
  require_codes(b, "scale computation");
  return (max_abs + kScaleEpsilon) / static_cast<double>(b.q_max());
}

float compute_scale(std::span<const float> values, BitWidth b) {
  return static_cast<float>(exact_scale(max_abs(values), b));
}

float compute_scale(const Sample& sample, BitWidth b) { return compute_scale(sample.values, b); }

float quantize_values(std::span<const float> values, BitWidth b, std::span<std::int32_t> codes) {
  require_codes(b, "quantization");
  if (codes.size() != values.size()) throw_validation("code buffer length mismatch");
  const float scale = compute_scale(values, b);
  const double s = scale;
  const double q = b.q_max();
  for (std::size_t i = 0; i < values.size(); ++i) {
    // std::round rounds halfway cases away from zero.
    const double r = std::round(static_cast<double>(values[i]) / s);
    codes[i] = static_cast<std::int32_t>(std::clamp(r, -q, q));
  }
  return scale;
}

QuantizedSample quantize_sample(const Sample& sample, BitWidth b) {
  QuantizedSample q;
  q.codes.resize(sample.values.size());
  q.scale = quantize_values(sample.values, b, q.codes);
  q.bit_width = b;
  q.label = sample.label;
  return q;
}

void dequantize_values(std::span<const std::int32_t> codes, float scale, std::span<float> out) {
  if (out.size() != codes.size()) throw_validation("dequantization buffer length mismatch");
  const double s = scale;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out[i] = static_cast<float>(s * static_cast<double>(codes[i]));
  }
}

Sample dequantize_sample(const QuantizedSample& q) {
  require_codes(q.bit_width, "dequantization of a dropped sample");
  Sample s;
  s.label = q.label;
  s.values.resize(q.codes.size());
  dequantize_values(q.codes, q.scale, s.values);
  return s;
}

PackedCodes pack_codes(std::span<const std::int32_t> codes, BitWidth b) {
  PackedCodes packed;
  packed.count = codes.size();
  packed.bit_width = b;
  if (codes.empty()) return packed;
  require_codes(b, "packing");

  const int bits = b.bits();
  const std::int32_t q = b.q_max();
  packed.payload.reserve(packed_size_bytes(codes.size(), b));

  std::uint64_t acc = 0;
  int pending = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::int32_t c = codes[i];
    if (c < -q || c > q) {
      throw_validation("code " + std::to_string(c) + " at position " + std::to_string(i) +
                       " is outside [-" + std::to_string(q) + ", " + std::to_string(q) + "]");
    }
    acc = (acc << bits) | static_cast<std::uint64_t>(c + q);
    pending += bits;
    while (pending >= 8) {
      pending -= 8;
      packed.payload.push_back(static_cast<std::uint8_t>(acc >> pending));
    }
    acc &= (std::uint64_t{1} << pending) - 1;
  }
  if (pending > 0) packed.payload.push_back(static_cast<std::uint8_t>(acc << (8 - pending)));
  return packed;
}

PackedCodes pack_codes(const QuantizedSample& q) { return pack_codes(q.codes, q.bit_width); }

void unpack_codes(std::span<const std::uint8_t> payload, std::size_t count, BitWidth b,
                  std::span<std::int32_t> out) {
  if (out.size() != count) throw_validation("unpack buffer length mismatch");
  if (count == 0) {
    if (!payload.empty()) throw_format("non-empty payload for zero codes");
    return;
  }
  require_codes(b, "unpacking");
  if (payload.size() != packed_size_bytes(count, b)) {
    throw_format("payload of " + std::to_string(payload.size()) + " bytes does not hold " +
                 std::to_string(count) + " codes of " + std::to_string(b.bits()) + " bits");
  }

  const int bits = b.bits();
  const std::uint32_t mask = (std::uint32_t{1} << bits) - 1;
  const std::int32_t q = b.q_max();
  std::uint64_t acc = 0;
  int available = 0;
  std::size_t byte = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (available < bits) {
      acc = (acc << 8) | payload[byte++];
      available += 8;
    }
    available -= bits;
    const auto offset = static_cast<std::uint32_t>(acc >> available) & mask;
    if (offset == mask) {
      throw_format("reserved offset " + std::to_string(mask) + " at code " + std::to_string(i));
    }
    out[i] = static_cast<std::int32_t>(offset) - q;
    acc &= (std::uint64_t{1} << available) - 1;
  }
  if (acc != 0) throw_format("non-zero padding bits after last code");
}

std::vector<std::int32_t> unpack_codes(const PackedCodes& packed) {
  std::vector<std::int32_t> out(packed.count);
  unpack_codes(packed.payload, packed.count, packed.bit_width, out);
  return out;
}

}  // namespace adq
