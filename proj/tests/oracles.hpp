#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's code paths (word-at-a-time packing, the quantizer, the trainer)
// so they can serve as independent checks.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adq/dataset.hpp"

namespace adq::oracle {

/// Writes each code's offset (c + q) one bit at a time, MSB first.
inline std::vector<std::uint8_t> pack_bitwise(std::span<const std::int32_t> codes, int bits) {
  const std::int32_t q = (1 << (bits - 1)) - 1;
  std::vector<std::uint8_t> out((codes.size() * bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (std::int32_t c : codes) {
    const auto offset = static_cast<std::uint32_t>(c + q);
    for (int k = bits - 1; k >= 0; --k, ++pos) {
      if ((offset >> k) & 1u) out[pos / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
    }
  }
  return out;
}

/// Reads `count` codes one bit at a time, MSB first.
inline std::vector<std::int32_t> unpack_bitwise(std::span<const std::uint8_t> payload, std::size_t count,
                                                int bits) {
  const std::int32_t q = (1 << (bits - 1)) - 1;
  std::vector<std::int32_t> codes(count);
  std::size_t pos = 0;
  for (auto& c : codes) {
    std::uint32_t offset = 0;
    for (int k = 0; k < bits; ++k, ++pos) {
      offset = (offset << 1) | ((payload[pos / 8] >> (7 - pos % 8)) & 1u);
    }
    c = static_cast<std::int32_t>(offset) - q;
  }
  return codes;
}

/// Plain-arithmetic quantizer written from the defining formulas.
struct ReferenceQuantized {
  std::vector<std::int32_t> codes;
  double scale;
};

inline ReferenceQuantized quantize_reference(std::span<const float> values, int bits) {
  double m = 0.0;
  for (float v : values) m = std::fmax(m, std::fabs(static_cast<double>(v)));
  const double q = std::ldexp(1.0, bits - 1) - 1.0;
  const double scale = static_cast<float>((m + 1e-12) / q);
  ReferenceQuantized r{{}, scale};
  for (float v : values) {
    double x = static_cast<double>(v) / scale;
    double rounded = x < 0 ? -std::floor(-x + 0.5) : std::floor(x + 0.5);
    if (rounded > q) rounded = q;
    if (rounded < -q) rounded = -q;
    r.codes.push_back(static_cast<std::int32_t>(rounded));
  }
  return r;
}

/// Classifies by nearest class mean (squared Euclidean distance).
inline double nearest_mean_accuracy(const Dataset& d) {
  const std::size_t n = d.element_count();
  std::vector<std::vector<double>> means(d.num_classes(), std::vector<double>(n, 0.0));
  std::vector<std::size_t> counts(d.num_classes(), 0);
  for (const auto& s : d.samples()) {
    ++counts[s.label];
    for (std::size_t j = 0; j < n; ++j) means[s.label][j] += s.values[j];
  }
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (double& m : means[c]) m /= static_cast<double>(counts[c] == 0 ? 1 : counts[c]);
  }
  std::size_t correct = 0;
  for (const auto& s : d.samples()) {
    std::size_t best = 0;
    double best_dist = INFINITY;
    for (std::size_t c = 0; c < means.size(); ++c) {
      if (counts[c] == 0) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = s.values[j] - means[c][j];
        dist += diff * diff;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    if (best == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(d.size());
}

}  // namespace adq::oracle
