#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adq {

/// A differentiable classifier seen through the quantities sensitivity
/// scoring needs. gradient() and features() must be deterministic for a
/// fixed parameter state and safe to call concurrently.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual std::size_t parameter_count() const = 0;
  virtual std::size_t feature_dim() const = 0;

  /// Loss of one labelled input.
  virtual double loss(std::span<const float> input, std::uint32_t label) const = 0;

  /// d loss / d parameters, parameter_count() long.
  virtual std::vector<double> gradient(std::span<const float> input, std::uint32_t label) const = 0;

  /// Feature representation of the input, feature_dim() long.
  virtual std::vector<double> features(std::span<const float> input) const = 0;

  /// Flat mutable parameter vector, used by finite-difference checks.
  virtual std::span<double> parameters() = 0;
};

}  // namespace adq
