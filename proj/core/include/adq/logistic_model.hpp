#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adq/dataset.hpp"
#include "adq/gradient_oracle.hpp"

namespace adq {

/// Per-feature standardization x' = (x - mean) / stddev. Empty means identity.
struct InputNormalizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  bool empty() const { return mean.empty(); }
  /// Fits on a dataset; features with (near) zero variance get unit scale.
  static InputNormalizer fit(const Dataset& dataset);

  bool operator==(const InputNormalizer&) const = default;
};

/// Multinomial logistic regression, logits u = W x + b with x the
/// (optionally standardized) input, trained with softmax cross-entropy.
///
/// Parameters are flattened as W row-major (num_classes x input_dim)
/// followed by b (num_classes). features() returns the logits.
class LogisticModel final : public GradientOracle {
 public:
  LogisticModel(std::size_t input_dim, std::uint32_t num_classes);

  /// Weights ~ N(0, init_std^2) from the seed, bias zero.
  static LogisticModel random_init(std::size_t input_dim, std::uint32_t num_classes,
                                   std::uint64_t seed, double init_std = 0.01);

  std::size_t input_dim() const { return input_dim_; }
  std::uint32_t num_classes() const { return num_classes_; }

  std::size_t parameter_count() const override { return params_.size(); }
  std::size_t feature_dim() const override { return num_classes_; }
  double loss(std::span<const float> input, std::uint32_t label) const override;
  std::vector<double> gradient(std::span<const float> input, std::uint32_t label) const override;
  std::vector<double> features(std::span<const float> input) const override;
  std::span<double> parameters() override { return params_; }

  std::span<const double> parameters() const { return params_; }
  std::span<double> weights() { return {params_.data(), weight_count()}; }
  std::span<double> bias() { return {params_.data() + weight_count(), num_classes_}; }
  std::span<const double> bias() const { return {params_.data() + weight_count(), num_classes_}; }
  std::size_t weight_count() const { return input_dim_ * num_classes_; }

  const InputNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(InputNormalizer normalizer);

  /// Standardized copy of the input (a plain copy when no normalizer is set).
  std::vector<double> prepare(std::span<const float> input) const;

  /// Logits of an already prepared input.
  void logits(std::span<const double> x, std::span<double> out) const;

  /// Argmax of the logits; ties go to the lowest class index.
  std::uint32_t predict(std::span<const float> input) const;

  bool operator==(const LogisticModel& o) const {
    return input_dim_ == o.input_dim_ && num_classes_ == o.num_classes_ && params_ == o.params_ &&
           normalizer_ == o.normalizer_;
  }

 private:
  void check_input(std::span<const float> input) const;

  std::size_t input_dim_;
  std::uint32_t num_classes_;
  std::vector<double> params_;
  InputNormalizer normalizer_;
};

/// Numerically stable softmax in place.
void softmax_inplace(std::span<double> values);

}  // namespace adq
