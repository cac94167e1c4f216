#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adq/dataset.hpp"
#include "adq/gradient_oracle.hpp"
#include "adq/quantizer.hpp"

namespace adq {

/// Gradient norms below this are treated as zero; the score is then 0.
inline constexpr double kZeroGradientNorm = 1e-12;

/// Default probe bit-width for scoring.
inline constexpr int kDefaultProbeBits = 4;

struct SensitivityScore {
  std::size_t sample_index = 0;
  double value = 0.0;  // cosine distance, in [0, 2]

  bool operator==(const SensitivityScore&) const = default;
};

/// Cosine distance 1 - <a, b> / (|a| |b|), clamped to [0, 2].
/// Returns 0 if either norm is below kZeroGradientNorm.
double sensitivity_score(std::span<const double> g_orig, std::span<const double> g_quant);

/// Euclidean distance between oracle features of the two inputs.
double feature_degradation(const GradientOracle& oracle, const Sample& original,
                           const Sample& reconstructed);

/// Quantizes and dequantizes every sample at the probe bit-width and scores
/// the gradient deviation. Output is in dataset order regardless of
/// `threads`, and bit-identical for any thread count.
std::vector<SensitivityScore> score_dataset(const Dataset& dataset, const GradientOracle& oracle,
                                            BitWidth probe_bit_width, unsigned threads = 1);

/// Max relative error between the oracle's analytic gradient and central
/// differences of its loss, |a - n| / max(|a|, |n|, 1e-6) per parameter.
/// Parameters are restored before returning.
double gradient_check(GradientOracle& oracle, const Sample& sample, double step);

/// Score file: one `index<TAB>score` line per sample, 9 significant digits.
std::string format_scores(std::span<const SensitivityScore> scores);

/// Parses a score file and returns the scores sorted by index. Every index
/// in [0, N) must appear exactly once.
std::vector<SensitivityScore> parse_scores(const std::string& text);

void save_scores(std::span<const SensitivityScore> scores, const std::filesystem::path& path);
std::vector<SensitivityScore> load_scores(const std::filesystem::path& path);

}  // namespace adq
