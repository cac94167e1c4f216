#include "adq/sensitivity.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "adq/byte_io.hpp"
#include "adq/error.hpp"

namespace adq {

double sensitivity_score(std::span<const double> g_orig, std::span<const double> g_quant) {
  if (g_orig.size() != g_quant.size()) {
    throw_validation("gradient length mismatch: " + std::to_string(g_orig.size()) + " vs " +
                     std::to_string(g_quant.size()));
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < g_orig.size(); ++i) {
    dot += g_orig[i] * g_quant[i];
    norm_a += g_orig[i] * g_orig[i];
    norm_b += g_quant[i] * g_quant[i];
  }
  if (std::sqrt(norm_a) < kZeroGradientNorm || std::sqrt(norm_b) < kZeroGradientNorm) return 0.0;
  // sqrt(x * x) == x exactly, so identical gradients score exactly 0.
  const double cosine = dot / std::sqrt(norm_a * norm_b);
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

double feature_degradation(const GradientOracle& oracle, const Sample& original,
                           const Sample& reconstructed) {
  if (original.values.size() != reconstructed.values.size()) {
    throw_validation("feature degradation needs equally shaped samples");
  }
  const auto a = oracle.features(original.values);
  const auto b = oracle.features(reconstructed.values);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

double score_one(const Sample& sample, const GradientOracle& oracle, BitWidth probe) {
  const Sample reconstructed = dequantize_sample(quantize_sample(sample, probe));
  const auto g_orig = oracle.gradient(sample.values, sample.label);
  const auto g_quant = oracle.gradient(reconstructed.values, sample.label);
  return sensitivity_score(g_orig, g_quant);
}

}  // namespace

std::vector<SensitivityScore> score_dataset(const Dataset& dataset, const GradientOracle& oracle,
                                            BitWidth probe_bit_width, unsigned threads) {
  if (probe_bit_width.dropped()) throw_validation("probe bit-width must be >= 2");
  std::vector<SensitivityScore> scores(dataset.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i].sample_index = i;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      scores[i].value = score_one(dataset[i], oracle, probe_bit_width);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, scores.size()));
  if (workers == 1) {
    work(0, scores.size());
    return scores;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  const std::size_t chunk = (scores.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(scores.size(), w * chunk);
    const std::size_t end = std::min(scores.size(), begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return scores;
}

double gradient_check(GradientOracle& oracle, const Sample& sample, double step) {
  if (!(step > 0.0)) throw_validation("finite-difference step must be positive");
  const auto analytic = oracle.gradient(sample.values, sample.label);
  auto params = oracle.parameters();
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + step;
    const double up = oracle.loss(sample.values, sample.label);
    params[k] = saved - step;
    const double down = oracle.loss(sample.values, sample.label);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::fabs(analytic[k]), std::fabs(numeric), 1e-6});
    worst = std::max(worst, std::fabs(analytic[k] - numeric) / denom);
  }
  return worst;
}

std::string format_scores(std::span<const SensitivityScore> scores) {
  std::string out;
  char line[64];
  for (const auto& s : scores) {
    std::snprintf(line, sizeof line, "%zu\t%.9g\n", s.sample_index, s.value);
    out += line;
  }
  return out;
}

std::vector<SensitivityScore> parse_scores(const std::string& text) {
  std::vector<SensitivityScore> scores;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    SensitivityScore s;
    std::string rest;
    if (!(fields >> s.sample_index >> s.value) || (fields >> rest)) {
      throw_format("score file line " + std::to_string(line_no) + " is not `index<TAB>score`");
    }
    if (!std::isfinite(s.value) || s.value < 0.0 || s.value > 2.0) {
      throw_format("score file line " + std::to_string(line_no) + " has a score outside [0, 2]");
    }
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end(),
            [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].sample_index != i) {
      throw_format("score file is not index-complete: expected index " + std::to_string(i));
    }
  }
  return scores;
}

void save_scores(std::span<const SensitivityScore> scores, const std::filesystem::path& path) {
  write_file_atomic(path, format_scores(scores));
}

std::vector<SensitivityScore> load_scores(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_scores(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace adq
