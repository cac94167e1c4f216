#include "adq/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "adq/byte_io.hpp"
#include "adq/error.hpp"
#include "adq/rng.hpp"

namespace adq {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::AdaptiveTwoGroup: return "adaptive_two_group";
    case Strategy::AdaptiveKGroup: return "adaptive_k_group";
    case Strategy::FixedUniform: return "fixed_uniform";
  }
  return "unknown";
}

AllocationConfig AllocationConfig::equal_split(Strategy strategy, std::vector<BitWidth> levels) {
  AllocationConfig config;
  config.strategy = strategy;
  const double share = levels.empty() ? 0.0 : 1.0 / static_cast<double>(levels.size());
  config.group_fractions.assign(levels.size(), share);
  config.bit_levels = std::move(levels);
  return config;
}

void validate(const AllocationConfig& config) {
  const auto& levels = config.bit_levels;
  const auto& fractions = config.group_fractions;
  if (levels.empty()) throw_validation("allocation needs at least one bit level");
  if (fractions.size() != levels.size()) {
    throw_validation("got " + std::to_string(fractions.size()) + " group fractions for " +
                     std::to_string(levels.size()) + " bit levels");
  }
  switch (config.strategy) {
    case Strategy::AdaptiveTwoGroup:
      if (levels.size() != 2) throw_validation("two-group allocation needs exactly 2 bit levels");
      break;
    case Strategy::FixedUniform:
      if (levels.size() != 1) throw_validation("fixed allocation takes exactly 1 bit level");
      break;
    case Strategy::AdaptiveKGroup:
      break;
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i + 1 < levels.size() && levels[i].dropped()) {
      throw_validation("bit level 0 may only appear as the last level");
    }
    if (i > 0 && levels[i] > levels[i - 1]) {
      throw_validation("bit levels must be listed in descending order");
    }
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0) || !std::isfinite(f)) throw_validation("group fractions must be positive");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw_validation("group fractions must sum to 1");
  if (!(config.prune_ratio >= 0.0 && config.prune_ratio < 1.0)) {
    throw_validation("prune ratio must lie in [0, 1)");
  }
  if (config.keep_list && config.prune_ratio > 0.0) {
    throw_validation("a keep list and a prune ratio are mutually exclusive");
  }
}

std::size_t AllocationPlan::dropped_count() const {
  return static_cast<std::size_t>(
      std::count_if(assignments.begin(), assignments.end(), [](BitWidth b) { return b.dropped(); }));
}

AllocationPlan AllocationPlan::from_assignments(std::vector<BitWidth> assignments) {
  AllocationPlan plan;
  plan.assignments = std::move(assignments);
  for (BitWidth b : plan.assignments) plan.bit_sum += static_cast<std::uint64_t>(b.bits());
  plan.b_avg = plan.assignments.empty()
                   ? 0.0
                   : static_cast<double>(plan.bit_sum) / static_cast<double>(plan.assignments.size());
  plan.compression_ratio = adq::compression_ratio(plan.b_avg);
  return plan;
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> fractions) {
  std::vector<std::size_t> sizes(fractions.size());
  std::vector<double> remainders(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < fractions.size(); ++g) {
    const double quota = fractions[g] * static_cast<double>(total);
    const double whole = std::floor(quota);
    sizes[g] = static_cast<std::size_t>(whole);
    remainders[g] = quota - whole;
    assigned += sizes[g];
  }
  // Fractions summing to 1 within 1e-9 can push the floors past the total.
  while (assigned > total) {
    --*std::max_element(sizes.begin(), sizes.end());
    --assigned;
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    ++sizes[order[k]];
    ++assigned;
  }
  return sizes;
}

std::vector<std::vector<std::size_t>> split_by_score(std::span<const SensitivityScore> scores,
                                                     std::span<const double> fractions) {
  if (scores.empty()) throw_validation("cannot split an empty score list");
  if (fractions.empty()) throw_validation("at least one group fraction is required");

  std::vector<std::size_t> ranked(scores.size());
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].value != scores[b].value) return scores[a].value > scores[b].value;
    return scores[a].sample_index < scores[b].sample_index;
  });

  const auto sizes = apportion(scores.size(), fractions);
  std::vector<std::vector<std::size_t>> groups(sizes.size());
  std::size_t cursor = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    groups[g].reserve(sizes[g]);
    for (std::size_t k = 0; k < sizes[g]; ++k) groups[g].push_back(scores[ranked[cursor++]].sample_index);
  }
  return groups;
}

double solve_budget(std::span<const std::size_t> group_sizes, std::span<const BitWidth> bit_levels) {
  if (group_sizes.empty()) throw_validation("budget needs at least one group");
  if (group_sizes.size() != bit_levels.size()) throw_validation("group and bit level counts differ");
  std::uint64_t total = 0;
  std::uint64_t bits = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    total += group_sizes[g];
    bits += group_sizes[g] * static_cast<std::uint64_t>(bit_levels[g].bits());
  }
  if (total == 0) throw_validation("budget needs at least one sample");
  return static_cast<double>(bits) / static_cast<double>(total);
}

double compression_ratio(double b_avg) {
  if (!(b_avg >= 0.0 && b_avg <= 32.0)) throw_validation("average bit-width must lie in [0, 32]");
  return 1.0 - b_avg / 32.0;
}

AllocationPlan allocate(std::span<const SensitivityScore> scores, const AllocationConfig& config,
                        std::uint64_t seed) {
  validate(config);
  const std::size_t n = scores.size();
  if (n == 0) throw_validation("cannot allocate over an empty score list");
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i].sample_index != i) throw_validation("scores must be index-complete and in index order");
  }

  std::vector<bool> keep(n, true);
  if (config.keep_list) {
    std::fill(keep.begin(), keep.end(), false);
    for (std::size_t i : *config.keep_list) {
      if (i >= n) throw_validation("keep list index " + std::to_string(i) + " out of range");
      keep[i] = true;
    }
  } else if (config.prune_ratio > 0.0) {
    const auto drop = static_cast<std::size_t>(std::llround(config.prune_ratio * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    for (std::size_t k = 0; k < drop; ++k) keep[order[k]] = false;
  }

  std::vector<BitWidth> assignments(n);  // default 0 = dropped
  std::vector<SensitivityScore> survivors;
  survivors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) survivors.push_back(scores[i]);
  }

  if (!survivors.empty()) {
    if (config.strategy == Strategy::FixedUniform) {
      for (const auto& s : survivors) assignments[s.sample_index] = config.bit_levels[0];
    } else {
      const auto groups = split_by_score(survivors, config.group_fractions);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i : groups[g]) assignments[i] = config.bit_levels[g];
      }
    }
  }
  return AllocationPlan::from_assignments(std::move(assignments));
}

std::string format_plan(const AllocationPlan& plan) {
  std::string out;
  char line[96];
  std::snprintf(line, sizeof line, "%zu %.10g %.10g\n", plan.size(), plan.b_avg, plan.compression_ratio);
  out += line;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu\t%d\n", i, plan.assignments[i].bits());
    out += line;
  }
  return out;
}

AllocationPlan parse_plan(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw_format("plan file is empty");
  std::istringstream hdr(header);
  std::size_t n = 0;
  double b_avg = 0.0;
  double ratio = 0.0;
  if (!(hdr >> n >> b_avg >> ratio)) throw_format("plan header is not `N b_avg ratio`");

  std::vector<BitWidth> assignments(n);
  std::vector<bool> seen(n, false);
  std::string line;
  std::size_t line_no = 1;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t index = 0;
    int bits = 0;
    std::string rest;
    if (!(fields >> index >> bits) || (fields >> rest)) {
      throw_format("plan line " + std::to_string(line_no) + " is not `index<TAB>bits`");
    }
    if (index >= n || seen[index]) {
      throw_format("plan line " + std::to_string(line_no) + " has a bad or repeated index");
    }
    if (!BitWidth::valid(bits)) {
      throw_format("plan line " + std::to_string(line_no) + " has invalid bit-width " + std::to_string(bits));
    }
    seen[index] = true;
    assignments[index] = BitWidth::of(bits);
    ++count;
  }
  if (count != n) throw_format("plan header announces " + std::to_string(n) + " samples, found " + std::to_string(count));
  auto plan = AllocationPlan::from_assignments(std::move(assignments));
  if (std::fabs(plan.b_avg - b_avg) > 1e-6 * std::max(1.0, b_avg)) {
    throw_format("plan header b_avg does not match its assignments");
  }
  return plan;
}

void save_plan(const AllocationPlan& plan, const std::filesystem::path& path) {
  write_file_atomic(path, format_plan(plan));
}

AllocationPlan load_plan(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_plan(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::size_t> parse_keep_list(const std::string& text) {
  std::vector<std::size_t> keep;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::size_t index = 0;
    std::string rest;
    if (!(fields >> index) || (fields >> rest)) {
      throw_format("keep list line " + std::to_string(line_no) + " is not a sample index");
    }
    keep.push_back(index);
  }
  return keep;
}

std::vector<std::size_t> load_keep_list(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_keep_list(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace adq
