#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adq/quantizer.hpp"
#include "adq/sensitivity.hpp"

namespace adq {

enum class Strategy {
  AdaptiveTwoGroup,  // two levels, highest-score group gets the first
  AdaptiveKGroup,    // any number of levels, one group per level
  FixedUniform,      // every surviving sample gets bit_levels[0]
};

const char* to_string(Strategy s);

struct AllocationConfig {
  Strategy strategy = Strategy::AdaptiveTwoGroup;
  /// Non-increasing; each 0 or in [2, 16]; 0 only as the last level.
  std::vector<BitWidth> bit_levels;
  /// One positive fraction per level, summing to 1 within 1e-9.
  std::vector<double> group_fractions;
  /// Fraction of samples dropped uniformly at random before allocation.
  double prune_ratio = 0.0;
  /// When set, replaces random pruning: only these indices survive.
  std::optional<std::vector<std::size_t>> keep_list;

  /// Equal fractions for every level of `levels`.
  static AllocationConfig equal_split(Strategy strategy, std::vector<BitWidth> levels);
};

/// Throws ValidationError describing the first violated constraint.
void validate(const AllocationConfig& config);

struct AllocationPlan {
  std::vector<BitWidth> assignments;  // index-aligned with the dataset
  std::uint64_t bit_sum = 0;          // sum of assigned bit-widths
  double b_avg = 0.0;                 // bit_sum / N
  double compression_ratio = 0.0;     // 1 - b_avg / 32

  std::size_t size() const { return assignments.size(); }
  std::size_t dropped_count() const;

  /// Builds a plan and its derived totals from per-sample assignments.
  static AllocationPlan from_assignments(std::vector<BitWidth> assignments);

  bool operator==(const AllocationPlan&) const = default;
};

/// Ranks by score descending (ties by ascending index) and cuts the ranking
/// into consecutive groups sized by largest-remainder rounding of
/// fraction * N. Groups come out highest-score first, each in rank order.
std::vector<std::vector<std::size_t>> split_by_score(std::span<const SensitivityScore> scores,
                                                     std::span<const double> fractions);

/// Group sizes by largest-remainder apportionment; ties in the remainder go
/// to the earlier group.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> fractions);

/// Average bits per element, sum(size_g * b_g) / sum(size_g).
double solve_budget(std::span<const std::size_t> group_sizes, std::span<const BitWidth> bit_levels);

/// Nominal saving versus float32 storage, 1 - b_avg / 32.
double compression_ratio(double b_avg);

/// Assigns a bit-width to every sample. `scores` must be index-complete.
AllocationPlan allocate(std::span<const SensitivityScore> scores, const AllocationConfig& config,
                        std::uint64_t seed);

/// Plan file: header `N b_avg ratio`, then one `index<TAB>bits` per sample.
std::string format_plan(const AllocationPlan& plan);
AllocationPlan parse_plan(const std::string& text);
void save_plan(const AllocationPlan& plan, const std::filesystem::path& path);
AllocationPlan load_plan(const std::filesystem::path& path);

/// Keep-list file: one surviving sample index per line.
std::vector<std::size_t> parse_keep_list(const std::string& text);
std::vector<std::size_t> load_keep_list(const std::filesystem::path& path);

}  // namespace adq
