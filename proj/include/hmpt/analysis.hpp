#pragma once

// Speedups relative to the all-slow reference placement, expected speedups
// of group combinations under an independence assumption, and the cheapest
// placement (by fast-pool data) that reaches a fraction of the best speedup.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmpt/configspace.hpp"
#include "hmpt/harness.hpp"

namespace hmpt {

inline constexpr double kDefaultThreshold = 0.9;

// How singleton speedups S_g combine into the expected speedup of a set:
//   Additive:    1 + sum(S_g - 1)
//   TimeSavings: 1 / (1 + sum(1/S_g - 1))   (exact when kernel times add up)
enum class Composition : std::uint8_t { Additive, TimeSavings };

const char* to_string(Composition c);
std::optional<Composition> parse_composition(std::string_view text);

struct AnalysisOptions {
  std::optional<PoolId> fast_pool;  // default: the second pool of the space
  double threshold = kDefaultThreshold;
  Composition composition = Composition::Additive;
};

struct PlacementStat {
  std::size_t placement_index = 0;
  std::string label;                // "ref" or fast groups joined by '+'
  std::size_t fast_group_count = 0;
  double speedup = 0.0;
  std::optional<double> expected_speedup;  // combinations of >= 2 groups only
  double hbm_data_fraction = 0.0;
  double hbm_access_fraction = 0.0;

  bool operator==(const PlacementStat&) const = default;
};

struct ThresholdChoice {
  std::size_t placement_index = 0;
  double data_fraction = 0.0;
  double speedup = 0.0;
};

struct AnalysisReport {
  std::vector<PlacementStat> stats;  // ascending placement index, usable placements only
  PoolId fast_pool = 1;
  Composition composition = Composition::Additive;
  double max_speedup = 0.0;
  std::size_t best_placement = 0;
  std::optional<double> all_fast_speedup;
  double threshold = kDefaultThreshold;
  std::size_t threshold_placement = 0;
  double threshold_data_fraction = 0.0;

  bool operator==(const AnalysisReport&) const = default;
};

struct SummaryRow {
  double max_speedup = 0.0;
  std::optional<double> all_fast_speedup;
  double threshold_data_percent = 0.0;
};

PoolId resolve_fast_pool(const ConfigurationSpace& space, const AnalysisOptions& options);

// speedup_i = mean(reference) / mean(i). Placements whose runs all failed are
// left out. Throws DataError("no reference measurement") when the reference
// is missing, failed or zero.
std::vector<PlacementStat> compute_speedups(std::span<const MeasurementSet> measurements,
                                            const ConfigurationSpace& space, const AnalysisOptions& options = {});

// `singletons[g]` is the measured speedup with only group g in the fast pool.
// Throws DataError when a group of the subset has no singleton.
double expected_speedup(const std::map<GroupId, double>& singletons, std::span<const GroupId> subset,
                        Composition composition = Composition::Additive);

// Among stats with speedup >= threshold * max, the one with the least
// fast-pool data; ties prefer higher speedup, then lower index.
ThresholdChoice find_threshold_placement(std::span<const PlacementStat> stats, double threshold = kDefaultThreshold);

AnalysisReport build_report(std::span<const MeasurementSet> measurements, const ConfigurationSpace& space,
                            const AnalysisOptions& options = {});

SummaryRow summarize(const AnalysisReport& report);

// "2.27,2.26,69.6": two decimals for speedups, one for the percentage.
std::string format_summary(const SummaryRow& row);

}  // namespace hmpt
