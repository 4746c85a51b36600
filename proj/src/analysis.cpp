#include "hmpt/analysis.hpp"

#include <algorithm>
#include <cstdio>

#include "hmpt/error.hpp"

namespace hmpt {

const char* to_string(Composition c) { return c == Composition::Additive ? "additive" : "time-savings"; }

std::optional<Composition> parse_composition(std::string_view text) {
  if (text == "additive") return Composition::Additive;
  if (text == "time-savings") return Composition::TimeSavings;
  return std::nullopt;
}

PoolId resolve_fast_pool(const ConfigurationSpace& space, const AnalysisOptions& options) {
  if (space.pools.empty()) throw DataError("configuration space has no pools");
  if (options.fast_pool) {
    for (const auto& p : space.pools) {
      if (p.id == *options.fast_pool) return p.id;
    }
    throw DataError("unknown fast pool " + std::to_string(*options.fast_pool));
  }
  return space.pools.size() > 1 ? space.pools[1].id : space.pools[0].id;
}

namespace {

// True when every group outside the fast pool sits in the reference pool, so
// the placement is fully described by its set of fast groups.
bool is_subset_form(const Placement& p, PoolId reference, PoolId fast) {
  return std::all_of(p.assignment.begin(), p.assignment.end(),
                     [&](PoolId id) { return id == reference || id == fast; });
}

}  // namespace

std::vector<PlacementStat> compute_speedups(std::span<const MeasurementSet> measurements,
                                            const ConfigurationSpace& space, const AnalysisOptions& options) {
  const PoolId fast = resolve_fast_pool(space, options);
  const PoolId reference_pool = space.pools.front().id;

  std::map<std::size_t, const MeasurementSet*> by_index;
  for (const auto& m : measurements) {
    if (m.placement_index >= space.placements.size()) {
      throw DataError("measurement for placement " + std::to_string(m.placement_index) +
                      " outside the configuration space");
    }
    by_index[m.placement_index] = &m;
  }
  auto ref = by_index.find(ConfigurationSpace::reference_index());
  if (ref == by_index.end() || !ref->second->usable() || !(ref->second->mean > 0)) {
    throw DataError("no reference measurement");
  }
  const double ref_mean = ref->second->mean;

  std::vector<PlacementStat> stats;
  std::map<GroupId, double> singletons;
  for (const auto& [index, m] : by_index) {
    if (!m->usable()) continue;
    if (!(m->mean > 0)) throw DataError("placement " + std::to_string(index) + " has a zero mean runtime");
    const Placement& p = space.placements[index];
    PlacementStat s;
    s.placement_index = index;
    s.label = placement_label(p, fast);
    s.speedup = ref_mean / m->mean;
    s.hbm_data_fraction = data_fraction(p, fast);
    for (std::size_t g = 0; g < p.assignment.size(); ++g) {
      if (p.assignment[g] != fast) continue;
      ++s.fast_group_count;
      s.hbm_access_fraction += space.groups[g].sample_share;
    }
    s.hbm_access_fraction = std::clamp(s.hbm_access_fraction, 0.0, 1.0);
    if (s.fast_group_count == 1 && fast != reference_pool && is_subset_form(p, reference_pool, fast)) {
      for (std::size_t g = 0; g < p.assignment.size(); ++g) {
        if (p.assignment[g] == fast) singletons[static_cast<GroupId>(g)] = s.speedup;
      }
    }
    stats.push_back(std::move(s));
  }

  for (auto& s : stats) {
    const Placement& p = space.placements[s.placement_index];
    if (s.fast_group_count < 2 || fast == reference_pool || !is_subset_form(p, reference_pool, fast)) continue;
    std::vector<GroupId> subset;
    bool complete = true;
    for (std::size_t g = 0; g < p.assignment.size(); ++g) {
      if (p.assignment[g] != fast) continue;
      subset.push_back(static_cast<GroupId>(g));
      complete = complete && singletons.contains(static_cast<GroupId>(g));
    }
    if (complete) s.expected_speedup = expected_speedup(singletons, subset, options.composition);
  }
  return stats;
}

double expected_speedup(const std::map<GroupId, double>& singletons, std::span<const GroupId> subset,
                        Composition composition) {
  double acc = 0.0;
  for (GroupId g : subset) {
    auto it = singletons.find(g);
    if (it == singletons.end()) throw DataError("missing singleton speedup for group " + std::to_string(g));
    acc += composition == Composition::Additive ? it->second - 1.0 : 1.0 / it->second - 1.0;
  }
  return composition == Composition::Additive ? 1.0 + acc : 1.0 / (1.0 + acc);
}

ThresholdChoice find_threshold_placement(std::span<const PlacementStat> stats, double threshold) {
  if (stats.empty()) throw DataError("no placements to choose from");
  double max_speedup = stats.front().speedup;
  for (const auto& s : stats) max_speedup = std::max(max_speedup, s.speedup);
  const double cutoff = threshold * max_speedup;

  const PlacementStat* best = nullptr;
  for (const auto& s : stats) {
    if (s.speedup < cutoff) continue;
    if (best == nullptr || s.hbm_data_fraction < best->hbm_data_fraction ||
        (s.hbm_data_fraction == best->hbm_data_fraction &&
         (s.speedup > best->speedup ||
          (s.speedup == best->speedup && s.placement_index < best->placement_index)))) {
      best = &s;
    }
  }
  return {best->placement_index, best->hbm_data_fraction, best->speedup};
}

AnalysisReport build_report(std::span<const MeasurementSet> measurements, const ConfigurationSpace& space,
                            const AnalysisOptions& options) {
  if (!(options.threshold > 0 && options.threshold <= 1)) throw DataError("threshold must lie in (0, 1]");
  AnalysisReport report;
  report.stats = compute_speedups(measurements, space, options);
  report.fast_pool = resolve_fast_pool(space, options);
  report.composition = options.composition;
  report.threshold = options.threshold;

  const PlacementStat* best = &report.stats.front();
  for (const auto& s : report.stats) {
    if (s.speedup > best->speedup) best = &s;
  }
  report.max_speedup = best->speedup;
  report.best_placement = best->placement_index;

  if (auto all_fast = space.all_in_pool(report.fast_pool)) {
    for (const auto& s : report.stats) {
      if (s.placement_index == *all_fast) report.all_fast_speedup = s.speedup;
    }
  }

  const auto choice = find_threshold_placement(report.stats, report.threshold);
  report.threshold_placement = choice.placement_index;
  report.threshold_data_fraction = choice.data_fraction;
  return report;
}

SummaryRow summarize(const AnalysisReport& report) {
  return {report.max_speedup, report.all_fast_speedup, report.threshold_data_fraction * 100.0};
}

std::string format_summary(const SummaryRow& row) {
  char buf[96];
  char all_fast[32] = "n/a";
  if (row.all_fast_speedup) std::snprintf(all_fast, sizeof all_fast, "%.2f", *row.all_fast_speedup);
  std::snprintf(buf, sizeof buf, "%.2f,%s,%.1f", row.max_speedup, all_fast, row.threshold_data_percent);
  return buf;
}

}  // namespace hmpt
