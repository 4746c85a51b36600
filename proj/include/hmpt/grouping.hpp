#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmpt/trace.hpp"

namespace hmpt {

using GroupId = std::uint32_t;

inline constexpr std::uint64_t kDefaultSizeThreshold = 64ULL << 20;
inline constexpr std::size_t kDefaultTopK = 7;

// One call site after aliasing every allocation it made.
struct AliasedSite {
  SiteId site = 0;
  std::uint64_t total_bytes = 0;  // peak concurrent live bytes of the site
  double sample_share = 0.0;      // fraction of all samples

  bool operator==(const AliasedSite&) const = default;
};

struct GroupingRule {
  std::string name;
  std::vector<SiteId> sites;
};

struct GroupingConfig {
  std::uint64_t size_threshold = kDefaultSizeThreshold;
  std::size_t top_k = kDefaultTopK;
  // Measured per-site impact (e.g. singleton speedup). When absent, sites are
  // ranked by sample_share * total_bytes.
  std::optional<std::map<SiteId, double>> impact_scores;
  std::vector<GroupingRule> manual_rules;

  void validate() const;
};

struct AllocationGroup {
  GroupId id = 0;
  std::vector<SiteId> member_sites;  // ascending
  std::uint64_t total_bytes = 0;
  double sample_share = 0.0;
  bool is_rest_group = false;
  std::string name;  // manual rule name, empty otherwise

  bool operator==(const AllocationGroup&) const = default;
};

// One entry per distinct site, ascending site id. Requires attributed samples.
std::vector<AliasedSite> alias_sites(const TraceBundle& bundle);

// Top-k singleton groups by rank, then at most one rest group holding every
// site below the size threshold or beyond rank k. Ties break by site id.
std::vector<AllocationGroup> form_groups(const std::vector<AliasedSite>& aliased, const GroupingConfig& cfg);

// Each rule becomes one group (in rule order); the remaining sites go through
// form_groups. Throws DataError for unknown sites or overlapping rules.
std::vector<AllocationGroup> apply_manual_rules(const std::vector<AliasedSite>& aliased,
                                                const std::vector<GroupingRule>& rules,
                                                const GroupingConfig& cfg);

// Dispatches on cfg.manual_rules.
std::vector<AllocationGroup> group_allocations(const std::vector<AliasedSite>& aliased, const GroupingConfig& cfg);

// JSON array of {"name": text, "sites": [hex site ids]}.
std::vector<GroupingRule> parse_rules(const std::string& json_text);
std::vector<GroupingRule> load_rules(const std::string& path);

}  // namespace hmpt
