#pragma once

// The configuration space: every total assignment of allocation groups to
// memory pools. For two pools each placement corresponds to the subset of
// groups that sits in the fast pool.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmpt/grouping.hpp"
#include "hmpt/trace.hpp"

namespace hmpt {

// Enumeration refuses spaces larger than 2^24 placements.
inline constexpr double kMaxSpaceLog2 = 24.0;

struct Placement {
  std::vector<PoolId> assignment;                   // pool of group i
  std::map<PoolId, std::uint64_t> bytes_per_pool;  // every pool of the space, zero if unused

  std::uint64_t total_bytes() const;
  bool operator==(const Placement&) const = default;
};

struct ConfigurationSpace {
  std::vector<AllocationGroup> groups;
  std::vector<MemoryPoolDescriptor> pools;
  std::vector<Placement> placements;

  // Index 0 puts every group in pools[0], the slow reference pool.
  static constexpr std::size_t reference_index() { return 0; }
  std::size_t index_of(std::span<const PoolId> assignment) const;
  std::optional<std::size_t> all_in_pool(PoolId pool) const;
  // Index of the placement with exactly `fast_groups` (bitmask) in `fast`
  // and everything else in pools[0].
  std::size_t index_of_subset(std::uint64_t fast_groups, PoolId fast) const;
};

Placement make_placement(std::vector<PoolId> assignment, std::span<const AllocationGroup> groups,
                         std::span<const MemoryPoolDescriptor> pools);

// All m^k placements in mixed-radix order: group 0 varies fastest, pools in
// the given order. Parallel fill over placement indices.
ConfigurationSpace enumerate_placements(std::vector<AllocationGroup> groups, std::vector<MemoryPoolDescriptor> pools);

namespace serial {
ConfigurationSpace enumerate_placements(std::vector<AllocationGroup> groups, std::vector<MemoryPoolDescriptor> pools);
}

// Bytes in `pool` over total bytes; 0 when there are no bytes at all.
// Throws DataError for a pool outside the placement's space.
double data_fraction(const Placement& placement, PoolId pool);

struct CapacityViolation {
  PoolId pool = 0;
  std::string label;
  std::uint64_t assigned = 0;
  std::uint64_t capacity = 0;

  bool operator==(const CapacityViolation&) const = default;
};

// Empty result means the placement fits.
std::vector<CapacityViolation> validate_capacity(const Placement& placement,
                                                 std::span<const MemoryPoolDescriptor> pools);

// Bit i set when group i is in `fast`.
std::uint64_t fast_groups_mask(const Placement& placement, PoolId fast);

// "ref" when no group is in `fast`, else the fast group ids joined by '+'.
std::string placement_label(const Placement& placement, PoolId fast);

// Throws DataError on duplicate ids or invalid parameters.
void validate_pools(std::span<const MemoryPoolDescriptor> pools);

// Space file: {version:1, pools:[machine-file pools], groups:[{id, name,
// sites:[hex], total_bytes, sample_share, rest}]}. Placements are not stored;
// loading re-enumerates them.
std::string space_to_json(const ConfigurationSpace& space);
ConfigurationSpace parse_space(const std::string& json_text);
ConfigurationSpace load_space(const std::string& path);
void save_space(const std::string& path, const ConfigurationSpace& space);

}  // namespace hmpt
