#include "hmpt/configspace.hpp"

#include <cmath>
#include <set>

#include "hmpt/error.hpp"

namespace hmpt {

namespace {

void check_inputs(const std::vector<AllocationGroup>& groups, const std::vector<MemoryPoolDescriptor>& pools) {
  if (groups.empty()) throw DataError("configuration space needs at least one group");
  if (pools.empty()) throw DataError("configuration space needs at least one pool");
  validate_pools(pools);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].id != i) throw DataError("group ids must be 0..k-1 in order");
  }
  const double log2_size = static_cast<double>(groups.size()) * std::log2(static_cast<double>(pools.size()));
  if (log2_size > kMaxSpaceLog2) throw DataError("configuration space too large");
}

std::size_t space_size(std::size_t k, std::size_t m) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < k; ++i) n *= m;
  return n;
}

std::vector<PoolId> decode(std::size_t index, std::size_t k, const std::vector<MemoryPoolDescriptor>& pools) {
  std::vector<PoolId> assignment(k);
  const std::size_t m = pools.size();
  for (std::size_t g = 0; g < k; ++g) {
    assignment[g] = pools[index % m].id;
    index /= m;
  }
  return assignment;
}

}  // namespace

void validate_pools(std::span<const MemoryPoolDescriptor> pools) {
  std::set<PoolId> seen;
  for (const auto& p : pools) {
    p.validate();
    if (!seen.insert(p.id).second) throw DataError("duplicate pool id " + std::to_string(p.id));
  }
}

std::uint64_t Placement::total_bytes() const {
  std::uint64_t total = 0;
  for (const auto& [pool, bytes] : bytes_per_pool) total += bytes;
  return total;
}

Placement make_placement(std::vector<PoolId> assignment, std::span<const AllocationGroup> groups,
                         std::span<const MemoryPoolDescriptor> pools) {
  if (assignment.size() != groups.size()) throw DataError("placement must assign every group exactly once");
  Placement p;
  for (const auto& pool : pools) p.bytes_per_pool[pool.id] = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto it = p.bytes_per_pool.find(assignment[g]);
    if (it == p.bytes_per_pool.end()) throw DataError("unknown pool id " + std::to_string(assignment[g]));
    it->second += groups[g].total_bytes;
  }
  p.assignment = std::move(assignment);
  return p;
}

ConfigurationSpace enumerate_placements(std::vector<AllocationGroup> groups, std::vector<MemoryPoolDescriptor> pools) {
  check_inputs(groups, pools);
  const std::size_t k = groups.size();
  const auto n = static_cast<std::ptrdiff_t>(space_size(k, pools.size()));

  ConfigurationSpace space;
  space.placements.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    space.placements[static_cast<std::size_t>(i)] = make_placement(decode(static_cast<std::size_t>(i), k, pools), groups, pools);
  }
  space.groups = std::move(groups);
  space.pools = std::move(pools);
  return space;
}

namespace serial {

ConfigurationSpace enumerate_placements(std::vector<AllocationGroup> groups, std::vector<MemoryPoolDescriptor> pools) {
  check_inputs(groups, pools);
  ConfigurationSpace space;
  // Odometer over pool positions, group 0 as the least significant digit.
  std::vector<std::size_t> digits(groups.size(), 0);
  for (;;) {
    std::vector<PoolId> assignment;
    for (auto d : digits) assignment.push_back(pools[d].id);
    space.placements.push_back(make_placement(std::move(assignment), groups, pools));
    std::size_t g = 0;
    while (g < digits.size() && ++digits[g] == pools.size()) digits[g++] = 0;
    if (g == digits.size()) break;
  }
  space.groups = std::move(groups);
  space.pools = std::move(pools);
  return space;
}

}  // namespace serial

std::size_t ConfigurationSpace::index_of(std::span<const PoolId> assignment) const {
  if (assignment.size() != groups.size()) throw DataError("placement must assign every group exactly once");
  std::size_t index = 0;
  for (std::size_t g = groups.size(); g-- > 0;) {
    std::size_t digit = pools.size();
    for (std::size_t p = 0; p < pools.size(); ++p) {
      if (pools[p].id == assignment[g]) digit = p;
    }
    if (digit == pools.size()) throw DataError("unknown pool id " + std::to_string(assignment[g]));
    index = index * pools.size() + digit;
  }
  return index;
}

std::optional<std::size_t> ConfigurationSpace::all_in_pool(PoolId pool) const {
  for (std::size_t p = 0; p < pools.size(); ++p) {
    if (pools[p].id == pool) return index_of(std::vector<PoolId>(groups.size(), pool));
  }
  return std::nullopt;
}

std::size_t ConfigurationSpace::index_of_subset(std::uint64_t fast_groups, PoolId fast) const {
  std::vector<PoolId> assignment(groups.size(), pools.front().id);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (fast_groups >> g & 1U) assignment[g] = fast;
  }
  return index_of(assignment);
}

double data_fraction(const Placement& placement, PoolId pool) {
  auto it = placement.bytes_per_pool.find(pool);
  if (it == placement.bytes_per_pool.end()) throw DataError("unknown pool id " + std::to_string(pool));
  const std::uint64_t total = placement.total_bytes();
  if (total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

std::vector<CapacityViolation> validate_capacity(const Placement& placement,
                                                 std::span<const MemoryPoolDescriptor> pools) {
  std::vector<CapacityViolation> out;
  for (const auto& [pool, bytes] : placement.bytes_per_pool) {
    const MemoryPoolDescriptor* desc = nullptr;
    for (const auto& p : pools) {
      if (p.id == pool) desc = &p;
    }
    if (desc == nullptr) throw DataError("placement uses unknown pool " + std::to_string(pool));
    if (bytes > desc->capacity) out.push_back({pool, desc->label, bytes, desc->capacity});
  }
  return out;
}

std::uint64_t fast_groups_mask(const Placement& placement, PoolId fast) {
  std::uint64_t mask = 0;
  for (std::size_t g = 0; g < placement.assignment.size() && g < 64; ++g) {
    if (placement.assignment[g] == fast) mask |= std::uint64_t{1} << g;
  }
  return mask;
}

std::string placement_label(const Placement& placement, PoolId fast) {
  std::string label;
  for (std::size_t g = 0; g < placement.assignment.size(); ++g) {
    if (placement.assignment[g] != fast) continue;
    if (!label.empty()) label += '+';
    label += std::to_string(g);
  }
  return label.empty() ? "ref" : label;
}

}  // namespace hmpt
