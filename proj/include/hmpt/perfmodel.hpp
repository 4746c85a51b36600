#pragma once

// Deterministic machine model used as the built-in executor. Bandwidth-bound
// kernels cost the slowest pool's read+write byte time (times a penalty for
// fast-to-slow write traffic), latency-bound kernels cost one load latency
// per dependent access.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmpt/configspace.hpp"
#include "hmpt/grouping.hpp"
#include "hmpt/trace.hpp"

namespace hmpt {

inline constexpr double kDefaultCrossWritePenalty = 1.0 / 0.65;

struct MachineModel {
  std::vector<MemoryPoolDescriptor> pools;
  std::uint32_t cores = 48;
  double clock_hz = 2.1e9;
  double flops_per_cycle = 32.0;
  double cross_write_penalty = kDefaultCrossWritePenalty;

  double peak_compute() const { return static_cast<double>(cores) * clock_hz * flops_per_cycle; }
  const MemoryPoolDescriptor& pool(PoolId id) const;
  void validate() const;

  bool operator==(const MachineModel&) const = default;
};

// Two-pool socket: DDR (pool 0, reference) and HBM (pool 1). DDR reads at
// 225 GB/s and writes at 180 GB/s, which averages to 200 GB/s on a copy; HBM
// runs 700 GB/s both ways with 1.2x the DDR load latency.
MachineModel default_machine();

enum class StreamDirection : std::uint8_t { Read, Write };

struct StreamSpec {
  GroupId group = 0;
  StreamDirection direction = StreamDirection::Read;
  std::uint64_t bytes = 0;

  bool operator==(const StreamSpec&) const = default;
};

enum class KernelMode : std::uint8_t { BandwidthBound, LatencyBound };

struct KernelSpec {
  std::string name;
  std::vector<StreamSpec> streams;
  double flops = 0.0;
  KernelMode mode = KernelMode::BandwidthBound;
  std::uint64_t dependent_accesses = 0;  // latency mode only

  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

struct WorkloadItem {
  KernelSpec kernel;
  std::uint64_t repetitions = 1;

  bool operator==(const WorkloadItem&) const = default;
};

struct WorkloadSpec {
  std::vector<WorkloadItem> kernels;

  void validate() const;
  bool operator==(const WorkloadSpec&) const = default;
};

// `assignment[g]` is the pool of group g. Throws DataError when a stream
// references a group outside the assignment.
double simulate_kernel(const KernelSpec& kernel, std::span<const PoolId> assignment, const MachineModel& machine);
double simulate_workload(const WorkloadSpec& workload, std::span<const PoolId> assignment,
                         const MachineModel& machine);

inline double simulate_workload(const WorkloadSpec& workload, const Placement& placement,
                                const MachineModel& machine) {
  return simulate_workload(workload, placement.assignment, machine);
}

struct StreamTableRow {
  std::string subtest;    // "Copy" or "Add"
  std::string placement;  // e.g. "HBM+DDR->HBM"
  std::vector<PoolId> pools;
  double bandwidth = 0.0;  // moved bytes / simulated seconds
};

inline constexpr std::uint64_t kStreamArrayBytes = 16'000'000'000ULL;

// Copy over every (src, dst) and Add over every (a, b, dst) pool choice.
std::vector<StreamTableRow> stream_table(const MachineModel& machine);

KernelSpec stream_copy_kernel(std::uint64_t bytes_per_array = kStreamArrayBytes);
KernelSpec stream_add_kernel(std::uint64_t bytes_per_array = kStreamArrayBytes);

// min(peak compute, intensity * read bandwidth of `pool`).
double roofline_bound(const MachineModel& machine, double intensity, PoolId pool);

// Machine file: {pools:[{id,label,capacity_bytes,bw_bytes_per_s,latency_ns}],
// cores, clock_hz, flops_per_cycle, cross_write_penalty}. A pool may give
// read_bw_bytes_per_s / write_bw_bytes_per_s instead of (or on top of)
// bw_bytes_per_s.
MachineModel parse_machine(const std::string& json_text);
MachineModel load_machine(const std::string& path);
std::string machine_to_json(const MachineModel& machine);

// Workload file: JSON list of {name, mode, flops, streams:[{group,dir,bytes}],
// reps, dependent_accesses}; mode is "bandwidth" or "latency", dir "read" or
// "write".
WorkloadSpec parse_workload(const std::string& json_text);
WorkloadSpec load_workload(const std::string& path);
std::string workload_to_json(const WorkloadSpec& workload);

}  // namespace hmpt
