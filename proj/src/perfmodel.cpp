#include "hmpt/perfmodel.hpp"

#include <algorithm>
#include <map>

#include "hmpt/error.hpp"
#include "json_io.hpp"

namespace hmpt {

using detail::json;

const MemoryPoolDescriptor& MachineModel::pool(PoolId id) const {
  for (const auto& p : pools) {
    if (p.id == id) return p;
  }
  throw DataError("machine has no pool " + std::to_string(id));
}

void MachineModel::validate() const {
  if (pools.empty()) throw DataError("machine needs at least one pool");
  validate_pools(pools);
  if (cores == 0 || !(clock_hz > 0) || !(flops_per_cycle > 0)) {
    throw DataError("machine needs positive cores, clock_hz and flops_per_cycle");
  }
  if (!(cross_write_penalty >= 1.0)) throw DataError("cross_write_penalty must be >= 1");
}

MachineModel default_machine() {
  MachineModel m;
  m.pools = {
      {0, "DDR", 256'000'000'000ULL, 225e9, 180e9, 107.0},
      {1, "HBM", 128'000'000'000ULL, 700e9, 700e9, 107.0 * 1.2},
  };
  return m;
}

void KernelSpec::validate() const {
  for (const auto& s : streams) {
    if (s.bytes == 0) throw DataError("kernel '" + name + "': stream bytes must be positive");
  }
  if (flops < 0) throw DataError("kernel '" + name + "': flops must be nonnegative");
  if (mode == KernelMode::BandwidthBound && streams.empty()) {
    throw DataError("kernel '" + name + "': bandwidth-bound kernel needs streams");
  }
  if (mode == KernelMode::LatencyBound) {
    if (dependent_accesses == 0) throw DataError("kernel '" + name + "': latency-bound kernel needs dependent_accesses");
    if (streams.empty()) throw DataError("kernel '" + name + "': latency-bound kernel must reference a group");
    for (const auto& s : streams) {
      if (s.group != streams.front().group) {
        throw DataError("kernel '" + name + "': latency-bound kernel must reference a single group");
      }
    }
  }
}

void WorkloadSpec::validate() const {
  if (kernels.empty()) throw DataError("workload has no kernels");
  for (const auto& k : kernels) k.kernel.validate();
}

namespace {

PoolId pool_of(const StreamSpec& s, std::span<const PoolId> assignment, const std::string& kernel) {
  if (s.group >= assignment.size()) {
    throw DataError("kernel '" + kernel + "' references unplaced group " + std::to_string(s.group));
  }
  return assignment[s.group];
}

}  // namespace

double simulate_kernel(const KernelSpec& kernel, std::span<const PoolId> assignment, const MachineModel& machine) {
  kernel.validate();

  if (kernel.mode == KernelMode::LatencyBound) {
    const PoolId p = pool_of(kernel.streams.front(), assignment, kernel.name);
    return static_cast<double>(kernel.dependent_accesses) * machine.pool(p).load_latency / 1e9;
  }

  struct Traffic {
    double read_bytes = 0;
    double write_bytes = 0;
  };
  std::map<PoolId, Traffic> traffic;
  for (const auto& s : kernel.streams) {
    auto& t = traffic[pool_of(s, assignment, kernel.name)];
    (s.direction == StreamDirection::Read ? t.read_bytes : t.write_bytes) += static_cast<double>(s.bytes);
  }

  double seconds = 0.0;
  for (const auto& [id, t] : traffic) {
    const auto& p = machine.pool(id);
    seconds = std::max(seconds, t.read_bytes / p.read_bandwidth + t.write_bytes / p.write_bandwidth);
  }

  // Fast-to-slow traffic: something is written to a pool slower than another
  // pool the kernel reads from.
  bool cross_write = false;
  for (const auto& [dst, tw] : traffic) {
    if (tw.write_bytes == 0) continue;
    for (const auto& [src, tr] : traffic) {
      if (src != dst && tr.read_bytes > 0 && machine.pool(dst).write_bandwidth < machine.pool(src).read_bandwidth) {
        cross_write = true;
      }
    }
  }
  if (cross_write) seconds *= machine.cross_write_penalty;

  return std::max(seconds, kernel.flops / machine.peak_compute());
}

double simulate_workload(const WorkloadSpec& workload, std::span<const PoolId> assignment,
                         const MachineModel& machine) {
  if (workload.kernels.empty()) throw DataError("workload has no kernels");
  double total = 0.0;
  for (const auto& item : workload.kernels) {
    total += static_cast<double>(item.repetitions) * simulate_kernel(item.kernel, assignment, machine);
  }
  return total;
}

KernelSpec stream_copy_kernel(std::uint64_t bytes_per_array) {
  return {"Copy", {{0, StreamDirection::Read, bytes_per_array}, {1, StreamDirection::Write, bytes_per_array}}};
}

KernelSpec stream_add_kernel(std::uint64_t bytes_per_array) {
  return {"Add",
          {{0, StreamDirection::Read, bytes_per_array},
           {1, StreamDirection::Read, bytes_per_array},
           {2, StreamDirection::Write, bytes_per_array}}};
}

std::vector<StreamTableRow> stream_table(const MachineModel& machine) {
  machine.validate();
  std::vector<StreamTableRow> rows;

  auto moved = [](const KernelSpec& k) {
    double b = 0;
    for (const auto& s : k.streams) b += static_cast<double>(s.bytes);
    return b;
  };
  auto emit = [&](const KernelSpec& kernel, std::vector<PoolId> pools) {
    std::string label;
    for (std::size_t i = 0; i < pools.size(); ++i) {
      if (i > 0) label += (i + 1 == pools.size()) ? "->" : "+";
      label += machine.pool(pools[i]).label;
    }
    const double seconds = simulate_kernel(kernel, pools, machine);
    rows.push_back({kernel.name, std::move(label), std::move(pools), moved(kernel) / seconds});
  };

  const auto copy = stream_copy_kernel();
  for (const auto& dst : machine.pools) {
    for (const auto& src : machine.pools) emit(copy, {src.id, dst.id});
  }
  const auto add = stream_add_kernel();
  for (const auto& dst : machine.pools) {
    for (const auto& b : machine.pools) {
      for (const auto& a : machine.pools) emit(add, {a.id, b.id, dst.id});
    }
  }
  return rows;
}

double roofline_bound(const MachineModel& machine, double intensity, PoolId pool) {
  if (intensity < 0) throw DataError("arithmetic intensity must be nonnegative");
  return std::min(machine.peak_compute(), intensity * machine.pool(pool).read_bandwidth);
}

MachineModel parse_machine(const std::string& json_text) {
  const json doc = detail::parse_json(json_text, "machine file");
  MachineModel m = detail::guarded("machine file", [&] {
    MachineModel out;
    for (const auto& p : doc.at("pools")) out.pools.push_back(detail::pool_from_json(p));
    out.cores = doc.value("cores", out.cores);
    out.clock_hz = doc.value("clock_hz", out.clock_hz);
    out.flops_per_cycle = doc.value("flops_per_cycle", out.flops_per_cycle);
    out.cross_write_penalty = doc.value("cross_write_penalty", out.cross_write_penalty);
    return out;
  });
  m.validate();
  return m;
}

MachineModel load_machine(const std::string& path) { return parse_machine(detail::read_file(path, "machine file")); }

std::string machine_to_json(const MachineModel& machine) {
  json pools = json::array();
  for (const auto& p : machine.pools) pools.push_back(detail::pool_to_json(p));
  json doc{{"pools", pools},
           {"cores", machine.cores},
           {"clock_hz", machine.clock_hz},
           {"flops_per_cycle", machine.flops_per_cycle},
           {"cross_write_penalty", machine.cross_write_penalty}};
  return doc.dump(2) + "\n";
}

WorkloadSpec parse_workload(const std::string& json_text) {
  const json doc = detail::parse_json(json_text, "workload file");
  WorkloadSpec w = detail::guarded("workload file", [&] {
    if (!doc.is_array()) throw DataError("workload file must be a JSON list of kernels");
    WorkloadSpec out;
    for (const auto& k : doc) {
      WorkloadItem item;
      item.kernel.name = k.value("name", std::string{});
      const auto mode = k.value("mode", std::string("bandwidth"));
      if (mode == "bandwidth") {
        item.kernel.mode = KernelMode::BandwidthBound;
      } else if (mode == "latency") {
        item.kernel.mode = KernelMode::LatencyBound;
      } else {
        throw DataError("workload file: unknown mode '" + mode + "'");
      }
      item.kernel.flops = k.value("flops", 0.0);
      item.kernel.dependent_accesses = k.value("dependent_accesses", std::uint64_t{0});
      item.repetitions = k.value("reps", std::uint64_t{1});
      for (const auto& s : k.value("streams", json::array())) {
        StreamSpec stream;
        stream.group = s.at("group").get<GroupId>();
        const auto dir = s.at("dir").get<std::string>();
        if (dir == "read") {
          stream.direction = StreamDirection::Read;
        } else if (dir == "write") {
          stream.direction = StreamDirection::Write;
        } else {
          throw DataError("workload file: unknown stream dir '" + dir + "'");
        }
        stream.bytes = s.at("bytes").get<std::uint64_t>();
        item.kernel.streams.push_back(stream);
      }
      out.kernels.push_back(std::move(item));
    }
    return out;
  });
  w.validate();
  return w;
}

WorkloadSpec load_workload(const std::string& path) { return parse_workload(detail::read_file(path, "workload file")); }

std::string workload_to_json(const WorkloadSpec& workload) {
  json doc = json::array();
  for (const auto& item : workload.kernels) {
    const auto& k = item.kernel;
    json streams = json::array();
    for (const auto& s : k.streams) {
      streams.push_back(
          {{"group", s.group}, {"dir", s.direction == StreamDirection::Read ? "read" : "write"}, {"bytes", s.bytes}});
    }
    doc.push_back({{"name", k.name},
                   {"mode", k.mode == KernelMode::BandwidthBound ? "bandwidth" : "latency"},
                   {"flops", k.flops},
                   {"streams", streams},
                   {"reps", item.repetitions},
                   {"dependent_accesses", k.dependent_accesses}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace hmpt
