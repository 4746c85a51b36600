#pragma once

// Measurement campaigns: run the workload under every placement n times and
// keep the runtimes. Simulated campaigns fan out over placements; external
// campaigns run one process at a time.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hmpt/configspace.hpp"
#include "hmpt/perfmodel.hpp"

namespace hmpt {

inline constexpr const char* kEnvPlan = "HMPT_PLAN";
inline constexpr const char* kEnvTraceOut = "HMPT_TRACE_OUT";
inline constexpr const char* kEnvDefaultPool = "HMPT_DEFAULT_POOL";

inline constexpr int kPlanVersion = 1;

// Site -> pool routing table consumed by the shim.
struct PlanFile {
  int version = kPlanVersion;
  PoolId default_pool = 0;
  std::map<SiteId, PoolId> assignments;

  bool operator==(const PlanFile&) const = default;
};

// Expands the group -> pool assignment to one entry per member site.
PlanFile write_plan(const Placement& placement, std::span<const AllocationGroup> groups, PoolId default_pool = 0);

struct PlanChecks {
  std::optional<std::set<SiteId>> known_sites;
  std::optional<std::set<PoolId>> known_pools;
};

// {version:1, default_pool:0, assignments:{"<site_hex>": pool_id}}
std::string plan_to_json(const PlanFile& plan);
PlanFile read_plan(const std::string& json_text, const PlanChecks& checks = {});
void save_plan(const std::string& path, const PlanFile& plan);
PlanFile load_plan(const std::string& path, const PlanChecks& checks = {});

struct SimulatedExecutor {
  MachineModel machine;
  WorkloadSpec workload;
};

// The command runs under /bin/sh -c. "{plan}", "{placement}" and "{run}" in
// the template are substituted; HMPT_PLAN and HMPT_DEFAULT_POOL are always set
// for the child. The measured runtime is the child's wall-clock time.
struct ExternalExecutor {
  std::string command;
  std::map<std::string, std::string> environment;
  double timeout_seconds = 0.0;  // 0: no timeout
  std::string work_dir = ".";    // where per-placement plan files go
  PoolId default_pool = 0;
};

using Executor = std::variant<SimulatedExecutor, ExternalExecutor>;

enum class RunStatus : std::uint8_t { Ok, Failed, Timeout };

const char* to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct RunRecord {
  std::size_t placement_index = 0;
  std::size_t run_index = 0;
  double seconds = 0.0;
  RunStatus status = RunStatus::Ok;
  // Steady-clock interval of an external run; zero for simulated runs.
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;

  bool operator==(const RunRecord&) const = default;
};

struct MeasurementSet {
  std::size_t placement_index = 0;
  std::vector<double> runs;  // successful runs only
  std::size_t failed_runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run

  bool usable() const { return !runs.empty(); }
};

struct CampaignResult {
  std::vector<RunRecord> log;
  std::vector<MeasurementSet> measurements;  // one per placement, by index
  std::vector<std::string> warnings;
};

MeasurementSet summarize_runs(std::size_t placement_index, std::vector<double> runs, std::size_t failed_runs);

// Groups log records by placement. Placements without any record are absent.
std::vector<MeasurementSet> measurements_from_log(std::span<const RunRecord> log);

// Exactly placements * n executions. Throws DataError when n == 0.
CampaignResult run_campaign(const ConfigurationSpace& space, const Executor& executor, std::size_t n);

namespace serial {
CampaignResult run_campaign(const ConfigurationSpace& space, const Executor& executor, std::size_t n);
}

// CSV: placement_index,run_index,seconds,status
void write_campaign_log(std::ostream& out, std::span<const RunRecord> log);
std::vector<RunRecord> parse_campaign_log(std::istream& in);
std::vector<RunRecord> load_campaign_log(const std::string& path);

}  // namespace hmpt
