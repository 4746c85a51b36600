#include "hmpt/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hmpt/error.hpp"
#include "json_io.hpp"

namespace hmpt {

using detail::json;

// Defined in external.cpp.
RunRecord run_external(const ExternalExecutor& executor, const std::string& plan_path, std::size_t placement_index,
                       std::size_t run_index);

PlanFile write_plan(const Placement& placement, std::span<const AllocationGroup> groups, PoolId default_pool) {
  if (placement.assignment.size() != groups.size()) throw DataError("placement must assign every group exactly once");
  PlanFile plan;
  plan.default_pool = default_pool;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (SiteId s : groups[g].member_sites) plan.assignments[s] = placement.assignment[g];
  }
  return plan;
}

std::string plan_to_json(const PlanFile& plan) {
  json assignments = json::object();
  for (const auto& [site, pool] : plan.assignments) assignments[format_hex(site)] = pool;
  json doc{{"version", plan.version}, {"default_pool", plan.default_pool}, {"assignments", assignments}};
  return doc.dump(2) + "\n";
}

PlanFile read_plan(const std::string& json_text, const PlanChecks& checks) {
  const json doc = detail::parse_json(json_text, "plan file");
  PlanFile plan = detail::guarded("plan file", [&] {
    PlanFile p;
    p.version = doc.at("version").get<int>();
    if (p.version != kPlanVersion) {
      throw DataError("plan file: version " + std::to_string(p.version) + " is not supported (expected " +
                      std::to_string(kPlanVersion) + ")");
    }
    p.default_pool = doc.value("default_pool", PoolId{0});
    for (const auto& [key, value] : doc.at("assignments").items()) {
      auto site = parse_hex(key);
      if (!site) throw DataError("plan file: bad site id '" + key + "'");
      p.assignments[*site] = value.get<PoolId>();
    }
    return p;
  });

  if (checks.known_sites) {
    for (const auto& [site, pool] : plan.assignments) {
      if (!checks.known_sites->contains(site)) throw DataError("plan file: unknown site " + format_hex(site));
    }
  }
  if (checks.known_pools) {
    if (!checks.known_pools->contains(plan.default_pool)) {
      throw DataError("plan file: unknown default pool " + std::to_string(plan.default_pool));
    }
    for (const auto& [site, pool] : plan.assignments) {
      if (!checks.known_pools->contains(pool)) throw DataError("plan file: unknown pool " + std::to_string(pool));
    }
  }
  return plan;
}

void save_plan(const std::string& path, const PlanFile& plan) { detail::write_file(path, plan_to_json(plan)); }

PlanFile load_plan(const std::string& path, const PlanChecks& checks) {
  return read_plan(detail::read_file(path, "plan file"), checks);
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::Failed:
      return "failed";
    case RunStatus::Timeout:
      return "timeout";
  }
  return "failed";
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
  if (text == "ok") return RunStatus::Ok;
  if (text == "failed") return RunStatus::Failed;
  if (text == "timeout") return RunStatus::Timeout;
  return std::nullopt;
}

MeasurementSet summarize_runs(std::size_t placement_index, std::vector<double> runs, std::size_t failed_runs) {
  MeasurementSet m;
  m.placement_index = placement_index;
  m.failed_runs = failed_runs;
  m.runs = std::move(runs);
  if (m.runs.empty()) return m;
  const double n = static_cast<double>(m.runs.size());
  m.mean = std::accumulate(m.runs.begin(), m.runs.end(), 0.0) / n;
  if (m.runs.size() > 1) {
    double ss = 0.0;
    for (double r : m.runs) ss += (r - m.mean) * (r - m.mean);
    m.stddev = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

std::vector<MeasurementSet> measurements_from_log(std::span<const RunRecord> log) {
  std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> by_placement;
  for (const auto& r : log) {
    auto& [runs, failed] = by_placement[r.placement_index];
    if (r.status == RunStatus::Ok) {
      runs.push_back(r.seconds);
    } else {
      ++failed;
    }
  }
  std::vector<MeasurementSet> out;
  for (auto& [index, entry] : by_placement) out.push_back(summarize_runs(index, std::move(entry.first), entry.second));
  return out;
}

namespace {

void finish(CampaignResult& result) {
  result.measurements = measurements_from_log(result.log);
  for (const auto& m : result.measurements) {
    if (!m.usable()) {
      result.warnings.push_back("placement " + std::to_string(m.placement_index) +
                                ": all runs failed, excluded from analysis");
    }
  }
}

void check_campaign(const ConfigurationSpace& space, std::size_t n) {
  if (n == 0) throw DataError("campaign needs at least one run per placement");
  if (space.placements.empty()) throw DataError("campaign over an empty configuration space");
}

CampaignResult run_simulated(const ConfigurationSpace& space, const SimulatedExecutor& sim, std::size_t n,
                             bool parallel) {
  sim.machine.validate();
  sim.workload.validate();
  const auto count = static_cast<std::ptrdiff_t>(space.placements.size());
  std::vector<double> seconds(space.placements.size());
  // Validate once up front so no exception has to leave the parallel region.
  (void)simulate_workload(sim.workload, space.placements.front(), sim.machine);

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      seconds[idx] = simulate_workload(sim.workload, space.placements[idx], sim.machine);
    }
  } else {
    for (std::size_t i = 0; i < space.placements.size(); ++i) {
      seconds[i] = simulate_workload(sim.workload, space.placements[i], sim.machine);
    }
  }

  CampaignResult result;
  result.log.reserve(space.placements.size() * n);
  for (std::size_t i = 0; i < space.placements.size(); ++i) {
    for (std::size_t r = 0; r < n; ++r) result.log.push_back({i, r, seconds[i], RunStatus::Ok});
  }
  finish(result);
  return result;
}

std::string plan_path_for(const ExternalExecutor& ext, std::size_t placement_index) {
  return ext.work_dir + "/plan_" + std::to_string(placement_index) + ".json";
}

CampaignResult run_external_campaign(const ConfigurationSpace& space, const ExternalExecutor& ext, std::size_t n) {
  if (ext.command.empty()) throw DataError("external executor needs a command");
  CampaignResult result;
  for (std::size_t i = 0; i < space.placements.size(); ++i) {
    const std::string plan_path = plan_path_for(ext, i);
    save_plan(plan_path, write_plan(space.placements[i], space.groups, ext.default_pool));
    for (std::size_t r = 0; r < n; ++r) result.log.push_back(run_external(ext, plan_path, i, r));
  }
  finish(result);
  return result;
}

CampaignResult dispatch(const ConfigurationSpace& space, const Executor& executor, std::size_t n, bool parallel) {
  check_campaign(space, n);
  if (const auto* sim = std::get_if<SimulatedExecutor>(&executor)) return run_simulated(space, *sim, n, parallel);
  return run_external_campaign(space, std::get<ExternalExecutor>(executor), n);
}

}  // namespace

CampaignResult run_campaign(const ConfigurationSpace& space, const Executor& executor, std::size_t n) {
  return dispatch(space, executor, n, true);
}

namespace serial {
CampaignResult run_campaign(const ConfigurationSpace& space, const Executor& executor, std::size_t n) {
  return dispatch(space, executor, n, false);
}
}  // namespace serial

void write_campaign_log(std::ostream& out, std::span<const RunRecord> log) {
  out << "placement_index,run_index,seconds,status\n";
  char buf[64];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%.17g", r.seconds);
    out << r.placement_index << ',' << r.run_index << ',' << buf << ',' << to_string(r.status) << '\n';
  }
}

std::vector<RunRecord> parse_campaign_log(std::istream& in) {
  std::vector<RunRecord> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("placement_index", 0) == 0) continue;

    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError(line_no, "campaign log row needs 4 columns");

    RunRecord r;
    try {
      std::size_t used = 0;
      r.placement_index = std::stoull(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("index");
      r.run_index = std::stoull(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("run");
      r.seconds = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("seconds");
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad number in campaign log");
    }
    auto status = parse_run_status(cells[3]);
    if (!status) throw ParseError(line_no, "bad status '" + cells[3] + "'");
    r.status = *status;
    if (r.status == RunStatus::Ok && !(r.seconds >= 0)) throw ParseError(line_no, "negative runtime");
    log.push_back(r);
  }
  return log;
}

std::vector<RunRecord> load_campaign_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open campaign log '" + path + "'");
  return parse_campaign_log(in);
}

}  // namespace hmpt
