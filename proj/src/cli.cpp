#include "hmpt/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hmpt/analysis.hpp"
#include "hmpt/configspace.hpp"
#include "hmpt/error.hpp"
#include "hmpt/grouping.hpp"
#include "hmpt/harness.hpp"
#include "hmpt/perfmodel.hpp"
#include "hmpt/report.hpp"
#include "hmpt/trace.hpp"

namespace hmpt {

namespace {

struct GroupingFlags {
  std::string rules;
  std::uint64_t size_threshold = kDefaultSizeThreshold;
  std::size_t top_k = kDefaultTopK;
  std::string machine;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rules", rules, "manual grouping rules (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--size-threshold", size_threshold, "bytes below which sites fold into the rest group");
    cmd->add_option("--top-k", top_k, "number of singleton groups")->check(CLI::PositiveNumber);
    cmd->add_option("--machine", machine, "machine file (JSON); default machine when omitted")
        ->check(CLI::ExistingFile);
  }

  MachineModel load_machine_or_default() const { return machine.empty() ? default_machine() : load_machine(machine); }
};

struct TraceAnalysis {
  TraceBundle bundle;
  std::vector<AliasedSite> aliased;
  ConfigurationSpace space;
};

TraceAnalysis analyze_trace(const std::string& path, const GroupingFlags& flags) {
  TraceAnalysis a;
  a.bundle = attribute_samples(load_trace(path));
  a.aliased = alias_sites(a.bundle);
  GroupingConfig cfg;
  cfg.size_threshold = flags.size_threshold;
  cfg.top_k = flags.top_k;
  if (!flags.rules.empty()) cfg.manual_rules = load_rules(flags.rules);
  auto groups = group_allocations(a.aliased, cfg);
  a.space = enumerate_placements(std::move(groups), flags.load_machine_or_default().pools);
  return a;
}

std::string gb(std::uint64_t bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f GB", static_cast<double>(bytes) / 1e9);
  return buf;
}

std::vector<std::size_t> parse_index_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " '" + item + "'");
    }
  }
  return out;
}

int cmd_analyze(const std::string& trace, const GroupingFlags& flags, const std::string& out_path,
                const std::string& format, std::ostream& out) {
  auto a = analyze_trace(trace, flags);
  if (!out_path.empty()) save_space(out_path, a.space);
  if (format == "json") {
    out << space_to_json(a.space);
    return kExitOk;
  }
  out << "footprint: " << footprint(a.bundle) << " bytes (" << gb(footprint(a.bundle)) << ")\n";
  out << "samples: " << a.bundle.samples.size() << " (" << a.bundle.unattributed_samples << " unattributed)\n";
  out << "sites: " << a.aliased.size() << "\n";
  out << "groups: " << a.space.groups.size() << " (" << a.space.placements.size() << " placements)\n";
  out << "group,name,sites,total_bytes,sample_share\n";
  for (const auto& g : a.space.groups) {
    char share[32];
    std::snprintf(share, sizeof share, "%.4f", g.sample_share);
    out << g.id << ',' << (g.name.empty() ? "-" : g.name) << ',' << g.member_sites.size() << ',' << g.total_bytes
        << ',' << share << '\n';
  }
  return kExitOk;
}

int cmd_plan(const std::string& trace, const std::string& space_path, const GroupingFlags& flags,
             const std::string& hbm, const std::string& plan_path, std::ostream& out) {
  if (trace.empty() == space_path.empty()) throw UsageError("plan needs exactly one of <trace> or --space");
  ConfigurationSpace space = space_path.empty() ? analyze_trace(trace, flags).space : load_space(space_path);
  if (space.pools.size() < 2) throw DataError("plan needs a fast pool besides the default pool");

  const PoolId slow = space.pools[0].id;
  const PoolId fast = space.pools[1].id;
  std::vector<PoolId> assignment(space.groups.size(), slow);
  for (auto g : parse_index_list(hbm, "group id")) {
    if (g >= space.groups.size()) throw DataError("no group " + std::to_string(g));
    assignment[g] = fast;
  }
  const auto placement = make_placement(std::move(assignment), space.groups, space.pools);
  const auto plan = write_plan(placement, space.groups, slow);
  if (plan_path.empty()) {
    out << plan_to_json(plan);
  } else {
    save_plan(plan_path, plan);
    char frac[32];
    std::snprintf(frac, sizeof frac, "%.1f", 100.0 * data_fraction(placement, fast));
    out << "wrote " << plan_path << ": " << plan.assignments.size() << " sites, " << frac << "% of data in "
        << space.pools[1].label << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& machine_path, const std::string& workload_path, const std::string& placement,
                 bool stream, std::ostream& out) {
  const MachineModel machine = machine_path.empty() ? default_machine() : load_machine(machine_path);
  if (stream) {
    out << "subtest,placement,bandwidth_gb_per_s\n";
    for (const auto& row : stream_table(machine)) {
      char bw[32];
      std::snprintf(bw, sizeof bw, "%.2f", row.bandwidth / 1e9);
      out << row.subtest << ',' << row.placement << ',' << bw << '\n';
    }
    return kExitOk;
  }
  if (workload_path.empty()) throw UsageError("simulate needs --workload (or --stream-table)");
  const WorkloadSpec workload = load_workload(workload_path);

  std::vector<PoolId> assignment;
  for (auto p : parse_index_list(placement, "pool id")) assignment.push_back(static_cast<PoolId>(p));
  GroupId groups = 0;
  for (const auto& item : workload.kernels) {
    for (const auto& s : item.kernel.streams) groups = std::max<GroupId>(groups, s.group + 1);
  }
  if (assignment.empty()) assignment.assign(groups, machine.pools.front().id);
  if (assignment.size() < groups) throw UsageError("--placement must name a pool for each of the " +
                                                   std::to_string(groups) + " groups");
  for (auto p : assignment) (void)machine.pool(p);

  const double seconds = simulate_workload(workload, assignment, machine);
  double bytes = 0;
  for (const auto& item : workload.kernels) {
    for (const auto& s : item.kernel.streams) bytes += static_cast<double>(item.repetitions * s.bytes);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", seconds);
  out << "seconds: " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.2f", bytes / seconds / 1e9);
  out << "bandwidth: " << buf << " GB/s\n";
  return kExitOk;
}

struct CampaignFlags {
  std::string space;
  std::size_t runs = 0;
  std::string machine;
  std::string workload;
  std::string command;
  double timeout = 0;
  std::string work_dir = ".";
  std::vector<std::string> env;
  std::string out;
  bool serial = false;
};

int cmd_campaign(const CampaignFlags& f, std::ostream& out, std::ostream& err) {
  const ConfigurationSpace space = load_space(f.space);
  Executor executor;
  std::size_t n = f.runs;
  if (!f.command.empty()) {
    if (!f.workload.empty()) throw UsageError("--command and --workload are mutually exclusive");
    ExternalExecutor ext;
    ext.command = f.command;
    ext.timeout_seconds = f.timeout;
    ext.work_dir = f.work_dir;
    ext.default_pool = space.pools.front().id;
    for (const auto& kv : f.env) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--env expects KEY=VALUE, got '" + kv + "'");
      ext.environment[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    std::filesystem::create_directories(ext.work_dir);
    executor = ext;
    if (n == 0) n = 3;
  } else {
    if (f.workload.empty()) throw UsageError("campaign needs --workload or --command");
    executor = SimulatedExecutor{f.machine.empty() ? default_machine() : load_machine(f.machine),
                                 load_workload(f.workload)};
    if (n == 0) n = 1;
  }

  const auto result = f.serial ? serial::run_campaign(space, executor, n) : run_campaign(space, executor, n);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  if (f.out.empty()) {
    write_campaign_log(out, result.log);
  } else {
    std::ofstream file(f.out);
    if (!file) throw DataError("cannot write '" + f.out + "'");
    write_campaign_log(file, result.log);
    out << "wrote " << f.out << ": " << space.placements.size() << " placements x " << n << " runs\n";
  }
  return kExitOk;
}

struct ReportFlags {
  std::string log;
  std::string space;
  double threshold = kDefaultThreshold;
  std::string format = "csv";
  std::string out_dir;
  std::string composition = "additive";
  int fast_pool = -1;
};

int cmd_report(const ReportFlags& f, std::ostream& out, std::ostream& err) {
  const ConfigurationSpace space = load_space(f.space);
  const auto measurements = measurements_from_log(load_campaign_log(f.log));
  for (const auto& m : measurements) {
    if (!m.usable()) err << "warning: placement " << m.placement_index << ": all runs failed, excluded\n";
  }

  AnalysisOptions options;
  options.threshold = f.threshold;
  auto comp = parse_composition(f.composition);
  if (!comp) throw UsageError("--composition must be additive or time-savings");
  options.composition = *comp;
  if (f.fast_pool >= 0) options.fast_pool = static_cast<PoolId>(f.fast_pool);

  const auto report = build_report(measurements, space, options);
  const auto views = emit_views(report);

  if (!f.out_dir.empty()) {
    std::filesystem::create_directories(f.out_dir);
    const std::filesystem::path dir(f.out_dir);
    std::ofstream detailed(dir / "detailed.csv");
    write_detailed_csv(detailed, views.detailed);
    std::ofstream summary(dir / "summary.csv");
    write_summary_csv(summary, views.summary);
    std::ofstream stats(dir / "stats.csv");
    write_stats_csv(stats, report.stats);
    std::ofstream json(dir / "report.json");
    json << report_to_json(report);
    if (!detailed || !summary || !stats || !json) throw DataError("cannot write report files to " + f.out_dir);
  }

  if (f.format == "json") {
    out << report_to_json(report);
  } else {
    out << "max_speedup,all_fast_speedup,threshold_hbm_usage_percent\n" << format_summary(summarize(report)) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous memory placement analysis and tuning", "hmpt"};
  app.require_subcommand(1);

  // analyze
  std::string trace;
  GroupingFlags grouping;
  std::string analyze_out;
  std::string format = "csv";
  auto* analyze = app.add_subcommand("analyze", "group allocations of a trace and print the footprint");
  analyze->add_option("trace", trace, "trace file")->required()->check(CLI::ExistingFile);
  grouping.add_to(analyze);
  analyze->add_option("--out", analyze_out, "write the configuration space (JSON)");
  analyze->add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "json"}));

  // plan
  std::string plan_trace;
  std::string plan_space;
  std::string hbm;
  std::string plan_out;
  GroupingFlags plan_grouping;
  auto* plan = app.add_subcommand("plan", "write a placement plan for the shim");
  plan->add_option("trace", plan_trace, "trace file")->check(CLI::ExistingFile);
  plan->add_option("--space", plan_space, "configuration space file instead of a trace")->check(CLI::ExistingFile);
  plan->add_option("--hbm", hbm, "comma-separated groups to place in the fast pool");
  plan->add_option("--plan", plan_out, "output plan file (stdout when omitted)");
  plan_grouping.add_to(plan);

  // simulate
  std::string sim_machine;
  std::string sim_workload;
  std::string sim_placement;
  bool stream = false;
  auto* simulate = app.add_subcommand("simulate", "simulate a workload under one placement");
  simulate->add_option("--machine", sim_machine, "machine file (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--workload", sim_workload, "workload file (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--placement", sim_placement, "pool id per group, comma-separated (default: all pool 0)");
  simulate->add_flag("--stream-table", stream, "print STREAM Copy/Add bandwidth for every array placement");

  // campaign
  CampaignFlags cf;
  auto* campaign = app.add_subcommand("campaign", "measure every placement of a configuration space");
  campaign->add_option("--space", cf.space, "configuration space file")->required()->check(CLI::ExistingFile);
  campaign->add_option("-n", cf.runs, "runs per placement (default 1 simulated, 3 external)");
  campaign->add_option("--machine", cf.machine, "machine file for the simulator")->check(CLI::ExistingFile);
  campaign->add_option("--workload", cf.workload, "workload file for the simulator")->check(CLI::ExistingFile);
  campaign->add_option("--command", cf.command, "external command; {plan} expands to the plan path");
  campaign->add_option("--timeout", cf.timeout, "seconds per external run (0: none)");
  campaign->add_option("--work-dir", cf.work_dir, "directory for per-placement plan files");
  campaign->add_option("--env", cf.env, "KEY=VALUE added to the external environment");
  campaign->add_option("--out", cf.out, "campaign log (CSV); stdout when omitted");
  campaign->add_flag("--serial", cf.serial, "simulate placements one after another");

  // report
  ReportFlags rf;
  auto* report = app.add_subcommand("report", "analyze a campaign log");
  report->add_option("measurements", rf.log, "campaign log (CSV)")->required()->check(CLI::ExistingFile);
  report->add_option("--space", rf.space, "configuration space file")->required()->check(CLI::ExistingFile);
  report->add_option("--threshold", rf.threshold, "fraction of the maximum speedup")->check(CLI::Range(0.0, 1.0));
  report->add_option("--format", rf.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out-dir", rf.out_dir, "write detailed/summary/stats CSV and report JSON here");
  report->add_option("--composition", rf.composition, "additive or time-savings");
  report->add_option("--fast-pool", rf.fast_pool, "pool id treated as fast (default: second pool)");

  std::vector<std::string> argv_storage{"hmpt"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << "error: " << e.what() << "\n"
        << "run 'hmpt --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(trace, grouping, analyze_out, format, out);
    if (plan->parsed()) return cmd_plan(plan_trace, plan_space, plan_grouping, hbm, plan_out, out);
    if (simulate->parsed()) return cmd_simulate(sim_machine, sim_workload, sim_placement, stream, out);
    if (campaign->parsed()) return cmd_campaign(cf, out, err);
    if (report->parsed()) return cmd_report(rf, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace hmpt
