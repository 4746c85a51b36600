#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hmpt/cli.hpp"
#include "hmpt/harness.hpp"
#include "hmpt/report.hpp"
#include "support.hpp"

using namespace hmpt;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    CHECK(cli({"report"}).code == kExitUsage);
    CHECK(cli({"analyze", "/nonexistent.trace"}).code == kExitUsage);
    CHECK(cli({"simulate"}).code == kExitUsage);
    CHECK(cli({"plan", "--hbm", "0"}).code == kExitUsage);
  }

  TEST_CASE("help exits 0") {
    auto r = cli({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("campaign") != std::string::npos);
  }

  TEST_CASE("data errors exit 2") {
    test::TempDir dir("cli_bad");
    std::ofstream(dir.file("bad.trace")) << "F 50 0x9999\n";
    auto r = cli({"analyze", dir.file("bad.trace")});
    CHECK(r.code == kExitData);
    CHECK(r.err == "error: free of non-live address at line 1\n");
  }

  TEST_CASE("simulate all-DDR STREAM copy prints 200 GB/s") {
    auto r = cli({"simulate", "--workload", test::data_path("workloads/stream_copy.json"), "--placement", "0,0"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("bandwidth: 200.00 GB/s") != std::string::npos);
    auto hbm = cli({"simulate", "--workload", test::data_path("workloads/stream_copy.json"), "--placement", "1,1",
                    "--machine", test::data_path("machines/default.json")});
    CHECK(hbm.out.find("bandwidth: 700.00 GB/s") != std::string::npos);
    CHECK(cli({"simulate", "--workload", test::data_path("workloads/stream_copy.json"), "--placement", "0"}).code ==
          kExitUsage);
    CHECK(cli({"simulate", "--workload", test::data_path("workloads/stream_copy.json"), "--placement", "0,5"}).code ==
          kExitData);
  }

  TEST_CASE("stream table") {
    auto r = cli({"simulate", "--stream-table"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("Copy,DDR->DDR,200.00\n") != std::string::npos);
    CHECK(r.out.find("Copy,HBM->HBM,700.00\n") != std::string::npos);
  }

  TEST_CASE("report on the bundled MG campaign") {
    test::TempDir dir("cli_report");
    auto r = cli({"report", test::data_path("campaigns/mg/measurements.csv"), "--space",
                  test::data_path("campaigns/mg/space.json"), "--out-dir", dir.path().string()});
    CHECK(r.code == kExitOk);
    CHECK(last_line(r.out) == "2.27,2.26,69.6");
    std::istringstream detailed(slurp(dir.file("detailed.csv")));
    CHECK(parse_detailed_csv(detailed).size() == 8);
    std::istringstream summary(slurp(dir.file("summary.csv")));
    CHECK(parse_summary_csv(summary).size() == 8 + 4);
    CHECK(parse_report_json(slurp(dir.file("report.json"))).threshold_placement == 3);
    CHECK(slurp(dir.file("stats.csv")).rfind("placement_index,", 0) == 0);

    auto json = cli({"report", test::data_path("campaigns/mg/measurements.csv"), "--space",
                     test::data_path("campaigns/mg/space.json"), "--format", "json", "--composition", "time-savings"});
    CHECK(json.code == kExitOk);
    CHECK(json.out.find("\"summary\": \"2.27,2.26,69.6\"") != std::string::npos);
    CHECK(cli({"report", test::data_path("campaigns/mg/measurements.csv"), "--space",
               test::data_path("campaigns/mg/space.json"), "--composition", "product"})
              .code == kExitUsage);
  }

  TEST_CASE("report warns about all-failed placements") {
    test::TempDir dir("cli_warn");
    std::ofstream(dir.file("log.csv")) << "placement_index,run_index,seconds,status\n0,0,2.0,ok\n1,0,0,failed\n";
    auto space = test::space_of({100});
    save_space(dir.file("space.json"), space);
    auto r = cli({"report", dir.file("log.csv"), "--space", dir.file("space.json")});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("warning: placement 1") != std::string::npos);
    CHECK(last_line(r.out) == "1.00,n/a,0.0");
  }

  TEST_CASE("analyze reproduces the bundled MG space") {
    test::TempDir dir("cli_analyze");
    auto r = cli({"analyze", test::data_path("traces/mg_synthetic.trace"), "--out", dir.file("space.json")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("footprint: 26460000000 bytes") != std::string::npos);
    CHECK(r.out.find("groups: 3 (8 placements)") != std::string::npos);
    CHECK(slurp(dir.file("space.json")) == slurp(test::data_path("campaigns/mg/space.json")));
    auto json = cli({"analyze", test::data_path("traces/mg_synthetic.trace"), "--format", "json"});
    CHECK(parse_space(json.out).groups.size() == 3);
  }

  TEST_CASE("analyze with rules and options") {
    auto r = cli({"analyze", test::data_path("traces/kwave_synthetic.trace"), "--rules",
                  test::data_path("rules/kwave.json")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("groups: 8 (256 placements)") != std::string::npos);
    CHECK(r.out.find("2,ux_sgx,3,") != std::string::npos);
    auto top = cli({"analyze", test::data_path("traces/mg_synthetic.trace"), "--top-k", "1"});
    CHECK(top.out.find("groups: 2 (4 placements)") != std::string::npos);
    CHECK(cli({"analyze", test::data_path("traces/mg_synthetic.trace"), "--top-k", "0"}).code == kExitUsage);
  }

  TEST_CASE("plan from a space and from a trace") {
    test::TempDir dir("cli_plan");
    auto r = cli({"plan", "--space", test::data_path("campaigns/mg/space.json"), "--hbm", "0,1", "--plan",
                  dir.file("plan.json")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("69.6% of data in HBM") != std::string::npos);
    auto plan = load_plan(dir.file("plan.json"));
    CHECK(plan.assignments.size() == 3);

    auto empty = cli({"plan", test::data_path("traces/mg_synthetic.trace"), "--hbm", ""});
    CHECK(empty.code == kExitOk);
    auto all_default = read_plan(empty.out);
    for (const auto& [site, pool] : all_default.assignments) CHECK(pool == all_default.default_pool);

    CHECK(cli({"plan", "--space", test::data_path("campaigns/mg/space.json"), "--hbm", "5"}).code == kExitData);
    CHECK(cli({"plan", "--space", test::data_path("campaigns/mg/space.json"), "--hbm", "x"}).code == kExitUsage);
  }

  TEST_CASE("simulated campaign then report") {
    test::TempDir dir("cli_campaign");
    auto c = cli({"campaign", "--space", test::data_path("spaces/stream.json"), "--workload",
                  test::data_path("workloads/stream_copy.json"), "-n", "2", "--out", dir.file("log.csv")});
    CHECK(c.code == kExitOk);
    auto log = load_campaign_log(dir.file("log.csv"));
    CHECK(log.size() == 16);
    auto r = cli({"report", dir.file("log.csv"), "--space", test::data_path("spaces/stream.json")});
    CHECK(last_line(r.out) == "3.50,3.50,66.7");
    auto serial = cli({"campaign", "--space", test::data_path("spaces/stream.json"), "--workload",
                       test::data_path("workloads/stream_copy.json"), "-n", "2", "--serial"});
    CHECK(serial.out == slurp(dir.file("log.csv")));
  }

  TEST_CASE("external campaign") {
    test::TempDir dir("cli_ext");
    auto space = test::space_of({100});
    save_space(dir.file("space.json"), space);
    auto c = cli({"campaign", "--space", dir.file("space.json"), "--command", "test -f {plan} && test -n \"$FOO\"",
                  "--env", "FOO=1", "--work-dir", dir.path().string(), "-n", "1", "--out", dir.file("log.csv")});
    CHECK(c.code == kExitOk);
    for (const auto& r : load_campaign_log(dir.file("log.csv"))) CHECK(r.status == RunStatus::Ok);
    CHECK(cli({"campaign", "--space", dir.file("space.json")}).code == kExitUsage);
    CHECK(cli({"campaign", "--space", dir.file("space.json"), "--command", "true", "--env", "NOEQUALS"}).code ==
          kExitUsage);
  }
}
