#include <doctest.h>

#include <sstream>

#include "hmpt/analysis.hpp"
#include "hmpt/error.hpp"
#include "hmpt/report.hpp"
#include "support.hpp"

using namespace hmpt;

namespace {

AnalysisReport report_for(const std::vector<std::uint64_t>& sizes, const std::vector<double>& means) {
  return build_report(test::measurements_of(means), test::space_of(sizes));
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("three groups: sections of 4, 3 and 1 rows") {
    auto views = emit_views(report_for({10, 20, 30}, {8, 4, 4, 2, 8, 4, 4, 2}));
    std::map<std::size_t, std::size_t> sections;
    for (const auto& row : views.detailed) ++sections[row.section];
    CHECK(sections == std::map<std::size_t, std::size_t>{{1, 4}, {2, 3}, {3, 1}});
    CHECK(views.detailed.front().label == "ref");
    CHECK(views.detailed[1].label == "0");
    CHECK(views.detailed[4].label == "0+1");
    CHECK(views.detailed.back().label == "0+1+2");
  }

  TEST_CASE("one group: a single section") {
    auto views = emit_views(report_for({10}, {2, 1}));
    REQUIRE(views.detailed.size() == 2);
    CHECK(views.detailed[0].section == 1);
    CHECK(views.detailed[1].section == 1);
    CHECK(views.summary.size() == 2);
  }

  TEST_CASE("summary rows: one per placement plus expected points") {
    for (std::size_t k = 1; k <= 5; ++k) {
      std::vector<std::uint64_t> sizes(k, 100);
      std::vector<double> means(std::size_t{1} << k, 1.0);
      means[0] = 2.0;
      auto views = emit_views(report_for(sizes, means));
      const std::size_t combos = (std::size_t{1} << k) - 1 - k;
      CHECK(views.summary.size() == (std::size_t{1} << k) + combos);
      std::size_t expected = 0;
      for (const auto& row : views.summary) expected += row.marker == Marker::Expected;
      CHECK(expected == combos);
    }
  }

  TEST_CASE("CSV round trips") {
    auto views = emit_views(report_for({10, 20, 30}, {8, 4, 5, 2.5, 7, 3, 3.5, 1.9}));
    std::stringstream d;
    write_detailed_csv(d, views.detailed);
    CHECK(parse_detailed_csv(d) == views.detailed);
    std::stringstream s;
    write_summary_csv(s, views.summary);
    CHECK(parse_summary_csv(s) == views.summary);
  }

  TEST_CASE("CSV errors") {
    std::istringstream short_row("1,ref,1\n");
    CHECK_THROWS_AS(parse_detailed_csv(short_row), ParseError);
    std::istringstream marker("0,ref,0.5,1.0,star\n");
    CHECK_THROWS_AS(parse_summary_csv(marker), ParseError);
    std::istringstream number("0,ref,x,1.0,singleton\n");
    CHECK_THROWS_AS(parse_summary_csv(number), ParseError);
  }

  TEST_CASE("stats CSV header") {
    std::stringstream s;
    write_stats_csv(s, report_for({10}, {2, 1}).stats);
    std::string header;
    std::getline(s, header);
    CHECK(header == "placement_index,label,fast_groups,speedup,expected_speedup,hbm_data_fraction,hbm_access_fraction");
  }

  TEST_CASE("report JSON round trip") {
    auto r = report_for({10, 20, 30}, {8, 4, 5, 2.5, 7, 3, 3.5, 1.9});
    CHECK(parse_report_json(report_to_json(r)) == r);
    auto one = report_for({10}, {2, 1});
    one.all_fast_speedup.reset();
    CHECK(parse_report_json(report_to_json(one)) == one);
    CHECK_THROWS_AS(parse_report_json("{}"), DataError);
  }
}
