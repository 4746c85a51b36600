#pragma once

// Plot-ready views of an analysis report.
//
// Detailed view: one row per placement, sectioned by how many groups sit in
// the fast pool (the reference shares the singleton section).
// Summary view: speedup against fast-pool data fraction, one point per
// placement plus one "expected" point per combination of two or more groups.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmpt/analysis.hpp"

namespace hmpt {

struct DetailedViewRow {
  std::size_t placement_index = 0;
  std::string label;
  std::size_t section = 1;
  double measured_speedup = 0.0;
  std::optional<double> expected_speedup;
  double hbm_data_fraction = 0.0;
  double hbm_access_fraction = 0.0;

  bool operator==(const DetailedViewRow&) const = default;
};

enum class Marker : std::uint8_t { Singleton, Combination, Expected };

const char* to_string(Marker m);

struct SummaryViewRow {
  std::size_t placement_index = 0;
  std::string label;
  double hbm_data_fraction = 0.0;
  double speedup = 0.0;
  Marker marker = Marker::Singleton;

  bool operator==(const SummaryViewRow&) const = default;
};

struct Views {
  std::vector<DetailedViewRow> detailed;
  std::vector<SummaryViewRow> summary;
};

Views emit_views(const AnalysisReport& report);

void write_detailed_csv(std::ostream& out, const std::vector<DetailedViewRow>& rows);
std::vector<DetailedViewRow> parse_detailed_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryViewRow>& rows);
std::vector<SummaryViewRow> parse_summary_csv(std::istream& in);

// PlacementStat rows as CSV.
void write_stats_csv(std::ostream& out, const std::vector<PlacementStat>& stats);

std::string report_to_json(const AnalysisReport& report);
AnalysisReport parse_report_json(const std::string& json_text);

}  // namespace hmpt
