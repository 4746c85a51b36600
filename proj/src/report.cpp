#include "hmpt/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hmpt/error.hpp"
#include "json_io.hpp"

namespace hmpt {

using detail::json;

const char* to_string(Marker m) {
  switch (m) {
    case Marker::Singleton:
      return "singleton";
    case Marker::Combination:
      return "combination";
    case Marker::Expected:
      return "expected";
  }
  return "singleton";
}

Views emit_views(const AnalysisReport& report) {
  Views v;
  for (const auto& s : report.stats) {
    v.detailed.push_back({s.placement_index, s.label, std::max<std::size_t>(s.fast_group_count, 1), s.speedup,
                          s.expected_speedup, s.hbm_data_fraction, s.hbm_access_fraction});
  }
  std::stable_sort(v.detailed.begin(), v.detailed.end(), [](const DetailedViewRow& a, const DetailedViewRow& b) {
    if (a.section != b.section) return a.section < b.section;
    return a.placement_index < b.placement_index;
  });

  for (const auto& s : report.stats) {
    v.summary.push_back({s.placement_index, s.label, s.hbm_data_fraction, s.speedup,
                         s.fast_group_count <= 1 ? Marker::Singleton : Marker::Combination});
  }
  for (const auto& s : report.stats) {
    if (s.expected_speedup) {
      v.summary.push_back({s.placement_index, s.label, s.hbm_data_fraction, *s.expected_speedup, Marker::Expected});
    }
  }
  return v;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CsvReader {
  std::istream& in;
  std::string header;
  std::size_t line_no = 0;

  std::optional<std::vector<std::string>> next(std::size_t columns) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line_no == 1 && line == header) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.emplace_back();
      if (cells.size() != columns) throw ParseError(line_no, "expected " + std::to_string(columns) + " columns");
      return cells;
    }
    return std::nullopt;
  }

  double real(const std::string& s) const {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(line_no, "bad number '" + s + "'");
  }

  std::size_t count(const std::string& s) const {
    try {
      std::size_t used = 0;
      auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(line_no, "bad integer '" + s + "'");
  }
};

constexpr const char* kDetailedHeader =
    "placement_index,label,section,measured_speedup,expected_speedup,hbm_data_fraction,hbm_access_fraction";
constexpr const char* kSummaryHeader = "placement_index,label,hbm_data_fraction,speedup,marker";

}  // namespace

void write_detailed_csv(std::ostream& out, const std::vector<DetailedViewRow>& rows) {
  out << kDetailedHeader << '\n';
  for (const auto& r : rows) {
    out << r.placement_index << ',' << r.label << ',' << r.section << ',' << num(r.measured_speedup) << ','
        << (r.expected_speedup ? num(*r.expected_speedup) : "") << ',' << num(r.hbm_data_fraction) << ','
        << num(r.hbm_access_fraction) << '\n';
  }
}

std::vector<DetailedViewRow> parse_detailed_csv(std::istream& in) {
  CsvReader reader{in, kDetailedHeader};
  std::vector<DetailedViewRow> rows;
  while (auto cells = reader.next(7)) {
    const auto& c = *cells;
    DetailedViewRow r;
    r.placement_index = reader.count(c[0]);
    r.label = c[1];
    r.section = reader.count(c[2]);
    r.measured_speedup = reader.real(c[3]);
    if (!c[4].empty()) r.expected_speedup = reader.real(c[4]);
    r.hbm_data_fraction = reader.real(c[5]);
    r.hbm_access_fraction = reader.real(c[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryViewRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.placement_index << ',' << r.label << ',' << num(r.hbm_data_fraction) << ',' << num(r.speedup) << ','
        << to_string(r.marker) << '\n';
  }
}

std::vector<SummaryViewRow> parse_summary_csv(std::istream& in) {
  CsvReader reader{in, kSummaryHeader};
  std::vector<SummaryViewRow> rows;
  while (auto cells = reader.next(5)) {
    const auto& c = *cells;
    SummaryViewRow r;
    r.placement_index = reader.count(c[0]);
    r.label = c[1];
    r.hbm_data_fraction = reader.real(c[2]);
    r.speedup = reader.real(c[3]);
    if (c[4] == "singleton") {
      r.marker = Marker::Singleton;
    } else if (c[4] == "combination") {
      r.marker = Marker::Combination;
    } else if (c[4] == "expected") {
      r.marker = Marker::Expected;
    } else {
      throw ParseError(reader.line_no, "bad marker '" + c[4] + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_stats_csv(std::ostream& out, const std::vector<PlacementStat>& stats) {
  out << "placement_index,label,fast_groups,speedup,expected_speedup,hbm_data_fraction,hbm_access_fraction\n";
  for (const auto& s : stats) {
    out << s.placement_index << ',' << s.label << ',' << s.fast_group_count << ',' << num(s.speedup) << ','
        << (s.expected_speedup ? num(*s.expected_speedup) : "") << ',' << num(s.hbm_data_fraction) << ','
        << num(s.hbm_access_fraction) << '\n';
  }
}

std::string report_to_json(const AnalysisReport& report) {
  json stats = json::array();
  for (const auto& s : report.stats) {
    stats.push_back({{"placement", s.placement_index},
                     {"label", s.label},
                     {"fast_groups", s.fast_group_count},
                     {"speedup", s.speedup},
                     {"expected_speedup", s.expected_speedup ? json(*s.expected_speedup) : json(nullptr)},
                     {"hbm_data_fraction", s.hbm_data_fraction},
                     {"hbm_access_fraction", s.hbm_access_fraction}});
  }
  const auto row = summarize(report);
  json doc{{"fast_pool", report.fast_pool},
           {"composition", to_string(report.composition)},
           {"threshold", report.threshold},
           {"max_speedup", report.max_speedup},
           {"best_placement", report.best_placement},
           {"all_fast_speedup", report.all_fast_speedup ? json(*report.all_fast_speedup) : json(nullptr)},
           {"threshold_placement", report.threshold_placement},
           {"threshold_data_fraction", report.threshold_data_fraction},
           {"summary", format_summary(row)},
           {"stats", stats}};
  return doc.dump(2) + "\n";
}

AnalysisReport parse_report_json(const std::string& json_text) {
  const json doc = detail::parse_json(json_text, "report file");
  return detail::guarded("report file", [&] {
    AnalysisReport r;
    r.fast_pool = doc.at("fast_pool").get<PoolId>();
    auto comp = parse_composition(doc.at("composition").get<std::string>());
    if (!comp) throw DataError("report file: unknown composition");
    r.composition = *comp;
    r.threshold = doc.at("threshold").get<double>();
    r.max_speedup = doc.at("max_speedup").get<double>();
    r.best_placement = doc.at("best_placement").get<std::size_t>();
    if (!doc.at("all_fast_speedup").is_null()) r.all_fast_speedup = doc.at("all_fast_speedup").get<double>();
    r.threshold_placement = doc.at("threshold_placement").get<std::size_t>();
    r.threshold_data_fraction = doc.at("threshold_data_fraction").get<double>();
    for (const auto& s : doc.at("stats")) {
      PlacementStat p;
      p.placement_index = s.at("placement").get<std::size_t>();
      p.label = s.at("label").get<std::string>();
      p.fast_group_count = s.at("fast_groups").get<std::size_t>();
      p.speedup = s.at("speedup").get<double>();
      if (!s.at("expected_speedup").is_null()) p.expected_speedup = s.at("expected_speedup").get<double>();
      p.hbm_data_fraction = s.at("hbm_data_fraction").get<double>();
      p.hbm_access_fraction = s.at("hbm_access_fraction").get<double>();
      r.stats.push_back(std::move(p));
    }
    return r;
  });
}

}  // namespace hmpt
