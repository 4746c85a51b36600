#include "hmpt/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hmpt/error.hpp"

namespace hmpt {

namespace {

enum class RecordKind : std::uint8_t { Free = 0, Alloc = 1, Sample = 2 };

struct PendingRecord {
  RecordKind kind;
  Timestamp t;
  std::size_t line;
  SiteId site = 0;
  Address address = 0;
  std::uint64_t size = 0;
  std::uint64_t latency = 0;
  AccessKind access = AccessKind::Load;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::uint64_t> parse_dec(std::string_view text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
  return v;
}

std::uint64_t need_dec(std::string_view text, std::size_t line, const char* what) {
  auto v = parse_dec(text);
  if (!v) throw ParseError(line, std::string("bad ") + what + " '" + std::string(text) + "'");
  return *v;
}

std::uint64_t need_hex(std::string_view text, std::size_t line, const char* what) {
  auto v = parse_hex(text);
  if (!v) throw ParseError(line, std::string("bad ") + what + " '" + std::string(text) + "'");
  return *v;
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, std::size_t line) {
  if (f.size() != n) {
    throw ParseError(line, "record '" + std::string(f[0]) + "' expects " + std::to_string(n - 1) +
                               " fields, got " + std::to_string(f.size() - 1));
  }
}

}  // namespace

void MemoryPoolDescriptor::validate() const {
  if (capacity == 0 || !(read_bandwidth > 0) || !(write_bandwidth > 0) || !(load_latency > 0)) {
    throw DataError("memory pool " + std::to_string(id) + " (" + label +
                    ") needs positive capacity, bandwidth and latency");
  }
}

SiteId site_hash(std::span<const std::string> frames) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& frame : frames) {
    for (unsigned char c : frame) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h *= 0x100000001b3ULL;  // NUL separator
  }
  return h;
}

std::string format_hex(std::uint64_t value) {
  char buf[2 + 16];
  buf[0] = '0';
  buf[1] = 'x';
  auto [p, ec] = std::to_chars(buf + 2, buf + sizeof buf, value, 16);
  return std::string(buf, p);
}

std::optional<std::uint64_t> parse_hex(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
  if (text.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 16);
  if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
  return v;
}

Timestamp TraceBundle::max_timestamp() const {
  Timestamp t = 0;
  for (const auto& e : events) {
    t = std::max(t, e.timestamp);
    if (e.free_timestamp) t = std::max(t, *e.free_timestamp);
  }
  for (const auto& s : samples) t = std::max(t, s.timestamp);
  return t;
}

std::uint64_t TraceBundle::attributed_samples() const {
  std::uint64_t n = 0;
  for (const auto& [site, hits] : sample_hits) n += hits;
  return n;
}

TraceBundle parse_trace(std::istream& in) {
  TraceBundle bundle;
  std::vector<PendingRecord> records;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line(raw);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    auto f = split_fields(line);
    if (f[0].size() != 1) throw ParseError(line_no, "unknown record type '" + std::string(f[0]) + "'");

    switch (f[0][0]) {
      case 'A': {
        expect_fields(f, 5, line_no);
        PendingRecord r{RecordKind::Alloc, need_dec(f[1], line_no, "timestamp"), line_no};
        r.site = need_hex(f[2], line_no, "site id");
        r.address = need_hex(f[3], line_no, "address");
        r.size = need_dec(f[4], line_no, "size");
        if (r.size == 0) throw ParseError(line_no, "zero-size allocation");
        if (r.address + r.size < r.address) throw ParseError(line_no, "allocation wraps address space");
        records.push_back(r);
        break;
      }
      case 'F': {
        expect_fields(f, 3, line_no);
        PendingRecord r{RecordKind::Free, need_dec(f[1], line_no, "timestamp"), line_no};
        r.address = need_hex(f[2], line_no, "address");
        records.push_back(r);
        break;
      }
      case 'S': {
        expect_fields(f, 5, line_no);
        PendingRecord r{RecordKind::Sample, need_dec(f[1], line_no, "timestamp"), line_no};
        r.address = need_hex(f[2], line_no, "address");
        r.latency = need_dec(f[3], line_no, "latency");
        if (f[4] == "L") {
          r.access = AccessKind::Load;
        } else if (f[4] == "S") {
          r.access = AccessKind::Store;
        } else {
          throw ParseError(line_no, "access kind must be L or S");
        }
        records.push_back(r);
        break;
      }
      case 'K': {
        if (f.size() < 3) throw ParseError(line_no, "K record needs a site id and a frame");
        SiteId site = need_hex(f[1], line_no, "site id");
        // The frame is the remainder of the line after the site token.
        auto rest = line.substr(static_cast<std::size_t>(f[2].data() - line.data()));
        bundle.frames[site].emplace_back(rest);
        break;
      }
      default:
        throw ParseError(line_no, "unknown record type '" + std::string(f[0]) + "'");
    }
  }

  std::stable_sort(records.begin(), records.end(), [](const PendingRecord& a, const PendingRecord& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.kind < b.kind;
  });

  std::map<Address, std::size_t> live;  // base -> event index
  for (const auto& r : records) {
    switch (r.kind) {
      case RecordKind::Alloc: {
        const Address end = r.address + r.size;
        auto next = live.lower_bound(r.address);
        if (next != live.end() && next->first < end) throw ParseError(r.line, "allocation overlaps a live range");
        if (next != live.begin()) {
          auto prev = std::prev(next);
          if (bundle.events[prev->second].end() > r.address) {
            throw ParseError(r.line, "allocation overlaps a live range");
          }
        }
        live.emplace(r.address, bundle.events.size());
        bundle.events.push_back({r.t, r.site, r.address, r.size, std::nullopt});
        break;
      }
      case RecordKind::Free: {
        auto it = live.find(r.address);
        if (it == live.end()) throw ParseError(r.line, "free of non-live address");
        bundle.events[it->second].free_timestamp = r.t;
        live.erase(it);
        break;
      }
      case RecordKind::Sample:
        bundle.samples.push_back({r.t, r.address, r.latency, r.access});
        break;
    }
  }
  return bundle;
}

TraceBundle parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

TraceBundle load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace '" + path + "'");
  return parse_trace(in);
}

void write_trace(std::ostream& out, const TraceBundle& bundle) {
  for (const auto& [site, frames] : bundle.frames) {
    for (const auto& frame : frames) out << "K " << format_hex(site) << ' ' << frame << '\n';
  }

  struct Line {
    Timestamp t;
    RecordKind kind;
    std::size_t index;
  };
  std::vector<Line> lines;
  lines.reserve(bundle.events.size() * 2 + bundle.samples.size());
  for (std::size_t i = 0; i < bundle.events.size(); ++i) {
    const auto& e = bundle.events[i];
    lines.push_back({e.timestamp, RecordKind::Alloc, i});
    if (e.free_timestamp) lines.push_back({*e.free_timestamp, RecordKind::Free, i});
  }
  for (std::size_t i = 0; i < bundle.samples.size(); ++i) {
    lines.push_back({bundle.samples[i].timestamp, RecordKind::Sample, i});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.index < b.index;
  });

  for (const auto& l : lines) {
    switch (l.kind) {
      case RecordKind::Alloc: {
        const auto& e = bundle.events[l.index];
        out << "A " << e.timestamp << ' ' << format_hex(e.site) << ' ' << format_hex(e.base) << ' ' << e.size
            << '\n';
        break;
      }
      case RecordKind::Free:
        out << "F " << l.t << ' ' << format_hex(bundle.events[l.index].base) << '\n';
        break;
      case RecordKind::Sample: {
        const auto& s = bundle.samples[l.index];
        out << "S " << s.timestamp << ' ' << format_hex(s.address) << ' ' << s.latency << ' '
            << (s.kind == AccessKind::Load ? 'L' : 'S') << '\n';
        break;
      }
    }
  }
}

std::string serialize_trace(const TraceBundle& bundle) {
  std::ostringstream out;
  write_trace(out, bundle);
  return out.str();
}

std::uint64_t peak_live_bytes(std::span<const AllocationEvent> events) {
  struct Delta {
    Timestamp t;
    bool is_free;
    std::uint64_t bytes;
  };
  std::vector<Delta> deltas;
  deltas.reserve(events.size() * 2);
  for (const auto& e : events) {
    deltas.push_back({e.timestamp, false, e.size});
    if (e.free_timestamp) deltas.push_back({*e.free_timestamp, true, e.size});
  }
  // Frees before allocations at equal timestamps, matching the parser.
  std::sort(deltas.begin(), deltas.end(), [](const Delta& a, const Delta& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.is_free > b.is_free;
  });
  std::uint64_t live = 0;
  std::uint64_t peak = 0;
  for (const auto& d : deltas) {
    if (d.is_free) {
      live -= d.bytes;
    } else {
      live += d.bytes;
      peak = std::max(peak, live);
    }
  }
  return peak;
}

std::uint64_t footprint(const TraceBundle& bundle) { return peak_live_bytes(bundle.events); }

}  // namespace hmpt
