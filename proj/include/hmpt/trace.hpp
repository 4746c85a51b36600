#pragma once

// Trace data model: allocation lifetimes and sampled memory accesses from one
// application run, plus the line-oriented text format the shim emits.
//
//   A <t_ns> <site_hex> <addr_hex> <size_dec>   allocation
//   F <t_ns> <addr_hex>                         free
//   S <t_ns> <addr_hex> <lat_ns> <L|S>          access sample
//   K <site_hex> <frame_string>                 stack frame of a site (repeatable)
//   # ...                                       comment

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmpt {

using SiteId = std::uint64_t;
using PoolId = std::uint32_t;
using Timestamp = std::uint64_t;  // nanoseconds, arbitrary epoch
using Address = std::uint64_t;

struct MemoryPoolDescriptor {
  PoolId id = 0;
  std::string label;
  std::uint64_t capacity = 0;    // bytes
  double read_bandwidth = 0.0;   // bytes/s
  double write_bandwidth = 0.0;  // bytes/s
  double load_latency = 0.0;     // ns

  // Throws DataError unless all quantities are positive.
  void validate() const;

  bool operator==(const MemoryPoolDescriptor&) const = default;
};

// FNV-1a over the frame strings, each terminated by a NUL byte. The shim
// must use the same function so that plan entries line up with trace sites.
SiteId site_hash(std::span<const std::string> frames);

struct AllocationEvent {
  Timestamp timestamp = 0;
  SiteId site = 0;
  Address base = 0;
  std::uint64_t size = 0;
  std::optional<Timestamp> free_timestamp;  // empty: never freed

  Address end() const { return base + size; }
  // Lifetime is [timestamp, free_timestamp).
  bool live_at(Timestamp t) const {
    return t >= timestamp && (!free_timestamp || t < *free_timestamp);
  }
  bool contains(Address a) const { return a >= base && a < end(); }

  bool operator==(const AllocationEvent&) const = default;
};

enum class AccessKind : std::uint8_t { Load, Store };

struct AccessSample {
  Timestamp timestamp = 0;
  Address address = 0;
  std::uint64_t latency = 0;  // ns, 0 if unknown
  AccessKind kind = AccessKind::Load;

  bool operator==(const AccessSample&) const = default;
};

struct TraceBundle {
  std::vector<MemoryPoolDescriptor> pools;
  std::map<SiteId, std::vector<std::string>> frames;
  std::vector<AllocationEvent> events;  // ordered by allocation timestamp
  std::vector<AccessSample> samples;    // ordered by timestamp
  std::map<SiteId, std::uint64_t> sample_hits;
  std::uint64_t unattributed_samples = 0;

  Timestamp max_timestamp() const;
  std::uint64_t attributed_samples() const;

  bool operator==(const TraceBundle&) const = default;
};

// Parses and validates a trace. Liveness checks (double free, overlapping
// live ranges) run in timestamp order; at equal timestamps frees are applied
// before allocations, and samples come last. Throws ParseError.
TraceBundle parse_trace(std::istream& in);
TraceBundle parse_trace(std::string_view text);
TraceBundle load_trace(const std::string& path);

// Canonical form: K records by site, then F/A/S records by timestamp.
void write_trace(std::ostream& out, const TraceBundle& bundle);
std::string serialize_trace(const TraceBundle& bundle);

// Counts, per site, the samples whose address falls in a live allocation
// [base, base + size) at the sample's timestamp. OpenMP-parallel over time chunks.
TraceBundle attribute_samples(TraceBundle bundle);

// Peak total live bytes over the run.
std::uint64_t footprint(const TraceBundle& bundle);

// Peak concurrent live bytes of an arbitrary subset of events.
std::uint64_t peak_live_bytes(std::span<const AllocationEvent> events);

std::string format_hex(std::uint64_t value);
// Accepts an optional 0x/0X prefix. Returns nullopt on anything else.
std::optional<std::uint64_t> parse_hex(std::string_view text);

namespace serial {
// Reference attribution: a single time-ordered sweep over a live-range map.
TraceBundle attribute_samples(TraceBundle bundle);
}  // namespace serial

}  // namespace hmpt
