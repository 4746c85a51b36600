#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hmpt/configspace.hpp"
#include "hmpt/grouping.hpp"
#include "hmpt/harness.hpp"
#include "hmpt/trace.hpp"

namespace hmpt::test {

inline std::string data_path(const std::string& relative) { return std::string(HMPT_DATA_DIR) + "/" + relative; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hmpt_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<MemoryPoolDescriptor> two_pools() {
  return {{0, "DDR", 256'000'000'000ULL, 225e9, 180e9, 107.0}, {1, "HBM", 128'000'000'000ULL, 700e9, 700e9, 128.4}};
}

inline std::vector<MemoryPoolDescriptor> pools(std::size_t m) {
  std::vector<MemoryPoolDescriptor> out;
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back({static_cast<PoolId>(i), "P" + std::to_string(i), 1'000'000'000'000ULL, 100e9 * (i + 1),
                   100e9 * (i + 1), 100.0});
  }
  return out;
}

// Singleton groups with the given byte sizes.
inline std::vector<AllocationGroup> groups_of(const std::vector<std::uint64_t>& sizes) {
  std::vector<AllocationGroup> out;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    AllocationGroup a;
    a.id = static_cast<GroupId>(g);
    a.member_sites = {0x100 + g};
    a.total_bytes = sizes[g];
    a.sample_share = 1.0 / static_cast<double>(sizes.size() + 1);
    out.push_back(a);
  }
  return out;
}

inline ConfigurationSpace space_of(const std::vector<std::uint64_t>& sizes) {
  return enumerate_placements(groups_of(sizes), two_pools());
}

// Campaign log with the given mean runtime per placement, `n` identical runs each.
inline std::vector<MeasurementSet> measurements_of(const std::vector<double>& means, std::size_t n = 3) {
  std::vector<MeasurementSet> out;
  for (std::size_t i = 0; i < means.size(); ++i) {
    out.push_back(summarize_runs(i, std::vector<double>(n, means[i]), 0));
  }
  return out;
}

// A random well-formed trace in text form: allocations with disjoint live
// ranges, frees of live blocks only, samples both inside and outside live
// ranges, and a few K records.
inline std::string random_trace_text(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 99);
  std::vector<SiteId> sites;
  const int n_sites = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n_sites; ++i) sites.push_back(rng() >> (rng() % 48));

  std::string text;
  for (SiteId s : sites) {
    const int frames = static_cast<int>(rng() % 3);
    for (int f = 0; f < frames; ++f) {
      text += "K " + format_hex(s) + " app!fn_" + std::to_string(rng() % 1000) + "+0x" + std::to_string(f) + "\n";
    }
  }

  struct Live {
    Address base;
    std::uint64_t size;
  };
  std::vector<Live> live;
  Address next_base = 0x10000 + (rng() % 0x1000);
  Timestamp t = rng() % 100;
  const int steps = 1 + static_cast<int>(rng() % 60);
  for (int i = 0; i < steps; ++i) {
    t += rng() % 3;
    const int r = pick(rng);
    if (r < 40 || live.empty()) {
      const std::uint64_t size = 1 + rng() % 5000;
      const SiteId s = sites[rng() % sites.size()];
      text += "A " + std::to_string(t) + " " + format_hex(s) + " " + format_hex(next_base) + " " +
              std::to_string(size) + "\n";
      live.push_back({next_base, size});
      next_base += size + rng() % 64;
      t += 1;
    } else if (r < 60) {
      const std::size_t k = rng() % live.size();
      text += "F " + std::to_string(t) + " " + format_hex(live[k].base) + "\n";
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      Address a = rng() % (next_base + 0x100);
      if (!live.empty() && r < 85) {
        const auto& l = live[rng() % live.size()];
        a = l.base + rng() % l.size;
      }
      text += "S " + std::to_string(t) + " " + format_hex(a) + " " + std::to_string(rng() % 500) + " " +
              (rng() % 2 ? "L" : "S") + "\n";
    }
  }
  return text;
}

}  // namespace hmpt::test
