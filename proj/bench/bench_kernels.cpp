// Serial reference vs OpenMP kernels: sample attribution, placement
// enumeration and simulated campaigns.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "hmpt/configspace.hpp"
#include "hmpt/harness.hpp"
#include "hmpt/perfmodel.hpp"
#include "hmpt/trace.hpp"

using namespace hmpt;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

void row(const char* name, const std::string& size, double serial_s, double parallel_s, bool same) {
  std::printf("%-12s %-22s %12.4f %12.4f %8.2fx  %s\n", name, size.c_str(), serial_s, parallel_s,
              serial_s / parallel_s, same ? "match" : "MISMATCH");
}

// Allocations live in waves: each wave frees the previous one and reuses its
// address range, samples land anywhere in the address range.
TraceBundle synthetic_bundle(std::size_t events, std::size_t samples, std::mt19937_64& rng) {
  TraceBundle b;
  const std::size_t per_wave = 256;
  const std::uint64_t block = 1 << 20;
  Timestamp t = 0;
  for (std::size_t i = 0; i < events; ++i) {
    const std::size_t wave = i / per_wave;
    const std::size_t slot = i % per_wave;
    AllocationEvent e;
    e.timestamp = wave * 1000 + slot;
    e.site = 0x1000 + rng() % 64;
    e.base = 0x10000000 + slot * block;
    e.size = 1 + rng() % block;
    if (i + per_wave < events) e.free_timestamp = (wave + 1) * 1000 + slot;
    b.events.push_back(e);
    t = std::max(t, e.timestamp);
  }
  for (std::size_t s = 0; s < samples; ++s) {
    AccessSample a;
    a.timestamp = rng() % (t + 1000);
    a.address = 0x10000000 + rng() % (per_wave * block + block);
    b.samples.push_back(a);
  }
  std::sort(b.samples.begin(), b.samples.end(),
            [](const AccessSample& x, const AccessSample& y) { return x.timestamp < y.timestamp; });
  return b;
}

std::vector<AllocationGroup> groups(std::size_t k) {
  std::vector<AllocationGroup> out;
  for (std::size_t g = 0; g < k; ++g) {
    AllocationGroup a;
    a.id = static_cast<GroupId>(g);
    a.member_sites = {g};
    a.total_bytes = (g + 1) * 1'000'000;
    out.push_back(a);
  }
  return out;
}

WorkloadSpec workload(std::size_t k) {
  WorkloadSpec w;
  for (GroupId g = 0; g + 2 < k; ++g) {
    KernelSpec kernel{"add" + std::to_string(g),
                      {{g, StreamDirection::Read, 1'000'000'000},
                       {g + 1, StreamDirection::Read, 1'000'000'000},
                       {g + 2, StreamDirection::Write, 1'000'000'000}},
                      1e9};
    w.kernels.push_back({kernel, 3});
  }
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  bool quick = false;
  int reps = 3;
  app.add_flag("--quick", quick, "small problem sizes (smoke run)");
  app.add_option("--reps", reps, "repetitions, best time is reported")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::size_t events = quick ? 2'000 : 50'000;
  const std::size_t samples = quick ? 20'000 : 2'000'000;
  const std::size_t enum_k = quick ? 12 : 20;
  const std::size_t campaign_k = quick ? 8 : 14;

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-12s %-22s %12s %12s %9s\n", "kernel", "size", "serial_s", "openmp_s", "speedup");

  std::mt19937_64 rng(42);
  const auto bundle = synthetic_bundle(events, samples, rng);
  TraceBundle a;
  TraceBundle b;
  const double ts = best_of(reps, [&] { a = serial::attribute_samples(bundle); });
  const double tp = best_of(reps, [&] { b = attribute_samples(bundle); });
  row("attribution", std::to_string(events) + " ev / " + std::to_string(samples) + " smp", ts, tp, a == b);

  const auto pools = default_machine().pools;
  ConfigurationSpace sa;
  ConfigurationSpace sb;
  const double es = best_of(reps, [&] { sa = serial::enumerate_placements(groups(enum_k), pools); });
  const double ep = best_of(reps, [&] { sb = enumerate_placements(groups(enum_k), pools); });
  row("enumeration", "k=" + std::to_string(enum_k) + " (" + std::to_string(sa.placements.size()) + ")", es, ep,
      sa.placements == sb.placements);

  const auto space = enumerate_placements(groups(campaign_k), pools);
  const Executor sim = SimulatedExecutor{default_machine(), workload(campaign_k)};
  CampaignResult ca;
  CampaignResult cb;
  const double cs = best_of(reps, [&] { ca = serial::run_campaign(space, sim, 1); });
  const double cp = best_of(reps, [&] { cb = run_campaign(space, sim, 1); });
  row("campaign", "k=" + std::to_string(campaign_k) + " simulated", cs, cp, ca.log == cb.log);
  return 0;
}
