#include <omp.h>

#include <algorithm>
#include <iterator>
#include <map>
#include <numeric>

#include "hmpt/trace.hpp"

namespace hmpt {

namespace {

void fold_event_hits(TraceBundle& bundle, const std::vector<std::uint64_t>& per_event) {
  bundle.sample_hits.clear();
  for (std::size_t i = 0; i < per_event.size(); ++i) {
    if (per_event[i] > 0) bundle.sample_hits[bundle.events[i].site] += per_event[i];
  }
}

}  // namespace

TraceBundle attribute_samples(TraceBundle bundle) {
  const auto& events = bundle.events;
  const auto& samples = bundle.samples;

  // Allocation and free steps in replay order: frees before allocations at
  // equal timestamps, so a sample at time t sees every step with time <= t.
  struct Step {
    Timestamp t;
    bool is_free;
    std::size_t event;
  };
  std::vector<Step> steps;
  steps.reserve(events.size() * 2);
  for (std::size_t i = 0; i < events.size(); ++i) {
    steps.push_back({events[i].timestamp, false, i});
    if (events[i].free_timestamp) steps.push_back({*events[i].free_timestamp, true, i});
  }
  std::stable_sort(steps.begin(), steps.end(), [](const Step& x, const Step& y) {
    if (x.t != y.t) return x.t < y.t;
    return x.is_free > y.is_free;
  });

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return samples[x].timestamp < samples[y].timestamp; });

  // Samples split into time-contiguous chunks; each chunk rebuilds the live
  // set at its first timestamp and then sweeps forward on its own.
  const std::size_t chunk_count =
      std::clamp<std::size_t>(samples.size() / 4096, 1, static_cast<std::size_t>(omp_get_max_threads()) * 4);
  std::vector<std::vector<std::uint64_t>> chunk_hits(chunk_count);
  std::uint64_t unattributed = 0;

#pragma omp parallel for reduction(+ : unattributed) schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunk_count); ++c) {
    const std::size_t lo = order.size() * static_cast<std::size_t>(c) / chunk_count;
    const std::size_t hi = order.size() * static_cast<std::size_t>(c + 1) / chunk_count;
    if (lo == hi) continue;
    const Timestamp start = samples[order[lo]].timestamp;

    std::map<Address, std::size_t> live;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].live_at(start)) live[events[i].base] = i;
    }
    auto next = std::upper_bound(steps.begin(), steps.end(), start,
                                 [](Timestamp t, const Step& s) { return t < s.t; });

    auto& hits = chunk_hits[static_cast<std::size_t>(c)];
    hits.assign(events.size(), 0);
    for (std::size_t k = lo; k < hi; ++k) {
      const auto& sample = samples[order[k]];
      for (; next != steps.end() && next->t <= sample.timestamp; ++next) {
        if (next->is_free) {
          live.erase(events[next->event].base);
        } else {
          live[events[next->event].base] = next->event;
        }
      }
      auto it = live.upper_bound(sample.address);
      if (it != live.begin() && events[std::prev(it)->second].contains(sample.address)) {
        ++hits[std::prev(it)->second];
      } else {
        ++unattributed;
      }
    }
  }

  std::vector<std::uint64_t> per_event(events.size(), 0);
  for (const auto& hits : chunk_hits) {
    for (std::size_t i = 0; i < hits.size(); ++i) per_event[i] += hits[i];
  }
  fold_event_hits(bundle, per_event);
  bundle.unattributed_samples = unattributed;
  return bundle;
}

namespace serial {

TraceBundle attribute_samples(TraceBundle bundle) {
  struct Step {
    Timestamp t;
    int rank;  // 0 free, 1 alloc, 2 sample
    std::size_t index;
  };
  std::vector<Step> steps;
  for (std::size_t i = 0; i < bundle.events.size(); ++i) {
    steps.push_back({bundle.events[i].timestamp, 1, i});
    if (bundle.events[i].free_timestamp) steps.push_back({*bundle.events[i].free_timestamp, 0, i});
  }
  for (std::size_t i = 0; i < bundle.samples.size(); ++i) steps.push_back({bundle.samples[i].timestamp, 2, i});
  std::stable_sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.rank < b.rank;
  });

  std::vector<std::uint64_t> per_event(bundle.events.size(), 0);
  std::uint64_t unattributed = 0;
  std::map<Address, std::size_t> live;
  for (const auto& step : steps) {
    if (step.rank == 1) {
      live[bundle.events[step.index].base] = step.index;
    } else if (step.rank == 0) {
      live.erase(bundle.events[step.index].base);
    } else {
      const Address a = bundle.samples[step.index].address;
      auto it = live.upper_bound(a);
      if (it != live.begin() && bundle.events[std::prev(it)->second].contains(a)) {
        ++per_event[std::prev(it)->second];
      } else {
        ++unattributed;
      }
    }
  }

  fold_event_hits(bundle, per_event);
  bundle.unattributed_samples = unattributed;
  return bundle;
}

}  // namespace serial

}  // namespace hmpt
