#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hmpt/error.hpp"
#include "hmpt/perfmodel.hpp"
#include "support.hpp"

using namespace hmpt;

namespace {

constexpr PoolId DDR = 0;
constexpr PoolId HBM = 1;

double copy_bw(const MachineModel& m, PoolId src, PoolId dst) {
  std::vector<PoolId> a{src, dst};
  return 2.0 * kStreamArrayBytes / simulate_kernel(stream_copy_kernel(), a, m);
}

double add_bw(const MachineModel& m, PoolId a, PoolId b, PoolId dst) {
  std::vector<PoolId> p{a, b, dst};
  return 3.0 * kStreamArrayBytes / simulate_kernel(stream_add_kernel(), p, m);
}

KernelSpec chase(std::uint64_t loads) {
  KernelSpec k;
  k.name = "chase";
  k.mode = KernelMode::LatencyBound;
  k.dependent_accesses = loads;
  k.streams = {{0, StreamDirection::Read, 8}};
  return k;
}

}  // namespace

TEST_SUITE("perfmodel") {
  TEST_CASE("default machine") {
    const auto m = default_machine();
    CHECK_NOTHROW(m.validate());
    CHECK(m.peak_compute() == 48 * 2.1e9 * 32);
    CHECK(m.peak_compute() == doctest::Approx(3.2256e12));
    CHECK(m.cross_write_penalty == doctest::Approx(1 / 0.65));
    CHECK(m.pool(HBM).load_latency == doctest::Approx(1.2 * m.pool(DDR).load_latency));
    CHECK_THROWS_AS(m.pool(9), DataError);
  }

  TEST_CASE("copy bandwidths") {
    const auto m = default_machine();
    CHECK(copy_bw(m, DDR, DDR) == doctest::Approx(200e9).epsilon(1e-12));
    CHECK(copy_bw(m, HBM, HBM) == doctest::Approx(700e9).epsilon(1e-12));
    std::vector<PoolId> ddr{DDR, DDR};
    std::vector<PoolId> hbm{HBM, HBM};
    CHECK(simulate_kernel(stream_copy_kernel(), ddr, m) / simulate_kernel(stream_copy_kernel(), hbm, m) ==
          doctest::Approx(3.5).epsilon(1e-12));
  }

  TEST_CASE("fast-to-slow copy pays the cross-write penalty") {
    auto m = default_machine();
    std::vector<PoolId> h2d{HBM, DDR};
    const double penalized = simulate_kernel(stream_copy_kernel(), h2d, m);
    m.cross_write_penalty = 1.0;
    const double plain = simulate_kernel(stream_copy_kernel(), h2d, m);
    CHECK(penalized == doctest::Approx(plain / 0.65).epsilon(1e-12));
    // Slow-to-fast copy has no penalty and is bounded by the DDR reads.
    std::vector<PoolId> d2h{DDR, HBM};
    CHECK(copy_bw(default_machine(), DDR, HBM) == doctest::Approx(2.0 * 225e9));
    CHECK(simulate_kernel(stream_copy_kernel(), d2h, default_machine()) < penalized);
  }

  TEST_CASE("pointer chase follows the load latency") {
    const auto m = default_machine();
    std::vector<PoolId> ddr{DDR};
    std::vector<PoolId> hbm{HBM};
    const double td = simulate_kernel(chase(1'000'000'000), ddr, m);
    const double th = simulate_kernel(chase(1'000'000'000), hbm, m);
    CHECK(td == doctest::Approx(107.0));
    CHECK(std::abs(th / td - 1.2) <= 1e-12);
  }

  TEST_CASE("compute-bound kernels are limited by peak flops") {
    const auto m = default_machine();
    KernelSpec k{"dgemm", {{0, StreamDirection::Read, 1000}}, 1e13};
    std::vector<PoolId> a{DDR};
    CHECK(simulate_kernel(k, a, m) == doctest::Approx(1e13 / m.peak_compute()));
  }

  TEST_CASE("workload linearity") {
    const auto m = default_machine();
    std::vector<PoolId> a{HBM, DDR};
    WorkloadSpec one{{{stream_copy_kernel(), 1}}};
    WorkloadSpec ten{{{stream_copy_kernel(), 10}}};
    CHECK(simulate_workload(one, a, m) == simulate_kernel(stream_copy_kernel(), a, m));
    CHECK(simulate_workload(ten, a, m) == doctest::Approx(10 * simulate_workload(one, a, m)));
  }

  TEST_CASE("STREAM add qualitative checks") {
    const auto m = default_machine();
    const double all_hbm = add_bw(m, HBM, HBM, HBM);
    CHECK(std::abs(add_bw(m, HBM, DDR, HBM) - all_hbm) / all_hbm <= 0.05);
    const double a = add_bw(m, HBM, HBM, DDR);
    const double b = add_bw(m, DDR, DDR, HBM);
    CHECK(std::abs(a - b) / b <= 0.10);
  }

  TEST_CASE("stream table covers every pool choice") {
    auto rows = stream_table(default_machine());
    REQUIRE(rows.size() == 4 + 8);
    CHECK(rows[0].subtest == "Copy");
    CHECK(rows[0].placement == "DDR->DDR");
    CHECK(rows[0].bandwidth == doctest::Approx(200e9));
    CHECK(rows[4].subtest == "Add");
    CHECK(rows[4].placement == "DDR+DDR->DDR");
    CHECK(rows.back().placement == "HBM+HBM->HBM");
  }

  TEST_CASE("moving a read stream to an idle faster pool never slows a read-only kernel") {
    const auto m = default_machine();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      KernelSpec k{"r", {}, static_cast<double>(rng() % 1000) * 1e9};
      const std::size_t groups = 1 + rng() % 4;
      for (GroupId g = 0; g < groups; ++g) {
        k.streams.push_back({g, StreamDirection::Read, 1 + rng() % 100'000'000'000ULL});
      }
      std::vector<PoolId> a(groups, DDR);
      const double before = simulate_kernel(k, a, m);
      a[rng() % groups] = HBM;
      CHECK(simulate_kernel(k, a, m) <= before);
      std::fill(a.begin(), a.end(), HBM);
      CHECK(simulate_kernel(k, a, m) <= before);
    }
  }

  TEST_CASE("pools serve traffic concurrently") {
    // Splitting reads across both pools beats piling them onto the faster one.
    const auto m = default_machine();
    KernelSpec k{"r", {{0, StreamDirection::Read, 70'000'000'000ULL}, {1, StreamDirection::Read, 20'000'000'000ULL}}};
    std::vector<PoolId> split{HBM, DDR};
    std::vector<PoolId> all_fast{HBM, HBM};
    CHECK(simulate_kernel(k, split, m) == doctest::Approx(0.1));
    CHECK(simulate_kernel(k, all_fast, m) > simulate_kernel(k, split, m));
  }

  TEST_CASE("roofline") {
    const auto m = default_machine();
    CHECK(roofline_bound(m, 0.0, DDR) == 0.0);
    CHECK(roofline_bound(m, 1e9, HBM) == m.peak_compute());
    const double knee = m.peak_compute() / m.pool(HBM).read_bandwidth;
    CHECK(roofline_bound(m, knee, HBM) == doctest::Approx(m.peak_compute()));
    CHECK(knee * m.pool(HBM).read_bandwidth == doctest::Approx(m.peak_compute()));
    CHECK_THROWS_AS(roofline_bound(m, -1.0, HBM), DataError);
  }

  TEST_CASE("kernel validation") {
    const auto m = default_machine();
    std::vector<PoolId> a{DDR};
    KernelSpec empty;
    empty.name = "empty";
    CHECK_THROWS_AS(simulate_kernel(empty, a, m), DataError);
    CHECK_THROWS_AS(simulate_kernel(KernelSpec{"zero", {{0, StreamDirection::Read, 0}}}, a, m), DataError);
    CHECK_THROWS_AS(simulate_kernel(KernelSpec{"far", {{3, StreamDirection::Read, 8}}}, a, m), DataError);
    CHECK_THROWS_AS(simulate_kernel(chase(0), a, m), DataError);
    auto bad = default_machine();
    bad.cross_write_penalty = 0.5;
    CHECK_THROWS_AS(bad.validate(), DataError);
    CHECK_THROWS_AS(simulate_workload(WorkloadSpec{}, a, m), DataError);
  }

  TEST_CASE("machine file") {
    const auto m = load_machine(test::data_path("machines/default.json"));
    CHECK(m == default_machine());
    CHECK(parse_machine(machine_to_json(m)) == m);
    auto partial = parse_machine(R"({"pools": [{"id": 0, "label": "X", "capacity_bytes": 10,
                                   "bw_bytes_per_s": 5.0, "latency_ns": 1.0}]})");
    CHECK(partial.cores == 48);
    CHECK(partial.pools[0].write_bandwidth == 5.0);
    CHECK_THROWS_AS(parse_machine(R"({"pools": []})"), DataError);
    CHECK_THROWS_AS(parse_machine(R"({"pools": [{"id": 0}]})"), DataError);
    CHECK_THROWS_AS(parse_machine("nope"), DataError);
  }

  TEST_CASE("workload files") {
    for (const char* f : {"stream_copy.json", "stream_triad.json", "separable.json", "pointer_chase.json"}) {
      const auto w = load_workload(test::data_path(std::string("workloads/") + f));
      CHECK(parse_workload(workload_to_json(w)) == w);
    }
    CHECK_THROWS_AS(parse_workload("{}"), DataError);
    CHECK_THROWS_AS(parse_workload("[]"), DataError);
    CHECK_THROWS_AS(parse_workload(R"([{"mode": "warp", "streams": [{"group": 0, "dir": "read", "bytes": 1}]}])"),
                    DataError);
    CHECK_THROWS_AS(parse_workload(R"([{"streams": [{"group": 0, "dir": "up", "bytes": 1}]}])"), DataError);
    CHECK_THROWS_AS(parse_workload(R"([{"streams": [{"group": 0, "dir": "read"}]}])"), DataError);
  }
}
