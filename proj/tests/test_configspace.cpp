#include <doctest.h>

#include <chrono>
#include <set>

#include "hmpt/configspace.hpp"
#include "hmpt/error.hpp"
#include "support.hpp"

using namespace hmpt;

namespace {

constexpr std::uint64_t kGB = 1'000'000'000ULL;

std::vector<std::uint64_t> sizes(std::size_t k) {
  std::vector<std::uint64_t> out;
  for (std::size_t g = 0; g < k; ++g) out.push_back((g + 1) * 1000);
  return out;
}

}  // namespace

TEST_SUITE("configspace") {
  TEST_CASE("placement counts") {
    CHECK(test::space_of(sizes(3)).placements.size() == 8);
    CHECK(test::space_of(sizes(1)).placements.size() == 2);
    CHECK(enumerate_placements(test::groups_of(sizes(2)), test::pools(3)).placements.size() == 9);
  }

  TEST_CASE("mixed-radix order with group 0 fastest") {
    auto space = enumerate_placements(test::groups_of(sizes(2)), test::pools(3));
    CHECK(space.placements[0].assignment == std::vector<PoolId>{0, 0});
    CHECK(space.placements[1].assignment == std::vector<PoolId>{1, 0});
    CHECK(space.placements[3].assignment == std::vector<PoolId>{0, 1});
    CHECK(space.placements[8].assignment == std::vector<PoolId>{2, 2});
    for (std::size_t i = 0; i < space.placements.size(); ++i) {
      CHECK(space.index_of(space.placements[i].assignment) == i);
    }
  }

  TEST_CASE("pool order follows the given list, not the ids") {
    auto pools = test::two_pools();
    std::swap(pools[0], pools[1]);
    auto space = enumerate_placements(test::groups_of(sizes(2)), pools);
    CHECK(space.placements[0].assignment == std::vector<PoolId>{1, 1});
    CHECK(space.all_in_pool(0) == 3);
    CHECK(space.index_of_subset(0b01, 0) == 1);
  }

  TEST_CASE("bijection with subsets for k = 1..12") {
    for (std::size_t k = 1; k <= 12; ++k) {
      auto space = test::space_of(sizes(k));
      REQUIRE(space.placements.size() == (std::size_t{1} << k));
      std::set<std::vector<PoolId>> distinct;
      for (std::size_t i = 0; i < space.placements.size(); ++i) {
        const auto& p = space.placements[i];
        distinct.insert(p.assignment);
        CHECK(fast_groups_mask(p, 1) == i);
        CHECK(space.index_of_subset(i, 1) == i);
      }
      CHECK(distinct.size() == space.placements.size());
    }
  }

  TEST_CASE("bytes per pool sum to the group total") {
    auto space = enumerate_placements(test::groups_of(sizes(4)), test::pools(3));
    const std::uint64_t total = 1000 + 2000 + 3000 + 4000;
    for (const auto& p : space.placements) {
      CHECK(p.total_bytes() == total);
      CHECK(p.bytes_per_pool.size() == 3);
    }
  }

  TEST_CASE("parallel enumeration matches the serial odometer") {
    for (std::size_t m = 1; m <= 3; ++m) {
      for (std::size_t k = 1; k <= 6; ++k) {
        auto a = enumerate_placements(test::groups_of(sizes(k)), test::pools(m));
        auto b = serial::enumerate_placements(test::groups_of(sizes(k)), test::pools(m));
        CHECK(a.placements == b.placements);
      }
    }
  }

  TEST_CASE("sixteen groups enumerate in under a second") {
    const auto t0 = std::chrono::steady_clock::now();
    auto space = test::space_of(sizes(16));
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    CHECK(space.placements.size() == 65536);
    CHECK(dt.count() < 1.0);
  }

  TEST_CASE("size guard") {
    CHECK_NOTHROW(test::space_of(sizes(1)));
    CHECK_THROWS_WITH_AS(test::space_of(sizes(25)), "configuration space too large", DataError);
    CHECK_THROWS_WITH_AS(enumerate_placements(test::groups_of(sizes(16)), test::pools(3)),
                         "configuration space too large", DataError);
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(enumerate_placements({}, test::two_pools()), DataError);
    CHECK_THROWS_AS(enumerate_placements(test::groups_of(sizes(2)), {}), DataError);
    auto groups = test::groups_of(sizes(2));
    groups[1].id = 5;
    CHECK_THROWS_AS(enumerate_placements(groups, test::two_pools()), DataError);
    auto dup = test::two_pools();
    dup[1].id = 0;
    CHECK_THROWS_WITH_AS(enumerate_placements(test::groups_of(sizes(2)), dup), "duplicate pool id 0", DataError);
    CHECK_THROWS_AS(make_placement({0}, test::groups_of(sizes(2)), test::two_pools()), DataError);
    CHECK_THROWS_AS(make_placement({0, 7}, test::groups_of(sizes(2)), test::two_pools()), DataError);
  }

  TEST_CASE("data fraction") {
    auto space = test::space_of({100, 300});
    CHECK(data_fraction(space.placements[3], 1) == 1.0);
    CHECK(data_fraction(space.placements[0], 1) == 0.0);
    CHECK(data_fraction(space.placements[2], 1) == 0.75);
    CHECK_THROWS_AS(data_fraction(space.placements[2], 9), DataError);
  }

  TEST_CASE("MG groups 0 and 1 hold 69.6 percent of the bytes") {
    auto space = test::space_of({9'208'080'000ULL, 9'208'080'000ULL, 8'043'840'000ULL});
    CHECK(data_fraction(space.placements[space.index_of_subset(0b011, 1)], 1) == doctest::Approx(0.696).epsilon(1e-4));
  }

  TEST_CASE("capacity validation") {
    std::vector<MemoryPoolDescriptor> pools{{0, "DDR", 256 * kGB, 1, 1, 1}, {1, "HBM", 64 * kGB, 1, 1, 1}};
    auto fits = make_placement({1}, test::groups_of({10 * kGB}), pools);
    CHECK(validate_capacity(fits, pools).empty());
    auto over = make_placement({1}, test::groups_of({80 * kGB}), pools);
    auto v = validate_capacity(over, pools);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == CapacityViolation{1, "HBM", 80 * kGB, 64 * kGB});

    auto mg = enumerate_placements(test::groups_of({9'208'080'000ULL, 9'208'080'000ULL, 8'043'840'000ULL}),
                                   test::two_pools());
    CHECK(validate_capacity(mg.placements[*mg.all_in_pool(1)], test::two_pools()).empty());
  }

  TEST_CASE("labels") {
    auto space = test::space_of(sizes(3));
    CHECK(placement_label(space.placements[0], 1) == "ref");
    CHECK(placement_label(space.placements[5], 1) == "0+2");
    CHECK(placement_label(space.placements[7], 1) == "0+1+2");
  }

  TEST_CASE("space file round trip") {
    auto groups = test::groups_of(sizes(3));
    groups[2].is_rest_group = true;
    groups[2].name = "rest";
    groups[2].member_sites = {0x1, 0xabc};
    auto space = enumerate_placements(groups, test::two_pools());
    const auto text = space_to_json(space);
    auto back = parse_space(text);
    CHECK(back.groups == space.groups);
    CHECK(back.pools == space.pools);
    CHECK(back.placements == space.placements);
    CHECK(space_to_json(back) == text);

    test::TempDir dir("space");
    save_space(dir.file("s.json"), space);
    CHECK(load_space(dir.file("s.json")).placements == space.placements);
  }

  TEST_CASE("space file errors") {
    CHECK_THROWS_AS(parse_space("{"), DataError);
    CHECK_THROWS_AS(parse_space(R"({"version": 2, "pools": [], "groups": []})"), DataError);
    CHECK_THROWS_AS(parse_space(R"({"version": 1, "pools": [], "groups": []})"), DataError);
    CHECK_THROWS_AS(load_space("/nonexistent/space.json"), DataError);
  }

  TEST_CASE("bundled spaces load") {
    for (const char* name : {"mg", "bt", "lu", "sp", "ua", "is", "kwave"}) {
      auto space = load_space(test::data_path(std::string("campaigns/") + name + "/space.json"));
      CHECK(space.placements.size() == (std::size_t{1} << space.groups.size()));
    }
  }
}
