#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <random>
#include <vector>

#include "kvtier/core.hpp"

using namespace kvtier;

TEST_CASE("compressed_size rounds half-up with a 1-byte floor") {
  CHECK(compressed_size(4'000'000'000, 0.05) == 200'000'000);
  CHECK(compressed_size(8'000'000'000, 1.0) == 8'000'000'000);
  CHECK(compressed_size(1000, 0.5) == 500);
  CHECK(compressed_size(3, 0.5) == 2);    // 1.5 rounds up
  CHECK(compressed_size(5, 0.25) == 1);   // 1.25 rounds down
  CHECK(compressed_size(10, 0.01) == 1);  // floor at one byte
  CHECK(compressed_size(1, 0.000001) == 1);
}

TEST_CASE("compressed_size rejects ratios outside (0, 1]") {
  CHECK_THROWS_AS(compressed_size(1000, 0.0), ValidationError);
  CHECK_THROWS_AS(compressed_size(1000, -0.5), ValidationError);
  CHECK_THROWS_AS(compressed_size(1000, 1.0001), ValidationError);
}

TEST_CASE("compressed_size is monotone in ratio and size, identity at 1.0") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::int64_t> size_dist(1, 1'000'000'000);
  std::uniform_real_distribution<double> ratio_dist(0.001, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t s = size_dist(gen);
    double r1 = ratio_dist(gen);
    double r2 = ratio_dist(gen);
    if (r1 > r2) std::swap(r1, r2);
    CHECK(compressed_size(s, r1) <= compressed_size(s, r2));
    CHECK(compressed_size(s, 1.0) == s);
    const std::int64_t s2 = size_dist(gen);
    CHECK(compressed_size(std::min(s, s2), r1) <= compressed_size(std::max(s, s2), r1));
  }
}

TEST_CASE("CacheEntry::compressed_bytes matches compressed_size") {
  CacheEntry e;
  e.context = "c";
  e.original_size_bytes = 12'345'678;
  e.config = {"keydiff", 0.37};
  CHECK(e.compressed_bytes() == compressed_size(12'345'678, 0.37));
  CHECK(e.compressed_bytes() <= e.original_size_bytes);
}

static std::vector<TierSpec> two_tiers() {
  TierSpec fast;
  fast.tier_id = 0;
  fast.name = "fast";
  fast.capacity_bytes = 8'000'000'000;
  fast.read_bandwidth = 20e9;
  TierSpec slow;
  slow.tier_id = 1;
  slow.name = "slow";
  slow.read_bandwidth = 2e9;
  return {fast, slow};
}

TEST_CASE("validate_hierarchy accepts the fast/slow pair and sorts by tier id") {
  auto tiers = two_tiers();
  std::swap(tiers[0], tiers[1]);  // deliver unsorted
  const auto out = validate_hierarchy(tiers);
  REQUIRE(out.size() == 2);
  CHECK(out[0].name == "fast");
  CHECK(out[1].name == "slow");
  CHECK(out[1].unlimited());
}

TEST_CASE("validate_hierarchy is idempotent") {
  const auto once = validate_hierarchy(two_tiers());
  const auto twice = validate_hierarchy(once);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].tier_id == twice[i].tier_id);
    CHECK(once[i].name == twice[i].name);
    CHECK(once[i].capacity_bytes == twice[i].capacity_bytes);
    CHECK(once[i].read_bandwidth == twice[i].read_bandwidth);
    CHECK(once[i].fixed_access_latency == twice[i].fixed_access_latency);
  }
}

TEST_CASE("validate_hierarchy allows a single unlimited tier") {
  TierSpec only;
  only.tier_id = 0;
  only.name = "remote";
  only.read_bandwidth = 1e9;
  CHECK(validate_hierarchy({only}).size() == 1);
}

TEST_CASE("validate_hierarchy rejects broken hierarchies") {
  SUBCASE("unlimited tier above a finite one") {
    auto tiers = two_tiers();
    tiers[0].capacity_bytes.reset();
    tiers[1].capacity_bytes = 8'000'000'000;
    CHECK_THROWS_AS(validate_hierarchy(tiers), ValidationError);
  }
  SUBCASE("duplicate tier ids") {
    auto tiers = two_tiers();
    tiers[1].tier_id = 0;
    CHECK_THROWS_AS(validate_hierarchy(tiers), ValidationError);
  }
  SUBCASE("non-positive bandwidth") {
    auto tiers = two_tiers();
    tiers[0].read_bandwidth = 0.0;
    CHECK_THROWS_AS(validate_hierarchy(tiers), ValidationError);
  }
  SUBCASE("empty hierarchy") {
    CHECK_THROWS_AS(validate_hierarchy({}), ValidationError);
  }
}

TEST_CASE("validate_hierarchy warns when bandwidth grows down the stack") {
  auto tiers = two_tiers();
  tiers[1].read_bandwidth = 40e9;  // slower tier reads faster: fishy but legal
  std::vector<std::string> warnings;
  CHECK_NOTHROW(validate_hierarchy(tiers, &warnings));
  CHECK(warnings.size() == 1);
}

TEST_CASE("MethodSet default set and lookups") {
  const MethodSet set = MethodSet::default_set();
  REQUIRE(set.methods().size() == 3);
  CHECK(set.methods()[0].name == "keydiff");
  CHECK(set.methods()[1].name == "knorm");
  CHECK(set.methods()[2].name == "snapkv");
  CHECK(set.contains("knorm"));
  CHECK_FALSE(set.contains("gzip"));
  CHECK(set.by_name("snapkv").decompression_overhead == 0.0);
  CHECK_THROWS_AS(set.by_name("gzip"), ValidationError);
}

TEST_CASE("MethodSet rejects empty sets and duplicate names") {
  CHECK_THROWS_AS(MethodSet({}), ValidationError);
  CHECK_THROWS_AS(MethodSet({{"a", 0.0}, {"a", 0.0}}), ValidationError);
  CHECK_THROWS_AS(MethodSet({{"", 0.0}}), ValidationError);
}

TEST_CASE("validate_params checks signs and finiteness") {
  UtilityParams p;
  CHECK_NOTHROW(validate_params(p));
  p.alpha = 0.0;
  CHECK_NOTHROW(validate_params(p));  // pure-latency objective is legal
  p.alpha = -0.1;
  CHECK_THROWS_AS(validate_params(p), ValidationError);
  p = {};
  p.bytes_per_token = 0.0;
  CHECK_THROWS_AS(validate_params(p), ValidationError);
  p = {};
  p.prefill_a = -1e-9;
  CHECK_THROWS_AS(validate_params(p), ValidationError);
  p = {};
  p.prefill_b = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_params(p), ValidationError);
}

TEST_CASE("placement action kinds have stable labels") {
  CHECK(std::string(to_string(PlacementAction::Kind::Insert)) == "insert");
  CHECK(std::string(to_string(PlacementAction::Kind::Recompress)) == "recompress");
  CHECK(std::string(to_string(PlacementAction::Kind::Evict)) == "evict");
}
