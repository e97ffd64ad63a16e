#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "spinbench/instance.hpp"
#include "spinbench/mining.hpp"
#include "spinbench/rng.hpp"
#include "spinbench/topology.hpp"

using namespace spinbench;

namespace {

SpinConfig random_config(Rng& rng, int n) {
  SpinConfig s(static_cast<std::size_t>(n));
  for (auto& v : s) v = std::int8_t(rng.sign());
  return s;
}

PackedConfig pack_pattern(int n, std::uint32_t bits) {
  SpinConfig s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[std::size_t(i)] = (bits >> i) & 1 ? -1 : +1;
  return pack(s);
}

InstanceSummary stub_summary(const char* id, bool unique, long long n1) {
  InstanceSummary s;
  s.id = id;
  s.unique_gs = unique;
  s.n1 = n1;
  return s;
}

}  // namespace

TEST_CASE("packed distance agrees with the spin-level count", "[mining]") {
  Rng rng(19);
  for (const int n : {8, 40, 100}) {
    for (int rep = 0; rep < 20; ++rep) {
      const SpinConfig a = random_config(rng, n);
      const SpinConfig b = random_config(rng, n);
      REQUIRE(packed_distance(pack(a), pack(b)) == hamming_distance(a, b));
    }
    const SpinConfig a = random_config(rng, n);
    REQUIRE(packed_distance(pack(a), pack(a)) == 0);
    REQUIRE(packed_distance(pack(a), pack(flipped(a))) == n);
  }
}

TEST_CASE("distance profile of the excited shell", "[mining]") {
  const int n = 3;
  SolveResult res;
  res.gs_configs = {pack_pattern(n, 0b000)};
  res.e1_configs = {pack_pattern(n, 0b001), pack_pattern(n, 0b111)};

  const HammingProfile fielded = hamming_profile(res, n, false);
  REQUIRE(fielded.defined);
  REQUIRE(fielded.min == 1);
  REQUIRE(fielded.mean == 2.0);

  // modulo a global flip 111 coincides with the ground state
  const HammingProfile zero_field = hamming_profile(res, n, true);
  REQUIRE(zero_field.defined);
  REQUIRE(zero_field.min == 0);
  REQUIRE(zero_field.mean == 0.5);

  res.gs_configs = {pack_pattern(n, 0b000), pack_pattern(n, 0b011)};
  const HammingProfile multi = hamming_profile(res, n, false);
  REQUIRE(multi.min == 1);
  REQUIRE(multi.mean == 1.0);

  SolveResult hollow;
  hollow.gs_configs = {pack_pattern(n, 0b000)};
  REQUIRE_FALSE(hamming_profile(hollow, n, false).defined);
  hollow.gs_configs.clear();
  hollow.e1_configs = {pack_pattern(n, 0b001)};
  REQUIRE_FALSE(hamming_profile(hollow, n, false).defined);
}

TEST_CASE("summaries carry identity and census", "[mining]") {
  static const ChimeraGraph g = build_chimera(1);
  const Instance inst =
      normalize(sample_instance(InstanceClass::by_name("U4"), g, 42));
  const SolveResult res = to_result(exact_solve(inst));

  const InstanceSummary s = summarize(inst, res, 1, 1, true);
  REQUIRE(s.id == "U4-m1-s42");
  REQUIRE(s.seed == 42);
  REQUIRE(s.e0 == res.e0);
  REQUIRE(s.e0_int == res.e0_int);
  REQUIRE(s.degeneracy == res.degeneracy);
  REQUIRE(s.n1 == res.n1);
  REQUIRE(s.exhaustive);
  REQUIRE(s.agreement);
  REQUIRE(s.unique_gs == unique_ground_state(res, inst.n(), true));
  REQUIRE(s.hamming.defined == res.has_e1);
  REQUIRE_FALSE(s.r.has_value());

  const InstanceSummary bare = summarize(inst, res, 1, 1, false);
  REQUIRE_FALSE(bare.hamming.defined);
}

TEST_CASE("instance stream seeds are distinct", "[mining]") {
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 100; ++k)
    seen.insert(instance_stream_seed(12345, k));
  REQUIRE(seen.size() == 100);
  REQUIRE(instance_stream_seed(12345, 7) == derive_seed(12345, 7));
  REQUIRE(instance_stream_seed(12346, 7) != instance_stream_seed(12345, 7));
}

TEST_CASE("yield over a drawn family", "[mining]") {
  static const ChimeraGraph g = build_chimera(1);
  EngineConfig engine;
  engine.kind = EngineConfig::Kind::Oracle;

  const YieldReport rep =
      compute_yield(InstanceClass::by_name("U1"), g, 20, 3, engine, true);
  REQUIRE(rep.class_name == "U1");
  REQUIRE(rep.rows == 1);
  REQUIRE(rep.cols == 1);
  REQUIRE(rep.n_total == 20);
  REQUIRE(rep.instances.size() == 20);

  int uniques = 0;
  for (int k = 0; k < 20; ++k) {
    const InstanceSummary& s = rep.instances[std::size_t(k)];
    REQUIRE(s.seed == instance_stream_seed(3, k));
    REQUIRE(s.exhaustive);
    uniques += s.unique_gs;
  }
  REQUIRE(rep.n_unique == uniques);
  REQUIRE(rep.yield == double(uniques) / 20.0);
  REQUIRE(rep.yield_err == binomial_error(rep.yield, 20));

  const YieldReport again =
      compute_yield(InstanceClass::by_name("U1"), g, 20, 3, engine, true);
  REQUIRE(again.yield == rep.yield);
  for (int k = 0; k < 20; ++k)
    REQUIRE(again.instances[std::size_t(k)].id == rep.instances[std::size_t(k)].id);

  REQUIRE_THROWS_AS(compute_yield(InstanceClass::by_name("U1"), g, 0, 3, engine),
                    std::invalid_argument);
}

TEST_CASE("benchmark filtering", "[mining]") {
  const std::vector<InstanceSummary> all = {
      stub_summary("a", true, 2),
      stub_summary("b", true, 7),
      stub_summary("c", false, 1),
      stub_summary("d", true, 0),
  };

  const auto picked = filter_benchmark_set(all, 4);
  REQUIRE(picked.size() == 2);
  REQUIRE(picked[0].id == "a");
  REQUIRE(picked[1].id == "d");

  const auto loose = filter_benchmark_set(all, 4, false);
  REQUIRE(loose.size() == 3);
  REQUIRE(loose[0].id == "a");
  REQUIRE(loose[1].id == "c");
  REQUIRE(loose[2].id == "d");

  REQUIRE(filter_benchmark_set(all, 0).size() == 1);
  REQUIRE_THROWS_AS(filter_benchmark_set(all, -1), std::invalid_argument);
}

TEST_CASE("profiles order rows and drop gaps", "[mining]") {
  std::vector<InstanceSummary> all = {
      stub_summary("late", true, 9),
      stub_summary("early", true, 1),
      stub_summary("mid-b", true, 4),
      stub_summary("mid-a", true, 4),
      stub_summary("skipped", true, 0),
  };
  all[0].r = 0.2;
  all[1].r = 0.9;
  all[2].r = 0.5;
  all[3].r = 0.6;
  // all[4] carries no resilience and must vanish from both profiles
  all[0].hamming = {true, 1, 3.5};
  all[1].hamming = {true, 1, 1.0};
  all[3].hamming = {true, 2, 2.0};

  const auto by_n1 = n1_resilience_profile(all);
  REQUIRE(by_n1.size() == 4);
  REQUIRE(by_n1[0] == std::make_pair(1LL, 0.9));
  REQUIRE(by_n1[1] == std::make_pair(4LL, 0.6));  // "mid-a" before "mid-b"
  REQUIRE(by_n1[2] == std::make_pair(4LL, 0.5));
  REQUIRE(by_n1[3] == std::make_pair(9LL, 0.2));

  const auto by_distance = hamming_resilience_profile(all);
  REQUIRE(by_distance.size() == 3);
  REQUIRE(by_distance[0] == std::make_pair(1.0, 0.9));
  REQUIRE(by_distance[1] == std::make_pair(2.0, 0.6));
  REQUIRE(by_distance[2] == std::make_pair(3.5, 0.2));
}
