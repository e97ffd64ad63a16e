#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "naive_oracle.hpp"
#include "spinbench/instance.hpp"
#include "spinbench/topology.hpp"

using namespace spinbench;

namespace {

// P(sum of `degree` signed magnitudes = 0) by direct enumeration of all
// (2k)^degree coupler assignments
double zero_prob_enumerated(const InstanceClass& cls, int degree) {
  const std::size_t k = cls.values.size();
  const std::size_t options = 2 * k;
  std::size_t total = 1;
  for (int d = 0; d < degree; ++d) total *= options;
  std::size_t zeros = 0;
  for (std::size_t assign = 0; assign < total; ++assign) {
    std::size_t a = assign;
    long long sum = 0;
    for (int d = 0; d < degree; ++d) {
      const std::size_t u = a % options;
      a /= options;
      const long long mag = cls.values[u >> 1];
      sum += (u & 1) ? -mag : mag;
    }
    zeros += sum == 0;
  }
  return double(zeros) / double(total);
}

}  // namespace

TEST_CASE("class registry", "[instance]") {
  REQUIRE(InstanceClass::all().size() == 4);
  REQUIRE(InstanceClass::by_name("U1").values == std::vector<int>{1});
  REQUIRE(InstanceClass::by_name("U4").values == std::vector<int>{1, 2, 3, 4});
  REQUIRE(InstanceClass::by_name("U567").values == std::vector<int>{5, 6, 7});
  REQUIRE(InstanceClass::by_name("S28").values ==
          std::vector<int>{8, 13, 19, 28});
  REQUIRE(InstanceClass::by_name("U567").i_max == 7);
  REQUIRE_THROWS_AS(InstanceClass::by_name("U5"), std::invalid_argument);
  for (const auto& cls : InstanceClass::all())
    REQUIRE(&InstanceClass::get(cls.id) == &cls);
}

TEST_CASE("classical gaps are exact", "[instance]") {
  REQUIRE(InstanceClass::by_name("U1").classical_gap() == 2.0);
  REQUIRE(InstanceClass::by_name("U4").classical_gap() == 0.5);
  REQUIRE(InstanceClass::by_name("U567").classical_gap() == 2.0 / 7.0);
  REQUIRE(InstanceClass::by_name("S28").classical_gap() == 1.0 / 14.0);
}

TEST_CASE("sampling draws magnitudes from the class set", "[instance]") {
  const ChimeraGraph g = build_chimera(2);
  for (const auto& cls : InstanceClass::all()) {
    const Instance inst = sample_instance(cls, g, 42);
    REQUIRE(inst.couplers.size() == g.edges.size());
    REQUIRE(inst.fields.size() == std::size_t(g.n));
    REQUIRE_FALSE(inst.has_fields());
    REQUIRE_FALSE(inst.normalized);
    for (const long long j : inst.couplers) {
      const long long mag = j < 0 ? -j : j;
      bool ok = false;
      for (const int v : cls.values) ok = ok || mag == v;
      REQUIRE(ok);
    }
  }
}

TEST_CASE("sampling is seed-deterministic and class-separated", "[instance]") {
  const ChimeraGraph g = build_chimera(2);
  const auto& u4 = InstanceClass::by_name("U4");
  const Instance a = sample_instance(u4, g, 7);
  const Instance b = sample_instance(u4, g, 7);
  REQUIRE(a.couplers == b.couplers);
  const Instance c = sample_instance(u4, g, 8);
  REQUIRE(a.couplers != c.couplers);
  const Instance d = sample_instance(InstanceClass::by_name("S28"), g, 7);
  REQUIRE(a.couplers != d.couplers);
}

TEST_CASE("sampled magnitudes and signs are roughly uniform", "[instance]") {
  const ChimeraGraph g = build_chimera(8);  // 1472 couplers
  const auto& cls = InstanceClass::by_name("U4");
  const Instance inst = sample_instance(cls, g, 1);
  std::map<long long, int> mag_count;
  int negatives = 0;
  for (const long long j : inst.couplers) {
    ++mag_count[j < 0 ? -j : j];
    negatives += j < 0;
  }
  for (const int v : cls.values) {
    REQUIRE(mag_count[v] > 250);  // expected 368, sd ~17
    REQUIRE(mag_count[v] < 500);
  }
  REQUIRE(negatives > 600);  // expected 736, sd ~19
  REQUIRE(negatives < 870);
}

TEST_CASE("normalization folds the scale without touching payloads",
          "[instance]") {
  const ChimeraGraph g = build_chimera(1);
  const Instance raw = sample_instance(InstanceClass::by_name("U567"), g, 3);
  const Instance norm = normalize(raw);
  REQUIRE(norm.normalized);
  REQUIRE(norm.couplers == raw.couplers);
  REQUIRE_THROWS_AS(normalize(norm), std::logic_error);

  const SpinConfig s(std::size_t(g.n), std::int8_t(+1));
  REQUIRE(naive::energy(norm, s) == naive::energy(raw, s) / 7.0);

  const RealInstance real = to_real(norm);
  REQUIRE(real.normalized);
  // conversion multiplies by the precomputed reciprocal scale
  for (std::size_t e = 0; e < raw.couplers.size(); ++e)
    REQUIRE(real.couplers[e] == double(raw.couplers[e]) * (1.0 / 7.0));
  REQUIRE(naive::energy(real, s) == Catch::Approx(naive::energy(norm, s)));
}

TEST_CASE("zero local field probability matches enumeration", "[instance]") {
  for (const auto& cls : InstanceClass::all())
    for (const int degree : {1, 2, 3, 4, 5, 6}) {
      CAPTURE(cls.name, degree);
      REQUIRE(zero_field_prob(cls, degree) ==
              Catch::Approx(zero_prob_enumerated(cls, degree)).epsilon(1e-12));
    }
  // degree 6 spot value: C(6,3)/2^6 for single-magnitude couplers
  REQUIRE(zero_field_prob(InstanceClass::by_name("U1"), 6) == 20.0 / 64.0);
  REQUIRE_THROWS_AS(zero_field_prob(InstanceClass::by_name("U1"), 0),
                    std::invalid_argument);
}

TEST_CASE("class-average zero-field fraction on the large grid",
          "[instance]") {
  const ChimeraGraph g = build_chimera(8);
  // degree histogram is {5: 128, 6: 384}; U1 cannot zero an odd degree
  const double u1 = zero_field_class_average(InstanceClass::by_name("U1"), g);
  REQUIRE(u1 == 120.0 / 512.0);
  for (const auto& cls : InstanceClass::all()) {
    const double avg = zero_field_class_average(cls, g);
    const double expect = (128.0 * zero_prob_enumerated(cls, 5) +
                           384.0 * zero_prob_enumerated(cls, 6)) /
                          512.0;
    REQUIRE(avg == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("instance files round-trip byte-identically", "[instance]") {
  const ChimeraGraph g = build_chimera(2);
  for (const auto& cls : InstanceClass::all()) {
    const Instance raw = sample_instance(cls, g, 99);

    std::ostringstream first;
    write_instance_file(first, raw, g.rows, g.cols);
    std::istringstream in(first.str());
    GraphCache cache;
    const LoadedInstance back = read_instance(in, &cache);
    REQUIRE(back.is_exact());
    REQUIRE(back.exact->couplers == raw.couplers);
    REQUIRE(back.exact->seed == raw.seed);
    REQUIRE_FALSE(back.exact->normalized);
    std::ostringstream second;
    write_instance_file(second, *back.exact, g.rows, g.cols);
    REQUIRE(first.str() == second.str());
  }
}

TEST_CASE("normalized instances round-trip through real payloads",
          "[instance]") {
  const ChimeraGraph g = build_chimera(1);
  const Instance norm =
      normalize(sample_instance(InstanceClass::by_name("U567"), g, 4));
  std::ostringstream first;
  write_instance_file(first, norm, g.rows, g.cols);
  REQUIRE(first.str().find("normalized=1") != std::string::npos);
  std::istringstream in(first.str());
  const LoadedInstance back = read_instance(in, nullptr);
  REQUIRE_FALSE(back.is_exact());
  REQUIRE(back.real->normalized);
  for (std::size_t e = 0; e < norm.couplers.size(); ++e)
    REQUIRE(back.real->couplers[e] == double(norm.couplers[e]) * (1.0 / 7.0));
  std::ostringstream second;
  write_instance_file(second, *back.real, g.rows, g.cols);
  REQUIRE(first.str() == second.str());
}

TEST_CASE("rectangular grids carry an RxC tag", "[instance]") {
  const ChimeraGraph g = build_chimera_grid(1, 2);
  REQUIRE(g.n == 16);
  const Instance inst = sample_instance(InstanceClass::by_name("U1"), g, 5);
  std::ostringstream os;
  write_instance_file(os, inst, g.rows, g.cols);
  REQUIRE(os.str().find("m=1x2") != std::string::npos);
  std::istringstream in(os.str());
  const LoadedInstance back = read_instance(in, nullptr);
  REQUIRE(back.graph->rows == 1);
  REQUIRE(back.graph->cols == 2);
  REQUIRE(instance_id(inst.instance_class(), 1, 2, 5) == "U1-m1x2-s5");
  REQUIRE(instance_id(inst.instance_class(), 8, 8, 42) == "U1-m8-s42");
}

TEST_CASE("parsing rejects malformed files with line numbers", "[instance]") {
  const ChimeraGraph g = build_chimera(1);
  const Instance inst = sample_instance(InstanceClass::by_name("U4"), g, 1);
  std::ostringstream os;
  write_instance_file(os, inst, 1, 1);
  const std::string good = os.str();

  auto fails_with = [](const std::string& text, const std::string& what) {
    std::istringstream in(text);
    REQUIRE_THROWS_WITH(read_instance(in, nullptr),
                        Catch::Matchers::ContainsSubstring(what));
  };

  fails_with("", "missing header");
  fails_with("# wrong v9 class=U1 m=1 seed=0 normalized=0\n", "bad header");
  fails_with("# spinbench v1 class=U9 m=1 seed=0 normalized=0\n",
             "unknown instance class");
  fails_with("# spinbench v1 class=U1 m=1 normalized=0\n", "missing header key");
  fails_with("# spinbench v1 class=U1 m=0 seed=0 normalized=0\n",
             "bad grid size");
  fails_with("# spinbench v1 class=U1 m=1 seed=0 normalized=2\n",
             "bad normalized flag");

  // couplers out of canonical order
  std::string swapped = good;
  const auto l1 = swapped.find("e 0 4");
  const auto l2 = swapped.find('\n', l1);
  REQUIRE(l1 != std::string::npos);
  swapped.replace(l1, l2 - l1, "e 0 5 1");
  fails_with(swapped, "canonical edge order");

  // magnitude outside the class set
  std::string bad_mag = good;
  bad_mag.replace(bad_mag.find("e 0 4"), bad_mag.find('\n', bad_mag.find("e 0 4")) - bad_mag.find("e 0 4"), "e 0 4 9");
  fails_with(bad_mag, "magnitude");

  // truncated body
  std::string truncated(good.begin(), good.begin() + long(good.find("e 0 6")));
  fails_with(truncated, "missing couplers");

  // line numbers point at the offending line
  std::istringstream in(swapped);
  try {
    read_instance(in, nullptr);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("graph cache shares grids between instances", "[instance]") {
  const ChimeraGraph g = build_chimera(1);
  GraphCache cache;
  std::ostringstream a, b;
  write_instance_file(a, sample_instance(InstanceClass::by_name("U1"), g, 1),
                      1, 1);
  write_instance_file(b, sample_instance(InstanceClass::by_name("U1"), g, 2),
                      1, 1);
  std::istringstream ia(a.str()), ib(b.str());
  const LoadedInstance la = read_instance(ia, &cache);
  const LoadedInstance lb = read_instance(ib, &cache);
  REQUIRE(la.graph.get() == lb.graph.get());
  REQUIRE(la.exact->graph == lb.exact->graph);
}
