#include "doctest.h"

#include <cstdint>

#include "morrey/dyadic.hpp"
#include "morrey/rng.hpp"

using namespace morrey;

namespace {

// Independent overlap oracle: compare the two boxes endpoint-by-endpoint at a
// common level, never consulting relation().
enum class Overlap { Equal, AInsideB, BInsideA, Disjoint, Partial };

Overlap box_overlap(const DyadicCube& a, const DyadicCube& b) {
  const int common = std::max(a.level(), b.level()) + 1;
  bool a_in_b = true, b_in_a = true, disjoint = false;
  for (int i = 0; i < a.dim(); ++i) {
    const std::int64_t alo = a.index(i) << (common - a.level());
    const std::int64_t ahi = (a.index(i) + 1) << (common - a.level());
    const std::int64_t blo = b.index(i) << (common - b.level());
    const std::int64_t bhi = (b.index(i) + 1) << (common - b.level());
    if (ahi <= blo || bhi <= alo) disjoint = true;
    if (alo < blo || ahi > bhi) a_in_b = false;
    if (blo < alo || bhi > ahi) b_in_a = false;
  }
  if (disjoint) return Overlap::Disjoint;
  if (a_in_b && b_in_a) return Overlap::Equal;
  if (a_in_b) return Overlap::AInsideB;
  if (b_in_a) return Overlap::BInsideA;
  return Overlap::Partial;
}

}  // namespace

TEST_SUITE("dyadic") {

TEST_CASE("side length is the exact power of two") {
  CHECK(DyadicCube::line(0, 0).side_length() == 1.0);
  CHECK(DyadicCube::line(2, 5).side_length() == 0.25);
  CHECK(DyadicCube::square(-3, -1, -1).side_length() == 8.0);
  CHECK(DyadicCube::square(-3, -1, -1).volume() == 64.0);
}

TEST_CASE("level and index caps are enforced") {
  CHECK_THROWS(DyadicCube::line(41, 0));
  CHECK_THROWS(DyadicCube::line(0, std::int64_t{1} << 40));
  CHECK_THROWS(DyadicCube(0, {0, 0, 0}));
}

TEST_CASE("relation distinguishes equal, nested and disjoint") {
  CHECK(relation(DyadicCube::line(1, 0), DyadicCube::line(0, 0)) ==
        CubeRelation::FirstInsideSecond);
  CHECK(relation(DyadicCube::line(0, 0), DyadicCube::line(0, 1)) == CubeRelation::Disjoint);
  CHECK(relation(DyadicCube::line(0, 0), DyadicCube::line(0, 0)) == CubeRelation::Equal);
  CHECK(relation(DyadicCube::line(0, 0), DyadicCube::line(3, 5)) ==
        CubeRelation::SecondInsideFirst);
  CHECK_THROWS(relation(DyadicCube::line(0, 0), DyadicCube::square(0, 0, 0)));
}

TEST_CASE("nesting trichotomy holds on a million random pairs") {
  Rng rng(0xd1ce);
  int nested = 0, disjoint = 0;
  for (int iter = 0; iter < 1'000'000; ++iter) {
    const int dim = 1 + static_cast<int>(rng.uniform_int(0, 1));
    const auto draw = [&] {
      const int lvl = static_cast<int>(rng.uniform_int(-4, 6));
      std::int64_t k[2] = {rng.uniform_int(-40, 40), rng.uniform_int(-40, 40)};
      return DyadicCube(lvl, std::span<const std::int64_t>(k, static_cast<std::size_t>(dim)));
    };
    const DyadicCube a = draw();
    const DyadicCube b = draw();
    const CubeRelation rel = relation(a, b);
    const Overlap oracle = box_overlap(a, b);
    REQUIRE(oracle != Overlap::Partial);  // dyadic cubes never partially overlap
    switch (oracle) {
      case Overlap::Equal: REQUIRE(rel == CubeRelation::Equal); break;
      case Overlap::AInsideB: REQUIRE(rel == CubeRelation::FirstInsideSecond); ++nested; break;
      case Overlap::BInsideA: REQUIRE(rel == CubeRelation::SecondInsideFirst); ++nested; break;
      default: REQUIRE(rel == CubeRelation::Disjoint); ++disjoint; break;
    }
  }
  CHECK(nested > 0);
  CHECK(disjoint > 0);
}

TEST_CASE("dilate3 triples around the center") {
  const Box b1 = dilate3(DyadicCube::line(0, 0));
  CHECK(b1.lo(0) == -1.0);
  CHECK(b1.hi(0) == 2.0);

  const Box b2 = dilate3(DyadicCube::square(1, 0, 0));
  CHECK(b2.lo(0) == -0.5);
  CHECK(b2.hi(0) == 1.0);
  CHECK(b2.lo(1) == -0.5);
  CHECK(b2.hi(1) == 1.0);

  Rng rng(7);
  for (int iter = 0; iter < 50; ++iter) {
    const DyadicCube q =
        DyadicCube::square(static_cast<int>(rng.uniform_int(-3, 8)), rng.uniform_int(-9, 9),
                           rng.uniform_int(-9, 9));
    CHECK(dilate3(q).volume() == doctest::Approx(9.0 * q.volume()).epsilon(1e-15));
  }
}

TEST_CASE("cubes_at_level_intersecting enumerates each tile once") {
  const auto two = cubes_at_level_intersecting(0, Box::interval(0, 0, 2));
  REQUIRE(two.size() == 2);
  CHECK(two[0] == DyadicCube::line(0, 0));
  CHECK(two[1] == DyadicCube::line(0, 1));

  const auto halves = cubes_at_level_intersecting(1, Box::interval(0, 0, 1));
  REQUIRE(halves.size() == 2);
  CHECK(halves[0] == DyadicCube::line(1, 0));
  CHECK(halves[1] == DyadicCube::line(1, 1));

  // [0.25, 0.75) = [1,3) at level 2 meets only the unit tile.
  const auto single = cubes_at_level_intersecting(0, Box::interval(2, 1, 3));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == DyadicCube::line(0, 0));

  CHECK_THROWS(cubes_at_level_intersecting(41, Box::interval(0, 0, 1)));
}

TEST_CASE("tiling: level cubes cover the box with indicator sum one") {
  const Box b = Box::rect(1, -3, 4, 1, 5);
  for (int level : {0, 1, 3}) {
    const auto cubes = cubes_at_level_intersecting(level, b);
    // Probe points on a sub-lattice of the box, offset by half a step so they
    // avoid every cube boundary.
    const int probe_level = 6;
    for (std::int64_t x0 = b.lo_floor_units(0, 5); x0 < b.hi_ceil_units(0, 5); ++x0)
      for (std::int64_t x1 = b.lo_floor_units(1, 5); x1 < b.hi_ceil_units(1, 5); ++x1) {
        const std::int64_t pt[2] = {2 * x0 + 1, 2 * x1 + 1};
        int hits = 0;
        for (const auto& q : cubes)
          if (contains_point(q, {pt, 2}, probe_level)) ++hits;
        REQUIRE(hits == 1);
      }
  }
}

TEST_CASE("parent, children and ancestors agree") {
  Rng rng(21);
  for (int iter = 0; iter < 200; ++iter) {
    const DyadicCube q =
        DyadicCube::square(static_cast<int>(rng.uniform_int(-2, 8)), rng.uniform_int(-20, 20),
                           rng.uniform_int(-20, 20));
    const auto kids = q.children();
    REQUIRE(kids.size() == 4);
    for (const auto& c : kids) {
      CHECK(c.parent() == q);
      CHECK(relation(c, q) == CubeRelation::FirstInsideSecond);
    }
    const int up = static_cast<int>(rng.uniform_int(-3, q.level() - 1));
    const DyadicCube anc = q.ancestor_at_level(up);
    CHECK(anc.level() == up);
    CHECK(relation(q, anc) == CubeRelation::FirstInsideSecond);
  }
  CHECK_THROWS(DyadicCube::line(0, 0).ancestor_at_level(1));
}

TEST_CASE("point containment uses half-open boundaries") {
  const DyadicCube q = DyadicCube::line(0, 0);  // [0,1)
  const std::int64_t zero[1] = {0};
  const std::int64_t one[1] = {4};
  const std::int64_t inside[1] = {3};
  CHECK(contains_point(q, {zero, 1}, 2));
  CHECK(!contains_point(q, {one, 1}, 2));
  CHECK(contains_point(q, {inside, 1}, 2));

  const std::int64_t pt[1] = {5};  // 1.25
  CHECK(cube_containing_point(1, 0, {pt, 1}, 2) == DyadicCube::line(0, 1));
  CHECK(cube_containing_point(1, 2, {pt, 1}, 2) == DyadicCube::line(2, 5));
}

TEST_CASE("cube serialization") {
  CHECK(DyadicCube::line(3, -7).str() == "3:-7");
  CHECK(DyadicCube::square(-2, 5, 0).str() == "-2:5,0");
}

}  // TEST_SUITE
