#include "doctest.h"

#include <cmath>
#include <sstream>

#include "morrey/grid_function.hpp"
#include "morrey/rng.hpp"

using namespace morrey;

namespace {

const GridSpec kGrid{1, 2, 6};  // [-4,4), h = 1/64, 512 cells

// Riemann-sum oracle for the integral of a step function over a box, using
// nothing but cell values and exact dyadic endpoints.
double integral_oracle(const GridFunction& f, double lo, double hi) {
  const GridSpec& s = f.spec();
  const double h = s.cell_width();
  double acc = 0.0;
  for (std::int64_t a = 0; a < s.cells_per_axis(); ++a) {
    const double clo = -std::ldexp(1.0, s.j0) + static_cast<double>(a) * h;
    const double overlap = std::min(hi, clo + h) - std::max(lo, clo);
    if (overlap > 0.0) acc += overlap * f.cell(static_cast<std::size_t>(a));
  }
  return acc;
}

}  // namespace

TEST_SUITE("grid_function") {

TEST_CASE("grid spec caps") {
  CHECK_THROWS(GridSpec{3, 2, 6}.validate());
  CHECK_THROWS(GridSpec{1, 2, 25}.validate());  // > 2^21 cells
  CHECK_THROWS(GridSpec{1, 2, -3}.validate());  // jmax < -j0
  CHECK(GridSpec{2, 1, 4}.cell_count() == 64 * 64);
  CHECK(kGrid.cell_count() == 512);
}

TEST_CASE("indicator integrates to the cube volume") {
  const auto chi = GridFunction::indicator(kGrid, DyadicCube::line(0, 0));
  CHECK(chi.integral() == 1.0);
  CHECK(chi.integrate(Box::interval(1, 0, 1)) == 0.5);
  CHECK(chi.integrate(Box::interval(2, 0, 1)) == 0.25);

  // cube fully outside the domain
  CHECK_THROWS(GridFunction::indicator(kGrid, DyadicCube::line(0, 5)));
  // cube finer than the resolution
  CHECK_THROWS(GridFunction::indicator(kGrid, DyadicCube::line(7, 0)));
}

TEST_CASE("power_law matches the antiderivative cell averages") {
  // dim 1, p = 2: cell [a,b) of |x|^{-1/2} averages to 2(sqrt(b)-sqrt(a))/(b-a).
  const auto f = GridFunction::power_law(kGrid, 2.0);
  const double h = kGrid.cell_width();
  const std::int64_t half = kGrid.cells_per_axis() / 2;

  const auto cell_avg = [&](double a, double b) { return 2.0 * (std::sqrt(b) - std::sqrt(a)) / (b - a); };

  // cell [1, 1+h)
  CHECK(f.cell(static_cast<std::size_t>(half + 64)) ==
        doctest::Approx(cell_avg(1.0, 1.0 + h)).epsilon(1e-13));
  // singular cell [0, h): average is 2/sqrt(h)
  CHECK(f.cell(static_cast<std::size_t>(half)) == doctest::Approx(2.0 / std::sqrt(h)).epsilon(1e-13));
  // mirror cell [-h, 0)
  CHECK(f.cell(static_cast<std::size_t>(half - 1)) == f.cell(static_cast<std::size_t>(half)));

  for (double v : f.cells()) CHECK(v >= 0.0);

  // integral of x^{-1/2} over [0,1) is exactly 2 for the cell-averaged rep
  CHECK(f.integrate(Box::interval(0, 0, 1)) == doctest::Approx(2.0).epsilon(1e-13));

  CHECK_THROWS(GridFunction::power_law(kGrid, 0.0));
  CHECK_THROWS(GridFunction::power_law(kGrid, -2.0));
  CHECK_THROWS(GridFunction::power_law(kGrid, 1.0));  // origin average diverges
}

TEST_CASE("power_law in dim 2 stays finite and positive") {
  const GridSpec g2{2, 1, 3};
  const auto f = GridFunction::power_law(g2, 3.0);
  for (double v : f.cells()) {
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
  // crude sanity: the four origin cells carry the largest averages
  const std::int64_t cpa = g2.cells_per_axis();
  const std::int64_t half = cpa / 2;
  const double origin = f.cell(static_cast<std::size_t>(half * cpa + half));
  for (double v : f.cells()) CHECK(v <= origin + 1e-12);
}

TEST_CASE("integration is exact against the Riemann oracle") {
  Rng rng(11);
  const auto f = GridFunction::random_steps(kGrid, 99);
  for (int iter = 0; iter < 100; ++iter) {
    const int lvl = static_cast<int>(rng.uniform_int(0, 5));
    const std::int64_t span = std::int64_t{1} << (kGrid.j0 + lvl);
    const std::int64_t k = rng.uniform_int(-span, span - 1);
    const DyadicCube q = DyadicCube::line(lvl, k);
    const double got = f.integrate(q);
    const double want = integral_oracle(f, q.box().lo(0), q.box().hi(0));
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
  }
  // sub-cell region: exact partial overlap
  const double got = f.integrate(Box::interval(kGrid.jmax + 2, 1, 3));
  const double want = integral_oracle(f, std::ldexp(1.0, -kGrid.jmax - 2),
                                      3.0 * std::ldexp(1.0, -kGrid.jmax - 2));
  CHECK(got == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("integrate is additive over disjoint aligned halves") {
  const auto f = GridFunction::random_steps(kGrid, 5);
  const double whole = f.integrate(Box::interval(0, -4, 4));
  const double left = f.integrate(Box::interval(0, -4, 0));
  const double right = f.integrate(Box::interval(0, 0, 4));
  CHECK(whole == doctest::Approx(left + right).epsilon(1e-14));
  CHECK(whole == doctest::Approx(f.integral()).epsilon(1e-14));
}

TEST_CASE("dilate_dyadic relabels the lattice") {
  const auto chi = GridFunction::indicator(kGrid, DyadicCube::line(0, 0));
  const auto g = chi.dilate_dyadic(1);  // chi(2x) = indicator of [0, 1/2)
  CHECK(g.spec().j0 == kGrid.j0 - 1);
  CHECK(g.spec().jmax == kGrid.jmax + 1);
  CHECK(g.integral() == 0.5);
  CHECK(g.integrate(Box::interval(1, 0, 1)) == 0.5);
  CHECK(g.integrate(Box::interval(1, 1, 2)) == 0.0);

  // m = 0 is the identity; dilations invert exactly
  const auto f = GridFunction::random_steps(kGrid, 3);
  const auto same = f.dilate_dyadic(0);
  CHECK(same.spec() == f.spec());
  const auto back = f.dilate_dyadic(2).dilate_dyadic(-2);
  REQUIRE(back.spec() == f.spec());
  for (std::size_t i = 0; i < f.cells().size(); ++i) CHECK(back.cell(i) == f.cell(i));

  // mass scales by 2^{-m n}
  CHECK(f.dilate_dyadic(1).integral() == doctest::Approx(0.5 * f.integral()).epsilon(1e-14));
  CHECK_THROWS(f.dilate_dyadic(40));
}

TEST_CASE("translate_dyadic shifts by whole cells") {
  const auto chi = GridFunction::indicator(kGrid, DyadicCube::line(0, 0));
  const std::int64_t k[1] = {1};
  const auto moved = chi.translate_dyadic(1, {k, 1});  // shift by 1/2
  CHECK(moved.integrate(Box::interval(1, 1, 3)) == 1.0);
  CHECK(moved.integral() == 1.0);
  const std::int64_t k2[1] = {7};
  CHECK(chi.translate_dyadic(0, {k2, 1}).integral() < 1.0);  // clipped at the boundary
  CHECK_THROWS(chi.translate_dyadic(kGrid.jmax + 1, {k, 1}));
}

TEST_CASE("pointwise algebra is exact on cells") {
  const auto f = GridFunction::random_steps(kGrid, 17);
  const auto g = GridFunction::random_steps(kGrid, 18);
  const auto sum = f.plus(g);
  const auto prod = f.pointwise_product(g);
  const auto sq = f.pointwise_power(2.0);
  const auto sc = f.scaled(2.5);
  for (std::size_t i = 0; i < f.cells().size(); ++i) {
    CHECK(sum.cell(i) == f.cell(i) + g.cell(i));
    CHECK(prod.cell(i) == f.cell(i) * g.cell(i));
    CHECK(sq.cell(i) == doctest::Approx(f.cell(i) * f.cell(i)).epsilon(1e-15));
    CHECK(sc.cell(i) == 2.5 * f.cell(i));
  }
  CHECK_THROWS(f.scaled(-1.0));
  CHECK_THROWS(f.pointwise_power(0.0));
}

TEST_CASE("from_cells rectifies sign and rejects non-finite input") {
  std::vector<double> vals(kGrid.cell_count(), -1.0);
  const auto f = GridFunction::from_cells(kGrid, vals);
  CHECK(f.cell(0) == 1.0);
  vals[3] = std::nan("");
  CHECK_THROWS(GridFunction::from_cells(kGrid, vals));
}

TEST_CASE("support bounds and cover level") {
  const auto zero = GridFunction::zeros(kGrid);
  CHECK(!zero.support_box());
  CHECK(zero.support_cover_level() == kGrid.jmax);

  const auto chi = GridFunction::indicator(kGrid, DyadicCube::line(2, 5));  // [5/4, 3/2)
  const auto sb = chi.support_box();
  REQUIRE(sb);
  CHECK(sb->lo(0) == 1.25);
  CHECK(sb->hi(0) == 1.5);
  CHECK(chi.support_cover_level() == 2);

  // straddling support has no covering cube; falls back to the orthant level
  const auto straddle =
      chi.plus(GridFunction::indicator(kGrid, DyadicCube::line(2, -1)));
  CHECK(straddle.support_cover_level() == -kGrid.j0);
}

TEST_CASE("random_steps is seeded and disjoint") {
  const auto a = GridFunction::random_steps(kGrid, 1234);
  const auto b = GridFunction::random_steps(kGrid, 1234);
  const auto c = GridFunction::random_steps(kGrid, 1235);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.cells().size(); ++i) {
    same = same && a.cell(i) == b.cell(i);
    differ = differ || a.cell(i) != c.cell(i);
  }
  CHECK(same);
  CHECK(differ);
  for (double v : a.cells()) {
    if (v != 0.0) {
      CHECK(v >= 0.0625);
      CHECK(v <= 16.0);
    }
  }
  CHECK(a.integral() > 0.0);
}

TEST_CASE("refined representation preserves every integral") {
  const auto f = GridFunction::random_steps(kGrid, 77);
  const auto fine = f.refined(2);
  CHECK(fine.spec().jmax == kGrid.jmax + 2);
  CHECK(fine.integral() == doctest::Approx(f.integral()).epsilon(1e-14));
  CHECK(fine.integrate(Box::interval(0, -1, 1)) ==
        doctest::Approx(f.integrate(Box::interval(0, -1, 1))).epsilon(1e-14));
}

TEST_CASE("csv and binary round trips") {
  const auto f = GridFunction::random_steps(GridSpec{2, 1, 3}, 31);
  {
    std::stringstream ss;
    f.write_csv(ss);
    const auto back = GridFunction::read_csv(ss);
    REQUIRE(back.spec() == f.spec());
    for (std::size_t i = 0; i < f.cells().size(); ++i) CHECK(back.cell(i) == f.cell(i));
  }
  {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    f.write_binary(ss);
    const auto back = GridFunction::read_binary(ss);
    REQUIRE(back.spec() == f.spec());
    for (std::size_t i = 0; i < f.cells().size(); ++i) CHECK(back.cell(i) == f.cell(i));
  }
}

}  // TEST_SUITE
