#pragma once
// Non-negative step functions on the box [-2^j0, 2^j0)^n, constant on the
// level-jmax dyadic cells.  Every integral over a dyadic region is an exact
// finite sum, which is what makes the norm and operator identities testable
// at machine precision instead of up to quadrature error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "morrey/dyadic.hpp"

namespace morrey {

struct GridSpec {
  int dim = 1;
  int j0 = 2;    // domain half-extent 2^j0
  int jmax = 8;  // cell side 2^-jmax

  int axis_bits() const { return j0 + jmax + 1; }
  std::int64_t cells_per_axis() const { return std::int64_t{1} << axis_bits(); }
  std::size_t cell_count() const;
  double cell_width() const;
  double cell_volume() const;
  Box domain() const;

  GridSpec refined(int extra_levels) const;  // same box, finer cells
  GridSpec dilated(int m) const;             // lattice relabeling for x -> 2^m x

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

class GridFunction {
 public:
  static GridFunction zeros(const GridSpec& spec);
  // Rectifies to |values|; rejects non-finite entries.
  static GridFunction from_cells(const GridSpec& spec, std::vector<double> values);
  static GridFunction indicator(const GridSpec& spec, const DyadicCube& q);
  static GridFunction indicator(const GridSpec& spec, const Box& b);
  // Cell averages of |x|^(-dim/p); requires p > 1 so the cells at the origin
  // carry a finite average.
  static GridFunction power_law(const GridSpec& spec, double p);
  // Sum of up to 64 disjoint random dyadic cubes with log-uniform heights.
  static GridFunction random_steps(const GridSpec& spec, std::uint64_t seed);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> cells() const { return v_; }
  double cell(std::size_t flat) const { return v_[flat]; }
  std::size_t flat_index(std::int64_t a0, std::int64_t a1 = 0) const;

  double integrate(const Box& region) const;
  double integrate(const DyadicCube& q) const;
  double integral() const;  // over the whole domain

  GridFunction dilate_dyadic(int m) const;  // x -> f(2^m x)
  GridFunction translate_dyadic(int level, std::span<const std::int64_t> k) const;
  GridFunction pointwise_product(const GridFunction& other) const;
  GridFunction pointwise_power(double u) const;
  GridFunction scaled(double c) const;  // c >= 0
  GridFunction plus(const GridFunction& other) const;
  GridFunction refined(int extra_levels) const;  // same function, finer representation

  // Tight cell-aligned bounding box of {f > 0}; empty for f == 0.
  std::optional<Box> support_box() const;
  // Level of the smallest dyadic cube containing supp f.  When the support
  // meets more than one orthant no such cube exists and the level of the
  // orthant cubes (-j0) is returned; f == 0 yields jmax.
  int support_cover_level() const;

  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);
  void write_binary(std::ostream& os) const;
  static GridFunction read_binary(std::istream& is);

 private:
  GridFunction(GridSpec spec, std::vector<double> v) : spec_(spec), v_(std::move(v)) {}

  GridSpec spec_;
  std::vector<double> v_;
};

// [begin, end) array-index range of cells meeting the box on one axis,
// clipped to the domain.
std::pair<std::int64_t, std::int64_t> axis_cell_range(const GridSpec& spec, const Box& b, int axis);

// Exact integral of |y|^gamma over a dyadic cell, gamma > -dim.  Closed form
// in dim 1; midpoint subsampling away from the origin and recursive corner
// refinement at it in dim 2.
double radial_power_cell_integral(int dim, double gamma, int level,
                                  std::span<const std::int64_t> corner);

}  // namespace morrey
