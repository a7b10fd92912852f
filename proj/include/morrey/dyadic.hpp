#pragma once
// Exact integer geometry for dyadic cubes Q_{jk} = prod_i [k_i 2^-j, (k_i+1) 2^-j).
//
// Cube and box coordinates are binary rationals stored as (units, level)
// pairs with value = units * 2^-level.  Membership, nesting and tiling tests
// are integer comparisons; real endpoints only materialize when a caller
// asks for them, so half-open boundaries are never subject to float drift.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace morrey {

inline constexpr int kMaxLevel = 40;                              // |j| cap
inline constexpr std::int64_t kMaxIndex = std::int64_t{1} << 40;  // |k_i| cap
inline constexpr int kMaxDim = 2;

// floor(v / 2^sh) for signed v; arithmetic shift is exact floor division.
constexpr std::int64_t floor_div_pow2(std::int64_t v, int sh) {
  return sh >= 63 ? (v < 0 ? -1 : 0) : (v >> sh);
}
constexpr std::int64_t ceil_div_pow2(std::int64_t v, int sh) {
  return -floor_div_pow2(-v, sh);
}

// v * 2^sh clamped to +-2^62; callers clip results to a bounded domain.
std::int64_t saturating_shift_left(std::int64_t v, int sh);

class Box;

enum class CubeRelation { Equal, FirstInsideSecond, SecondInsideFirst, Disjoint };

class DyadicCube {
 public:
  DyadicCube(int level, std::span<const std::int64_t> index);
  DyadicCube(int level, std::initializer_list<std::int64_t> index);
  static DyadicCube line(int level, std::int64_t k);  // dim 1
  static DyadicCube square(int level, std::int64_t k0, std::int64_t k1);

  int dim() const { return dim_; }
  int level() const { return level_; }
  std::int64_t index(int axis) const { return k_[static_cast<std::size_t>(axis)]; }
  std::span<const std::int64_t> index() const { return {k_.data(), static_cast<std::size_t>(dim_)}; }

  double side_length() const;  // 2^-level, exact
  double volume() const;       // 2^(-level*dim), exact

  DyadicCube parent() const;
  std::vector<DyadicCube> children() const;          // the 2^dim level+1 cubes
  DyadicCube ancestor_at_level(int coarser) const;   // coarser <= level
  Box box() const;

  std::string str() const;  // "j:k1,k2"

  bool operator==(const DyadicCube&) const = default;

 private:
  std::array<std::int64_t, kMaxDim> k_{};
  int level_ = 0;
  int dim_ = 1;
};

// Axis-aligned product of half-open intervals with binary-rational endpoints:
// axis i covers [lo_i * 2^-level, hi_i * 2^-level).
class Box {
 public:
  Box(int dim, int level, std::span<const std::int64_t> lo, std::span<const std::int64_t> hi);
  static Box interval(int level, std::int64_t lo, std::int64_t hi);  // dim 1
  static Box rect(int level, std::int64_t lo0, std::int64_t hi0, std::int64_t lo1, std::int64_t hi1);

  int dim() const { return dim_; }
  int level() const { return level_; }
  std::int64_t lo_units(int axis) const { return lo_[static_cast<std::size_t>(axis)]; }
  std::int64_t hi_units(int axis) const { return hi_[static_cast<std::size_t>(axis)]; }

  double lo(int axis) const;
  double hi(int axis) const;
  double volume() const;

  // Endpoint in units of 2^-at_level, rounded outward/inward as named.
  // Saturates instead of overflowing; results are meant to be clipped.
  std::int64_t lo_floor_units(int axis, int at_level) const;
  std::int64_t lo_ceil_units(int axis, int at_level) const;
  std::int64_t hi_floor_units(int axis, int at_level) const;
  std::int64_t hi_ceil_units(int axis, int at_level) const;

  // True when every endpoint is an integer multiple of 2^-at_level.
  bool aligned_at(int at_level) const;

  bool contains(const Box& other) const;

 private:
  std::array<std::int64_t, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> hi_{};
  int level_ = 0;
  int dim_ = 1;
};

// Dyadic trichotomy: two cubes are equal, nested, or disjoint.
CubeRelation relation(const DyadicCube& a, const DyadicCube& b);

// The concentric tripled cube 3Q = prod_i [(k_i-1) 2^-j, (k_i+2) 2^-j).
Box dilate3(const DyadicCube& q);

// All cubes of generation `level` meeting the bounded box, each exactly once.
std::vector<DyadicCube> cubes_at_level_intersecting(int level, const Box& b);

// Point coordinates given as units * 2^-units_level per axis.
bool contains_point(const DyadicCube& q, std::span<const std::int64_t> units, int units_level);
DyadicCube cube_containing_point(int dim, int level, std::span<const std::int64_t> units,
                                 int units_level);

}  // namespace morrey
