#include "morrey/dyadic.hpp"

#include <cmath>
#include <stdexcept>

namespace morrey {

namespace {

void check_level(int level) {
  if (level < -kMaxLevel || level > kMaxLevel)
    throw std::out_of_range("dyadic level out of configured bounds");
}

void check_index(std::int64_t k) {
  if (k <= -kMaxIndex || k >= kMaxIndex)
    throw std::out_of_range("dyadic index out of configured bounds");
}

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be 1 or 2");
}

}  // namespace

std::int64_t saturating_shift_left(std::int64_t v, int sh) {
  constexpr std::int64_t kCap = std::int64_t{1} << 62;
  if (v == 0) return 0;
  if (sh >= 62) return v > 0 ? kCap : -kCap;
  std::int64_t mag = v > 0 ? v : -v;
  if (mag > (kCap >> sh)) return v > 0 ? kCap : -kCap;
  return v << sh;
}

DyadicCube::DyadicCube(int level, std::span<const std::int64_t> index)
    : level_(level), dim_(static_cast<int>(index.size())) {
  check_dim(dim_);
  check_level(level_);
  for (int i = 0; i < dim_; ++i) {
    check_index(index[static_cast<std::size_t>(i)]);
    k_[static_cast<std::size_t>(i)] = index[static_cast<std::size_t>(i)];
  }
}

DyadicCube::DyadicCube(int level, std::initializer_list<std::int64_t> index)
    : DyadicCube(level, std::span<const std::int64_t>(index.begin(), index.size())) {}

DyadicCube DyadicCube::line(int level, std::int64_t k) { return DyadicCube(level, {k}); }

DyadicCube DyadicCube::square(int level, std::int64_t k0, std::int64_t k1) {
  return DyadicCube(level, {k0, k1});
}

double DyadicCube::side_length() const { return std::ldexp(1.0, -level_); }

double DyadicCube::volume() const { return std::ldexp(1.0, -level_ * dim_); }

DyadicCube DyadicCube::parent() const {
  DyadicCube p = *this;
  p.level_ = level_ - 1;
  check_level(p.level_);
  for (int i = 0; i < dim_; ++i) p.k_[static_cast<std::size_t>(i)] = floor_div_pow2(k_[static_cast<std::size_t>(i)], 1);
  return p;
}

std::vector<DyadicCube> DyadicCube::children() const {
  check_level(level_ + 1);
  std::vector<DyadicCube> out;
  const int count = 1 << dim_;
  out.reserve(static_cast<std::size_t>(count));
  for (int bits = 0; bits < count; ++bits) {
    DyadicCube c = *this;
    c.level_ = level_ + 1;
    for (int i = 0; i < dim_; ++i) {
      const std::int64_t child = 2 * k_[static_cast<std::size_t>(i)] + ((bits >> i) & 1);
      check_index(child);
      c.k_[static_cast<std::size_t>(i)] = child;
    }
    out.push_back(c);
  }
  return out;
}

DyadicCube DyadicCube::ancestor_at_level(int coarser) const {
  if (coarser > level_) throw std::invalid_argument("ancestor level must not exceed cube level");
  check_level(coarser);
  DyadicCube a = *this;
  a.level_ = coarser;
  for (int i = 0; i < dim_; ++i)
    a.k_[static_cast<std::size_t>(i)] = floor_div_pow2(k_[static_cast<std::size_t>(i)], level_ - coarser);
  return a;
}

Box DyadicCube::box() const {
  std::array<std::int64_t, kMaxDim> lo{};
  std::array<std::int64_t, kMaxDim> hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[static_cast<std::size_t>(i)] = k_[static_cast<std::size_t>(i)];
    hi[static_cast<std::size_t>(i)] = k_[static_cast<std::size_t>(i)] + 1;
  }
  return Box(dim_, level_, {lo.data(), static_cast<std::size_t>(dim_)},
             {hi.data(), static_cast<std::size_t>(dim_)});
}

std::string DyadicCube::str() const {
  std::string s = std::to_string(level_) + ":";
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ',';
    s += std::to_string(k_[static_cast<std::size_t>(i)]);
  }
  return s;
}

Box::Box(int dim, int level, std::span<const std::int64_t> lo, std::span<const std::int64_t> hi)
    : level_(level), dim_(dim) {
  check_dim(dim_);
  check_level(level_);
  if (static_cast<int>(lo.size()) != dim_ || static_cast<int>(hi.size()) != dim_)
    throw std::invalid_argument("box endpoint arity mismatch");
  for (int i = 0; i < dim_; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (lo[idx] >= hi[idx]) throw std::invalid_argument("box must be non-empty");
    lo_[idx] = lo[idx];
    hi_[idx] = hi[idx];
  }
}

Box Box::interval(int level, std::int64_t lo, std::int64_t hi) {
  const std::int64_t l[1] = {lo};
  const std::int64_t h[1] = {hi};
  return Box(1, level, {l, 1}, {h, 1});
}

Box Box::rect(int level, std::int64_t lo0, std::int64_t hi0, std::int64_t lo1, std::int64_t hi1) {
  const std::int64_t l[2] = {lo0, lo1};
  const std::int64_t h[2] = {hi0, hi1};
  return Box(2, level, {l, 2}, {h, 2});
}

double Box::lo(int axis) const {
  return std::ldexp(static_cast<double>(lo_[static_cast<std::size_t>(axis)]), -level_);
}

double Box::hi(int axis) const {
  return std::ldexp(static_cast<double>(hi_[static_cast<std::size_t>(axis)]), -level_);
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) {
    v *= std::ldexp(static_cast<double>(hi_[static_cast<std::size_t>(i)] - lo_[static_cast<std::size_t>(i)]),
                    -level_);
  }
  return v;
}

namespace {

std::int64_t convert_floor(std::int64_t units, int from_level, int to_level) {
  if (to_level >= from_level) return saturating_shift_left(units, to_level - from_level);
  return floor_div_pow2(units, from_level - to_level);
}

std::int64_t convert_ceil(std::int64_t units, int from_level, int to_level) {
  if (to_level >= from_level) return saturating_shift_left(units, to_level - from_level);
  return ceil_div_pow2(units, from_level - to_level);
}

}  // namespace

std::int64_t Box::lo_floor_units(int axis, int at_level) const {
  return convert_floor(lo_[static_cast<std::size_t>(axis)], level_, at_level);
}
std::int64_t Box::lo_ceil_units(int axis, int at_level) const {
  return convert_ceil(lo_[static_cast<std::size_t>(axis)], level_, at_level);
}
std::int64_t Box::hi_floor_units(int axis, int at_level) const {
  return convert_floor(hi_[static_cast<std::size_t>(axis)], level_, at_level);
}
std::int64_t Box::hi_ceil_units(int axis, int at_level) const {
  return convert_ceil(hi_[static_cast<std::size_t>(axis)], level_, at_level);
}

bool Box::aligned_at(int at_level) const {
  if (at_level >= level_) return true;
  const int sh = level_ - at_level;
  for (int i = 0; i < dim_; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (floor_div_pow2(lo_[idx], sh) << sh != lo_[idx]) return false;
    if (floor_div_pow2(hi_[idx], sh) << sh != hi_[idx]) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("box dimension mismatch");
  const int common = std::max(level_, other.level_);
  for (int i = 0; i < dim_; ++i) {
    if (lo_floor_units(i, common) > other.lo_floor_units(i, common)) return false;
    if (hi_floor_units(i, common) < other.hi_floor_units(i, common)) return false;
  }
  return true;
}

CubeRelation relation(const DyadicCube& a, const DyadicCube& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cube dimension mismatch");
  const DyadicCube& fine = a.level() >= b.level() ? a : b;
  const DyadicCube& coarse = a.level() >= b.level() ? b : a;
  const int sh = fine.level() - coarse.level();
  bool nested = true;
  for (int i = 0; i < fine.dim(); ++i) {
    if (floor_div_pow2(fine.index(i), sh) != coarse.index(i)) {
      nested = false;
      break;
    }
  }
  if (!nested) return CubeRelation::Disjoint;
  if (sh == 0) return CubeRelation::Equal;
  return a.level() >= b.level() ? CubeRelation::FirstInsideSecond : CubeRelation::SecondInsideFirst;
}

Box dilate3(const DyadicCube& q) {
  std::array<std::int64_t, kMaxDim> lo{};
  std::array<std::int64_t, kMaxDim> hi{};
  for (int i = 0; i < q.dim(); ++i) {
    lo[static_cast<std::size_t>(i)] = q.index(i) - 1;
    hi[static_cast<std::size_t>(i)] = q.index(i) + 2;
  }
  return Box(q.dim(), q.level(), {lo.data(), static_cast<std::size_t>(q.dim())},
             {hi.data(), static_cast<std::size_t>(q.dim())});
}

std::vector<DyadicCube> cubes_at_level_intersecting(int level, const Box& b) {
  check_level(level);
  std::array<std::int64_t, kMaxDim> first{};
  std::array<std::int64_t, kMaxDim> last{};  // exclusive
  std::int64_t count = 1;
  for (int i = 0; i < b.dim(); ++i) {
    // Cube k meets [lo, hi) iff k*2^-level < hi and (k+1)*2^-level > lo.
    std::int64_t k0 = b.lo_floor_units(i, level);
    std::int64_t k1 = b.hi_ceil_units(i, level);
    if (k0 <= -kMaxIndex || k1 >= kMaxIndex)
      throw std::out_of_range("cube enumeration exceeds index bounds");
    first[static_cast<std::size_t>(i)] = k0;
    last[static_cast<std::size_t>(i)] = k1;
    count *= (k1 - k0);
    if (count > (std::int64_t{1} << 24))
      throw std::overflow_error("cube enumeration too large");
  }
  std::vector<DyadicCube> out;
  out.reserve(static_cast<std::size_t>(count));
  if (b.dim() == 1) {
    for (std::int64_t k = first[0]; k < last[0]; ++k) out.push_back(DyadicCube::line(level, k));
  } else {
    for (std::int64_t k0 = first[0]; k0 < last[0]; ++k0)
      for (std::int64_t k1 = first[1]; k1 < last[1]; ++k1)
        out.push_back(DyadicCube::square(level, k0, k1));
  }
  return out;
}

bool contains_point(const DyadicCube& q, std::span<const std::int64_t> units, int units_level) {
  if (static_cast<int>(units.size()) != q.dim())
    throw std::invalid_argument("point dimension mismatch");
  for (int i = 0; i < q.dim(); ++i) {
    const std::int64_t cell = convert_floor(units[static_cast<std::size_t>(i)], units_level, q.level());
    if (cell != q.index(i)) return false;
  }
  return true;
}

DyadicCube cube_containing_point(int dim, int level, std::span<const std::int64_t> units,
                                 int units_level) {
  check_dim(dim);
  check_level(level);
  std::array<std::int64_t, kMaxDim> k{};
  for (int i = 0; i < dim; ++i)
    k[static_cast<std::size_t>(i)] = convert_floor(units[static_cast<std::size_t>(i)], units_level, level);
  return DyadicCube(level, {k.data(), static_cast<std::size_t>(dim)});
}

}  // namespace morrey
