#include "morrey/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "morrey/rng.hpp"

namespace morrey {

namespace {

constexpr std::int64_t kEnumCap = std::int64_t{1} << 24;

double pow_int_exp2(int e) { return std::ldexp(1.0, e); }

}  // namespace

std::size_t GridSpec::cell_count() const {
  std::size_t n = static_cast<std::size_t>(cells_per_axis());
  return dim == 1 ? n : n * n;
}

double GridSpec::cell_width() const { return pow_int_exp2(-jmax); }

double GridSpec::cell_volume() const { return pow_int_exp2(-jmax * dim); }

Box GridSpec::domain() const {
  // [-2^j0, 2^j0) = [-half, half) cells at level jmax.
  const std::int64_t half = cells_per_axis() / 2;
  if (dim == 1) return Box::interval(jmax, -half, half);
  return Box::rect(jmax, -half, half, -half, half);
}

GridSpec GridSpec::refined(int extra_levels) const {
  GridSpec s = *this;
  s.jmax += extra_levels;
  s.validate();
  return s;
}

GridSpec GridSpec::dilated(int m) const {
  GridSpec s = *this;
  s.j0 -= m;
  s.jmax += m;
  s.validate();
  return s;
}

void GridSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (std::abs(j0) > 36 || std::abs(jmax) > kMaxLevel)
    throw std::invalid_argument("grid levels out of configured bounds");
  const int bits = axis_bits();
  const int cap = dim == 1 ? 21 : 12;
  if (bits < 1) throw std::invalid_argument("resolution must satisfy jmax >= -j0");
  if (bits > cap) throw std::invalid_argument("grid resolution cap exceeded");
}

GridFunction GridFunction::zeros(const GridSpec& spec) {
  spec.validate();
  return GridFunction(spec, std::vector<double>(spec.cell_count(), 0.0));
}

GridFunction GridFunction::from_cells(const GridSpec& spec, std::vector<double> values) {
  spec.validate();
  if (values.size() != spec.cell_count())
    throw std::invalid_argument("cell array length does not match the grid");
  for (double& v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("cell values must be finite");
    v = std::fabs(v);
  }
  return GridFunction(spec, std::move(values));
}

std::size_t GridFunction::flat_index(std::int64_t a0, std::int64_t a1) const {
  const std::int64_t cpa = spec_.cells_per_axis();
  return spec_.dim == 1 ? static_cast<std::size_t>(a0)
                        : static_cast<std::size_t>(a0 * cpa + a1);
}

std::pair<std::int64_t, std::int64_t> axis_cell_range(const GridSpec& spec, const Box& b,
                                                      int axis) {
  const std::int64_t half = spec.cells_per_axis() / 2;
  std::int64_t g0 = b.lo_floor_units(axis, spec.jmax);
  std::int64_t g1 = b.hi_ceil_units(axis, spec.jmax);
  g0 = std::max(g0, -half);
  g1 = std::min(g1, half);
  const std::int64_t a0 = g0 + half;
  const std::int64_t a1 = g1 + half;
  if (a0 >= a1) return {0, 0};
  return {a0, a1};
}

GridFunction GridFunction::indicator(const GridSpec& spec, const Box& b) {
  spec.validate();
  if (b.dim() != spec.dim) throw std::invalid_argument("indicator dimension mismatch");
  if (!b.aligned_at(spec.jmax))
    throw std::invalid_argument("indicator region is finer than the grid resolution");
  GridFunction out = zeros(spec);
  std::array<std::pair<std::int64_t, std::int64_t>, kMaxDim> r{};
  for (int i = 0; i < spec.dim; ++i) {
    r[static_cast<std::size_t>(i)] = axis_cell_range(spec, b, i);
    if (r[static_cast<std::size_t>(i)].first == r[static_cast<std::size_t>(i)].second)
      throw std::invalid_argument("indicator support lies outside the grid domain");
  }
  if (spec.dim == 1) {
    for (std::int64_t a = r[0].first; a < r[0].second; ++a) out.v_[static_cast<std::size_t>(a)] = 1.0;
  } else {
    for (std::int64_t a0 = r[0].first; a0 < r[0].second; ++a0)
      for (std::int64_t a1 = r[1].first; a1 < r[1].second; ++a1)
        out.v_[out.flat_index(a0, a1)] = 1.0;
  }
  return out;
}

GridFunction GridFunction::indicator(const GridSpec& spec, const DyadicCube& q) {
  if (q.level() > spec.jmax)
    throw std::invalid_argument("indicator cube is finer than the grid resolution");
  return indicator(spec, q.box());
}

double radial_power_cell_integral(int dim, double gamma, int level,
                                  std::span<const std::int64_t> corner) {
  if (gamma <= -dim) throw std::invalid_argument("|y|^gamma is not integrable at the origin");
  const double h = pow_int_exp2(-level);
  if (dim == 1) {
    // Antiderivative of |y|^gamma on [a,b), reflected onto y >= 0.
    const std::int64_t k = corner[0];
    const std::int64_t kp = k >= 0 ? k : -k - 1;
    const double a = static_cast<double>(kp) * h;
    const double b = static_cast<double>(kp + 1) * h;
    const double e = gamma + 1.0;
    return (std::pow(b, e) - std::pow(a, e)) / e;
  }

  // dim == 2: reflect into the positive quadrant.
  const std::int64_t k0 = corner[0] >= 0 ? corner[0] : -corner[0] - 1;
  const std::int64_t k1 = corner[1] >= 0 ? corner[1] : -corner[1] - 1;

  const auto midpoint_patch = [&](double x0, double y0, double side) {
    double acc = 0.0;
    const double step = side / 4.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double x = x0 + (i + 0.5) * step;
        const double y = y0 + (j + 0.5) * step;
        acc += std::pow(x * x + y * y, 0.5 * gamma);
      }
    return acc * step * step;
  };

  if (k0 > 0 || k1 > 0) {
    return midpoint_patch(static_cast<double>(k0) * h, static_cast<double>(k1) * h, h);
  }

  // Origin-corner cell [0,h)^2: peel quadrants for 8 dyadic levels, then close
  // the remaining square with an area-matched quarter disk.
  double total = 0.0;
  double eps = h;
  for (int depth = 0; depth < 8; ++depth) {
    const double half = eps / 2.0;
    total += midpoint_patch(half, 0.0, half);
    total += midpoint_patch(0.0, half, half);
    total += midpoint_patch(half, half, half);
    eps = half;
  }
  const double r_match = 2.0 * eps / std::sqrt(M_PI);
  total += 0.5 * M_PI * std::pow(r_match, gamma + 2.0) / (gamma + 2.0);
  return total;
}

GridFunction GridFunction::power_law(const GridSpec& spec, double p) {
  spec.validate();
  if (!(p > 0.0)) throw std::invalid_argument("power_law requires p > 0");
  if (!(p > 1.0))
    throw std::invalid_argument("power_law requires p > 1: the cell average at the origin is infinite otherwise");
  const double gamma = -static_cast<double>(spec.dim) / p;
  const std::int64_t cpa = spec.cells_per_axis();
  const std::int64_t half = cpa / 2;
  std::vector<double> vals(spec.cell_count(), 0.0);
  const double inv_vol = 1.0 / spec.cell_volume();
  if (spec.dim == 1) {
    for (std::int64_t a = 0; a < cpa; ++a) {
      const std::int64_t corner[1] = {a - half};
      vals[static_cast<std::size_t>(a)] =
          inv_vol * radial_power_cell_integral(1, gamma, spec.jmax, {corner, 1});
    }
  } else {
    for (std::int64_t a0 = 0; a0 < cpa; ++a0)
      for (std::int64_t a1 = 0; a1 < cpa; ++a1) {
        const std::int64_t corner[2] = {a0 - half, a1 - half};
        vals[static_cast<std::size_t>(a0 * cpa + a1)] =
            inv_vol * radial_power_cell_integral(2, gamma, spec.jmax, {corner, 2});
      }
  }
  return GridFunction(spec, std::move(vals));
}

GridFunction GridFunction::random_steps(const GridSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int target = static_cast<int>(rng.uniform_int(1, 64));
  const int lvl_lo = std::max(0, -spec.j0);
  const int lvl_hi = std::max(lvl_lo, spec.jmax - 2);
  std::vector<DyadicCube> cubes;
  std::vector<double> heights;
  int attempts = 0;
  while (static_cast<int>(cubes.size()) < target && attempts < 4 * target) {
    ++attempts;
    const int lvl = static_cast<int>(rng.uniform_int(lvl_lo, lvl_hi));
    const std::int64_t span = std::int64_t{1} << (spec.j0 + lvl);
    std::array<std::int64_t, kMaxDim> k{};
    for (int i = 0; i < spec.dim; ++i)
      k[static_cast<std::size_t>(i)] = rng.uniform_int(-span, span - 1);
    DyadicCube q(lvl, {k.data(), static_cast<std::size_t>(spec.dim)});
    bool ok = true;
    for (const auto& other : cubes)
      if (relation(q, other) != CubeRelation::Disjoint) {
        ok = false;
        break;
      }
    if (!ok) continue;
    cubes.push_back(q);
    heights.push_back(rng.log_uniform(0.0625, 16.0));
  }
  std::vector<double> vals(spec.cell_count(), 0.0);
  const std::int64_t cpa = spec.cells_per_axis();
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    const Box b = cubes[c].box();
    const auto r0 = axis_cell_range(spec, b, 0);
    if (spec.dim == 1) {
      for (std::int64_t a = r0.first; a < r0.second; ++a) vals[static_cast<std::size_t>(a)] = heights[c];
    } else {
      const auto r1 = axis_cell_range(spec, b, 1);
      for (std::int64_t a0 = r0.first; a0 < r0.second; ++a0)
        for (std::int64_t a1 = r1.first; a1 < r1.second; ++a1)
          vals[static_cast<std::size_t>(a0 * cpa + a1)] = heights[c];
    }
  }
  return GridFunction(spec, std::move(vals));
}

double GridFunction::integrate(const Box& region) const {
  if (region.dim() != spec_.dim) throw std::invalid_argument("region dimension mismatch");
  const int M = std::max(spec_.jmax, region.level());
  if (M - spec_.jmax > 50) throw std::invalid_argument("region resolution too fine for exact overlap");
  const int sh = M - spec_.jmax;  // cell length in 2^-M units is 2^sh
  const std::int64_t S = std::int64_t{1} << sh;
  const std::int64_t half = spec_.cells_per_axis() / 2;
  const std::int64_t cpa = spec_.cells_per_axis();

  struct AxisW {
    std::int64_t a0 = 0, a1 = 0;
    std::vector<double> w;
  };
  std::array<AxisW, kMaxDim> ax;
  for (int i = 0; i < spec_.dim; ++i) {
    std::int64_t rlo = region.lo_floor_units(i, M);
    std::int64_t rhi = region.hi_ceil_units(i, M);
    // Exactness: region endpoints are binary rationals, so at level M the
    // floor/ceil conversions are the identity.
    rlo = std::max(rlo, -half * S);
    rhi = std::min(rhi, half * S);
    auto& a = ax[static_cast<std::size_t>(i)];
    if (rlo >= rhi) return 0.0;
    a.a0 = std::max<std::int64_t>(floor_div_pow2(rlo, sh) + half, 0);
    a.a1 = std::min<std::int64_t>(ceil_div_pow2(rhi, sh) + half, cpa);
    a.w.resize(static_cast<std::size_t>(a.a1 - a.a0));
    for (std::int64_t aa = a.a0; aa < a.a1; ++aa) {
      const std::int64_t c0 = (aa - half) * S;
      const std::int64_t c1 = c0 + S;
      const std::int64_t ov = std::min(rhi, c1) - std::max(rlo, c0);
      a.w[static_cast<std::size_t>(aa - a.a0)] = ov > 0 ? static_cast<double>(ov) : 0.0;
    }
  }

  const double scale = pow_int_exp2(-M * spec_.dim);
  double total = 0.0;
  if (spec_.dim == 1) {
    for (std::int64_t a = ax[0].a0; a < ax[0].a1; ++a)
      total += v_[static_cast<std::size_t>(a)] * ax[0].w[static_cast<std::size_t>(a - ax[0].a0)];
  } else {
    for (std::int64_t a0 = ax[0].a0; a0 < ax[0].a1; ++a0) {
      const double w0 = ax[0].w[static_cast<std::size_t>(a0 - ax[0].a0)];
      if (w0 == 0.0) continue;
      double row = 0.0;
      for (std::int64_t a1 = ax[1].a0; a1 < ax[1].a1; ++a1)
        row += v_[flat_index(a0, a1)] * ax[1].w[static_cast<std::size_t>(a1 - ax[1].a0)];
      total += w0 * row;
    }
  }
  return total * scale;
}

double GridFunction::integrate(const DyadicCube& q) const { return integrate(q.box()); }

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : v_) s += v;
  return s * spec_.cell_volume();
}

GridFunction GridFunction::dilate_dyadic(int m) const {
  // x -> f(2^m x) is a pure lattice relabeling: the cell array is unchanged,
  // the domain shrinks by 2^-m and the resolution deepens by m.
  GridSpec s = spec_.dilated(m);
  return GridFunction(s, v_);
}

GridFunction GridFunction::translate_dyadic(int level, std::span<const std::int64_t> k) const {
  if (static_cast<int>(k.size()) != spec_.dim) throw std::invalid_argument("shift dimension mismatch");
  if (level > spec_.jmax)
    throw std::invalid_argument("translation is finer than the grid resolution");
  std::array<std::int64_t, kMaxDim> off{};
  for (int i = 0; i < spec_.dim; ++i)
    off[static_cast<std::size_t>(i)] =
        saturating_shift_left(k[static_cast<std::size_t>(i)], spec_.jmax - level);
  const std::int64_t cpa = spec_.cells_per_axis();
  std::vector<double> vals(v_.size(), 0.0);
  if (spec_.dim == 1) {
    for (std::int64_t a = 0; a < cpa; ++a) {
      const std::int64_t src = a - off[0];
      if (src >= 0 && src < cpa) vals[static_cast<std::size_t>(a)] = v_[static_cast<std::size_t>(src)];
    }
  } else {
    for (std::int64_t a0 = 0; a0 < cpa; ++a0)
      for (std::int64_t a1 = 0; a1 < cpa; ++a1) {
        const std::int64_t s0 = a0 - off[0];
        const std::int64_t s1 = a1 - off[1];
        if (s0 >= 0 && s0 < cpa && s1 >= 0 && s1 < cpa)
          vals[static_cast<std::size_t>(a0 * cpa + a1)] = v_[static_cast<std::size_t>(s0 * cpa + s1)];
      }
  }
  return GridFunction(spec_, std::move(vals));
}

GridFunction GridFunction::pointwise_product(const GridFunction& other) const {
  if (!(other.spec_ == spec_)) throw std::invalid_argument("grid mismatch");
  std::vector<double> vals(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) vals[i] = v_[i] * other.v_[i];
  return GridFunction(spec_, std::move(vals));
}

GridFunction GridFunction::pointwise_power(double u) const {
  if (!(u > 0.0)) throw std::invalid_argument("pointwise_power requires u > 0");
  std::vector<double> vals(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) vals[i] = v_[i] == 0.0 ? 0.0 : std::pow(v_[i], u);
  return GridFunction(spec_, std::move(vals));
}

GridFunction GridFunction::scaled(double c) const {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale must be finite and >= 0");
  std::vector<double> vals(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) vals[i] = c * v_[i];
  return GridFunction(spec_, std::move(vals));
}

GridFunction GridFunction::plus(const GridFunction& other) const {
  if (!(other.spec_ == spec_)) throw std::invalid_argument("grid mismatch");
  std::vector<double> vals(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) vals[i] = v_[i] + other.v_[i];
  return GridFunction(spec_, std::move(vals));
}

GridFunction GridFunction::refined(int extra_levels) const {
  if (extra_levels < 0) throw std::invalid_argument("refinement must be non-negative");
  GridSpec s = spec_.refined(extra_levels);
  const std::int64_t f = std::int64_t{1} << extra_levels;
  const std::int64_t cpa = s.cells_per_axis();
  std::vector<double> vals(s.cell_count());
  if (spec_.dim == 1) {
    for (std::int64_t a = 0; a < cpa; ++a) vals[static_cast<std::size_t>(a)] = v_[static_cast<std::size_t>(a / f)];
  } else {
    const std::int64_t old_cpa = spec_.cells_per_axis();
    for (std::int64_t a0 = 0; a0 < cpa; ++a0)
      for (std::int64_t a1 = 0; a1 < cpa; ++a1)
        vals[static_cast<std::size_t>(a0 * cpa + a1)] =
            v_[static_cast<std::size_t>((a0 / f) * old_cpa + (a1 / f))];
  }
  return GridFunction(s, std::move(vals));
}

std::optional<Box> GridFunction::support_box() const {
  const std::int64_t cpa = spec_.cells_per_axis();
  const std::int64_t half = cpa / 2;
  std::array<std::int64_t, kMaxDim> lo{};
  std::array<std::int64_t, kMaxDim> hi{};
  lo.fill(cpa);
  hi.fill(-1);
  bool any = false;
  if (spec_.dim == 1) {
    for (std::int64_t a = 0; a < cpa; ++a)
      if (v_[static_cast<std::size_t>(a)] > 0.0) {
        lo[0] = std::min(lo[0], a);
        hi[0] = std::max(hi[0], a);
        any = true;
      }
  } else {
    for (std::int64_t a0 = 0; a0 < cpa; ++a0)
      for (std::int64_t a1 = 0; a1 < cpa; ++a1)
        if (v_[static_cast<std::size_t>(a0 * cpa + a1)] > 0.0) {
          lo[0] = std::min(lo[0], a0);
          hi[0] = std::max(hi[0], a0);
          lo[1] = std::min(lo[1], a1);
          hi[1] = std::max(hi[1], a1);
          any = true;
        }
  }
  if (!any) return std::nullopt;
  std::array<std::int64_t, kMaxDim> glo{};
  std::array<std::int64_t, kMaxDim> ghi{};
  for (int i = 0; i < spec_.dim; ++i) {
    glo[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] - half;
    ghi[static_cast<std::size_t>(i)] = hi[static_cast<std::size_t>(i)] - half + 1;
  }
  return Box(spec_.dim, spec_.jmax, {glo.data(), static_cast<std::size_t>(spec_.dim)},
             {ghi.data(), static_cast<std::size_t>(spec_.dim)});
}

int GridFunction::support_cover_level() const {
  const auto sb = support_box();
  if (!sb) return spec_.jmax;
  for (int j = spec_.jmax; j >= -spec_.j0; --j) {
    const int sh = spec_.jmax - j;
    bool fits = true;
    for (int i = 0; i < spec_.dim; ++i) {
      const std::int64_t lo_cell = sb->lo_units(i);
      const std::int64_t hi_cell = sb->hi_units(i) - 1;
      if (floor_div_pow2(lo_cell, sh) != floor_div_pow2(hi_cell, sh)) {
        fits = false;
        break;
      }
    }
    if (fits) return j;
  }
  return -spec_.j0;
}

void GridFunction::write_csv(std::ostream& os) const {
  os << spec_.dim << ',' << spec_.j0 << ',' << spec_.jmax << '\n';
  char buf[40];
  for (double v : v_) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << '\n';
  }
}

GridFunction GridFunction::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("grid csv: missing header");
  GridSpec spec;
  if (std::sscanf(line.c_str(), "%d,%d,%d", &spec.dim, &spec.j0, &spec.jmax) != 3)
    throw std::runtime_error("grid csv: malformed header");
  spec.validate();
  std::vector<double> vals;
  vals.reserve(spec.cell_count());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    vals.push_back(std::strtod(line.c_str(), nullptr));
  }
  if (vals.size() != spec.cell_count()) throw std::runtime_error("grid csv: cell count mismatch");
  return from_cells(spec, std::move(vals));
}

void GridFunction::write_binary(std::ostream& os) const {
  const char magic[4] = {'M', 'G', 'F', '1'};
  os.write(magic, 4);
  const std::int32_t hdr[3] = {spec_.dim, spec_.j0, spec_.jmax};
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  const std::uint64_t n = v_.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(v_.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

GridFunction GridFunction::read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MGF1", 4) != 0) throw std::runtime_error("grid binary: bad magic");
  std::int32_t hdr[3];
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  GridSpec spec{hdr[0], hdr[1], hdr[2]};
  spec.validate();
  if (n != spec.cell_count()) throw std::runtime_error("grid binary: cell count mismatch");
  std::vector<double> vals(n);
  is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("grid binary: truncated payload");
  return from_cells(spec, std::move(vals));
}

}  // namespace morrey
