#include "morrey/operators.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "morrey/pyramid.hpp"
#include "parallel.hpp"

namespace morrey {

void MajorantTruncation::validate() const {
  if (j_min > j_max_sum) throw std::invalid_argument("truncation requires j_min <= j_max_sum");
  if (std::abs(j_min) > kMaxLevel || std::abs(j_max_sum) > kMaxLevel)
    throw std::out_of_range("truncation outside level caps");
}

std::string MajorantTruncation::str() const {
  return std::to_string(j_min) + ".." + std::to_string(j_max_sum);
}

MajorantTruncation default_truncation(const GridSpec& spec) {
  return MajorantTruncation{-(spec.j0 + 2), spec.jmax};
}

namespace {

void check_pair(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p) {
  if (!(f1.spec() == f2.spec())) throw std::invalid_argument("operator arguments on different grids");
  if (f1.spec().dim != p.dim) throw std::invalid_argument("operator dimension mismatch");
}

void check_alpha_j(const OperatorParams& p) {
  if (!(p.alpha > 0.0) || !(p.alpha < p.dim))
    throw std::invalid_argument("J-type operators require 0 < alpha < dim");
}

void check_alpha_i(const OperatorParams& p) {
  if (!(p.alpha > 0.0) || !(p.alpha < 2.0 * p.dim))
    throw std::invalid_argument("I-type operators require 0 < alpha < 2*dim");
}

// Ball window half-width in cells at a level, clamped to the lattice extent.
std::int64_t ball_radius_cells(const GridSpec& spec, int level) {
  const int sh = spec.jmax - level;
  if (sh < 0) return 0;
  if (sh >= 32) return spec.cells_per_axis();
  return std::min<std::int64_t>(std::int64_t{1} << sh, spec.cells_per_axis());
}

// Reflected-sample scan: walks the level window from its fine end down to
// j_min, growing the y-window one annulus at a time, and hands each level the
// per-cell sums  running[a] = sum_{y-cell t in B(2^-j)} f1[a+t+1] * f2[a-t]
// (per-axis index arithmetic in dim 2; no volume factor yet).
void scan_ball_levels(const GridFunction& f1, const GridFunction& f2,
                      const MajorantTruncation& t,
                      const std::function<void(int, const std::vector<double>&)>& emit) {
  const GridSpec& spec = f1.spec();
  const std::int64_t cpa = spec.cells_per_axis();
  const double* v1 = f1.cells().data();
  const double* v2 = f2.cells().data();
  std::vector<double> running(spec.cell_count(), 0.0);

  const auto accumulate_offset_1d = [&](std::int64_t ty) {
    const std::int64_t lo = std::max<std::int64_t>({0, -ty - 1, ty});
    const std::int64_t hi = std::min<std::int64_t>({cpa - 1, cpa - 2 - ty, cpa - 1 + ty});
    for (std::int64_t a = lo; a <= hi; ++a)
      running[static_cast<std::size_t>(a)] +=
          v1[static_cast<std::size_t>(a + ty + 1)] * v2[static_cast<std::size_t>(a - ty)];
  };

  const auto accumulate_offset_2d = [&](std::int64_t t0, std::int64_t t1) {
    const std::int64_t lo0 = std::max<std::int64_t>({0, -t0 - 1, t0});
    const std::int64_t hi0 = std::min<std::int64_t>({cpa - 1, cpa - 2 - t0, cpa - 1 + t0});
    const std::int64_t lo1 = std::max<std::int64_t>({0, -t1 - 1, t1});
    const std::int64_t hi1 = std::min<std::int64_t>({cpa - 1, cpa - 2 - t1, cpa - 1 + t1});
    for (std::int64_t a0 = lo0; a0 <= hi0; ++a0) {
      const double* row1 = v1 + (a0 + t0 + 1) * cpa;
      const double* row2 = v2 + (a0 - t0) * cpa;
      double* out = running.data() + a0 * cpa;
      for (std::int64_t a1 = lo1; a1 <= hi1; ++a1)
        out[a1] += row1[a1 + t1 + 1] * row2[a1 - t1];
    }
  };

  std::int64_t r_prev = 0;  // 1d: previous window [-r_prev, r_prev-1]
  std::int64_t rr_prev = 0;  // 2d: previous (2R)^2 membership threshold is rr_prev^2
  for (int j = t.j_max_sum; j >= t.j_min; --j) {
    if (j <= spec.jmax) {
      if (spec.dim == 1) {
        const std::int64_t r = ball_radius_cells(spec, j);
        for (std::int64_t ty = -r; ty < -r_prev; ++ty) accumulate_offset_1d(ty);
        for (std::int64_t ty = r_prev; ty < r; ++ty) accumulate_offset_1d(ty);
        r_prev = r;
      } else {
        const int sh = spec.jmax - j;
        const std::int64_t rr = sh >= 26 ? (std::int64_t{1} << 27) : (std::int64_t{2} << sh);
        if (rr > rr_prev) {
          const std::int64_t span = std::min<std::int64_t>((rr + 1) / 2 + 1, cpa);
          for (std::int64_t t0 = -span; t0 < span; ++t0)
            for (std::int64_t t1 = -span; t1 < span; ++t1) {
              const std::int64_t c0 = 2 * t0 + 1;
              const std::int64_t c1 = 2 * t1 + 1;
              const std::int64_t d2 = c0 * c0 + c1 * c1;
              if (d2 < rr * rr && d2 >= rr_prev * rr_prev) accumulate_offset_2d(t0, t1);
            }
          rr_prev = rr;
        }
      }
    }
    emit(j, running);
  }
}

// Blocks of cell indices covered by each level-j cube meeting the domain.
// Below -j0 each orthant lies in a single huge cube.
void for_each_level_block(const GridSpec& spec, int j,
                          const std::function<void(std::int64_t, std::int64_t, std::int64_t,
                                                   std::int64_t)>& fn) {
  const std::int64_t cpa = spec.cells_per_axis();
  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  if (j >= -spec.j0) {
    const std::int64_t b = std::int64_t{1} << (spec.jmax - j);
    for (std::int64_t s = 0; s < cpa; s += b) spans.emplace_back(s, s + b);
  } else {
    spans.emplace_back(0, cpa / 2);
    spans.emplace_back(cpa / 2, cpa);
  }
  if (spec.dim == 1) {
    for (const auto& s : spans) fn(s.first, s.second, 0, 1);
  } else {
    for (const auto& s0 : spans)
      for (const auto& s1 : spans) fn(s0.first, s0.second, s1.first, s1.second);
  }
}

}  // namespace

GridFunction j_alpha(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p) {
  check_pair(f1, f2, p);
  check_alpha_j(p);
  const GridSpec& spec = f1.spec();
  const std::int64_t cpa = spec.cells_per_axis();
  const double* v1 = f1.cells().data();
  const double* v2 = f2.cells().data();
  std::vector<double> out(spec.cell_count(), 0.0);

  if (spec.dim == 1) {
    std::vector<double> w(static_cast<std::size_t>(2 * cpa));
    for (std::int64_t ty = -cpa; ty < cpa; ++ty) {
      const std::int64_t corner[1] = {ty};
      w[static_cast<std::size_t>(ty + cpa)] =
          radial_power_cell_integral(1, p.alpha - 1.0, spec.jmax, {corner, 1});
    }
    detail::parallel_for_chunks(static_cast<std::size_t>(cpa), [&](std::size_t b, std::size_t e) {
      for (std::size_t ai = b; ai < e; ++ai) {
        const auto a = static_cast<std::int64_t>(ai);
        const std::int64_t t_lo = std::max(-a - 1, a - cpa + 1);
        const std::int64_t t_hi = std::min(cpa - a - 2, a);
        double acc = 0.0;
        for (std::int64_t ty = t_lo; ty <= t_hi; ++ty)
          acc += w[static_cast<std::size_t>(ty + cpa)] * v1[static_cast<std::size_t>(a + ty + 1)] *
                 v2[static_cast<std::size_t>(a - ty)];
        out[ai] = acc;
      }
    });
  } else {
    if (spec.cell_count() > (std::size_t{1} << 14))
      throw std::invalid_argument("j_alpha in dim 2 is limited to 2^14 cells");
    const std::int64_t wspan = 2 * cpa;
    std::vector<double> w(static_cast<std::size_t>(wspan * wspan));
    for (std::int64_t t0 = -cpa; t0 < cpa; ++t0)
      for (std::int64_t t1 = -cpa; t1 < cpa; ++t1) {
        const std::int64_t corner[2] = {t0, t1};
        w[static_cast<std::size_t>((t0 + cpa) * wspan + (t1 + cpa))] =
            radial_power_cell_integral(2, p.alpha - 2.0, spec.jmax, {corner, 2});
      }
    detail::parallel_for_chunks(spec.cell_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b; idx < e; ++idx) {
        const std::int64_t a0 = static_cast<std::int64_t>(idx) / cpa;
        const std::int64_t a1 = static_cast<std::int64_t>(idx) % cpa;
        const std::int64_t t0_lo = std::max(-a0 - 1, a0 - cpa + 1);
        const std::int64_t t0_hi = std::min(cpa - a0 - 2, a0);
        const std::int64_t t1_lo = std::max(-a1 - 1, a1 - cpa + 1);
        const std::int64_t t1_hi = std::min(cpa - a1 - 2, a1);
        double acc = 0.0;
        for (std::int64_t t0 = t0_lo; t0 <= t0_hi; ++t0) {
          const double* row1 = v1 + (a0 + t0 + 1) * cpa;
          const double* row2 = v2 + (a0 - t0) * cpa;
          const double* wrow = w.data() + (t0 + cpa) * wspan + cpa;
          for (std::int64_t t1 = t1_lo; t1 <= t1_hi; ++t1)
            acc += wrow[t1] * row1[a1 + t1 + 1] * row2[a1 - t1];
        }
        out[idx] = acc;
      }
    });
  }
  return GridFunction::from_cells(spec, std::move(out));
}

GridFunction i_alpha(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p) {
  check_pair(f1, f2, p);
  check_alpha_i(p);
  if (p.dim != 1) throw std::invalid_argument("i_alpha supports dim 1 only (O(N^3) cost)");
  const GridSpec& spec = f1.spec();
  if (spec.cell_count() > 1024) throw std::invalid_argument("i_alpha is limited to 2^10 cells");
  const std::int64_t n = spec.cells_per_axis();
  const double h = spec.cell_width();
  const double* v1 = f1.cells().data();
  const double* v2 = f2.cells().data();

  // Kernel by integer distance sum r = |a-b|+|a-c|; r = 0 is the doubly
  // singular cell handled by its exact integral.
  std::vector<double> kern(static_cast<std::size_t>(2 * n), 0.0);
  for (std::int64_t r = 1; r < 2 * n; ++r)
    kern[static_cast<std::size_t>(r)] = std::pow(h * static_cast<double>(r), p.alpha - 2.0);
  double w_diag;
  if (std::fabs(p.alpha - 1.0) < 1e-12) {
    w_diag = 4.0 * h * std::log(2.0);
  } else {
    w_diag = 4.0 * (std::pow(h, p.alpha) - 2.0 * std::pow(0.5 * h, p.alpha)) /
             (p.alpha * (p.alpha - 1.0));
  }

  std::vector<double> out(spec.cell_count(), 0.0);
  detail::parallel_for_chunks(static_cast<std::size_t>(n), [&](std::size_t bb, std::size_t ee) {
    for (std::size_t ai = bb; ai < ee; ++ai) {
      const auto a = static_cast<std::int64_t>(ai);
      double acc = 0.0;
      for (std::int64_t b = 0; b < n; ++b) {
        const double f1b = v1[static_cast<std::size_t>(b)];
        if (f1b == 0.0) continue;
        const std::int64_t ab = std::llabs(a - b);
        const double* kb = kern.data() + ab;
        double row = 0.0;
        for (std::int64_t c = 0; c < a; ++c) row += kb[a - c] * v2[static_cast<std::size_t>(c)];
        for (std::int64_t c = a; c < n; ++c) row += kb[c - a] * v2[static_cast<std::size_t>(c)];
        acc += f1b * row;
      }
      out[ai] = acc * h * h + w_diag * v1[ai] * v2[ai];
    }
  });
  return GridFunction::from_cells(spec, std::move(out));
}

GridFunction dyadic_majorant_j(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p, const MajorantTruncation& t) {
  check_pair(f1, f2, p);
  check_alpha_j(p);
  t.validate();
  const GridSpec& spec = f1.spec();
  const double voly = spec.cell_volume();
  std::vector<double> out(spec.cell_count(), 0.0);
  scan_ball_levels(f1, f2, t, [&](int j, const std::vector<double>& run) {
    const double c = std::exp2(static_cast<double>(j) * (spec.dim - p.alpha)) * voly;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * run[i];
  });
  return GridFunction::from_cells(spec, std::move(out));
}

GridFunction f_jq(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p,
                  const DyadicCube& q) {
  check_pair(f1, f2, p);
  check_alpha_j(p);
  if (q.dim() != p.dim) throw std::invalid_argument("cube dimension mismatch");
  const GridSpec& spec = f1.spec();
  if (q.level() > spec.jmax)
    throw std::invalid_argument("f_jq cube is finer than the grid resolution");
  const std::int64_t cpa = spec.cells_per_axis();
  const double* v1 = f1.cells().data();
  const double* v2 = f2.cells().data();
  std::vector<double> out(spec.cell_count(), 0.0);
  const std::int64_t r = ball_radius_cells(spec, q.level());
  const double scale =
      std::exp2(static_cast<double>(q.level()) * (spec.dim - p.alpha)) * spec.cell_volume();
  const auto r0 = axis_cell_range(spec, q.box(), 0);
  if (spec.dim == 1) {
    for (std::int64_t a = r0.first; a < r0.second; ++a) {
      const std::int64_t t_lo = std::max<std::int64_t>({-r, -a - 1, a - cpa + 1});
      const std::int64_t t_hi = std::min<std::int64_t>({r - 1, cpa - a - 2, a});
      double acc = 0.0;
      for (std::int64_t ty = t_lo; ty <= t_hi; ++ty)
        acc += v1[static_cast<std::size_t>(a + ty + 1)] * v2[static_cast<std::size_t>(a - ty)];
      out[static_cast<std::size_t>(a)] = scale * acc;
    }
  } else {
    const auto r1 = axis_cell_range(spec, q.box(), 1);
    const int sh = spec.jmax - q.level();
    const std::int64_t rr = sh >= 26 ? (std::int64_t{1} << 27) : (std::int64_t{2} << sh);
    for (std::int64_t a0 = r0.first; a0 < r0.second; ++a0)
      for (std::int64_t a1 = r1.first; a1 < r1.second; ++a1) {
        double acc = 0.0;
        for (std::int64_t t0 = std::max(-r, -a0 - 1); t0 <= std::min(r - 1, cpa - a0 - 2); ++t0) {
          if (a0 - t0 < 0 || a0 - t0 >= cpa) continue;
          for (std::int64_t t1 = std::max(-r, -a1 - 1); t1 <= std::min(r - 1, cpa - a1 - 2); ++t1) {
            if (a1 - t1 < 0 || a1 - t1 >= cpa) continue;
            const std::int64_t c0 = 2 * t0 + 1;
            const std::int64_t c1 = 2 * t1 + 1;
            if (c0 * c0 + c1 * c1 >= rr * rr) continue;
            acc += v1[static_cast<std::size_t>((a0 + t0 + 1) * cpa + a1 + t1 + 1)] *
                   v2[static_cast<std::size_t>((a0 - t0) * cpa + a1 - t1)];
          }
        }
        out[static_cast<std::size_t>(a0 * cpa + a1)] = scale * acc;
      }
  }
  return GridFunction::from_cells(spec, std::move(out));
}

namespace {

GridFunction averaged_majorant_impl(const GridFunction& f1, const GridFunction& f2,
                                    const OperatorParams& p, const MajorantTruncation& t,
                                    std::optional<double> u) {
  check_pair(f1, f2, p);
  check_alpha_j(p);
  t.validate();
  const GridSpec& spec = f1.spec();
  const std::int64_t cpa = spec.cells_per_axis();
  const double voly = spec.cell_volume();
  std::vector<double> out(spec.cell_count(), 0.0);
  scan_ball_levels(f1, f2, t, [&](int j, const std::vector<double>& run) {
    if (j > spec.jmax) return;  // empty ball, zero block
    const double lscale = std::exp2(static_cast<double>(j) * (spec.dim - p.alpha));
    for_each_level_block(spec, j, [&](std::int64_t b0, std::int64_t e0, std::int64_t b1,
                                      std::int64_t e1) {
      double s = 0.0;
      double val;
      if (!u) {
        for (std::int64_t a0 = b0; a0 < e0; ++a0)
          for (std::int64_t a1 = b1; a1 < e1; ++a1)
            s += run[static_cast<std::size_t>(spec.dim == 1 ? a0 : a0 * cpa + a1)];
        val = lscale * std::exp2(static_cast<double>(j) * spec.dim) * voly * voly * s;
      } else {
        for (std::int64_t a0 = b0; a0 < e0; ++a0)
          for (std::int64_t a1 = b1; a1 < e1; ++a1) {
            const double b = voly * run[static_cast<std::size_t>(spec.dim == 1 ? a0 : a0 * cpa + a1)];
            if (b > 0.0) s += std::pow(b, *u);
          }
        val = s > 0.0
                  ? lscale * std::pow(std::exp2(static_cast<double>(j) * spec.dim) * voly * s, 1.0 / *u)
                  : 0.0;
      }
      if (val == 0.0) return;
      for (std::int64_t a0 = b0; a0 < e0; ++a0)
        for (std::int64_t a1 = b1; a1 < e1; ++a1)
          out[static_cast<std::size_t>(spec.dim == 1 ? a0 : a0 * cpa + a1)] += val;
    });
  });
  return GridFunction::from_cells(spec, std::move(out));
}

}  // namespace

GridFunction averaged_majorant(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p, const MajorantTruncation& t) {
  return averaged_majorant_impl(f1, f2, p, t, std::nullopt);
}

GridFunction powered_averaged_majorant(const GridFunction& f1, const GridFunction& f2,
                                       const OperatorParams& p, const MajorantTruncation& t,
                                       double u) {
  if (!(u > 1.0))
    throw std::invalid_argument(
        "powered averaged majorant requires u > 1: exchanging the cube mean with the inner "
        "integral needs exponent at least 1");
  return averaged_majorant_impl(f1, f2, p, t, u);
}

namespace {

// Per-cell evaluator for the I-type lattice sums.  Levels at or above the
// resolution read the tripled-cube masses from pyramids; sub-cell levels
// (only reachable through widened truncations) integrate the 3Q box exactly.
struct TripledMass {
  const GridSpec& spec;
  const LevelPyramid& pyr;
  const GridFunction& fu;

  double at(std::int64_t g0, std::int64_t g1, int j) const {
    if (j <= spec.jmax) {
      const int sh = spec.jmax - j;
      return pyr.tripled_sum(j, floor_div_pow2(g0, sh), spec.dim == 2 ? floor_div_pow2(g1, sh) : 0);
    }
    const int sh = j - spec.jmax - 1;
    std::array<std::int64_t, kMaxDim> lo{};
    std::array<std::int64_t, kMaxDim> hi{};
    const std::int64_t k0 = saturating_shift_left(2 * g0 + 1, sh);
    lo[0] = k0 - 1;
    hi[0] = k0 + 2;
    if (spec.dim == 2) {
      const std::int64_t k1 = saturating_shift_left(2 * g1 + 1, sh);
      lo[1] = k1 - 1;
      hi[1] = k1 + 2;
    }
    const Box b(spec.dim, j, {lo.data(), static_cast<std::size_t>(spec.dim)},
                {hi.data(), static_cast<std::size_t>(spec.dim)});
    return fu.integrate(b);
  }
};

GridFunction cube_sum_impl(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p,
                           double u, std::optional<MajorantTruncation> t_opt) {
  check_pair(f1, f2, p);
  check_alpha_i(p);
  if (!(u > 0.0)) throw std::invalid_argument("u-powered cube sum requires u > 0");
  const GridSpec& spec = f1.spec();
  const MajorantTruncation t = t_opt.value_or(default_truncation(spec));
  t.validate();

  const bool powered = u != 1.0;
  const GridFunction f1u = powered ? f1.pointwise_power(u) : f1;
  const GridFunction f2u = powered ? f2.pointwise_power(u) : f2;
  const double voly = spec.cell_volume();
  auto scaled_cells = [&](const GridFunction& f) {
    std::vector<double> b(f.cells().begin(), f.cells().end());
    for (double& v : b) v *= voly;
    return b;
  };
  const LevelPyramid p1(spec, scaled_cells(f1u));
  const LevelPyramid p2(spec, scaled_cells(f2u));
  const TripledMass m1{spec, p1, f1u};
  const TripledMass m2{spec, p2, f2u};

  const double level_exp = 2.0 * spec.dim / u - p.alpha;
  const std::int64_t cpa = spec.cells_per_axis();
  const std::int64_t half = cpa / 2;
  std::vector<double> out(spec.cell_count(), 0.0);
  detail::parallel_for_chunks(spec.cell_count(), [&](std::size_t bb, std::size_t ee) {
    for (std::size_t idx = bb; idx < ee; ++idx) {
      const std::int64_t g0 =
          (spec.dim == 1 ? static_cast<std::int64_t>(idx) : static_cast<std::int64_t>(idx) / cpa) - half;
      const std::int64_t g1 = spec.dim == 1 ? 0 : static_cast<std::int64_t>(idx) % cpa - half;
      double acc = 0.0;
      for (int j = t.j_min; j <= t.j_max_sum; ++j) {
        const double a = m1.at(g0, g1, j);
        if (a <= 0.0) continue;
        const double b = m2.at(g0, g1, j);
        if (b <= 0.0) continue;
        const double mass = powered ? std::pow(a * b, 1.0 / u) : a * b;
        acc += std::exp2(static_cast<double>(j) * level_exp) * mass;
      }
      out[idx] = acc;
    }
  });
  return GridFunction::from_cells(spec, std::move(out));
}

}  // namespace

GridFunction dyadic_majorant_i(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p, std::optional<MajorantTruncation> t) {
  return cube_sum_impl(f1, f2, p, 1.0, t);
}

GridFunction u_powered_cube_sum(const GridFunction& f1, const GridFunction& f2,
                                const OperatorParams& p, double u,
                                std::optional<MajorantTruncation> t) {
  return cube_sum_impl(f1, f2, p, u, t);
}

HedbergSplit hedberg_split(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p,
                           double u, double cutoff, std::size_t cell_flat,
                           std::optional<MajorantTruncation> t_opt) {
  check_pair(f1, f2, p);
  check_alpha_i(p);
  if (!(u > 0.0)) throw std::invalid_argument("hedberg split requires u > 0");
  if (!(cutoff > 0.0)) throw std::invalid_argument("hedberg split requires cutoff > 0");
  const GridSpec& spec = f1.spec();
  if (cell_flat >= spec.cell_count()) throw std::out_of_range("cell index outside the grid");
  const MajorantTruncation t = t_opt.value_or(default_truncation(spec));
  t.validate();

  const bool powered = u != 1.0;
  const GridFunction f1u = powered ? f1.pointwise_power(u) : f1;
  const GridFunction f2u = powered ? f2.pointwise_power(u) : f2;
  const double voly = spec.cell_volume();
  auto scaled_cells = [&](const GridFunction& f) {
    std::vector<double> b(f.cells().begin(), f.cells().end());
    for (double& v : b) v *= voly;
    return b;
  };
  const LevelPyramid p1(spec, scaled_cells(f1u));
  const LevelPyramid p2(spec, scaled_cells(f2u));
  const TripledMass m1{spec, p1, f1u};
  const TripledMass m2{spec, p2, f2u};

  const std::int64_t cpa = spec.cells_per_axis();
  const std::int64_t half = cpa / 2;
  const std::int64_t g0 =
      (spec.dim == 1 ? static_cast<std::int64_t>(cell_flat) : static_cast<std::int64_t>(cell_flat) / cpa) -
      half;
  const std::int64_t g1 = spec.dim == 1 ? 0 : static_cast<std::int64_t>(cell_flat) % cpa - half;

  const double level_exp = 2.0 * spec.dim / u - p.alpha;
  HedbergSplit split;
  for (int j = t.j_min; j <= t.j_max_sum; ++j) {
    const double a = m1.at(g0, g1, j);
    const double b = a > 0.0 ? m2.at(g0, g1, j) : 0.0;
    if (a <= 0.0 || b <= 0.0) continue;
    const double mass = powered ? std::pow(a * b, 1.0 / u) : a * b;
    const double term = std::exp2(static_cast<double>(j) * level_exp) * mass;
    if (std::ldexp(1.0, -j) <= cutoff)
      split.s1 += term;
    else
      split.s2 += term;
  }
  return split;
}

double hedberg_optimal_cutoff(double norm_product, double m1x, double m2x, double p_exponent,
                              int dim) {
  if (!(norm_product > 0.0)) throw std::invalid_argument("optimal cutoff requires nonzero norms");
  const double denom = m1x * m2x;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return std::pow(norm_product / denom, p_exponent / dim);
}

}  // namespace morrey
