#include "morrey/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "morrey/pyramid.hpp"
#include "parallel.hpp"

namespace morrey {

void MorreyExponents::validate() const {
  if (!(q > 0.0) || !(q <= p) || !std::isfinite(p))
    throw std::invalid_argument("Morrey exponents require 0 < q <= p < inf");
}

namespace {

std::vector<double> power_cells(const GridFunction& f, double q) {
  std::vector<double> out(f.cells().size());
  const auto cells = f.cells();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cells[i] == 0.0 ? 0.0 : std::pow(cells[i], q);
  return out;
}

}  // namespace

double lq_norm(const GridFunction& f, double q, const Box& region) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_norm requires q > 0");
  return std::pow(f.pointwise_power(q).integrate(region), 1.0 / q);
}

double lq_norm(const GridFunction& f, double q, const DyadicCube& region) {
  return lq_norm(f, q, region.box());
}

double lq_norm(const GridFunction& f, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_norm requires q > 0");
  const auto cells = f.cells();
  double s = 0.0;
  for (double v : cells) s += v == 0.0 ? 0.0 : std::pow(v, q);
  return std::pow(s * f.spec().cell_volume(), 1.0 / q);
}

double morrey_norm(const GridFunction& f, const MorreyExponents& e) {
  e.validate();
  const GridSpec& spec = f.spec();
  const int j_lo = f.support_cover_level();
  std::vector<double> base = power_cells(f, e.q);
  const double vol = spec.cell_volume();
  for (double& v : base) v *= vol;
  LevelPyramid pyr(spec, std::move(base));

  const double exp_coeff = 1.0 / e.p - 1.0 / e.q;  // |Q|^(1/p-1/q) = 2^(-j*dim*coeff)
  double best = 0.0;
  for (int j = j_lo; j <= spec.jmax; ++j) {
    const std::int64_t half = std::int64_t{1} << (spec.j0 + j);
    const double size_factor = std::exp2(-static_cast<double>(j) * spec.dim * exp_coeff);
    if (spec.dim == 1) {
      for (std::int64_t k = -half; k < half; ++k) {
        const double s = pyr.cube_sum(j, k);
        if (s > 0.0) best = std::max(best, size_factor * std::pow(s, 1.0 / e.q));
      }
    } else {
      for (std::int64_t k0 = -half; k0 < half; ++k0)
        for (std::int64_t k1 = -half; k1 < half; ++k1) {
          const double s = pyr.cube_sum(j, k0, k1);
          if (s > 0.0) best = std::max(best, size_factor * std::pow(s, 1.0 / e.q));
        }
    }
  }
  return best;
}

double average(const GridFunction& f, const DyadicCube& q) {
  if (q.level() > f.spec().jmax)
    throw std::invalid_argument("average cube is finer than the grid resolution");
  return f.integrate(q) / q.volume();
}

double powered_average(const GridFunction& f, const DyadicCube& q, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("powered average requires u > 0");
  if (q.level() > f.spec().jmax)
    throw std::invalid_argument("average cube is finer than the grid resolution");
  return std::pow(f.pointwise_power(u).integrate(q) / q.volume(), 1.0 / u);
}

GridFunction maximal(const GridFunction& f, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("maximal requires eta > 0");
  const GridSpec& spec = f.spec();
  const int j_lo = f.support_cover_level();
  const int j_from = j_lo - 1;

  std::vector<double> base = power_cells(f, eta);
  const double vol = spec.cell_volume();
  for (double& v : base) v *= vol;
  LevelPyramid pyr(spec, std::move(base));

  const std::int64_t cpa = spec.cells_per_axis();
  const std::int64_t half = cpa / 2;
  const double inv3n = spec.dim == 1 ? 1.0 / 3.0 : 1.0 / 9.0;
  std::vector<double> out(spec.cell_count(), 0.0);

  detail::parallel_for_chunks(spec.cell_count(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::int64_t a0 = spec.dim == 1 ? static_cast<std::int64_t>(idx)
                                            : static_cast<std::int64_t>(idx) / cpa;
      const std::int64_t a1 = spec.dim == 1 ? 0 : static_cast<std::int64_t>(idx) % cpa;
      const std::int64_t g0 = a0 - half;
      const std::int64_t g1 = a1 - half;
      double best = 0.0;  // max over levels of integral(3Q) * 2^(j*dim)
      for (int j = j_from; j <= spec.jmax; ++j) {
        const int sh = spec.jmax - j;
        const std::int64_t k0 = floor_div_pow2(g0, sh);
        const std::int64_t k1 = floor_div_pow2(g1, sh);
        const double mass = pyr.tripled_sum(j, k0, k1);
        if (mass <= 0.0) continue;
        best = std::max(best, mass * std::exp2(static_cast<double>(j) * spec.dim));
      }
      out[idx] = best > 0.0 ? std::pow(best * inv3n, 1.0 / eta) : 0.0;
    }
  });
  return GridFunction::from_cells(spec, std::move(out));
}

}  // namespace morrey
