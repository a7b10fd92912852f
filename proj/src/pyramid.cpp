#include "morrey/pyramid.hpp"

#include <stdexcept>

namespace morrey {

LevelPyramid::LevelPyramid(const GridSpec& spec, std::vector<double> base_cells) : spec_(spec) {
  if (base_cells.size() != spec.cell_count()) throw std::invalid_argument("pyramid base size mismatch");
  levels_.push_back(std::move(base_cells));
  for (double v : levels_[0]) total_ += v;
  const int depth = spec_.axis_bits() - 1;  // down to the orthant cubes at level -j0
  for (int d = 1; d <= depth; ++d) {
    const auto& prev = levels_.back();
    const std::int64_t cpa_prev = spec_.cells_per_axis() >> (d - 1);
    const std::int64_t cpa = cpa_prev / 2;
    if (spec_.dim == 1) {
      std::vector<double> cur(static_cast<std::size_t>(cpa));
      for (std::int64_t a = 0; a < cpa; ++a)
        cur[static_cast<std::size_t>(a)] =
            prev[static_cast<std::size_t>(2 * a)] + prev[static_cast<std::size_t>(2 * a + 1)];
      levels_.push_back(std::move(cur));
    } else {
      std::vector<double> cur(static_cast<std::size_t>(cpa * cpa));
      for (std::int64_t a0 = 0; a0 < cpa; ++a0)
        for (std::int64_t a1 = 0; a1 < cpa; ++a1)
          cur[static_cast<std::size_t>(a0 * cpa + a1)] =
              prev[static_cast<std::size_t>((2 * a0) * cpa_prev + 2 * a1)] +
              prev[static_cast<std::size_t>((2 * a0) * cpa_prev + 2 * a1 + 1)] +
              prev[static_cast<std::size_t>((2 * a0 + 1) * cpa_prev + 2 * a1)] +
              prev[static_cast<std::size_t>((2 * a0 + 1) * cpa_prev + 2 * a1 + 1)];
      levels_.push_back(std::move(cur));
    }
  }
}

double LevelPyramid::cube_sum(int level, std::int64_t k0, std::int64_t k1) const {
  if (level > spec_.jmax) throw std::invalid_argument("pyramid query finer than the grid");
  if (level < -spec_.j0) {
    // Coarser than the orthant cubes: each orthant is fully inside one cube.
    if (k0 != 0 && k0 != -1) return 0.0;
    if (spec_.dim == 2 && k1 != 0 && k1 != -1) return 0.0;
    return cube_sum(-spec_.j0, k0, k1);
  }
  const int d = spec_.jmax - level;
  const std::int64_t half = std::int64_t{1} << (spec_.j0 + level);  // cubes per half axis
  if (k0 < -half || k0 >= half) return 0.0;
  if (spec_.dim == 2 && (k1 < -half || k1 >= half)) return 0.0;
  const auto& lv = levels_[static_cast<std::size_t>(d)];
  const std::int64_t cpa = 2 * half;
  const std::int64_t a0 = k0 + half;
  if (spec_.dim == 1) return lv[static_cast<std::size_t>(a0)];
  return lv[static_cast<std::size_t>(a0 * cpa + (k1 + half))];
}

double LevelPyramid::tripled_sum(int level, std::int64_t k0, std::int64_t k1) const {
  double s = 0.0;
  if (spec_.dim == 1) {
    for (int e = -1; e <= 1; ++e) s += cube_sum(level, k0 + e);
  } else {
    for (int e0 = -1; e0 <= 1; ++e0)
      for (int e1 = -1; e1 <= 1; ++e1) s += cube_sum(level, k0 + e0, k1 + e1);
  }
  return s;
}

}  // namespace morrey
