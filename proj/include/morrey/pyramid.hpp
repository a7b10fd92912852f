#pragma once
// Bottom-up sums of a per-cell quantity over every dyadic cube of the grid.
// Levels below -j0 saturate onto the two orthant cubes per axis, so queries
// at arbitrarily coarse levels stay O(1).

#include <cstdint>
#include <vector>

#include "morrey/grid_function.hpp"

namespace morrey {

class LevelPyramid {
 public:
  LevelPyramid(const GridSpec& spec, std::vector<double> base_cells);

  const GridSpec& spec() const { return spec_; }

  // Sum over cube (level, k); 0 outside the domain.  level <= spec.jmax.
  double cube_sum(int level, std::int64_t k0, std::int64_t k1 = 0) const;
  // Sum over the tripled cube 3Q.
  double tripled_sum(int level, std::int64_t k0, std::int64_t k1 = 0) const;

  double total() const { return total_; }

 private:
  GridSpec spec_;
  std::vector<std::vector<double>> levels_;  // levels_[d] holds level jmax-d
  double total_ = 0.0;
};

}  // namespace morrey
