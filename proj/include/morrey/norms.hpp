#pragma once
// Local Lebesgue norms, the Morrey norm as a supremum over dyadic cubes,
// cube averages, and the eta-powered maximal operator.

#include "morrey/grid_function.hpp"

namespace morrey {

struct MorreyExponents {
  double p = 1.0;
  double q = 1.0;
  void validate() const;  // 0 < q <= p < inf
};

// (integral of f^q over the region)^(1/q); exact on step functions.
double lq_norm(const GridFunction& f, double q);
double lq_norm(const GridFunction& f, double q, const Box& region);
double lq_norm(const GridFunction& f, double q, const DyadicCube& region);

// sup over dyadic cubes Q of |Q|^(1/p - 1/q) * ||f||_{L^q(Q)}.
//
// The supremum runs over levels [j_lo, jmax] only, where j_lo is the level
// of the smallest dyadic cube covering supp f.  Both truncations are exact
// for step functions: a cube containing the whole support only loses the
// |Q|^(1/p-1/q) <= 1 prefactor as it grows, and below the resolution every
// cell is constant, so |Q|^(1/p) * value peaks at the full cell.
double morrey_norm(const GridFunction& f, const MorreyExponents& e);

double average(const GridFunction& f, const DyadicCube& q);                    // m_Q(f)
double powered_average(const GridFunction& f, const DyadicCube& q, double u);  // m_Q^(u)(f)

// Powered dyadic maximal function: at each cell x,
//   M^(eta) f(x) = max over dyadic Q containing x, levels in [j_lo-1, jmax],
//                  of the eta-power mean of f over 3Q.
// Averaging over 3Q instead of Q keeps the operator well-behaved across
// dyadic boundaries; the level window is enough for the mean over 3Q to
// saturate at the coarse end.
GridFunction maximal(const GridFunction& f, double eta);

}  // namespace morrey
