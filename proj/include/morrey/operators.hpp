#pragma once
// The bilinear fractional integrals and their dyadic majorants.
//
// All operators are evaluated at cell centers and consume the reflected
// samples f1(x+y) f2(x-y) on the shared lattice, where x and y range over
// cell centers, so x+y and x-y land on lattice points and resolve to cells
// by the half-open convention.  Kernel weights are exact integrals of the
// kernel over y-cells; only the function samples are discrete.  Within-cell
// sums run level-major then index-ascending, so results are bit-identical
// regardless of how output cells are scheduled.

#include <cstdint>
#include <optional>

#include "morrey/grid_function.hpp"

namespace morrey {

struct OperatorParams {
  double alpha = 0.5;
  int dim = 1;
};

// Level window [j_min, j_max_sum] for the lattice sums replacing
// sum_{j=-inf}^{inf}.  The default window is exact at the fine end (balls
// below the resolution are empty) and cuts a geometric tail at the coarse
// end whose size the truncation-stability checks measure.
struct MajorantTruncation {
  int j_min = 0;
  int j_max_sum = 0;
  void validate() const;
  std::string str() const;  // "j_min..j_max_sum"
};

MajorantTruncation default_truncation(const GridSpec& spec);  // {-(j0+2), jmax}

// J_alpha[f1,f2](x) = integral of f1(x+y) f2(x-y) |y|^(alpha-dim) dy.
// Requires 0 < alpha < dim.
GridFunction j_alpha(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p);

// I_alpha[f1,f2](x) = double integral of f1(y1) f2(y2) (|x-y1|+|x-y2|)^(alpha-2dim).
// Requires 0 < alpha < 2*dim; dim 1 only and at most 2^10 cells (O(N^3) work).
GridFunction i_alpha(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p);

// sum_j sum_{Q in D_j} chi_Q(x) l(Q)^(alpha-dim) * integral over the ball
// B(2^-j) of f1(x+y) f2(x-y) dy.  A y-cell belongs to the ball iff its
// center does.
GridFunction dyadic_majorant_j(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p, const MajorantTruncation& t);

// sum over Q containing x of l(Q)^(alpha-2dim) * integral(f1,3Q) * integral(f2,3Q).
GridFunction dyadic_majorant_i(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p,
                               std::optional<MajorantTruncation> t = std::nullopt);

// The single block chi_Q(x) l(Q)^(alpha-dim) * ball integral at level(Q).
GridFunction f_jq(const GridFunction& f1, const GridFunction& f2, const OperatorParams& p,
                  const DyadicCube& q);

// sum_j sum_Q m_Q(F_jQ) chi_Q and its u-power-mean variant.  The powered
// variant requires u > 1; the mean-vs-integral exchange behind it only holds
// from exponent 1 up.  The inner integral uses the level ball B(2^-j) at
// every level.
GridFunction averaged_majorant(const GridFunction& f1, const GridFunction& f2,
                               const OperatorParams& p, const MajorantTruncation& t);
GridFunction powered_averaged_majorant(const GridFunction& f1, const GridFunction& f2,
                                       const OperatorParams& p, const MajorantTruncation& t,
                                       double u);

// sum over Q containing x of l(Q)^(alpha-2dim/u) (int_{(3Q)^2} (f1 f2)^u)^(1/u).
GridFunction u_powered_cube_sum(const GridFunction& f1, const GridFunction& f2,
                                const OperatorParams& p, double u,
                                std::optional<MajorantTruncation> t = std::nullopt);

// Small-cube / large-cube split of the u-powered sum at one cell:
// s1 collects terms with l(Q) <= cutoff, s2 the rest; s1 + s2 is the total.
struct HedbergSplit {
  double s1 = 0.0;
  double s2 = 0.0;
};
HedbergSplit hedberg_split(const GridFunction& f1, const GridFunction& f2,
                           const OperatorParams& p, double u, double cutoff,
                           std::size_t cell_flat,
                           std::optional<MajorantTruncation> t = std::nullopt);

// Cutoff balancing the two split bounds:
//   (norm_product / (m1x * m2x))^(p_exponent / dim),
// +inf when the maximal product vanishes (the split degenerates to s2).
double hedberg_optimal_cutoff(double norm_product, double m1x, double m2x, double p_exponent,
                              int dim);

}  // namespace morrey
