#pragma once
// Turns each boundedness statement into a measured lhs/rhs ratio over a
// reproducible corpus.  Constants are estimated, never asserted: acceptance
// is finiteness plus stability under refinement, which is what a discrete
// harness can actually certify.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morrey/grid_function.hpp"
#include "morrey/norms.hpp"
#include "morrey/operators.hpp"

namespace morrey {

enum class Regime { None, T12, T13, T14 };
const char* regime_name(Regime r);

// Full index tuple (alpha, p1, q1, p2, q2) -> (p, q, s, t) with
//   1/p = 1/p1 + 1/p2, 1/q = 1/q1 + 1/q2, 1/s = 1/p - alpha/dim, q/p = t/s.
struct TheoremParams {
  int dim = 1;
  double alpha = 0.0;
  double p1 = 0.0, q1 = 0.0, p2 = 0.0, q2 = 0.0;
  double p = 0.0, q = 0.0, s = 0.0, t = 0.0;
  std::optional<double> u;
  Regime regime = Regime::None;

  double min_q() const { return q1 < q2 ? q1 : q2; }
  void validate() const;  // relations within 1e-9 relative, bounds, u window
};

TheoremParams solve_params(int dim, double alpha, double p1, double q1, double p2, double q2);
// Re-derivable gate; property tests compare it against an independent
// restatement of the hypotheses.
Regime classify_regime(int dim, double alpha, double p1, double q1, double p2, double q2,
                       double s, double t);

struct InequalityReport {
  std::string check_id;
  std::string corpus_item_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  MajorantTruncation truncation{0, 0};
  int resolution = 0;
  bool degenerate = false;     // lhs == rhs == 0, excluded from maxima
  std::size_t violations = 0;  // pointwise cells with lhs > 0, rhs == 0
  std::string notes;
};

// Fills lhs/rhs/ratio/degenerate; metadata is stamped by the caller.
InequalityReport make_ratio_report(double lhs, double rhs);

// ---- corpus ----------------------------------------------------------

// Items are resolution-independent descriptions, so the same logical corpus
// can be materialized at jmax and jmax+1 for stability deltas.
struct CorpusSpec {
  GridSpec grid;
  std::uint64_t seed = 1;
  int size = 10;
  double p1 = 2.0, p2 = 2.5;  // power-law anchors
  // > 0 confines supports to [-2^(j0-shrink), 2^(j0-shrink)); power laws are
  // replaced by indicators since their support spans the whole domain.
  int position_shrink = 0;
  bool indicators_only = false;
  // Confine supports to the positive orthant, where a single dyadic cube can
  // cover them (cubes never straddle a coordinate hyperplane).
  bool positive_orthant = false;
};

struct StepPiece {
  DyadicCube cube;
  double height;
};

struct CorpusItemDesc {
  enum class Kind { Indicator, PowerLaw, Steps };
  Kind kind = Kind::Indicator;
  std::string id;
  std::uint64_t seed = 0;
  DyadicCube cube{0, {0}};
  double p = 2.0;
  std::vector<StepPiece> steps;
};

// Default mix: 40% indicators, 30% power laws near p1/p2, 30% random steps.
std::vector<CorpusItemDesc> make_corpus(const CorpusSpec& spec);
GridFunction materialize(const CorpusItemDesc& item, const GridSpec& grid);

struct FamilyMemberDesc {
  DyadicCube cube;
  std::vector<StepPiece> pieces;
};
struct FamilyDesc {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<FamilyMemberDesc> members;
};
struct CubeFamilyItem {
  GridFunction f;
  DyadicCube cube;
};

std::vector<FamilyDesc> make_family_corpus(const GridSpec& base, std::uint64_t seed, int count);
std::vector<CubeFamilyItem> materialize_family(const FamilyDesc& fam, const GridSpec& grid);

// ---- checks ----------------------------------------------------------

// || sum f_j || vs || sum m_{Q_j}(f_j) chi_{Q_j} || in M^p_q.  Admits
// 0 < q <= p < 1, or p = q <= 1 (the Lebesgue special case).
InequalityReport check_averaging(const std::vector<CubeFamilyItem>& family,
                                 const MorreyExponents& e);
// u-power-mean variant; requires 0 < q <= 1 <= p < u.
InequalityReport check_u_powered_averaging(const std::vector<CubeFamilyItem>& family,
                                           const MorreyExponents& e, double u);

enum class OperatorChoice { JAlpha, IAlpha, MajorantI, UPoweredSum };
const char* operator_choice_name(OperatorChoice c);

// ||op(f1,f2)||_{M^s_t} vs ||f1||_{M^{p1}_{q1}} ||f2||_{M^{p2}_{q2}} with the
// regime gate of the invoked statement.
InequalityReport check_boundedness(const TheoremParams& tp, const GridFunction& f1,
                                   const GridFunction& f2, OperatorChoice op,
                                   std::optional<MajorantTruncation> t = std::nullopt);

struct PointwiseResult {
  double max_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t argmax_cell = 0;
  std::size_t positive_cells = 0;
};
PointwiseResult check_pointwise(const GridFunction& lhs, const GridFunction& rhs);

// ---- constant estimation ---------------------------------------------

struct ConstantSummary {
  std::string check_id;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  std::string argmax_item;
  double stability_delta = 0.0;  // relative change of max_ratio under jmax+1
  std::size_t degenerate_count = 0;
  std::size_t violation_count = 0;
  std::vector<InequalityReport> rows;
};

using CorpusEvaluator = std::function<InequalityReport(
    std::size_t index, const std::vector<CorpusItemDesc>& items, const GridSpec& grid)>;

// Runs the evaluator over every item at the corpus resolution and once more
// one level finer; deterministic for a fixed seed.
ConstantSummary estimate_constant(const std::string& check_id, const CorpusSpec& corpus,
                                  const CorpusEvaluator& eval);

using FamilyEvaluator = std::function<InequalityReport(const FamilyDesc& fam, const GridSpec& grid)>;

ConstantSummary estimate_family_constant(const std::string& check_id, const GridSpec& base,
                                         std::uint64_t seed, int count,
                                         const FamilyEvaluator& eval);

}  // namespace morrey
