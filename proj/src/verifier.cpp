#include "morrey/verifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "morrey/rng.hpp"
#include "parallel.hpp"

namespace morrey {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::T12: return "T1.2";
    case Regime::T13: return "T1.3";
    case Regime::T14: return "T1.4";
    default: return "none";
  }
}

const char* operator_choice_name(OperatorChoice c) {
  switch (c) {
    case OperatorChoice::JAlpha: return "J";
    case OperatorChoice::IAlpha: return "I";
    case OperatorChoice::MajorantI: return "majorant_I";
    default: return "u_powered_sum";
  }
}

namespace {

bool rel_close(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) <= 1e-9 * scale;
}

}  // namespace

void TheoremParams::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("params dimension must be 1 or 2");
  for (double v : {alpha, p1, q1, p2, q2, p, q, s, t})
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("params must be positive and finite");
  if (!rel_close(1.0 / p, 1.0 / p1 + 1.0 / p2)) throw std::invalid_argument("1/p = 1/p1 + 1/p2 violated");
  if (!rel_close(1.0 / q, 1.0 / q1 + 1.0 / q2)) throw std::invalid_argument("1/q = 1/q1 + 1/q2 violated");
  if (!rel_close(1.0 / s, 1.0 / p - alpha / dim))
    throw std::invalid_argument("1/s = 1/p - alpha/dim violated");
  if (!rel_close(q / p, t / s)) throw std::invalid_argument("q/p = t/s violated");
  if (!(q1 <= p1) || !(q2 <= p2)) throw std::invalid_argument("q_j <= p_j violated");
  if (!(t <= s * (1.0 + 1e-12))) throw std::invalid_argument("t <= s violated");
  if (u) {
    if (!(*u > s) || !(*u < min_q()))
      throw std::invalid_argument("u must lie in (s, min(q1,q2))");
  }
}

Regime classify_regime(int dim, double alpha, double p1, double q1, double p2, double q2,
                       double s, double t) {
  (void)dim;
  (void)alpha;
  if (!(q1 > 1.0 && q1 <= p1 && q2 > 1.0 && q2 <= p2)) return Regime::None;
  const double mq = std::min(q1, q2);
  if (t >= 1.0 && s < mq) return Regime::T12;
  if (s < 1.0) return Regime::T13;
  if (t <= 1.0 && s >= 1.0 && s < mq) return Regime::T14;
  return Regime::None;
}

TheoremParams solve_params(int dim, double alpha, double p1, double q1, double p2, double q2) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be 1 or 2");
  for (double v : {alpha, p1, q1, p2, q2})
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("inputs must be positive and finite");
  if (!(q1 <= p1) || !(q2 <= p2)) throw std::invalid_argument("q_j <= p_j required");
  TheoremParams tp;
  tp.dim = dim;
  tp.alpha = alpha;
  tp.p1 = p1;
  tp.q1 = q1;
  tp.p2 = p2;
  tp.q2 = q2;
  tp.p = 1.0 / (1.0 / p1 + 1.0 / p2);
  tp.q = 1.0 / (1.0 / q1 + 1.0 / q2);
  const double inv_s = 1.0 / tp.p - alpha / dim;
  if (!(inv_s > 0.0)) throw std::invalid_argument("alpha >= dim/p leaves s undefined");
  tp.s = 1.0 / inv_s;
  tp.t = tp.s * tp.q / tp.p;
  tp.regime = classify_regime(dim, alpha, p1, q1, p2, q2, tp.s, tp.t);
  if (tp.s < tp.min_q()) tp.u = std::sqrt(tp.s * tp.min_q());
  return tp;
}

InequalityReport make_ratio_report(double lhs, double rhs) {
  InequalityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  if (rhs > 0.0) {
    r.ratio = lhs / rhs;
  } else if (lhs == 0.0) {
    r.ratio = 0.0;
    r.degenerate = true;
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    r.violations = 1;
  }
  return r;
}

// ---- corpus ------------------------------------------------------------

namespace {

std::string padded(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04d", prefix, i);
  return buf;
}

DyadicCube random_cube(Rng& rng, const GridSpec& base, int lvl_lo, int lvl_hi, int shrink,
                       bool positive_orthant = false) {
  const int lo = std::max({0, lvl_lo, shrink - base.j0, -base.j0});
  const int hi = std::max(lo, lvl_hi);
  const int lvl = static_cast<int>(rng.uniform_int(lo, hi));
  const std::int64_t span = std::int64_t{1} << (base.j0 - shrink + lvl);
  std::array<std::int64_t, kMaxDim> k{};
  for (int i = 0; i < base.dim; ++i)
    k[static_cast<std::size_t>(i)] = rng.uniform_int(positive_orthant ? 0 : -span, span - 1);
  return DyadicCube(lvl, {k.data(), static_cast<std::size_t>(base.dim)});
}

std::vector<StepPiece> random_disjoint_steps(Rng& rng, const GridSpec& base, int shrink,
                                             bool positive_orthant = false) {
  const int target = static_cast<int>(rng.uniform_int(1, 64));
  std::vector<StepPiece> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < target && attempts < 4 * target) {
    ++attempts;
    DyadicCube q = random_cube(rng, base, 0, base.jmax - 2, shrink, positive_orthant);
    bool ok = true;
    for (const auto& piece : out)
      if (relation(q, piece.cube) != CubeRelation::Disjoint) {
        ok = false;
        break;
      }
    if (!ok) continue;
    out.push_back(StepPiece{q, rng.log_uniform(0.0625, 16.0)});
  }
  return out;
}

}  // namespace

std::vector<CorpusItemDesc> make_corpus(const CorpusSpec& spec) {
  spec.grid.validate();
  if (spec.size < 0) throw std::invalid_argument("corpus size must be non-negative");
  std::vector<CorpusItemDesc> items;
  items.reserve(static_cast<std::size_t>(spec.size));
  for (int i = 0; i < spec.size; ++i) {
    CorpusItemDesc item;
    item.seed = splitmix64(spec.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    Rng rng(item.seed);
    const int slot = spec.indicators_only ? 0 : i % 10;
    const bool power_ok = spec.position_shrink == 0 && !spec.positive_orthant;
    if (slot < 4 || (slot < 7 && !power_ok)) {
      item.kind = CorpusItemDesc::Kind::Indicator;
      item.id = padded("ind", i);
      item.cube =
          random_cube(rng, spec.grid, 0, spec.grid.jmax - 2, spec.position_shrink, spec.positive_orthant);
    } else if (slot < 7) {
      item.kind = CorpusItemDesc::Kind::PowerLaw;
      item.id = padded("pow", i);
      const double anchor = (rng.next() & 1) ? spec.p1 : spec.p2;
      item.p = std::max(1.05, anchor * rng.uniform(0.9, 1.1));
    } else {
      item.kind = CorpusItemDesc::Kind::Steps;
      item.id = padded("rnd", i);
      item.steps =
          random_disjoint_steps(rng, spec.grid, spec.position_shrink, spec.positive_orthant);
    }
    items.push_back(std::move(item));
  }
  return items;
}

GridFunction materialize(const CorpusItemDesc& item, const GridSpec& grid) {
  switch (item.kind) {
    case CorpusItemDesc::Kind::Indicator:
      return GridFunction::indicator(grid, item.cube);
    case CorpusItemDesc::Kind::PowerLaw:
      return GridFunction::power_law(grid, item.p);
    case CorpusItemDesc::Kind::Steps: {
      std::vector<double> cells(grid.cell_count(), 0.0);
      const std::int64_t cpa = grid.cells_per_axis();
      for (const auto& piece : item.steps) {
        const Box b = piece.cube.box();
        const auto r0 = axis_cell_range(grid, b, 0);
        if (grid.dim == 1) {
          for (std::int64_t a = r0.first; a < r0.second; ++a)
            cells[static_cast<std::size_t>(a)] += piece.height;
        } else {
          const auto r1 = axis_cell_range(grid, b, 1);
          for (std::int64_t a0 = r0.first; a0 < r0.second; ++a0)
            for (std::int64_t a1 = r1.first; a1 < r1.second; ++a1)
              cells[static_cast<std::size_t>(a0 * cpa + a1)] += piece.height;
        }
      }
      return GridFunction::from_cells(grid, std::move(cells));
    }
  }
  throw std::logic_error("unknown corpus item kind");
}

std::vector<FamilyDesc> make_family_corpus(const GridSpec& base, std::uint64_t seed, int count) {
  base.validate();
  std::vector<FamilyDesc> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    FamilyDesc fam;
    fam.seed = splitmix64(seed + 0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(i + 1));
    fam.id = padded("fam", i);
    Rng rng(fam.seed);
    const int members = static_cast<int>(rng.uniform_int(1, 10));
    for (int m = 0; m < members; ++m) {
      FamilyMemberDesc member{random_cube(rng, base, 0, base.jmax - 3, 0), {}};
      if (rng.uniform() < 0.3) {
        member.pieces.push_back(StepPiece{member.cube, 1.0});
      } else {
        const int pieces = static_cast<int>(rng.uniform_int(1, 4));
        for (int pc = 0; pc < pieces; ++pc) {
          const int d = static_cast<int>(rng.uniform_int(1, 2));
          const int lvl = std::min(member.cube.level() + d, base.jmax - 1);
          const int dd = lvl - member.cube.level();
          std::array<std::int64_t, kMaxDim> k{};
          for (int ax = 0; ax < base.dim; ++ax) {
            const std::int64_t lo = member.cube.index(ax) << dd;
            k[static_cast<std::size_t>(ax)] = rng.uniform_int(lo, lo + (std::int64_t{1} << dd) - 1);
          }
          member.pieces.push_back(StepPiece{DyadicCube(lvl, {k.data(), static_cast<std::size_t>(base.dim)}),
                                            rng.log_uniform(0.0625, 16.0)});
        }
      }
      fam.members.push_back(std::move(member));
    }
    out.push_back(std::move(fam));
  }
  return out;
}

std::vector<CubeFamilyItem> materialize_family(const FamilyDesc& fam, const GridSpec& grid) {
  std::vector<CubeFamilyItem> out;
  out.reserve(fam.members.size());
  for (const auto& m : fam.members) {
    CorpusItemDesc item;
    item.kind = CorpusItemDesc::Kind::Steps;
    item.steps = m.pieces;
    out.push_back(CubeFamilyItem{materialize(item, grid), m.cube});
  }
  return out;
}

// ---- checks ------------------------------------------------------------

namespace {

void check_family_supports(const std::vector<CubeFamilyItem>& family) {
  for (const auto& item : family) {
    const double total = item.f.integral();
    const double inside = item.f.integrate(item.cube);
    if (total - inside > 1e-12 * std::max(1.0, total))
      throw std::invalid_argument("family member has mass outside its cube");
  }
}

GridFunction averaged_family_sum(const std::vector<CubeFamilyItem>& family, const GridSpec& grid,
                                 std::optional<double> u) {
  std::vector<double> cells(grid.cell_count(), 0.0);
  const std::int64_t cpa = grid.cells_per_axis();
  for (const auto& item : family) {
    const double m = u ? powered_average(item.f, item.cube, *u) : average(item.f, item.cube);
    if (m == 0.0) continue;
    const auto r0 = axis_cell_range(grid, item.cube.box(), 0);
    if (grid.dim == 1) {
      for (std::int64_t a = r0.first; a < r0.second; ++a) cells[static_cast<std::size_t>(a)] += m;
    } else {
      const auto r1 = axis_cell_range(grid, item.cube.box(), 1);
      for (std::int64_t a0 = r0.first; a0 < r0.second; ++a0)
        for (std::int64_t a1 = r1.first; a1 < r1.second; ++a1)
          cells[static_cast<std::size_t>(a0 * cpa + a1)] += m;
    }
  }
  return GridFunction::from_cells(grid, std::move(cells));
}

InequalityReport averaging_report(const std::vector<CubeFamilyItem>& family,
                                  const MorreyExponents& e, std::optional<double> u) {
  if (family.empty()) throw std::invalid_argument("empty family");
  check_family_supports(family);
  const GridSpec& grid = family.front().f.spec();
  GridFunction sum = GridFunction::zeros(grid);
  for (const auto& item : family) sum = sum.plus(item.f);
  const double lhs = morrey_norm(sum, e);
  const double rhs = morrey_norm(averaged_family_sum(family, grid, u), e);
  return make_ratio_report(lhs, rhs);
}

}  // namespace

InequalityReport check_averaging(const std::vector<CubeFamilyItem>& family,
                                 const MorreyExponents& e) {
  e.validate();
  const bool lebesgue_case = e.p == e.q && e.p <= 1.0;
  if (!lebesgue_case && !(e.p < 1.0))
    throw std::invalid_argument("averaging check requires 0 < q <= p < 1 (or p = q <= 1)");
  return averaging_report(family, e, std::nullopt);
}

InequalityReport check_u_powered_averaging(const std::vector<CubeFamilyItem>& family,
                                           const MorreyExponents& e, double u) {
  e.validate();
  if (!(e.q <= 1.0 && 1.0 <= e.p && e.p < u))
    throw std::invalid_argument("u-powered averaging requires 0 < q <= 1 <= p < u");
  return averaging_report(family, e, u);
}

InequalityReport check_boundedness(const TheoremParams& tp, const GridFunction& f1,
                                   const GridFunction& f2, OperatorChoice op,
                                   std::optional<MajorantTruncation> t) {
  tp.validate();
  const OperatorParams params{tp.alpha, tp.dim};
  GridFunction result = GridFunction::zeros(f1.spec());
  switch (op) {
    case OperatorChoice::JAlpha:
      if (tp.regime == Regime::None)
        throw std::invalid_argument("parameters satisfy none of the J-type regimes");
      result = j_alpha(f1, f2, params);
      break;
    case OperatorChoice::IAlpha:
      result = i_alpha(f1, f2, params);
      break;
    case OperatorChoice::MajorantI:
      result = dyadic_majorant_i(f1, f2, params, t);
      break;
    case OperatorChoice::UPoweredSum:
      if (!tp.u) throw std::invalid_argument("u-powered sum needs a u in (s, min(q1,q2))");
      result = u_powered_cube_sum(f1, f2, params, *tp.u, t);
      break;
  }
  const double n1 = morrey_norm(f1, MorreyExponents{tp.p1, tp.q1});
  const double n2 = morrey_norm(f2, MorreyExponents{tp.p2, tp.q2});
  const double rhs = n1 * n2;
  if (!(rhs > 0.0)) throw std::invalid_argument("boundedness check needs nonzero inputs");
  const double lhs = morrey_norm(result, MorreyExponents{tp.s, tp.t});
  return make_ratio_report(lhs, rhs);
}

PointwiseResult check_pointwise(const GridFunction& lhs, const GridFunction& rhs) {
  if (!(lhs.spec() == rhs.spec())) throw std::invalid_argument("pointwise check needs one grid");
  PointwiseResult out;
  const auto a = lhs.cells();
  const auto b = rhs.cells();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) ++out.positive_cells;
    if (b[i] > 0.0) {
      const double r = a[i] / b[i];
      if (r > out.max_ratio) {
        out.max_ratio = r;
        out.argmax_cell = i;
      }
    } else if (a[i] > 0.0) {
      ++out.violations;
    }
  }
  return out;
}

ConstantSummary estimate_constant(const std::string& check_id, const CorpusSpec& corpus,
                                  const CorpusEvaluator& eval) {
  const std::vector<CorpusItemDesc> items = make_corpus(corpus);
  ConstantSummary summary;
  summary.check_id = check_id;

  const auto run = [&](const GridSpec& grid) {
    std::vector<InequalityReport> rows(items.size());
    detail::parallel_for_chunks(items.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        rows[i] = eval(i, items, grid);
        rows[i].check_id = check_id;
        if (rows[i].corpus_item_id.empty()) rows[i].corpus_item_id = items[i].id;
        rows[i].seed = items[i].seed;
        rows[i].resolution = grid.jmax;
      }
    });
    return rows;
  };

  summary.rows = run(corpus.grid);
  double max0 = 0.0;
  std::vector<double> ratios;
  for (const auto& r : summary.rows) {
    summary.violation_count += r.violations;
    if (r.degenerate) {
      ++summary.degenerate_count;
      continue;
    }
    if (std::isfinite(r.ratio)) {
      ratios.push_back(r.ratio);
      if (r.ratio > max0) {
        max0 = r.ratio;
        summary.argmax_item = r.corpus_item_id;
      }
    }
  }
  summary.max_ratio = max0;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    summary.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }

  const auto fine_rows = run(corpus.grid.refined(1));
  double max1 = 0.0;
  for (const auto& r : fine_rows)
    if (!r.degenerate && std::isfinite(r.ratio)) max1 = std::max(max1, r.ratio);
  summary.stability_delta = max0 > 0.0 ? std::fabs(max1 - max0) / max0 : 0.0;

  std::sort(summary.rows.begin(), summary.rows.end(),
            [](const InequalityReport& x, const InequalityReport& y) {
              return x.corpus_item_id < y.corpus_item_id;
            });
  return summary;
}

ConstantSummary estimate_family_constant(const std::string& check_id, const GridSpec& base,
                                         std::uint64_t seed, int count,
                                         const FamilyEvaluator& eval) {
  const std::vector<FamilyDesc> fams = make_family_corpus(base, seed, count);
  ConstantSummary summary;
  summary.check_id = check_id;

  const auto run = [&](const GridSpec& grid) {
    std::vector<InequalityReport> rows(fams.size());
    detail::parallel_for_chunks(fams.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        rows[i] = eval(fams[i], grid);
        rows[i].check_id = check_id;
        rows[i].corpus_item_id = fams[i].id;
        rows[i].seed = fams[i].seed;
        rows[i].resolution = grid.jmax;
      }
    });
    return rows;
  };

  summary.rows = run(base);
  double max0 = 0.0;
  std::vector<double> ratios;
  for (const auto& r : summary.rows) {
    summary.violation_count += r.violations;
    if (r.degenerate) {
      ++summary.degenerate_count;
      continue;
    }
    if (std::isfinite(r.ratio)) {
      ratios.push_back(r.ratio);
      if (r.ratio > max0) {
        max0 = r.ratio;
        summary.argmax_item = r.corpus_item_id;
      }
    }
  }
  summary.max_ratio = max0;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    summary.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }

  const auto fine_rows = run(base.refined(1));
  double max1 = 0.0;
  for (const auto& r : fine_rows)
    if (!r.degenerate && std::isfinite(r.ratio)) max1 = std::max(max1, r.ratio);
  summary.stability_delta = max0 > 0.0 ? std::fabs(max1 - max0) / max0 : 0.0;
  return summary;
}

}  // namespace morrey
