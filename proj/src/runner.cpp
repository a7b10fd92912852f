#include "morrey/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "morrey/rng.hpp"
#include "parallel.hpp"

namespace morrey {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t seed_for(std::uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a(tag));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "prop2.1", "thm2.2", "thm2.3",  "lem2.4", "ialpha_majorant", "lem2.5",
      "lem2.6",  "hedberg", "thm1.2", "thm1.3", "thm1.4",          "scaling"};
  return names;
}

ParamSet default_param_set(const std::string& key) {
  if (key == "t12") return ParamSet{0.125, 4.0, 3.5, 4.0, 3.5};
  if (key == "t13") return ParamSet{1.0 / 6.0, 1.5, 1.2, 1.5, 1.2};
  if (key == "t14") return ParamSet{3.0 / 35.0, 2.5, 1.5, 2.5, 1.5};
  throw ConfigError("unknown parameter set '" + key + "' (expected t12/t13/t14)");
}

ParamSet RunConfig::param_set(const std::string& key) const {
  const auto it = params.find(key);
  return it != params.end() ? it->second : default_param_set(key);
}

void RunConfig::validate() const {
  try {
    grid.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  const int cap = grid.dim == 1 ? 14 : 10;
  if (grid.j0 + grid.jmax > cap)
    throw ConfigError("jmax + j0 exceeds the cap (" + std::to_string(cap) + ") for dimension " +
                      std::to_string(grid.dim));
  if (corpus_items < 0 || corpus_families < 0 || corpus_pairs < 0)
    throw ConfigError("corpus sizes must be non-negative");
  if (corpus_items > 10000 || corpus_families > 10000 || corpus_pairs > 10000)
    throw ConfigError("corpus sizes capped at 10000");
  for (const auto& c : checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw ConfigError("unknown check '" + c + "'");
  for (const auto& [k, v] : params) {
    (void)v;
    if (k != "t12" && k != "t13" && k != "t14")
      throw ConfigError("unknown params key '" + k + "' (expected t12/t13/t14)");
  }
  if (truncation) {
    try {
      truncation->validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("truncation: ") + e.what());
    }
  }
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  RunConfig cfg;
  const auto fail = [&](const std::string& msg) { throw ConfigError(origin + ": " + msg); };
  static const std::vector<std::string> top_keys = {"dimension",  "j0",     "jmax",   "seed",
                                                    "corpus",     "checks", "params", "truncation",
                                                    "output_dir", "sweep"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(top_keys.begin(), top_keys.end(), key) == top_keys.end())
      fail("unknown field '" + key + "'");
  }
  try {
    cfg.grid.dim = j.value("dimension", 1);
    cfg.grid.j0 = j.value("j0", 2);
    cfg.grid.jmax = j.value("jmax", 9);
    cfg.seed = j.value("seed", std::uint64_t{20240601});
    if (j.contains("corpus")) {
      const auto& c = j.at("corpus");
      cfg.corpus_items = c.value("items", cfg.corpus_items);
      cfg.corpus_families = c.value("families", cfg.corpus_families);
      cfg.corpus_pairs = c.value("pairs", cfg.corpus_pairs);
    }
    if (j.contains("checks")) {
      cfg.checks = j.at("checks").get<std::vector<std::string>>();
    } else {
      cfg.checks = known_checks();
    }
    if (j.contains("params")) {
      for (const auto& [key, ps] : j.at("params").items()) {
        ParamSet base = default_param_set(key);
        base.alpha = ps.value("alpha", base.alpha);
        base.p1 = ps.value("p1", base.p1);
        base.q1 = ps.value("q1", base.q1);
        base.p2 = ps.value("p2", base.p2);
        base.q2 = ps.value("q2", base.q2);
        cfg.params[key] = base;
      }
    }
    if (j.contains("truncation")) {
      MajorantTruncation t{};
      t.j_min = j.at("truncation").value("j_min", -(cfg.grid.j0 + 2));
      t.j_max_sum = j.at("truncation").value("j_max_sum", cfg.grid.jmax);
      cfg.truncation = t;
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("sweep")) {
      for (const auto& [key, vals] : j.at("sweep").items()) {
        if (key != "alpha" && key != "p1" && key != "q1" && key != "p2" && key != "q2")
          fail("sweep key '" + key + "' not recognized");
        cfg.sweep[key] = vals.get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    fail(e.what());
  }
  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("MORREYBENCH_OUT");
    cfg.output_dir = env && *env ? env : "morreybench-out";
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str(), path.string());
}

// ---- suite ---------------------------------------------------------------

namespace {

MajorantTruncation trunc_for(const RunConfig& cfg, const GridSpec& grid) {
  if (!cfg.truncation) return default_truncation(grid);
  MajorantTruncation t = *cfg.truncation;
  t.j_max_sum += grid.jmax - cfg.grid.jmax;  // track refinement
  return t;
}

ConstantSummary summarize_rows(const std::string& check_id, std::vector<InequalityReport> rows,
                               const std::vector<InequalityReport>& fine_rows) {
  ConstantSummary s;
  s.check_id = check_id;
  s.rows = std::move(rows);
  double max0 = 0.0;
  std::vector<double> ratios;
  for (const auto& r : s.rows) {
    s.violation_count += r.violations;
    if (r.degenerate) {
      ++s.degenerate_count;
      continue;
    }
    if (std::isfinite(r.ratio)) {
      ratios.push_back(r.ratio);
      if (r.ratio > max0) {
        max0 = r.ratio;
        s.argmax_item = r.corpus_item_id;
      }
    }
  }
  s.max_ratio = max0;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    s.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  double max1 = 0.0;
  bool have_fine = false;
  for (const auto& r : fine_rows) {
    have_fine = true;
    if (!r.degenerate && std::isfinite(r.ratio)) max1 = std::max(max1, r.ratio);
  }
  s.stability_delta = have_fine && max0 > 0.0 ? std::fabs(max1 - max0) / max0 : 0.0;
  std::sort(s.rows.begin(), s.rows.end(), [](const InequalityReport& a, const InequalityReport& b) {
    return a.corpus_item_id < b.corpus_item_id;
  });
  return s;
}

using PairEvaluator = std::function<InequalityReport(const CorpusItemDesc&, const CorpusItemDesc&,
                                                     const GridSpec&)>;

// Pairs consecutive corpus items and evaluates at the base grid plus one
// refinement for the stability delta.
ConstantSummary run_pairs(const std::string& check_id, const CorpusSpec& corpus, int pairs,
                          const PairEvaluator& eval, bool with_fine = true) {
  CorpusSpec spec = corpus;
  spec.size = 2 * pairs;
  const auto items = make_corpus(spec);
  const auto run = [&](const GridSpec& grid) {
    std::vector<InequalityReport> rows(static_cast<std::size_t>(pairs));
    detail::parallel_for_chunks(rows.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto& d1 = items[2 * i];
        const auto& d2 = items[2 * i + 1];
        rows[i] = eval(d1, d2, grid);
        rows[i].check_id = check_id;
        rows[i].corpus_item_id = d1.id + "+" + d2.id;
        rows[i].seed = d1.seed;
        rows[i].resolution = grid.jmax;
      }
    });
    return rows;
  };
  auto base = run(spec.grid);
  std::vector<InequalityReport> fine;
  if (with_fine) fine = run(spec.grid.refined(1));
  return summarize_rows(check_id, std::move(base), fine);
}

std::string exp_tag(const MorreyExponents& e) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "p%.2g-q%.2g", e.p, e.q);
  return buf;
}

void run_family_checks(const RunConfig& cfg, const std::string& name,
                       std::vector<ConstantSummary>& out) {
  struct Variant {
    MorreyExponents e;
    std::optional<double> u;
  };
  std::vector<Variant> variants;
  if (name == "prop2.1") {
    variants.push_back({MorreyExponents{0.9, 0.9}, std::nullopt});
  } else if (name == "thm2.2") {
    variants.push_back({MorreyExponents{0.9, 0.5}, std::nullopt});
    variants.push_back({MorreyExponents{0.7, 0.3}, std::nullopt});
  } else {
    variants.push_back({MorreyExponents{1.2, 0.8}, 2.0});
    variants.push_back({MorreyExponents{1.5, 1.0}, 3.0});
  }
  for (const auto& v : variants) {
    const std::string id = name + "/" + exp_tag(v.e);
    out.push_back(estimate_family_constant(
        id, cfg.grid, seed_for(cfg.seed, id), cfg.corpus_families,
        [&](const FamilyDesc& fam, const GridSpec& grid) {
          const auto family = materialize_family(fam, grid);
          InequalityReport r = v.u ? check_u_powered_averaging(family, v.e, *v.u)
                                   : check_averaging(family, v.e);
          r.notes = v.u ? "u=" + fmt17(*v.u) : "";
          return r;
        }));
  }
}

InequalityReport pointwise_report(const PointwiseResult& pw, const MajorantTruncation& t) {
  InequalityReport r;
  r.lhs = pw.max_ratio;
  r.rhs = 1.0;
  r.ratio = pw.max_ratio;
  r.violations = pw.violations;
  r.degenerate = pw.positive_cells == 0;
  r.truncation = t;
  r.notes = "argmax_cell=" + std::to_string(pw.argmax_cell);
  return r;
}

void run_domination_j(const RunConfig& cfg, std::vector<ConstantSummary>& out) {
  for (double alpha : {cfg.param_set("t13").alpha, 0.5}) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "lem2.4/a%.3g", alpha);
    CorpusSpec corpus{cfg.grid, seed_for(cfg.seed, tag), 0, cfg.param_set("t13").p1,
                      cfg.param_set("t13").p2, 0};
    out.push_back(run_pairs(
        tag, corpus, cfg.corpus_items / 2 > 0 ? cfg.corpus_items / 2 : 1,
        [&, alpha](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
          const OperatorParams p{alpha, grid.dim};
          const GridFunction f1 = materialize(d1, grid);
          const GridFunction f2 = materialize(d2, grid);
          const MajorantTruncation t = trunc_for(cfg, grid);
          const auto pw = check_pointwise(j_alpha(f1, f2, p), dyadic_majorant_j(f1, f2, p, t));
          return pointwise_report(pw, t);
        }));
  }
}

GridSpec ialpha_grid(const GridSpec& grid) {
  GridSpec g = grid;
  while (g.cell_count() > 512 && g.jmax > -g.j0) --g.jmax;
  return g;
}

void run_domination_i(const RunConfig& cfg, std::vector<ConstantSummary>& out) {
  const double alpha = 1.5;
  const GridSpec small = ialpha_grid(cfg.grid);
  CorpusSpec corpus{small, seed_for(cfg.seed, "ialpha_majorant"), 0, cfg.param_set("t13").p1,
                    cfg.param_set("t13").p2, 0};
  out.push_back(run_pairs(
      "ialpha_majorant/a1.5", corpus, cfg.corpus_items / 2 > 0 ? cfg.corpus_items / 2 : 1,
      [&](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
        const OperatorParams p{alpha, grid.dim};
        const GridFunction f1 = materialize(d1, grid);
        const GridFunction f2 = materialize(d2, grid);
        const MajorantTruncation t = trunc_for(cfg, grid);
        const auto pw = check_pointwise(i_alpha(f1, f2, p), dyadic_majorant_i(f1, f2, p, t));
        return pointwise_report(pw, t);
      }));
}

void run_boundedness(const RunConfig& cfg, const std::string& name, const TheoremParams& tp,
                     OperatorChoice op, Regime expect, std::vector<ConstantSummary>& out) {
  if (expect != Regime::None && tp.regime != expect) {
    ConstantSummary s;
    s.check_id = name;
    s.violation_count = 1;
    s.argmax_item = std::string("regime gate: got ") + regime_name(tp.regime) + ", expected " +
                    regime_name(expect);
    out.push_back(std::move(s));
    return;
  }
  CorpusSpec corpus{cfg.grid, seed_for(cfg.seed, name), 0, tp.p1, tp.p2, 0};
  if (op == OperatorChoice::IAlpha) corpus.grid = ialpha_grid(cfg.grid);
  out.push_back(run_pairs(
      name, corpus, cfg.corpus_pairs,
      [&, tp, op](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
        TheoremParams local = tp;
        local.dim = grid.dim;
        InequalityReport r = check_boundedness(local, materialize(d1, grid), materialize(d2, grid),
                                               op, trunc_for(cfg, grid));
        r.truncation = trunc_for(cfg, grid);
        r.notes = std::string("regime=") + regime_name(local.regime);
        return r;
      }));
}

void run_hedberg(const RunConfig& cfg, std::vector<ConstantSummary>& out) {
  const ParamSet ps = cfg.param_set("t14");
  const TheoremParams tp = solve_params(cfg.grid.dim, ps.alpha, ps.p1, ps.q1, ps.p2, ps.q2);
  if (!tp.u) {
    ConstantSummary s;
    s.check_id = "hedberg";
    s.violation_count = 1;
    s.argmax_item = "no admissible u (need s < min(q1,q2))";
    out.push_back(std::move(s));
    return;
  }
  CorpusSpec corpus{cfg.grid, seed_for(cfg.seed, "hedberg"), 0, tp.p1, tp.p2, 0};
  out.push_back(run_pairs(
      "hedberg", corpus, cfg.corpus_pairs,
      [&, tp](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
        const OperatorParams p{tp.alpha, grid.dim};
        const double u = *tp.u;
        const GridFunction f1 = materialize(d1, grid);
        const GridFunction f2 = materialize(d2, grid);
        const MajorantTruncation t = trunc_for(cfg, grid);
        const GridFunction total = u_powered_cube_sum(f1, f2, p, u, t);
        const GridFunction m1 = maximal(f1, u);
        const GridFunction m2 = maximal(f2, u);
        const double nn = morrey_norm(f1, MorreyExponents{tp.p1, tp.q1}) *
                          morrey_norm(f2, MorreyExponents{tp.p2, tp.q2});
        Rng rng(splitmix64(d1.seed ^ 0x5851f42d4c957f2dULL));
        InequalityReport r;
        r.truncation = t;
        double worst_c = 0.0;
        for (int probe = 0; probe < 3; ++probe) {
          const std::size_t cell =
              static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(grid.cell_count()) - 1));
          const double cutoff = rng.log_uniform(grid.cell_width(), std::ldexp(2.0, grid.j0));
          const auto split = hedberg_split(f1, f2, p, u, cutoff, cell, t);
          const double direct = total.cell(cell);
          if (std::fabs(split.s1 + split.s2 - direct) > 1e-12 * std::max(1.0, direct)) {
            ++r.violations;
            r.notes += "partition_identity_failed;";
          }
          const double mm = m1.cell(cell) * m2.cell(cell);
          if (mm > 0.0) {
            const double l_opt = hedberg_optimal_cutoff(nn, m1.cell(cell), m2.cell(cell), tp.p, grid.dim);
            const auto opt = hedberg_split(f1, f2, p, u, l_opt, cell, t);
            const double b1 = std::pow(l_opt, tp.alpha) * mm;
            const double b2 = std::pow(l_opt, -grid.dim / tp.s) * nn;
            if (!(b1 <= 4.0 * b2 && b2 <= 4.0 * b1)) {
              ++r.violations;
              r.notes += "bound_terms_unbalanced;";
            }
            worst_c = std::max({worst_c, opt.s1 / b1, opt.s2 / b2});
          }
        }
        r.lhs = worst_c;
        r.rhs = 1.0;
        r.ratio = worst_c;
        r.degenerate = worst_c == 0.0;
        return r;
      }));
}

void run_scaling(const RunConfig& cfg, std::vector<ConstantSummary>& out) {
  const ParamSet ps = cfg.param_set("t13");
  const TheoremParams tp = solve_params(cfg.grid.dim, ps.alpha, ps.p1, ps.q1, ps.p2, ps.q2);
  const int pairs = std::min(5, std::max(1, cfg.corpus_pairs));
  CorpusSpec corpus{cfg.grid, seed_for(cfg.seed, "scaling"), 0, tp.p1, tp.p2, 0};
  out.push_back(run_pairs(
      "scaling", corpus, pairs,
      [&, tp](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
        const GridFunction f1 = materialize(d1, grid);
        const GridFunction f2 = materialize(d2, grid);
        const auto ratio_at = [&](int m) {
          const GridFunction g1 = m == 0 ? f1 : f1.dilate_dyadic(m);
          const GridFunction g2 = m == 0 ? f2 : f2.dilate_dyadic(m);
          MajorantTruncation t = trunc_for(cfg, grid);
          t.j_min += m;
          t.j_max_sum += m;
          return check_boundedness(tp, g1, g2, OperatorChoice::JAlpha, t).ratio;
        };
        const double r0 = ratio_at(0);
        double dev = 0.0;
        for (int m : {-2, -1, 1, 2})
          if (r0 > 0.0) dev = std::max(dev, std::fabs(ratio_at(m) / r0 - 1.0));
        InequalityReport r;
        r.lhs = dev;
        r.rhs = 1.0;
        r.ratio = dev;
        if (dev > 0.05) ++r.violations;
        r.notes = "max_rel_dev_over_m";
        return r;
      },
      /*with_fine=*/false));
}

json summary_to_json(const ConstantSummary& s) {
  json j;
  j["check_id"] = s.check_id;
  j["max_ratio"] = s.max_ratio;
  j["median_ratio"] = s.median_ratio;
  j["argmax_item"] = s.argmax_item;
  j["stability_delta"] = s.stability_delta;
  j["degenerate"] = s.degenerate_count;
  j["violations"] = s.violation_count;
  j["rows"] = s.rows.size();
  j["status"] = s.violation_count == 0 ? "ok" : "violated";
  return j;
}

}  // namespace

std::string reports_to_csv(const std::vector<ConstantSummary>& summaries) {
  std::string out = "check_id,corpus_item_id,lhs,rhs,ratio,resolution,truncation,seed,notes\n";
  for (const auto& s : summaries)
    for (const auto& r : s.rows) {
      out += csv_escape(r.check_id);
      out += ',';
      out += csv_escape(r.corpus_item_id);
      out += ',';
      out += fmt17(r.lhs);
      out += ',';
      out += fmt17(r.rhs);
      out += ',';
      out += fmt17(r.ratio);
      out += ',';
      out += std::to_string(r.resolution);
      out += ',';
      out += r.truncation.str();
      out += ',';
      out += std::to_string(r.seed);
      out += ',';
      std::string notes = r.notes;
      if (r.degenerate) notes += notes.empty() ? "degenerate" : ";degenerate";
      if (r.violations) notes += (notes.empty() ? "" : ";") + std::string("violations=") +
                                 std::to_string(r.violations);
      out += csv_escape(notes);
      out += '\n';
    }
  return out;
}

RunResult run_suite(const RunConfig& cfg) {
  cfg.validate();
  RunResult result;
  std::vector<ConstantSummary>& summaries = result.summaries;

  for (const auto& name : cfg.checks) {
    if (name == "prop2.1" || name == "thm2.2" || name == "thm2.3") {
      run_family_checks(cfg, name, summaries);
    } else if (name == "lem2.4") {
      run_domination_j(cfg, summaries);
    } else if (name == "ialpha_majorant") {
      run_domination_i(cfg, summaries);
    } else if (name == "lem2.5") {
      const ParamSet ps = cfg.param_set("t13");
      run_boundedness(cfg, "lem2.5/a" + fmt17(ps.alpha).substr(0, 5),
                      solve_params(cfg.grid.dim, ps.alpha, ps.p1, ps.q1, ps.p2, ps.q2),
                      OperatorChoice::MajorantI, Regime::None, summaries);
      run_boundedness(cfg, "lem2.5/a1.2",
                      solve_params(cfg.grid.dim, 1.2 * cfg.grid.dim, ps.p1, ps.q1, ps.p2, ps.q2),
                      OperatorChoice::MajorantI, Regime::None, summaries);
    } else if (name == "lem2.6") {
      const ParamSet ps = cfg.param_set("t14");
      run_boundedness(cfg, "lem2.6", solve_params(cfg.grid.dim, ps.alpha, ps.p1, ps.q1, ps.p2, ps.q2),
                      OperatorChoice::UPoweredSum, Regime::None, summaries);
    } else if (name == "hedberg") {
      run_hedberg(cfg, summaries);
    } else if (name == "thm1.2" || name == "thm1.3" || name == "thm1.4") {
      const std::string key = name == "thm1.2" ? "t12" : name == "thm1.3" ? "t13" : "t14";
      const Regime expect =
          name == "thm1.2" ? Regime::T12 : name == "thm1.3" ? Regime::T13 : Regime::T14;
      const ParamSet ps = cfg.param_set(key);
      run_boundedness(cfg, name, solve_params(cfg.grid.dim, ps.alpha, ps.p1, ps.q1, ps.p2, ps.q2),
                      OperatorChoice::JAlpha, expect, summaries);
    } else if (name == "scaling") {
      run_scaling(cfg, summaries);
    }
  }

  std::size_t violations = 0;
  for (const auto& s : summaries) violations += s.violation_count;
  result.exit_code = violations == 0 ? 0 : 1;

  result.csv_path = cfg.output_dir / "report.csv";
  result.summary_path = cfg.output_dir / "summary.json";
  write_file_atomic(result.csv_path, reports_to_csv(summaries));

  json top;
  top["config"] = {{"dimension", cfg.grid.dim}, {"j0", cfg.grid.j0},   {"jmax", cfg.grid.jmax},
                   {"seed", cfg.seed},          {"checks", cfg.checks}};
  top["exit_code"] = result.exit_code;
  json arr = json::array();
  for (const auto& s : summaries) arr.push_back(summary_to_json(s));
  top["checks"] = arr;
  write_file_atomic(result.summary_path, top.dump(2) + "\n");
  return result;
}

// ---- oracle ---------------------------------------------------------------

namespace {

struct OracleRow {
  std::string id;
  double produced = 0.0;
  double reference = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

OracleRow oracle_row(const std::string& id, double produced, double reference, double tol) {
  OracleRow r{id, produced, reference, 0.0, tol, false};
  const double denom = std::max(std::fabs(reference), 1e-300);
  r.rel_err = std::fabs(produced - reference) / denom;
  r.pass = r.rel_err <= tol;
  return r;
}

// Coarse-cell averages of a function computed at extra refinement.
std::vector<double> downsample(const GridFunction& fine, const GridSpec& coarse) {
  const int d = fine.spec().jmax - coarse.jmax;
  const std::int64_t f = std::int64_t{1} << d;
  const std::int64_t cpa = coarse.cells_per_axis();
  const std::int64_t fcpa = fine.spec().cells_per_axis();
  std::vector<double> out(coarse.cell_count(), 0.0);
  if (coarse.dim == 1) {
    for (std::int64_t a = 0; a < cpa; ++a) {
      double s = 0.0;
      for (std::int64_t i = 0; i < f; ++i) s += fine.cell(static_cast<std::size_t>(a * f + i));
      out[static_cast<std::size_t>(a)] = s / static_cast<double>(f);
    }
  } else {
    for (std::int64_t a0 = 0; a0 < cpa; ++a0)
      for (std::int64_t a1 = 0; a1 < cpa; ++a1) {
        double s = 0.0;
        for (std::int64_t i0 = 0; i0 < f; ++i0)
          for (std::int64_t i1 = 0; i1 < f; ++i1)
            s += fine.cell(static_cast<std::size_t>((a0 * f + i0) * fcpa + a1 * f + i1));
        out[static_cast<std::size_t>(a0 * cpa + a1)] = s / static_cast<double>(f * f);
      }
  }
  return out;
}

// || produced - refined ||_inf / || refined ||_inf
double refined_linf_error(const GridFunction& produced, const GridFunction& refined_result) {
  const auto avg = downsample(refined_result, produced.spec());
  double peak = 0.0;
  for (double v : avg) peak = std::max(peak, v);
  if (peak == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < avg.size(); ++i)
    worst = std::max(worst, std::fabs(produced.cell(i) - avg[i]));
  return worst / peak;
}

// Supremum over every level with no support-based shortcut; quadratic but
// only used as the reference side of the oracle comparison.
double exhaustive_morrey(const GridFunction& f, const MorreyExponents& e, int extra_depth) {
  const GridSpec& spec = f.spec();
  double best = 0.0;
  const GridFunction fq = f.pointwise_power(e.q);
  for (int j = spec.jmax; j >= -spec.j0 - extra_depth; --j) {
    for (const auto& q : cubes_at_level_intersecting(std::max(j, -spec.j0 - 1), spec.domain())) {
      const DyadicCube use = j >= -spec.j0 - 1 ? q : q.ancestor_at_level(j);
      const double mass = fq.integrate(use);
      if (mass > 0.0)
        best = std::max(best, std::exp2(-static_cast<double>(use.level()) * spec.dim *
                                        (1.0 / e.p - 1.0 / e.q)) *
                                  std::pow(mass, 1.0 / e.q));
    }
  }
  return best;
}

}  // namespace

RunResult run_oracle(const RunConfig& cfg) {
  cfg.validate();
  RunResult result;
  std::vector<OracleRow> rows;
  const GridSpec grid = cfg.grid;

  // Closed-form indicator values for the reflected-kernel integral.
  {
    const OperatorParams p{0.5, grid.dim};
    const DyadicCube unit =
        grid.dim == 1 ? DyadicCube::line(0, 0) : DyadicCube::square(0, 0, 0);
    const GridFunction chi = GridFunction::indicator(grid, unit);
    if (grid.dim == 1) {
      const GridFunction j = j_alpha(chi, chi, p);
      const std::int64_t half = grid.cells_per_axis() / 2;
      const std::int64_t g = std::int64_t{1} << (grid.jmax - 1);  // cell starting at 1/2
      rows.push_back(oracle_row("jalpha_indicator_midpoint",
                                j.cell(static_cast<std::size_t>(g + half)),
                                2.0 * std::sqrt(2.0), 0.01));
    }
    const Box quarter = grid.dim == 1 ? Box::interval(2, 0, 1) : Box::rect(2, 0, 1, 0, 1);
    rows.push_back(oracle_row("indicator_quarter_integral", chi.integrate(quarter),
                              grid.dim == 1 ? 0.25 : 0.0625, 1e-12));
  }

  // Exhaustive vs truncated Morrey supremum.
  {
    CorpusSpec corpus{grid, seed_for(cfg.seed, "oracle-morrey"), 10, 2.0, 2.5, 0};
    double worst = 0.0;
    for (const auto& item : make_corpus(corpus)) {
      const GridFunction f = materialize(item, grid);
      const MorreyExponents e{2.0, 1.5};
      const double full = exhaustive_morrey(f, e, 10);
      const double truncated = morrey_norm(f, e);
      worst = std::max(worst, std::fabs(full - truncated) / std::max(full, 1e-300));
    }
    rows.push_back(oracle_row("morrey_exhaustive_vs_truncated", worst, 0.0, 1e-12));
    rows.back().rel_err = worst;
    rows.back().pass = worst <= 1e-12;
  }

  // Production vs refined-grid evaluation.
  {
    CorpusSpec corpus{grid, seed_for(cfg.seed, "oracle-refined"), 20, 2.0, 2.5, 0};
    corpus.indicators_only = true;
    const auto items = make_corpus(corpus);
    const OperatorParams p{0.75, grid.dim};
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < items.size(); i += 2) {
      const GridFunction f1 = materialize(items[i], grid);
      const GridFunction f2 = materialize(items[i + 1], grid);
      const GridFunction prod = j_alpha(f1, f2, p);
      const GridFunction ref = j_alpha(f1.refined(2), f2.refined(2), p);
      worst = std::max(worst, refined_linf_error(prod, ref));
    }
    rows.push_back(oracle_row("jalpha_refined_grid", worst, 0.0, 0.02));
    rows.back().rel_err = worst;
    rows.back().pass = worst <= 0.02;
  }
  if (grid.dim == 1) {
    GridSpec small = ialpha_grid(grid);
    while (small.cell_count() > 256 && small.jmax > -small.j0) --small.jmax;
    const OperatorParams p{1.5, 1};
    const GridFunction chi = GridFunction::indicator(small, DyadicCube::line(0, 0));
    const GridFunction prod = i_alpha(chi, chi, p);
    const GridFunction ref = i_alpha(chi.refined(2), chi.refined(2), p);
    const double err = refined_linf_error(prod, ref);
    rows.push_back(oracle_row("ialpha_refined_grid", err, 0.0, 0.02));
    rows.back().rel_err = err;
    rows.back().pass = err <= 0.02;
  }

  // Grid file round-trips, exercising the import/export surface.
  {
    const GridFunction f = GridFunction::random_steps(grid, seed_for(cfg.seed, "oracle-io"));
    std::filesystem::create_directories(cfg.output_dir);
    const auto csv_path = cfg.output_dir / "oracle_grid.csv";
    const auto bin_path = cfg.output_dir / "oracle_grid.bin";
    {
      std::ostringstream os;
      f.write_csv(os);
      write_file_atomic(csv_path, os.str());
      std::ifstream is(csv_path);
      const GridFunction back = GridFunction::read_csv(is);
      bool same = back.spec() == f.spec();
      for (std::size_t i = 0; same && i < f.cells().size(); ++i) same = back.cell(i) == f.cell(i);
      rows.push_back(oracle_row("grid_roundtrip_csv", same ? 1.0 : 0.0, 1.0, 0.0));
    }
    {
      std::ostringstream os(std::ios::binary);
      f.write_binary(os);
      write_file_atomic(bin_path, os.str());
      std::ifstream is(bin_path, std::ios::binary);
      const GridFunction back = GridFunction::read_binary(is);
      bool same = back.spec() == f.spec();
      for (std::size_t i = 0; same && i < f.cells().size(); ++i) same = back.cell(i) == f.cell(i);
      rows.push_back(oracle_row("grid_roundtrip_binary", same ? 1.0 : 0.0, 1.0, 0.0));
    }
  }

  std::string csv = "quantity_id,produced,reference,rel_error,tolerance,status\n";
  bool all_pass = true;
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    csv += r.id + ',' + fmt17(r.produced) + ',' + fmt17(r.reference) + ',' + fmt17(r.rel_err) +
           ',' + fmt17(r.tolerance) + ',' + (r.pass ? "ok" : "mismatch") + '\n';
  }
  result.csv_path = cfg.output_dir / "oracle.csv";
  write_file_atomic(result.csv_path, csv);
  result.exit_code = all_pass ? 0 : 1;
  return result;
}

// ---- sweep ----------------------------------------------------------------

RunResult run_sweep(const RunConfig& cfg) {
  cfg.validate();
  RunResult result;
  const ParamSet base = cfg.param_set("t13");
  const auto axis = [&](const std::string& key, double fallback) {
    const auto it = cfg.sweep.find(key);
    if (it != cfg.sweep.end() && !it->second.empty()) return it->second;
    return std::vector<double>{fallback};
  };
  const auto alphas = axis("alpha", base.alpha);
  const auto p1s = axis("p1", base.p1);
  const auto q1s = axis("q1", base.q1);
  const auto p2s = axis("p2", base.p2);
  const auto q2s = axis("q2", base.q2);

  std::string csv = "alpha,p1,q1,p2,q2,p,q,s,t,u,regime,max_ratio\n";
  for (double a : alphas)
    for (double p1 : p1s)
      for (double q1 : q1s)
        for (double p2 : p2s)
          for (double q2 : q2s) {
            std::string row = fmt17(a) + ',' + fmt17(p1) + ',' + fmt17(q1) + ',' + fmt17(p2) +
                              ',' + fmt17(q2) + ',';
            try {
              const TheoremParams tp = solve_params(cfg.grid.dim, a, p1, q1, p2, q2);
              row += fmt17(tp.p) + ',' + fmt17(tp.q) + ',' + fmt17(tp.s) + ',' + fmt17(tp.t) + ',';
              row += tp.u ? fmt17(*tp.u) : std::string("");
              row += ',';
              row += regime_name(tp.regime);
              row += ',';
              if (tp.regime != Regime::None && cfg.corpus_pairs > 0) {
                char tag[96];
                std::snprintf(tag, sizeof tag, "sweep-a%gp%gq%gp%gq%g", a, p1, q1, p2, q2);
                CorpusSpec corpus{cfg.grid, seed_for(cfg.seed, tag), 0, p1, p2, 0};
                const auto s = run_pairs(
                    tag, corpus, std::min(3, cfg.corpus_pairs),
                    [&](const CorpusItemDesc& d1, const CorpusItemDesc& d2, const GridSpec& grid) {
                      TheoremParams local = tp;
                      local.dim = grid.dim;
                      return check_boundedness(local, materialize(d1, grid), materialize(d2, grid),
                                               OperatorChoice::JAlpha, trunc_for(cfg, grid));
                    },
                    /*with_fine=*/false);
                row += fmt17(s.max_ratio);
              }
            } catch (const std::invalid_argument& e) {
              row += std::string(",,,,,") + csv_escape(std::string("error: ") + e.what()) + ",";
            }
            csv += row + '\n';
          }
  result.csv_path = cfg.output_dir / "sweep.csv";
  write_file_atomic(result.csv_path, csv);
  result.exit_code = 0;
  return result;
}

int summarize_reports(const std::filesystem::path& dir, std::ostream& out) {
  if (!std::filesystem::exists(dir)) {
    out << "no such directory: " << dir.string() << '\n';
    return 2;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() == "summary.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream is(f);
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      out << f.string() << ": unreadable (" << e.what() << ")\n";
      continue;
    }
    out << f.string() << '\n';
    for (const auto& c : j.value("checks", json::array())) {
      out << "  " << c.value("check_id", "?") << "  max=" << c.value("max_ratio", 0.0)
          << "  median=" << c.value("median_ratio", 0.0)
          << "  stability=" << c.value("stability_delta", 0.0)
          << "  violations=" << c.value("violations", 0) << '\n';
    }
  }
  return 0;
}

}  // namespace morrey
