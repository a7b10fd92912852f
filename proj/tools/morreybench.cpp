// Batch driver: verify / sweep / oracle / report.
//
// Exit codes: 0 success, 1 invariant violation, 2 config error.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "morrey/runner.hpp"

namespace {

struct Overrides {
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jmax;
  std::string checks;  // comma-separated
};

morrey::RunConfig load(const std::string& config_path, const Overrides& ov) {
  morrey::RunConfig cfg = morrey::RunConfig::from_json_file(config_path);
  if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.jmax) cfg.grid.jmax = *ov.jmax;
  if (!ov.checks.empty()) {
    cfg.checks.clear();
    std::string cur;
    for (char c : ov.checks + ",") {
      if (c == ',') {
        if (!cur.empty()) cfg.checks.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
  }
  cfg.validate();
  return cfg;
}

void print_summaries(const morrey::RunResult& result) {
  for (const auto& s : result.summaries) {
    std::printf("%-28s max=%-12.6g median=%-12.6g stability=%-10.4g violations=%zu%s\n",
                s.check_id.c_str(), s.max_ratio, s.median_ratio, s.stability_delta,
                s.violation_count, s.violation_count ? "  <-- FAIL" : "");
  }
  if (!result.csv_path.empty()) std::printf("report: %s\n", result.csv_path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"empirical verification bench for dyadic Morrey norms and bilinear fractional integrals"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;
  std::string report_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--output-dir", ov.output_dir, "override output directory");
    std::uint64_t seed_holder = 0;
    sub->add_option_function<std::uint64_t>(
        "--seed", [&ov](std::uint64_t v) { ov.seed = v; }, "override seed");
    (void)seed_holder;
    sub->add_option_function<int>(
        "--jmax", [&ov](int v) { ov.jmax = v; }, "override resolution level");
    sub->add_option("--checks", ov.checks, "comma-separated subset of checks");
  };

  CLI::App* verify = app.add_subcommand("verify", "run the configured checks");
  add_common(verify);
  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
  add_common(sweep);
  CLI::App* oracle = app.add_subcommand("oracle", "emit brute-force reference values");
  add_common(oracle);
  CLI::App* report = app.add_subcommand("report", "summarize prior runs");
  report->add_option("dir", report_dir, "directory holding summary.json files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return morrey::summarize_reports(report_dir, std::cout);
    const morrey::RunConfig cfg = load(config_path, ov);
    morrey::RunResult result;
    if (verify->parsed()) {
      result = morrey::run_suite(cfg);
      print_summaries(result);
    } else if (sweep->parsed()) {
      result = morrey::run_sweep(cfg);
      std::printf("sweep: %s\n", result.csv_path.string().c_str());
    } else {
      result = morrey::run_oracle(cfg);
      std::printf("oracle: %s\n", result.csv_path.string().c_str());
    }
    return result.exit_code;
  } catch (const morrey::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
