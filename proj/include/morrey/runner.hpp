#pragma once
// Batch front-end: JSON config, suite execution, oracle runs, sweeps, and
// CSV/JSON report emission.  Everything here is deterministic for a fixed
// config; report files are written whole and renamed into place, so an
// interrupted run leaves a `.partial` file rather than a truncated report.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "morrey/verifier.hpp"

namespace morrey {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamSet {
  double alpha = 0.0, p1 = 0.0, q1 = 0.0, p2 = 0.0, q2 = 0.0;
};

struct RunConfig {
  GridSpec grid;
  std::uint64_t seed = 20240601;
  int corpus_items = 40;
  int corpus_families = 30;
  int corpus_pairs = 20;
  std::vector<std::string> checks;
  std::map<std::string, ParamSet> params;  // keys t12 / t13 / t14
  std::optional<MajorantTruncation> truncation;
  std::filesystem::path output_dir;
  std::map<std::string, std::vector<double>> sweep;  // keys alpha,p1,q1,p2,q2

  // Flags > config > defaults; unset output falls back to $MORREYBENCH_OUT.
  static RunConfig from_json_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text, const std::string& origin);

  ParamSet param_set(const std::string& key) const;
  void validate() const;  // throws ConfigError
};

const std::vector<std::string>& known_checks();
ParamSet default_param_set(const std::string& key);

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 invariant violation, 2 config error
  std::vector<ConstantSummary> summaries;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

RunResult run_suite(const RunConfig& cfg);
RunResult run_oracle(const RunConfig& cfg);
RunResult run_sweep(const RunConfig& cfg);
int summarize_reports(const std::filesystem::path& dir, std::ostream& out);

std::string reports_to_csv(const std::vector<ConstantSummary>& summaries);

}  // namespace morrey
