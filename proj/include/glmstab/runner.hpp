#ifndef GLMSTAB_RUNNER_HPP
#define GLMSTAB_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glmstab/report.hpp"

namespace glmstab {

// Values given here win over the corresponding config keys.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<unsigned> threads;  // 0 = auto
  std::optional<std::string> output_dir;
  // Relative dataset paths in the config resolve against this directory.
  std::filesystem::path base_dir;
  bool timestamp = true;
};

struct Predicate {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string file_name;
  std::string content;
};

struct RunResult {
  std::string command;
  Json report;
  std::string summary_csv;
  std::vector<Predicate> predicates;
  std::vector<Artifact> artifacts;  // extra output files, e.g. the dataset written by gen
  std::string output_dir;

  bool all_pass() const;
  std::string report_text() const;  // report.json contents
};

inline constexpr double kDefaultTol = 1e-10;
inline constexpr const char* kDefaultOutputDir = "glmstab_out";
inline constexpr const char* kSummaryHeader =
    "n,trials,mean_delta,se_delta,mean_gap,se_gap,mean_excess,se_excess,bound_precond,bound_uncond,pass";

const std::vector<std::string>& command_names();

// Throws Config on malformed JSON.
Json parse_config(std::string_view text);

// Validates the whole config first (Config errors, nothing computed), then
// runs. Computation failures surface as the module's own error codes.
RunResult run_command(const std::string& command, const Json& config, const RunOptions& options = {});

// "PASS name: detail" / "FAIL name: detail"
std::string format_predicate(const Predicate& predicate);

}  // namespace glmstab

#endif  // GLMSTAB_RUNNER_HPP
