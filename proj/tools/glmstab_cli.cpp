// glmstab command-line front end. Links only the C API.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "glmstab/glmstab.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPredicateFailed = 3;

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  return static_cast<bool>(out);
}

bool parse_threads(const std::string& text, int& threads) {
  if (text == "auto") {
    threads = 0;
    return true;
  }
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size() || v < 1 || v > 4096) return false;
    threads = static_cast<int>(v);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability and excess-risk experiments for generalized linear models"};
  app.set_version_flag("--version", std::string(gs_version()));

  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  double tol = 1e-10;
  std::string threads_text;

  app.add_option("command", command, "gen | stability | invariance | mc | excess | sgd")
      ->required()
      ->check(CLI::IsMember({"gen", "stability", "invariance", "mc", "excess", "sgd"}));
  app.add_option("--config", config_path, "JSON config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides config)");
  auto* tol_opt = app.add_option("--tol", tol, "solver tolerance (default 1e-10)");
  app.add_option("--threads", threads_text, "worker threads: integer or auto");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  gs_run_options options;
  gs_run_options_init(&options);
  if (*seed_opt) {
    options.has_seed = 1;
    options.seed = seed;
  }
  if (*tol_opt) {
    if (!(tol > 0.0)) {
      std::cerr << "config error: --tol must be > 0\n";
      return kExitConfig;
    }
    options.has_tol = 1;
    options.tol = tol;
  }
  if (!threads_text.empty() && !parse_threads(threads_text, options.threads)) {
    std::cerr << "config error: --threads expects an integer in [1, 4096] or auto\n";
    return kExitConfig;
  }
  if (*out_opt) options.output_dir = out_dir.c_str();

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "config error: cannot read " << config_path << "\n";
    return kExitConfig;
  }
  std::stringstream text;
  text << in.rdbuf();
  const std::string base_dir = fs::absolute(config_path).parent_path().string();
  options.base_dir = base_dir.c_str();

  gs_report* report = nullptr;
  const gs_status status = gs_run_command(command.c_str(), text.str().c_str(), &options, &report);
  if (status != GS_OK) {
    // library messages already start with the error kind
    std::cerr << (status == GS_ERR_INTERNAL ? "internal error: " : "") << gs_last_error() << "\n";
    return status == GS_ERR_CONFIG ? kExitConfig : kExitError;
  }

  const fs::path dir = gs_report_output_dir(report);
  std::error_code ec;
  fs::create_directories(dir, ec);
  bool ok = !ec;
  ok = ok && write_file(dir / "report.json", gs_report_json(report));
  ok = ok && write_file(dir / "summary.csv", gs_report_summary_csv(report));
  for (std::size_t k = 0; ok && k < gs_report_artifact_count(report); ++k)
    ok = write_file(dir / gs_report_artifact_name(report, k), gs_report_artifact_content(report, k));
  if (!ok) {
    std::cerr << "error: cannot write outputs to " << dir.string() << "\n";
    gs_report_free(report);
    return kExitError;
  }

  for (std::size_t k = 0; k < gs_report_predicate_count(report); ++k)
    std::cout << gs_report_predicate_line(report, k) << "\n";
  std::cout << "wrote " << (dir / "report.json").string() << ", " << (dir / "summary.csv").string();
  for (std::size_t k = 0; k < gs_report_artifact_count(report); ++k)
    std::cout << ", " << (dir / gs_report_artifact_name(report, k)).string();
  std::cout << "\n";
  const bool pass = gs_report_all_pass(report) != 0;
  gs_report_free(report);
  return pass ? kExitOk : kExitPredicateFailed;
}
