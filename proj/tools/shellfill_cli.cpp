// shellfill run <config|benchmark> --out <dir> [--scale paper|desk] [--max-iters N] [--fd-check [K]]
// shellfill export <benchmark> [--scale paper|desk] [--output file]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 finite-difference check failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shellfill/config_io.hpp"
#include "shellfill/optimizer.hpp"
#include "shellfill/outputs.hpp"
#include "shellfill/problems.hpp"
#include "shellfill/sensitivity.hpp"

namespace {

using namespace shellfill;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFd = 4;

ProblemConfig load(const std::string& source, const std::string& scale) {
  if (std::filesystem::is_regular_file(source)) return parse_config(source);
  return benchmark_by_name(source, scale == "paper" ? Scale::Paper : Scale::Desk);
}

/// K indices spread over [0, n) with a fixed stride.
std::vector<std::size_t> strided(std::size_t n, std::size_t k) {
  k = std::min(k, n);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(i * n / k);
  return out;
}

int fd_gate(const ProblemConfig& cfg, std::size_t k) {
  Evaluator ev(cfg);
  const DesignVector x = ev.layout().initial();
  const auto subset = strided(x.size(), k);
  const FdReport rep = finite_difference_check(ev, x, 1e-5, subset);
  const char* names[3] = {"C", "V", "V_in"};
  for (const auto& e : rep.entries)
    for (int q = 0; q < 3; ++q)
      if (!e.pass[q])
        std::printf("fd: var %zu d%s analytic %.9g numeric %.9g error %.3g\n", e.var, names[q],
                    e.analytic[q], e.numeric[q], e.error[q]);
  std::printf("fd-check: %zu variables, %zu failures, MMC dV_in zero: %s\n", rep.entries.size(),
              rep.failures(), rep.mmc_infill_zero ? "yes" : "no");
  return rep.passed() ? 0 : kExitFd;
}

int run_command(const std::string& source, const std::string& out_dir, const std::string& scale,
                int max_iters, bool fd, std::size_t fd_count) {
  ProblemConfig cfg = load(source, scale);
  cfg.validate();
  if (fd) {
    if (const int rc = fd_gate(cfg, fd_count); rc != 0) return rc;
  }
  RunOptions opt;
  opt.max_iters = max_iters;
  opt.on_iteration = [](const IterationRecord& r) {
    std::printf("%4d  C %.6g  V %.4f  Vin %.4f  change %.4g%s\n", r.iter, r.compliance,
                r.volume_fraction, r.infill_volume_fraction, r.max_rel_change,
                r.restoration ? "  (restoration)" : "");
    std::fflush(stdout);
  };
  const RunResult res = run(cfg, opt);
  write_run_outputs(cfg, res, out_dir);
  write_config(cfg, std::filesystem::path(out_dir) / "config.ini");
  const auto& last = res.history.back();
  std::printf("%s after %d iterations: C %.9g  V/V_D %.6f  V_in/V_D %.6f\n",
              res.converged ? "converged" : "stopped", last.iter, last.compliance,
              last.volume_fraction, last.infill_volume_fraction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit shell-graded-infill topology optimizer"};
  app.require_subcommand(1);

  std::string source, out_dir, scale = "desk", export_path;
  int max_iters = -1;
  std::size_t fd_count = 16;

  auto* run_cmd = app.add_subcommand("run", "optimize a config file or named benchmark");
  run_cmd->add_option("config", source, "config file, or benchmark name (short_beam, mbb_beam, multi_load_...)")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  run_cmd->add_option("--scale", scale, "scale for benchmark names")
      ->check(CLI::IsMember({"paper", "desk"}));
  run_cmd->add_option("--max-iters", max_iters, "override mma.max_iters")
      ->check(CLI::NonNegativeNumber);
  auto* fd_opt = run_cmd->add_option("--fd-check", fd_count,
                                     "finite-difference check of K variables before optimizing")
                     ->expected(0, 1)
                     ->default_val(16);

  auto* exp_cmd = app.add_subcommand("export", "write a benchmark as a config file");
  exp_cmd->add_option("benchmark", source, "benchmark name")->required();
  exp_cmd->add_option("--scale", scale, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  exp_cmd->add_option("--output,-o", export_path, "file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*exp_cmd) {
      const ProblemConfig cfg = load(source, scale);
      if (export_path.empty()) std::cout << serialize_config(cfg);
      else write_config(cfg, export_path);
      return 0;
    }
    return run_command(source, out_dir, scale, max_iters, fd_opt->count() > 0, fd_count);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const OutputError& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return kExitConfig;
  } catch (const OptimizationError& e) {
    std::fprintf(stderr, "numerical failure at iteration %d: %s\n", e.iteration(), e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
