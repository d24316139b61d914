#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pursuitlab/pursuitlab.h"

namespace {

int report(pl_status status) {
  std::cerr << "pursuitlab: " << pl_status_string(status) << ": " << pl_last_error() << "\n";
  return status == PL_ERR_VALIDATION || status == PL_ERR_PARSE ? 2 : 1;
}

void print_progress(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\rcells %zu/%zu", done, total);
  if (done == total) std::fputc('\n', stderr);
  std::fflush(stderr);
}

struct RunArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> seed;
  std::optional<std::string> trials;
  std::optional<std::string> algorithms;
  std::optional<std::string> format;
  std::optional<std::string> m_list;
  std::optional<std::string> snr;
  std::optional<size_t> threads;
  bool retain = false;
  bool quiet = false;
};

int run(const RunArgs& args) {
  pl_config* config = nullptr;
  pl_status st = args.config.empty() ? pl_config_default(&config) : pl_config_load(args.config.c_str(), &config);
  if (st != PL_OK) return report(st);

  const std::pair<const char*, const std::optional<std::string>*> overrides[] = {
      {"output_dir", &args.out}, {"master_seed", &args.seed}, {"trials", &args.trials},
      {"algorithms", &args.algorithms}, {"format", &args.format}, {"m_list", &args.m_list},
      {"snr_list_db", &args.snr}};
  for (const auto& [key, value] : overrides) {
    if (!*value) continue;
    if ((st = pl_config_set(config, key, (*value)->c_str())) != PL_OK) {
      pl_config_free(config);
      return report(st);
    }
  }
  if (args.retain && (st = pl_config_set(config, "retain_trials", "true")) != PL_OK) {
    pl_config_free(config);
    return report(st);
  }
  if ((st = pl_config_validate(config)) != PL_OK) {
    pl_config_free(config);
    return report(st);
  }

  const char* dir = nullptr;
  pl_format format = PL_FORMAT_BOTH;
  pl_config_output_dir(config, &dir);
  pl_config_format(config, &format);
  const std::filesystem::path out_dir(dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "pursuitlab: cannot create " << out_dir << ": " << ec.message() << "\n";
    pl_config_free(config);
    return 1;
  }

  // Completed cells are flushed here as they finish so an interrupted run keeps its work.
  const std::string partial = (out_dir / "summary.partial.csv").string();
  pl_results* results = nullptr;
  st = pl_run_experiment(config, args.threads.value_or(0), partial.c_str(), args.quiet ? nullptr : print_progress,
                         nullptr, &results);
  if (st != PL_OK) {
    pl_config_free(config);
    return report(st);
  }
  st = pl_results_write_outputs(results, config, out_dir.string().c_str(), format);
  pl_results_free(results);
  pl_config_free(config);
  if (st != PL_OK) return report(st);
  std::filesystem::remove(partial, ec);
  if (!args.quiet) std::cerr << "wrote " << out_dir.string() << "\n";
  return 0;
}

int ric(size_t rows, size_t cols, size_t k, uint64_t seed) {
  double delta = 0.0;
  const pl_status st = pl_ric_seeded(seed, rows, cols, k, &delta);
  if (st != PL_OK) return report(st);
  std::printf("delta_%zu = %.9g\n", k, delta);
  return 0;
}

int verify_bounds(const std::string& which, uint64_t seed, size_t instances, size_t ell_max) {
  pl_bound_report r{};
  const pl_status st = which == "tikhonov" ? pl_verify_tikhonov(seed, instances, &r)
                                           : pl_verify_landweber(seed, instances, ell_max, &r);
  if (st != PL_OK) return report(st);
  std::printf("%s: %zu/%zu instances hold, worst lhs/rhs = %.9g\n", which.c_str(), r.holding, r.instances,
              r.worst_ratio);
  return r.holding == r.instances ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery benchmarks"};
  app.set_version_flag("--version", std::string(pl_version()));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the Monte-Carlo experiment grid");
  run_cmd->add_option("--config", run_args.config, "key = value config file (defaults when omitted)");
  run_cmd->add_option("--out", run_args.out, "output directory");
  run_cmd->add_option("--seed", run_args.seed, "master seed");
  run_cmd->add_option("--trials", run_args.trials, "trials per cell");
  run_cmd->add_option("--algorithms", run_args.algorithms, "comma-separated algorithm list, e.g. omp,tomp:alpha=1");
  run_cmd->add_option("--format", run_args.format, "csv, svg or both")->check(CLI::IsMember({"csv", "svg", "both"}));
  run_cmd->add_option("--m-list", run_args.m_list, "comma-separated measurement counts");
  run_cmd->add_option("--snr", run_args.snr, "comma-separated SNR grid in dB");
  run_cmd->add_option("--threads", run_args.threads, "worker threads (0 = all cores)");
  run_cmd->add_flag("--trials-csv", run_args.retain, "also write per-trial records to trials.csv");
  run_cmd->add_flag("-q,--quiet", run_args.quiet, "no progress output");

  size_t rows = 0, cols = 0, k = 0;
  uint64_t ric_seed = 1;
  auto* ric_cmd = app.add_subcommand("ric", "Exact restricted isometry constant of a seeded Gaussian matrix");
  ric_cmd->add_option("--rows", rows, "m")->required();
  ric_cmd->add_option("--cols", cols, "N")->required();
  ric_cmd->add_option("--k", k, "sparsity")->required();
  ric_cmd->add_option("--seed", ric_seed, "seed");

  std::string which;
  uint64_t bound_seed = 1;
  size_t instances = 100, ell_max = 100;
  auto* bounds_cmd = app.add_subcommand("verify-bounds", "Check the perturbation bounds on a seeded ensemble");
  bounds_cmd->add_option("--which", which, "tikhonov or landweber")
      ->required()
      ->check(CLI::IsMember({"tikhonov", "landweber"}));
  bounds_cmd->add_option("--seed", bound_seed, "seed");
  bounds_cmd->add_option("--instances", instances, "ensemble size");
  bounds_cmd->add_option("--ell-max", ell_max, "largest Landweber step checked");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return run(run_args);
  if (*ric_cmd) return ric(rows, cols, k, ric_seed);
  return verify_bounds(which, bound_seed, instances, ell_max);
}
