#include <cmath>
#include <limits>
#include <string>

#include "pursuitlab/analysis.hpp"
#include "pursuitlab/error.hpp"
#include "pursuitlab/harness.hpp"
#include "pursuitlab/linalg.hpp"
#include "pursuitlab/model.hpp"
#include "pursuitlab/pursuit.hpp"
#include "pursuitlab/pursuitlab.h"

using namespace pursuitlab;

struct pl_config {
  harness::ExperimentConfig config;
  std::string text;
  std::string output_dir;
};

struct pl_results {
  harness::ExperimentResult result;
};

namespace {

thread_local std::string last_error;

pl_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return PL_ERR_DIMENSION_MISMATCH;
    case ErrorCode::RankDeficient: return PL_ERR_RANK_DEFICIENT;
    case ErrorCode::NotPositiveDefinite: return PL_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::SingularMatrix: return PL_ERR_SINGULAR_MATRIX;
    case ErrorCode::NonFinite: return PL_ERR_NON_FINITE;
    case ErrorCode::InvalidDims: return PL_ERR_INVALID_DIMS;
    case ErrorCode::ZeroSignal: return PL_ERR_ZERO_SIGNAL;
    case ErrorCode::InvalidOmega: return PL_ERR_INVALID_OMEGA;
    case ErrorCode::ZeroSpread: return PL_ERR_ZERO_SPREAD;
    case ErrorCode::UndefinedSnr: return PL_ERR_UNDEFINED_SNR;
    case ErrorCode::TooLarge: return PL_ERR_TOO_LARGE;
    case ErrorCode::ParseError: return PL_ERR_PARSE;
    case ErrorCode::ValidationError: return PL_ERR_VALIDATION;
    case ErrorCode::IoError: return PL_ERR_IO;
    case ErrorCode::InvalidArgument: return PL_ERR_INVALID_ARGUMENT;
  }
  return PL_ERR_INTERNAL;
}

// Runs f and converts exceptions into status codes.
template <class F>
pl_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return PL_OK;
  } catch (const Error& e) {
    last_error = e.detail();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PL_ERR_INTERNAL;
  }
}

void require_ptr(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

linalg::Matrix matrix_from(const double* a, std::size_t rows, std::size_t cols) {
  require_ptr(a, "matrix");
  return linalg::Matrix(rows, cols, std::vector<double>(a, a + rows * cols));
}

pursuit::AlgorithmSpec spec_from(const pl_algorithm& c) {
  pursuit::AlgorithmSpec s;
  switch (c.variant) {
    case PL_OMP: s = pursuit::AlgorithmSpec::omp(); break;
    case PL_TOMP: s = pursuit::AlgorithmSpec::tomp(c.alpha); break;
    case PL_LOMP:
      s = pursuit::AlgorithmSpec::lomp(c.lambda, static_cast<pursuit::OmegaRule>(c.omega_rule), c.omega);
      if (c.omega_rule < PL_OMEGA_SUPPORT_FROBENIUS || c.omega_rule > PL_OMEGA_FIXED)
        throw Error(ErrorCode::InvalidArgument, "unknown omega rule");
      break;
    case PL_SGP:
      s = pursuit::AlgorithmSpec::sgp(c.k_max, c.mu > 0.0 ? std::optional<double>(c.mu) : std::nullopt);
      break;
    case PL_COSAMP: s = pursuit::AlgorithmSpec::cosamp(c.k); break;
    default: throw Error(ErrorCode::InvalidArgument, "unknown variant");
  }
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* pl_version(void) { return harness::kVersion; }

const char* pl_status_string(pl_status status) {
  switch (status) {
    case PL_OK: return "OK";
    case PL_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case PL_ERR_RANK_DEFICIENT: return "RankDeficient";
    case PL_ERR_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case PL_ERR_SINGULAR_MATRIX: return "SingularMatrix";
    case PL_ERR_NON_FINITE: return "NonFinite";
    case PL_ERR_INVALID_DIMS: return "InvalidDims";
    case PL_ERR_ZERO_SIGNAL: return "ZeroSignal";
    case PL_ERR_INVALID_OMEGA: return "InvalidOmega";
    case PL_ERR_ZERO_SPREAD: return "ZeroSpread";
    case PL_ERR_UNDEFINED_SNR: return "UndefinedSnr";
    case PL_ERR_TOO_LARGE: return "TooLarge";
    case PL_ERR_PARSE: return "ParseError";
    case PL_ERR_VALIDATION: return "ValidationError";
    case PL_ERR_IO: return "IoError";
    case PL_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PL_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* pl_last_error(void) { return last_error.c_str(); }

pl_status pl_least_squares(const double* a, size_t rows, size_t cols, const double* y, double* x_out) {
  return guarded([&] {
    require_ptr(y, "y");
    require_ptr(x_out, "x_out");
    const auto x = linalg::least_squares(matrix_from(a, rows, cols), std::span<const double>(y, rows));
    std::copy(x.begin(), x.end(), x_out);
  });
}

pl_status pl_solve_tikhonov(const double* a, size_t rows, size_t cols, const double* y, double alpha,
                            double* x_out) {
  return guarded([&] {
    require_ptr(y, "y");
    require_ptr(x_out, "x_out");
    const auto x = linalg::solve_tikhonov(matrix_from(a, rows, cols), std::span<const double>(y, rows), alpha);
    std::copy(x.begin(), x.end(), x_out);
  });
}

pl_status pl_gram_eig_extremes(const double* a, size_t rows, size_t cols, double* lambda_min, double* lambda_max) {
  return guarded([&] {
    require_ptr(lambda_min, "lambda_min");
    require_ptr(lambda_max, "lambda_max");
    const auto e = linalg::gram_eig_extremes(matrix_from(a, rows, cols));
    *lambda_min = e.lambda_min;
    *lambda_max = e.lambda_max;
  });
}

pl_status pl_condition_number(const double* a, size_t rows, size_t cols, double* kappa) {
  return guarded([&] {
    require_ptr(kappa, "kappa");
    *kappa = linalg::condition_number(matrix_from(a, rows, cols));
  });
}

pl_status pl_gen_sensing_matrix(uint64_t seed, size_t m, size_t n, double* out) {
  return guarded([&] {
    require_ptr(out, "out");
    Rng rng(seed);
    const auto a = model::gen_sensing_matrix(rng, m, n);
    std::copy(a.matrix().data().begin(), a.matrix().data().end(), out);
  });
}

pl_algorithm pl_algorithm_default(pl_variant variant) {
  pl_algorithm c{};
  c.variant = variant;
  c.alpha = 1.0;
  c.lambda = 1;
  c.omega_rule = PL_OMEGA_SUPPORT_FROBENIUS;
  c.omega = 0.0;
  c.k_max = 8;
  c.mu = 0.0;
  c.k = 8;
  return c;
}

pl_status pl_recover(const pl_algorithm* algorithm, const double* a, size_t rows, size_t cols, const double* y,
                     double residual_threshold, size_t max_iterations, double* x_hat_out, pl_recovery* info_out) {
  return guarded([&] {
    require_ptr(algorithm, "algorithm");
    require_ptr(y, "y");
    require_ptr(x_hat_out, "x_hat_out");
    const auto spec = spec_from(*algorithm);
    const auto result = pursuit::recover(matrix_from(a, rows, cols), std::span<const double>(y, rows),
                                         {residual_threshold, max_iterations}, spec);
    std::copy(result.x_hat.begin(), result.x_hat.end(), x_hat_out);
    if (info_out) {
      info_out->iterations = result.iterations;
      info_out->support_size = result.support.size();
      info_out->termination = static_cast<pl_termination>(result.termination);
      info_out->residual_final = result.residual_history.back();
    }
  });
}

pl_status pl_nrmse(const double* x, const double* x_hat, size_t n, double* out) {
  return guarded([&] {
    require_ptr(x, "x");
    require_ptr(x_hat, "x_hat");
    require_ptr(out, "out");
    *out = analysis::nrmse(std::span<const double>(x, n), std::span<const double>(x_hat, n));
  });
}

pl_status pl_ric_exact(const double* a, size_t rows, size_t cols, size_t k, double* delta_out) {
  return guarded([&] {
    require_ptr(delta_out, "delta_out");
    *delta_out = analysis::ric_exact(matrix_from(a, rows, cols), k);
  });
}

pl_status pl_ric_seeded(uint64_t seed, size_t rows, size_t cols, size_t k, double* delta_out) {
  return guarded([&] {
    require_ptr(delta_out, "delta_out");
    Rng rng(seed);
    *delta_out = analysis::ric_exact(model::gen_sensing_matrix(rng, rows, cols).matrix(), k);
  });
}

pl_status pl_verify_tikhonov(uint64_t seed, size_t instances, pl_bound_report* out) {
  return guarded([&] {
    require_ptr(out, "out");
    const auto r = analysis::tikhonov_ensemble(seed, instances);
    *out = {r.instances, r.holding, r.worst_ratio};
  });
}

pl_status pl_verify_landweber(uint64_t seed, size_t instances, size_t ell_max, pl_bound_report* out) {
  return guarded([&] {
    require_ptr(out, "out");
    const auto r = analysis::landweber_ensemble(seed, instances, ell_max);
    *out = {r.instances, r.holding, r.worst_ratio};
  });
}

pl_status pl_config_default(pl_config** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new pl_config{};
  });
}

pl_status pl_config_load(const char* path, pl_config** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new pl_config{harness::parse_config_file(path), {}, {}};
  });
}

pl_status pl_config_set(pl_config* config, const char* key, const char* value) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(key, "key");
    require_ptr(value, "value");
    config->config.set(key, value);
  });
}

pl_status pl_config_validate(const pl_config* config) {
  return guarded([&] {
    require_ptr(config, "config");
    config->config.validate();
  });
}

pl_status pl_config_text(pl_config* config, const char** text_out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(text_out, "text_out");
    config->text = config->config.to_text();
    *text_out = config->text.c_str();
  });
}

pl_status pl_config_output_dir(const pl_config* config, const char** dir_out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(dir_out, "dir_out");
    auto* mut = const_cast<pl_config*>(config);
    mut->output_dir = config->config.output_dir.string();
    *dir_out = mut->output_dir.c_str();
  });
}

pl_status pl_config_format(const pl_config* config, pl_format* format_out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(format_out, "format_out");
    *format_out = static_cast<pl_format>(config->config.format);
  });
}

void pl_config_free(pl_config* config) { delete config; }

pl_status pl_run_experiment(const pl_config* config, size_t threads, const char* partial_csv,
                            pl_progress_fn progress, void* user, pl_results** out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(out, "out");
    harness::RunOptions options;
    if (threads > 0) options.threads = threads;
    if (partial_csv) options.partial_csv = std::filesystem::path(partial_csv);
    if (progress) options.progress = [progress, user](std::size_t d, std::size_t t) { progress(d, t, user); };
    auto result = harness::run_experiment(config->config, options);
    *out = new pl_results{std::move(result)};
  });
}

size_t pl_results_count(const pl_results* results) { return results ? results->result.summaries.size() : 0; }

pl_status pl_results_get(const pl_results* results, size_t index, pl_cell_summary* out) {
  return guarded([&] {
    require_ptr(results, "results");
    require_ptr(out, "out");
    if (index >= results->result.summaries.size()) throw Error(ErrorCode::InvalidArgument, "index out of range");
    const auto& s = results->result.summaries[index];
    *out = {s.algorithm.c_str(),
            s.params.c_str(),
            s.m,
            s.snr_db ? *s.snr_db : std::numeric_limits<double>::infinity(),
            s.trials,
            s.nrmse_mean,
            s.nrmse_std,
            s.support_size_mean,
            s.support_recovered_rate,
            s.exact_support_rate,
            s.iterations_mean,
            s.stalled_count};
  });
}

pl_status pl_results_write_csv(const pl_results* results, const char* path) {
  return guarded([&] {
    require_ptr(results, "results");
    require_ptr(path, "path");
    harness::write_csv(results->result.summaries, path);
  });
}

pl_status pl_results_write_trials_csv(const pl_results* results, const char* path) {
  return guarded([&] {
    require_ptr(results, "results");
    require_ptr(path, "path");
    harness::write_trials_csv(results->result.trials, path);
  });
}

pl_status pl_results_write_svg(const pl_results* results, const char* path_prefix) {
  return guarded([&] {
    require_ptr(results, "results");
    require_ptr(path_prefix, "path_prefix");
    harness::write_svg_plots(results->result.summaries, path_prefix);
  });
}

pl_status pl_results_write_outputs(const pl_results* results, const pl_config* config, const char* dir,
                                   pl_format format) {
  return guarded([&] {
    require_ptr(results, "results");
    require_ptr(config, "config");
    require_ptr(dir, "dir");
    const std::filesystem::path out_dir(dir);
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    if (format == PL_FORMAT_CSV || format == PL_FORMAT_BOTH) {
      harness::write_csv(results->result.summaries, out_dir / "summary.csv");
      written.push_back(out_dir / "summary.csv");
      if (!results->result.trials.empty()) {
        harness::write_trials_csv(results->result.trials, out_dir / "trials.csv");
        written.push_back(out_dir / "trials.csv");
      }
    }
    if (format == PL_FORMAT_SVG || format == PL_FORMAT_BOTH) {
      for (auto& p : harness::write_svg_plots(results->result.summaries, (out_dir / "").string()))
        written.push_back(std::move(p));
    }
    harness::write_manifest(config->config, out_dir / "manifest.txt", written);
  });
}

void pl_results_free(pl_results* results) { delete results; }

}  // extern "C"
