#pragma once

// Monte-Carlo experiment driver: sweeps (m, SNR, algorithm) cells, runs
// seeded trials on a worker pool and aggregates per-cell statistics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pursuitlab/analysis.hpp"
#include "pursuitlab/pursuit.hpp"

namespace pursuitlab::harness {

inline constexpr const char* kVersion = "0.1.0";
/// Fixed threshold proposed for SGP in the literature, squared.
inline constexpr double kSgpFixedTauSquared = 0.0164;

struct AlgorithmEntry {
  pursuit::AlgorithmSpec spec;
  /// Empty: stop at the true noise energy ||v||_2. Otherwise a fixed threshold.
  std::optional<double> fixed_tau;
  /// Set when the algorithm token left k (CoSaMP) or kmax (SGP) to the config's k.
  bool inherit_k = false;

  std::string name() const { return pursuit::to_string(spec.variant); }
  std::string params() const;
};

/// Parses one algorithm token such as `tomp:alpha=1` or `sgp:tau=sqrt(0.0164)`.
AlgorithmEntry parse_algorithm(std::string_view token);
std::string format_algorithm(const AlgorithmEntry& entry);

enum class OutputFormat { Csv, Svg, Both };

struct ExperimentConfig {
  std::size_t n = 256;
  std::vector<std::size_t> m_list{16, 32, 64};
  std::size_t k = 8;
  std::vector<double> snr_list_db{5, 10, 15, 20, 25, 30, 35, 40};
  bool noise_free = false;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 1;
  std::vector<AlgorithmEntry> algorithms = default_algorithms();
  std::filesystem::path output_dir = "results";
  std::size_t threads = 0;  // 0 = hardware concurrency
  bool retain_trials = false;
  OutputFormat format = OutputFormat::Both;

  static std::vector<AlgorithmEntry> default_algorithms();

  /// SNR grid as run: finite values in listed order, then noise-free if enabled.
  std::vector<std::optional<double>> snr_grid() const;

  /// Applies one `key = value` assignment; unknown keys and bad values throw ParseError.
  void set(std::string_view key, std::string_view value);
  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
  /// Canonical `key = value` text; parsing it back yields the same config.
  std::string to_text() const;
};

/// Reads a `key = value` config file ('#' comments, comma-separated lists).
/// Errors carry the offending line number. The result is not yet validated.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical config text.
std::uint64_t config_hash(const ExperimentConfig& config);

struct Cell {
  std::size_t m_index = 0;
  std::size_t snr_index = 0;
  std::size_t algorithm_index = 0;
};

/// Everything one trial of a (m, SNR) problem cell needs, shared by all algorithms.
struct ProblemInstance {
  model::SensingMatrix a;
  model::SparseSignal x;
  model::Measurement meas;
};

/// Index of the (m, SNR) pair that seeds the instance generator.
std::uint64_t problem_cell_index(const ExperimentConfig& config, std::size_t m_index, std::size_t snr_index);

ProblemInstance make_instance(const ExperimentConfig& config, std::size_t m_index, std::size_t snr_index,
                              std::uint64_t trial_index);

pursuit::StoppingRule stopping_rule(const AlgorithmEntry& entry, const ProblemInstance& inst);

analysis::TrialMetrics run_on_instance(const AlgorithmEntry& entry, const ProblemInstance& inst);

/// Deterministic in (master_seed, cell, trial_index).
analysis::TrialMetrics run_trial(const ExperimentConfig& config, const Cell& cell, std::uint64_t trial_index);

struct CellSummary {
  std::string algorithm;
  std::string params;
  std::size_t m = 0;
  std::optional<double> snr_db;  // empty = noise-free
  std::size_t trials = 0;
  double nrmse_mean = 0.0;
  double nrmse_std = 0.0;
  double support_size_mean = 0.0;
  double support_recovered_rate = 0.0;
  double exact_support_rate = 0.0;
  double iterations_mean = 0.0;
  std::size_t stalled_count = 0;
  double nonzero_count_mean = 0.0;
};

struct TrialRecord {
  std::string algorithm;
  std::string params;
  std::size_t m = 0;
  std::optional<double> snr_db;
  std::uint64_t trial = 0;
  analysis::TrialMetrics metrics;
};

/// Aggregates trial metrics in order. Standard deviation uses n - 1 (0 for one trial).
CellSummary summarize(const AlgorithmEntry& entry, std::size_t m, std::optional<double> snr_db,
                      std::span<const analysis::TrialMetrics> trials);

struct RunOptions {
  /// Overrides config.threads when set.
  std::optional<std::size_t> threads;
  /// When set, the summary CSV is rewritten here after every completed (m, SNR) cell.
  std::optional<std::filesystem::path> partial_csv;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct ExperimentResult {
  std::vector<CellSummary> summaries;  // m-major, then SNR, then algorithm
  std::vector<TrialRecord> trials;     // only with retain_trials
};

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Floats in outputs: 9 significant digits, locale-independent.
std::string format_number(double v);

void write_csv(std::span<const CellSummary> summaries, const std::filesystem::path& path);
void write_trials_csv(std::span<const TrialRecord> records, const std::filesystem::path& path);

/// One SVG per (m, metric) with metric in {nrmse, support_size}, named
/// `<prefix>m<m>_<metric>.svg`. Returns the written paths in order.
std::vector<std::filesystem::path> write_svg_plots(std::span<const CellSummary> summaries,
                                                   const std::string& path_prefix);

/// Renders one chart; exposed for tests.
std::string render_svg(std::span<const CellSummary> summaries, std::size_t m, bool nrmse_metric);

void write_manifest(const ExperimentConfig& config, const std::filesystem::path& path,
                    std::span<const std::filesystem::path> outputs);

}  // namespace pursuitlab::harness
