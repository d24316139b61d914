#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "pursuitlab/error.hpp"
#include "pursuitlab/harness.hpp"

namespace pursuitlab::harness {

namespace {

AlgorithmEntry resolve(const ExperimentConfig& config, AlgorithmEntry entry) {
  if (entry.inherit_k) {
    if (entry.spec.variant == pursuit::Variant::Sgp) entry.spec.k_max = config.k;
    if (entry.spec.variant == pursuit::Variant::Cosamp) entry.spec.k = config.k;
  }
  return entry;
}

std::size_t worker_count(const ExperimentConfig& config, const RunOptions& options) {
  std::size_t n = options.threads.value_or(config.threads);
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// Runs body(i) for i in [0, count) on `workers` threads. The first exception
// stops the remaining work and is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load(std::memory_order_relaxed)) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::uint64_t problem_cell_index(const ExperimentConfig& config, std::size_t m_index, std::size_t snr_index) {
  return static_cast<std::uint64_t>(m_index) * config.snr_grid().size() + snr_index;
}

ProblemInstance make_instance(const ExperimentConfig& config, std::size_t m_index, std::size_t snr_index,
                              std::uint64_t trial_index) {
  const auto grid = config.snr_grid();
  if (m_index >= config.m_list.size() || snr_index >= grid.size())
    throw Error(ErrorCode::InvalidArgument, "cell index out of range");
  Rng rng = Rng::child(config.master_seed, trial_index, problem_cell_index(config, m_index, snr_index));
  auto a = model::gen_sensing_matrix(rng, config.m_list[m_index], config.n);
  auto x = model::gen_sparse_signal(rng, config.n, config.k);
  auto meas = model::gen_measurement(rng, a, x, grid[snr_index]);
  return {std::move(a), std::move(x), std::move(meas)};
}

pursuit::StoppingRule stopping_rule(const AlgorithmEntry& entry, const ProblemInstance& inst) {
  return {entry.fixed_tau.value_or(inst.meas.epsilon), inst.a.m()};
}

analysis::TrialMetrics run_on_instance(const AlgorithmEntry& entry, const ProblemInstance& inst) {
  const auto result = pursuit::recover(inst.a.matrix(), inst.meas.y, stopping_rule(entry, inst), entry.spec);
  return analysis::trial_metrics(inst.x, result);
}

analysis::TrialMetrics run_trial(const ExperimentConfig& config, const Cell& cell, std::uint64_t trial_index) {
  if (cell.algorithm_index >= config.algorithms.size())
    throw Error(ErrorCode::InvalidArgument, "algorithm index out of range");
  const auto inst = make_instance(config, cell.m_index, cell.snr_index, trial_index);
  return run_on_instance(resolve(config, config.algorithms[cell.algorithm_index]), inst);
}

CellSummary summarize(const AlgorithmEntry& entry, std::size_t m, std::optional<double> snr_db,
                      std::span<const analysis::TrialMetrics> trials) {
  CellSummary s;
  s.algorithm = entry.name();
  s.params = entry.params();
  s.m = m;
  s.snr_db = snr_db;
  s.trials = trials.size();
  if (trials.empty()) return s;
  const double n = static_cast<double>(trials.size());
  double support = 0.0, recovered = 0.0, exact = 0.0, iters = 0.0, sum = 0.0, nonzero = 0.0;
  for (const auto& t : trials) {
    sum += t.nrmse;
    support += static_cast<double>(t.support_size);
    recovered += t.support_recovered ? 1.0 : 0.0;
    exact += t.exact_support ? 1.0 : 0.0;
    iters += static_cast<double>(t.iterations);
    nonzero += static_cast<double>(t.nonzero_count);
    if (t.termination == pursuit::Termination::Stalled) ++s.stalled_count;
  }
  s.nrmse_mean = sum / n;
  if (trials.size() > 1) {
    double ss = 0.0;
    for (const auto& t : trials) ss += (t.nrmse - s.nrmse_mean) * (t.nrmse - s.nrmse_mean);
    s.nrmse_std = std::sqrt(ss / (n - 1.0));
  }
  s.support_size_mean = support / n;
  s.support_recovered_rate = recovered / n;
  s.exact_support_rate = exact / n;
  s.iterations_mean = iters / n;
  s.nonzero_count_mean = nonzero / n;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  std::vector<AlgorithmEntry> algorithms;
  for (const auto& entry : config.algorithms) algorithms.push_back(resolve(config, entry));

  const auto grid = config.snr_grid();
  const std::size_t n_alg = algorithms.size();
  const std::size_t workers = worker_count(config, options);
  const std::size_t total = config.m_list.size() * grid.size();

  ExperimentResult out;
  std::vector<analysis::TrialMetrics> metrics(n_alg * config.trials);
  std::size_t done = 0;
  for (std::size_t mi = 0; mi < config.m_list.size(); ++mi) {
    for (std::size_t si = 0; si < grid.size(); ++si) {
      parallel_for(config.trials, workers, [&](std::size_t trial) {
        const auto inst = make_instance(config, mi, si, trial);
        for (std::size_t a = 0; a < n_alg; ++a) {
          metrics[a * config.trials + trial] = run_on_instance(algorithms[a], inst);
        }
      });
      for (std::size_t a = 0; a < n_alg; ++a) {
        const std::span<const analysis::TrialMetrics> cell(metrics.data() + a * config.trials, config.trials);
        out.summaries.push_back(summarize(algorithms[a], config.m_list[mi], grid[si], cell));
        if (config.retain_trials) {
          for (std::size_t t = 0; t < config.trials; ++t) {
            out.trials.push_back({algorithms[a].name(), algorithms[a].params(), config.m_list[mi], grid[si],
                                  t, cell[t]});
          }
        }
      }
      ++done;
      if (options.partial_csv) write_csv(out.summaries, *options.partial_csv);
      if (options.progress) options.progress(done, total);
    }
  }
  return out;
}

}  // namespace pursuitlab::harness
