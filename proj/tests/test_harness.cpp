#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pursuitlab/error.hpp"
#include "pursuitlab/harness.hpp"

using namespace pursuitlab;
using namespace pursuitlab::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pursuitlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no pursuitlab::Error thrown";
  return ErrorCode::InvalidArgument;
}

ExperimentConfig smoke_config() {
  ExperimentConfig c;
  c.m_list = {16, 32};
  c.snr_list_db = {10, 30};
  c.noise_free = true;
  c.trials = 5;
  c.master_seed = 7;
  c.threads = 1;
  return c;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto c = parse_config_text("");
  EXPECT_EQ(c.n, 256u);
  EXPECT_EQ(c.m_list, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_EQ(c.k, 8u);
  EXPECT_EQ(c.snr_list_db, (std::vector<double>{5, 10, 15, 20, 25, 30, 35, 40}));
  EXPECT_FALSE(c.noise_free);
  EXPECT_EQ(c.trials, 1000u);
  EXPECT_EQ(c.algorithms.size(), 10u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesFileSyntax) {
  const auto c = parse_config_text(
      "# comment\n"
      "m_list = 16\n"
      "  snr_list_db = 5, 20   # trailing\n"
      "noise_free = true\n"
      "algorithms = omp, tomp:alpha=0.5, sgp:tau=sqrt(0.0164), lomp:lambda=3:omega=tight\n"
      "seed = 99\n");
  EXPECT_EQ(c.m_list, (std::vector<std::size_t>{16}));
  EXPECT_EQ(c.snr_grid().size(), 3u);
  EXPECT_FALSE(c.snr_grid().back().has_value());
  EXPECT_EQ(c.master_seed, 99u);
  ASSERT_EQ(c.algorithms.size(), 4u);
  EXPECT_DOUBLE_EQ(c.algorithms[1].spec.alpha, 0.5);
  EXPECT_NEAR(*c.algorithms[2].fixed_tau, 0.128062485, 1e-9);
  EXPECT_EQ(c.algorithms[3].spec.omega_rule, pursuit::OmegaRule::Tight);
}

TEST(Config, FlagOverridesMerge) {
  auto c = parse_config_text("m_list = 16\n");
  c.set("trials", "10");
  EXPECT_EQ(c.m_list, (std::vector<std::size_t>{16}));
  EXPECT_EQ(c.trials, 10u);
  EXPECT_EQ(c.k, 8u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config_text("k = 8\nbogus = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse_config_text("k = eight\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_config_text("no equals sign\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_config_text("algorithms = bp\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_config_text("algorithms = tomp:alpha=-1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_config_file("/nonexistent/pursuitlab.cfg"); }), ErrorCode::IoError);
}

TEST(Config, Validation) {
  auto c = parse_config_text("k = 300\n");
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::ValidationError);
  c = parse_config_text("trials = 0\n");
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::ValidationError);
  c = parse_config_text("m_list = 4\n");
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::ValidationError);
  c = parse_config_text("m_list = 300\n");
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::ValidationError);
  c = parse_config_text("m_list = 8\nalgorithms = cosamp\n");
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::ValidationError);
}

TEST(Config, TextRoundTripAndHash) {
  auto c = smoke_config();
  c.algorithms = {parse_algorithm("tomp:alpha=0.1"), parse_algorithm("lomp:lambda=7:omega=0.25"),
                  parse_algorithm("sgp:kmax=4:mu=0.5:tau=0.3"), parse_algorithm("cosamp:k=3")};
  const auto back = parse_config_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(config_hash(back), config_hash(c));
  auto other = c;
  other.output_dir = "elsewhere";
  other.threads = 3;
  EXPECT_EQ(config_hash(other), config_hash(c));
  other.master_seed = 8;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Algorithms, FixedTauThreshold) {
  const auto e = parse_algorithm("sgp:tau=sqrt(0.0164)");
  EXPECT_NEAR(*e.fixed_tau, 0.12806248474865697, 1e-15);
  EXPECT_EQ(format_algorithm(e), "sgp:tau=sqrt(0.0164)");
  EXPECT_EQ(e.params(), "kmax=8;mu=auto;tau=0.128062485");
}

TEST(Trial, DeterministicAndSharedInstances) {
  const auto c = smoke_config();
  const Cell cell{1, 0, 2};
  EXPECT_EQ(run_trial(c, cell, 3), run_trial(c, cell, 3));
  const auto a = make_instance(c, 1, 0, 3), b = make_instance(c, 1, 0, 3);
  EXPECT_EQ(a.a.matrix(), b.a.matrix());
  EXPECT_EQ(a.meas.y, b.meas.y);
  const auto other = make_instance(c, 1, 0, 4);
  EXPECT_NE(other.meas.y, a.meas.y);
}

TEST(Trial, StoppingRuleUsesNoiseEnergyOrFixedTau) {
  const auto c = smoke_config();
  const auto inst = make_instance(c, 0, 0, 0);
  const auto eps = stopping_rule(parse_algorithm("omp"), inst);
  EXPECT_EQ(eps.residual_threshold, inst.meas.epsilon);
  EXPECT_EQ(eps.max_iterations, 16u);
  const auto tau = stopping_rule(parse_algorithm("sgp:tau=sqrt(0.0164)"), inst);
  EXPECT_NEAR(tau.residual_threshold, std::sqrt(0.0164), 1e-15);
}

TEST(Summaries, StatisticsAndRates) {
  std::vector<analysis::TrialMetrics> t(3);
  t[0].nrmse = 1;
  t[1].nrmse = 2;
  t[2].nrmse = 4;
  t[0].support_recovered = t[0].exact_support = true;
  t[1].support_recovered = true;
  t[2].termination = pursuit::Termination::Stalled;
  for (auto& m : t) m.support_size = m.iterations = 6;
  const auto s = summarize(parse_algorithm("omp"), 16, 5.0, t);
  EXPECT_DOUBLE_EQ(s.nrmse_mean, 7.0 / 3.0);
  EXPECT_NEAR(s.nrmse_std, std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                      (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0),
              1e-15);
  EXPECT_DOUBLE_EQ(s.support_recovered_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.exact_support_rate, 1.0 / 3.0);
  EXPECT_EQ(s.stalled_count, 1u);
  EXPECT_EQ(summarize(parse_algorithm("omp"), 16, 5.0, std::span(t).first(1)).nrmse_std, 0.0);
}

TEST(Experiment, CellCompletenessAndAggregation) {
  auto c = smoke_config();
  c.retain_trials = true;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.summaries.size(), 2u * 3u * c.algorithms.size());
  ASSERT_EQ(r.trials.size(), r.summaries.size() * c.trials);
  for (std::size_t i = 0; i < r.summaries.size(); ++i) {
    const auto& s = r.summaries[i];
    EXPECT_EQ(s.trials, c.trials);
    EXPECT_GE(s.nrmse_std, 0.0);
    for (double rate : {s.support_recovered_rate, s.exact_support_rate}) {
      EXPECT_GE(rate, 0.0);
      EXPECT_LE(rate, 1.0);
    }
    double sum = 0, support = 0;
    for (std::size_t t = 0; t < c.trials; ++t) {
      const auto& rec = r.trials[i * c.trials + t];
      EXPECT_EQ(rec.algorithm, s.algorithm);
      EXPECT_EQ(rec.params, s.params);
      EXPECT_EQ(rec.m, s.m);
      sum += rec.metrics.nrmse;
      support += static_cast<double>(rec.metrics.support_size);
    }
    EXPECT_NEAR(sum / c.trials, s.nrmse_mean, 1e-12);
    EXPECT_NEAR(support / c.trials, s.support_size_mean, 1e-12);
  }
}

TEST(Experiment, ScheduleIndependent) {
  const auto c = smoke_config();
  const auto serial = run_experiment(c, {.threads = 1});
  const auto parallel = run_experiment(c, {.threads = 4});
  const auto dir = scratch("schedule");
  write_csv(serial.summaries, dir / "a.csv");
  write_csv(parallel.summaries, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(render_svg(serial.summaries, 16, true), render_svg(parallel.summaries, 16, true));
}

TEST(Experiment, SmokeMatchesGolden) {
  const auto r = run_experiment(smoke_config());
  const auto dir = scratch("golden");
  write_csv(r.summaries, dir / "summary.csv");
  const fs::path golden = fs::path(PURSUITLAB_TEST_DIR) / "golden" / "smoke_summary.csv";
  ASSERT_TRUE(fs::exists(golden)) << golden;
  EXPECT_EQ(slurp(dir / "summary.csv"), slurp(golden));
}

TEST(Experiment, PartialCsvAndProgress) {
  auto c = smoke_config();
  c.m_list = {16};
  const auto dir = scratch("partial");
  std::vector<std::size_t> seen;
  RunOptions opt;
  opt.partial_csv = dir / "partial.csv";
  opt.progress = [&](std::size_t done, std::size_t total) {
    seen.push_back(done);
    EXPECT_EQ(total, 3u);
    // The flushed file already holds every completed cell.
    std::ifstream in(dir / "partial.csv");
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 1 + done * c.algorithms.size());
  };
  run_experiment(c, opt);
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Experiment, InvalidConfigRejected) {
  auto c = smoke_config();
  c.k = 300;
  EXPECT_EQ(code_of([&] { run_experiment(c); }), ErrorCode::ValidationError);
}

TEST(Csv, HeaderAndRows) {
  const auto dir = scratch("csv");
  write_csv({}, dir / "empty.csv");
  const std::string header =
      "algorithm,params,m,snr_db,trials,nrmse_mean,nrmse_std,support_size_mean,support_recovered_rate,"
      "exact_support_rate,iterations_mean,stalled_count\n";
  EXPECT_EQ(slurp(dir / "empty.csv"), header);

  CellSummary s;
  s.algorithm = "TOMP";
  s.params = "alpha=1";
  s.m = 16;
  s.snr_db = 5;
  s.trials = 1000;
  s.nrmse_mean = 1.0 / 3.0;
  s.nrmse_std = 0.1;
  s.support_size_mean = 8;
  s.support_recovered_rate = 0.5;
  s.exact_support_rate = 0.25;
  s.iterations_mean = 8;
  s.stalled_count = 2;
  CellSummary nf = s;
  nf.snr_db.reset();
  const std::vector<CellSummary> rows{s, nf};
  write_csv(rows, dir / "one.csv");
  const auto text = slurp(dir / "one.csv");
  EXPECT_EQ(text, header + "TOMP,alpha=1,16,5,1000,0.333333333,0.1,8,0.5,0.25,8,2\n" +
                      "TOMP,alpha=1,16,inf,1000,0.333333333,0.1,8,0.5,0.25,8,2\n");
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) EXPECT_EQ(split_line(line).size(), 12u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-2.5e-7), "-2.5e-07");
}

TEST(Csv, UnwritablePathIsIoError) {
  const auto dir = scratch("io");
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(code_of([&] { write_csv({}, blocker / "sub.csv"); }), ErrorCode::IoError);
}

TEST(Svg, SingleCellAndDeterminism) {
  CellSummary s;
  s.algorithm = "OMP";
  s.m = 16;
  s.snr_db = 10;
  s.trials = 1;
  s.nrmse_mean = 0.05;
  s.support_size_mean = 4;
  const std::vector<CellSummary> one{s};
  const auto svg = render_svg(one, 16, true);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg, render_svg(one, 16, true));
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  EXPECT_EQ(polylines, 1u);
  EXPECT_NE(svg.find("SNR (dB)"), std::string::npos);
}

TEST(Svg, OneFilePerMAndMetric) {
  const auto r = run_experiment(smoke_config());
  const auto dir = scratch("svg");
  const auto paths = write_svg_plots(r.summaries, (dir / "fig_").string());
  ASSERT_EQ(paths.size(), 4u);
  EXPECT_EQ(paths[0].filename(), "fig_m16_nrmse.svg");
  EXPECT_EQ(paths[1].filename(), "fig_m16_support_size.svg");
  EXPECT_EQ(paths[3].filename(), "fig_m32_support_size.svg");
  for (const auto& p : paths) {
    const auto text = slurp(p);
    std::size_t polylines = 0;
    for (std::size_t q = text.find("<polyline"); q != std::string::npos; q = text.find("<polyline", q + 1))
      ++polylines;
    EXPECT_EQ(polylines, smoke_config().algorithms.size());
    // Noise-free cell is drawn and labelled.
    EXPECT_NE(text.find(">inf<"), std::string::npos);
  }
}

TEST(Manifest, RecordsHashSeedAndVersion) {
  const auto c = smoke_config();
  const auto dir = scratch("manifest");
  const std::vector<fs::path> outputs{dir / "summary.csv"};
  write_manifest(c, dir / "manifest.txt", outputs);
  const auto text = slurp(dir / "manifest.txt");
  EXPECT_NE(text.find(std::string("pursuitlab ") + kVersion), std::string::npos);
  EXPECT_NE(text.find("master_seed = 7"), std::string::npos);
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  EXPECT_NE(text.find(std::string("config_hash = fnv1a64:") + hex), std::string::npos);
  EXPECT_NE(text.find("output = summary.csv"), std::string::npos);
}
