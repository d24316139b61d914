#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pursuitlab/error.hpp"
#include "pursuitlab/harness.hpp"

namespace pursuitlab::harness {

namespace {

std::string fixed2(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

std::string snr_text(const std::optional<double>& snr) {
  return snr ? format_number(*snr) : std::string("inf");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

void write_csv(std::span<const CellSummary> summaries, const std::filesystem::path& path) {
  std::string out =
      "algorithm,params,m,snr_db,trials,nrmse_mean,nrmse_std,support_size_mean,support_recovered_rate,"
      "exact_support_rate,iterations_mean,stalled_count\n";
  for (const auto& s : summaries) {
    out += s.algorithm + ',' + s.params + ',' + std::to_string(s.m) + ',' + snr_text(s.snr_db) + ',' +
           std::to_string(s.trials) + ',' + format_number(s.nrmse_mean) + ',' + format_number(s.nrmse_std) + ',' +
           format_number(s.support_size_mean) + ',' + format_number(s.support_recovered_rate) + ',' +
           format_number(s.exact_support_rate) + ',' + format_number(s.iterations_mean) + ',' +
           std::to_string(s.stalled_count) + '\n';
  }
  write_file(path, out);
}

void write_trials_csv(std::span<const TrialRecord> records, const std::filesystem::path& path) {
  std::string out =
      "algorithm,params,m,snr_db,trial,nrmse,support_size,support_recovered,exact_support,residual_final,"
      "iterations,termination,nonzero_count\n";
  for (const auto& r : records) {
    const auto& t = r.metrics;
    out += r.algorithm + ',' + r.params + ',' + std::to_string(r.m) + ',' + snr_text(r.snr_db) + ',' +
           std::to_string(r.trial) + ',' + format_number(t.nrmse) + ',' + std::to_string(t.support_size) + ',' +
           (t.support_recovered ? "1" : "0") + ',' + (t.exact_support ? "1" : "0") + ',' +
           format_number(t.residual_final) + ',' + std::to_string(t.iterations) + ',' +
           pursuit::to_string(t.termination) + ',' + std::to_string(t.nonzero_count) + '\n';
  }
  write_file(path, out);
}

std::string render_svg(std::span<const CellSummary> summaries, std::size_t m, bool nrmse_metric) {
  constexpr double kWidth = 760, kHeight = 460;
  constexpr double kLeft = 80, kRight = 540, kTop = 50, kBottom = 390;

  struct Series {
    std::string label;
    std::vector<std::pair<std::optional<double>, double>> points;
  };
  std::vector<Series> series;
  std::vector<double> finite_snr;
  bool has_noise_free = false;
  for (const auto& s : summaries) {
    if (s.m != m) continue;
    const std::string label = s.params.empty() ? s.algorithm : s.algorithm + " (" + s.params + ")";
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& x) { return x.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}});
      it = std::prev(series.end());
    }
    it->points.emplace_back(s.snr_db, nrmse_metric ? s.nrmse_mean : s.support_size_mean);
    if (s.snr_db) finite_snr.push_back(*s.snr_db);
    else has_noise_free = true;
  }
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "no summaries for m = " + std::to_string(m));

  std::sort(finite_snr.begin(), finite_snr.end());
  finite_snr.erase(std::unique(finite_snr.begin(), finite_snr.end()), finite_snr.end());
  double x_lo = finite_snr.empty() ? 0.0 : finite_snr.front();
  double x_hi = finite_snr.empty() ? 0.0 : finite_snr.back();
  const double noise_free_x = finite_snr.empty() ? 0.0 : x_hi + 5.0;
  if (has_noise_free) x_hi = std::max(x_hi, noise_free_x);
  if (x_hi == x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  auto snr_x = [&](const std::optional<double>& snr) { return snr ? *snr : noise_free_x; };
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kRight - kLeft); };

  double y_lo = 0.0, y_hi = 1.0;
  std::vector<std::pair<double, std::string>> y_ticks;
  if (nrmse_metric) {
    double min_pos = INFINITY, max_v = 0.0;
    for (const auto& s : series)
      for (const auto& [snr, v] : s.points) {
        if (v > 0.0) min_pos = std::min(min_pos, v);
        max_v = std::max(max_v, v);
      }
    if (!std::isfinite(min_pos)) min_pos = max_v = 1.0;
    y_lo = std::floor(std::log10(min_pos));
    y_hi = std::ceil(std::log10(max_v));
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    for (double d = y_lo; d <= y_hi; d += 1.0) y_ticks.emplace_back(d, "1e" + std::to_string(static_cast<int>(d)));
  } else {
    double max_v = 0.0;
    for (const auto& s : series)
      for (const auto& [snr, v] : s.points) max_v = std::max(max_v, v);
    const double step = std::max(1.0, std::ceil(max_v / 5.0));
    y_hi = std::max(step, std::ceil(max_v / step) * step);
    for (double t = 0.0; t <= y_hi + 1e-9; t += step) y_ticks.emplace_back(t, format_number(t));
  }
  auto py = [&](double v) {
    const double t = nrmse_metric ? (v > 0.0 ? std::max(std::log10(v), y_lo) : y_lo) : v;
    return kBottom - (t - y_lo) / (y_hi - y_lo) * (kBottom - kTop);
  };

  const std::string metric_label = nrmse_metric ? "NRMSE" : "Estimated support size";
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed2((kLeft + kRight) / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"16\">"
     << xml_escape(metric_label) << " vs SNR, m = " << m << (nrmse_metric ? " (log scale)" : "") << "</text>\n";

  os << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (const auto& [t, label] : y_ticks)
    os << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(py(nrmse_metric ? std::pow(10.0, t) : t))
       << "\" x2=\"" << fixed2(kRight) << "\" y2=\"" << fixed2(py(nrmse_metric ? std::pow(10.0, t) : t)) << "\"/>\n";
  os << "</g>\n";
  os << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\"" << fixed2(kRight - kLeft)
     << "\" height=\"" << fixed2(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";

  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double snr : finite_snr)
    os << "<text x=\"" << fixed2(px(snr)) << "\" y=\"" << fixed2(kBottom + 16) << "\" text-anchor=\"middle\">"
       << format_number(snr) << "</text>\n";
  if (has_noise_free)
    os << "<text x=\"" << fixed2(px(noise_free_x)) << "\" y=\"" << fixed2(kBottom + 16)
       << "\" text-anchor=\"middle\">inf</text>\n";
  for (const auto& [t, label] : y_ticks)
    os << "<text x=\"" << fixed2(kLeft - 6) << "\" y=\"" << fixed2(py(nrmse_metric ? std::pow(10.0, t) : t) + 4)
       << "\" text-anchor=\"end\">" << label << "</text>\n";
  os << "</g>\n";
  os << "<text x=\"" << fixed2((kLeft + kRight) / 2) << "\" y=\"" << fixed2(kBottom + 40)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">SNR (dB)</text>\n";
  os << "<text x=\"20\" y=\"" << fixed2((kTop + kBottom) / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 20 "
     << fixed2((kTop + kBottom) / 2) << ")\">" << xml_escape(metric_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    auto pts = series[i].points;
    std::stable_sort(pts.begin(), pts.end(),
                     [&](const auto& a, const auto& b) { return snr_x(a.first) < snr_x(b.first); });
    const char* color = kPalette[i % std::size(kPalette)];
    const char* dash = i >= std::size(kPalette) ? " stroke-dasharray=\"6 3\"" : "";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << " points=\"";
    for (std::size_t p = 0; p < pts.size(); ++p)
      os << (p ? " " : "") << fixed2(px(snr_x(pts[p].first))) << ',' << fixed2(py(pts[p].second));
    os << "\"/>\n";
    for (const auto& [snr, v] : pts)
      os << "<circle cx=\"" << fixed2(px(snr_x(snr))) << "\" cy=\"" << fixed2(py(v)) << "\" r=\"2.5\" fill=\""
         << color << "\"/>\n";
  }

  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<line x1=\"" << fixed2(kRight + 15) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(kRight + 40)
       << "\" y2=\"" << fixed2(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed2(kRight + 46) << "\" y=\"" << fixed2(y + 4) << "\">" << xml_escape(series[i].label)
       << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> write_svg_plots(std::span<const CellSummary> summaries,
                                                   const std::string& path_prefix) {
  if (summaries.empty()) throw Error(ErrorCode::InvalidArgument, "write_svg_plots needs at least one summary");
  std::vector<std::size_t> ms;
  for (const auto& s : summaries)
    if (std::find(ms.begin(), ms.end(), s.m) == ms.end()) ms.push_back(s.m);
  std::vector<std::filesystem::path> written;
  for (std::size_t m : ms) {
    for (bool nrmse_metric : {true, false}) {
      std::filesystem::path path =
          path_prefix + "m" + std::to_string(m) + (nrmse_metric ? "_nrmse.svg" : "_support_size.svg");
      write_file(path, render_svg(summaries, m, nrmse_metric));
      written.push_back(std::move(path));
    }
  }
  return written;
}

void write_manifest(const ExperimentConfig& config, const std::filesystem::path& path,
                    std::span<const std::filesystem::path> outputs) {
  std::ostringstream os;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  os << "artifact = pursuitlab " << kVersion << "\n";
  os << "master_seed = " << config.master_seed << "\n";
  os << "config_hash = fnv1a64:" << hash << "\n";
  for (const auto& p : outputs) os << "output = " << p.filename().generic_string() << "\n";
  os << "\n# config\n" << config.to_text();
  write_file(path, os.str());
}

}  // namespace pursuitlab::harness
