#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pursuitlab/error.hpp"
#include "pursuitlab/harness.hpp"

namespace pursuitlab::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view what, std::string_view value) {
  throw Error(ErrorCode::ParseError, std::string(what) + ": '" + std::string(value) + "'");
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) bad("expected a finite number", s);
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) bad("expected a nonnegative integer", s);
  return v;
}

std::size_t parse_count(std::string_view s) { return static_cast<std::size_t>(parse_u64(s)); }

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad("expected true or false", s);
}

// A number, or sqrt(<number>).
double parse_tau(std::string_view s) {
  s = trim(s);
  if (s.starts_with("sqrt(") && s.ends_with(")")) {
    const double inner = parse_double(s.substr(5, s.size() - 6));
    if (inner < 0.0) bad("sqrt of a negative number", s);
    return std::sqrt(inner);
  }
  return parse_double(s);
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string list_text(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

const char* format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Svg: return "svg";
    case OutputFormat::Both: return "both";
  }
  return "both";
}

}  // namespace

std::string AlgorithmEntry::params() const {
  std::string p = spec.params();
  if (fixed_tau) p += (p.empty() ? "" : ";") + std::string("tau=") + format_number(*fixed_tau);
  return p;
}

AlgorithmEntry parse_algorithm(std::string_view token) {
  const auto parts = split(trim(token), ':');
  std::string name(parts.front());
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });

  AlgorithmEntry e;
  if (name == "omp") {
    e.spec = pursuit::AlgorithmSpec::omp();
  } else if (name == "tomp") {
    e.spec = pursuit::AlgorithmSpec::tomp(1.0);
  } else if (name == "lomp") {
    e.spec = pursuit::AlgorithmSpec::lomp(1);
  } else if (name == "sgp") {
    e.spec = pursuit::AlgorithmSpec::sgp(8);
    e.inherit_k = true;
  } else if (name == "cosamp") {
    e.spec = pursuit::AlgorithmSpec::cosamp(8);
    e.inherit_k = true;
  } else {
    bad("unknown algorithm", parts.front());
  }

  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) bad("expected key=value in algorithm token", parts[i]);
    const auto key = trim(parts[i].substr(0, eq));
    const auto value = trim(parts[i].substr(eq + 1));
    auto& s = e.spec;
    if (key == "tau") {
      if (value == "eps") e.fixed_tau.reset();
      else e.fixed_tau = parse_tau(value);
    } else if (key == "alpha" && s.variant == pursuit::Variant::Tomp) {
      s.alpha = parse_double(value);
    } else if (key == "lambda" && s.variant == pursuit::Variant::Lomp) {
      s.lambda = parse_count(value);
    } else if (key == "omega" && s.variant == pursuit::Variant::Lomp) {
      if (value == "auto") s.omega_rule = pursuit::OmegaRule::SupportFrobenius;
      else if (value == "global") s.omega_rule = pursuit::OmegaRule::GlobalFrobenius;
      else if (value == "tight") s.omega_rule = pursuit::OmegaRule::Tight;
      else {
        s.omega_rule = pursuit::OmegaRule::Fixed;
        s.omega = parse_double(value);
      }
    } else if (key == "kmax" && s.variant == pursuit::Variant::Sgp) {
      s.k_max = parse_count(value);
      e.inherit_k = false;
    } else if (key == "mu" && s.variant == pursuit::Variant::Sgp) {
      if (value == "auto") s.mu.reset();
      else s.mu = parse_double(value);
    } else if (key == "k" && s.variant == pursuit::Variant::Cosamp) {
      s.k = parse_count(value);
      e.inherit_k = false;
    } else {
      bad("unknown parameter for " + name, key);
    }
  }
  if (e.fixed_tau && *e.fixed_tau < 0.0) bad("tau must be nonnegative", token);
  try {
    e.spec.validate();
  } catch (const Error& err) {
    throw Error(ErrorCode::ParseError, err.detail());
  }
  return e;
}

std::string format_algorithm(const AlgorithmEntry& entry) {
  std::string name = entry.name();
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string out = name;
  const auto& s = entry.spec;
  switch (s.variant) {
    case pursuit::Variant::Omp: break;
    case pursuit::Variant::Tomp: out += ":alpha=" + shortest(s.alpha); break;
    case pursuit::Variant::Lomp:
      out += ":lambda=" + std::to_string(s.lambda);
      switch (s.omega_rule) {
        case pursuit::OmegaRule::SupportFrobenius: break;
        case pursuit::OmegaRule::GlobalFrobenius: out += ":omega=global"; break;
        case pursuit::OmegaRule::Tight: out += ":omega=tight"; break;
        case pursuit::OmegaRule::Fixed: out += ":omega=" + shortest(s.omega); break;
      }
      break;
    case pursuit::Variant::Sgp:
      if (!entry.inherit_k) out += ":kmax=" + std::to_string(s.k_max);
      if (s.mu) out += ":mu=" + shortest(*s.mu);
      break;
    case pursuit::Variant::Cosamp:
      if (!entry.inherit_k) out += ":k=" + std::to_string(s.k);
      break;
  }
  if (entry.fixed_tau) {
    if (*entry.fixed_tau == std::sqrt(kSgpFixedTauSquared))
      out += ":tau=sqrt(" + shortest(kSgpFixedTauSquared) + ")";
    else
      out += ":tau=" + shortest(*entry.fixed_tau);
  }
  return out;
}

std::vector<AlgorithmEntry> ExperimentConfig::default_algorithms() {
  std::vector<AlgorithmEntry> out;
  for (const char* token : {"omp", "tomp:alpha=0.1", "tomp:alpha=1", "tomp:alpha=10", "lomp:lambda=1",
                            "lomp:lambda=10", "lomp:lambda=100", "sgp", "sgp:tau=sqrt(0.0164)", "cosamp"}) {
    out.push_back(parse_algorithm(token));
  }
  return out;
}

std::vector<std::optional<double>> ExperimentConfig::snr_grid() const {
  std::vector<std::optional<double>> grid(snr_list_db.begin(), snr_list_db.end());
  if (noise_free) grid.emplace_back(std::nullopt);
  return grid;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "N") {
    n = parse_count(value);
  } else if (key == "m_list") {
    m_list.clear();
    for (auto part : split(value, ',')) m_list.push_back(parse_count(part));
  } else if (key == "k") {
    k = parse_count(value);
  } else if (key == "snr_list_db") {
    snr_list_db.clear();
    if (!value.empty())
      for (auto part : split(value, ',')) snr_list_db.push_back(parse_double(part));
  } else if (key == "noise_free") {
    noise_free = parse_bool(value);
  } else if (key == "trials") {
    trials = parse_count(value);
  } else if (key == "master_seed" || key == "seed") {
    master_seed = parse_u64(value);
  } else if (key == "algorithms") {
    algorithms.clear();
    for (auto part : split(value, ',')) algorithms.push_back(parse_algorithm(part));
  } else if (key == "output_dir") {
    output_dir = std::string(value);
  } else if (key == "threads") {
    threads = parse_count(value);
  } else if (key == "retain_trials") {
    retain_trials = parse_bool(value);
  } else if (key == "format") {
    if (value == "csv") format = OutputFormat::Csv;
    else if (value == "svg") format = OutputFormat::Svg;
    else if (value == "both") format = OutputFormat::Both;
    else bad("format must be csv, svg or both", value);
  } else {
    bad("unknown key", key);
  }
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
  if (n < 1) fail("N >= 1");
  if (k < 1) fail("k >= 1");
  if (trials < 1) fail("trials >= 1");
  if (m_list.empty()) fail("m_list must not be empty");
  for (std::size_t m : m_list) {
    if (!(k <= m && m <= n)) {
      fail("k <= m <= N violated for m = " + std::to_string(m) + " (k = " + std::to_string(k) +
           ", N = " + std::to_string(n) + ")");
    }
  }
  if (snr_grid().empty()) fail("snr_list_db is empty and noise_free is false");
  if (algorithms.empty()) fail("algorithms must not be empty");
  for (const auto& entry : algorithms) {
    if (entry.spec.variant == pursuit::Variant::Cosamp) {
      const std::size_t ck = entry.inherit_k ? k : entry.spec.k;
      for (std::size_t m : m_list)
        if (2 * ck > m) fail("CoSaMP needs 2k <= m (m = " + std::to_string(m) + ")");
    }
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "N = " << n << "\n";
  os << "m_list = " << list_text(m_list) << "\n";
  os << "k = " << k << "\n";
  os << "snr_list_db = ";
  for (std::size_t i = 0; i < snr_list_db.size(); ++i) os << (i ? ", " : "") << shortest(snr_list_db[i]);
  os << "\n";
  os << "noise_free = " << (noise_free ? "true" : "false") << "\n";
  os << "trials = " << trials << "\n";
  os << "master_seed = " << master_seed << "\n";
  os << "algorithms = ";
  for (std::size_t i = 0; i < algorithms.size(); ++i) os << (i ? ", " : "") << format_algorithm(algorithms[i]);
  os << "\n";
  os << "output_dir = " << output_dir.generic_string() << "\n";
  os << "threads = " << threads << "\n";
  os << "retain_trials = " << (retain_trials ? "true" : "false") << "\n";
  os << "format = " << format_name(format) << "\n";
  return os.str();
}

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
      }
      try {
        config.set(line.substr(0, eq), line.substr(eq + 1));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // Only fields that change the numbers take part.
  ExperimentConfig canonical = config;
  canonical.output_dir = ExperimentConfig{}.output_dir;
  canonical.threads = 0;
  canonical.retain_trials = false;
  canonical.format = OutputFormat::Both;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pursuitlab::harness
