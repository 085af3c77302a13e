#pragma once

// Experiment configuration (sectioned key=value text), lossless number
// formatting, config hashing and CSV output with a commented metadata block.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hetero/core_maps.hpp"
#include "hetero/errors.hpp"
#include "hetero/noise_kernel.hpp"

namespace hetero {

inline constexpr const char* kVersion = "1.0.0";

/// Shortest representation that parses back to the same double.
inline std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string fmt(std::uint64_t x) { return std::to_string(x); }

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ParameterError("not a number: '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ParameterError("not an unsigned integer: '" + s + "'");
  return v;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ','))
    if (cur.find_first_not_of(' ') != std::string::npos) out.push_back(cur);
  return out;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s)) out.push_back(parse_double(t));
  return out;
}

inline std::vector<std::uint64_t> parse_u64s(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& t : split(s)) out.push_back(parse_u64(t));
  return out;
}

enum class ExperimentKind { orbit, stationary, lyapunov, bifurcation, clt, dq, evt, micro_compare };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::orbit: return "orbit";
    case ExperimentKind::stationary: return "stationary";
    case ExperimentKind::lyapunov: return "lyapunov";
    case ExperimentKind::bifurcation: return "bifurcation";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::dq: return "dq";
    case ExperimentKind::evt: return "evt";
    case ExperimentKind::micro_compare: return "micro-compare";
  }
  return "?";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::orbit, ExperimentKind::stationary, ExperimentKind::lyapunov,
                 ExperimentKind::bifurcation, ExperimentKind::clt, ExperimentKind::dq, ExperimentKind::evt,
                 ExperimentKind::micro_compare})
    if (s == to_string(k)) return k;
  throw ParameterError("unknown experiment kind '" + s + "'");
}

struct ExperimentConfig {
  MapParams params;

  // noise
  double n = 1000.0;
  /// Amplitude; 0 selects a_fraction times the admissible bound.
  double a = 0.0;
  double a_fraction = 1.0;
  BumpKind bump = BumpKind::mollifier;
  SigmaMode sigma_mode = SigmaMode::paper;

  ExperimentKind experiment = ExperimentKind::orbit;
  std::uint64_t seed = 20240101;
  std::string out = "out";

  // orbit / stationary
  double x0 = 0.38;
  std::uint64_t length = 1000000;
  std::uint64_t burn_in = 1000;
  std::uint64_t bins = 1000;
  std::uint64_t ulam_cells = 512;

  // lyapunov / bifurcation
  double c_min = -1.0;
  double c_max = 1.0;
  std::uint64_t c_steps = 401;
  std::vector<double> n_list = {10.0, 100.0, 1000.0};
  std::uint64_t lyapunov_t = 1000000;
  std::uint64_t transient = 1000;
  std::uint64_t keep = 1000;

  // clt
  std::uint64_t clt_count = 1000;
  /// Ulam cells used only to centre g; the centring error is amplified by sqrt(t)
  std::uint64_t clt_center_cells = 2048;
  std::vector<std::uint64_t> clt_t = {10, 100, 1000, 10000};
  std::vector<double> ldp_eps = {0.05, 0.1, 0.2};

  // dq
  std::vector<double> q_list = {-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5};
  double r_min = 5e-6;
  double r_max = 1e-5;
  std::uint64_t r_count = 100;

  // evt
  double z = 0.80;
  double tau = 2.302585092994046;
  std::vector<std::uint64_t> evt_t = {100, 200, 500, 1000, 2000, 5000, 10000};
  std::uint64_t evt_density_length = 20000000;
  std::uint64_t evt_orbit_length = 20000000;
  std::vector<double> poisson_s = {0.5, 1.0, 2.0};

  // micro-compare
  std::vector<std::uint64_t> micro_n = {100, 1000, 10000};
  std::uint64_t micro_horizon = 20000;
  std::uint64_t reduced_length = 200000;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

struct Binding {
  std::string key;
  std::string (*get)(const ExperimentConfig&);
  void (*set)(ExperimentConfig&, const std::string&);
};

#define HETERO_NUM(K, M)                                                                   \
  Binding {                                                                                \
    K, [](const ExperimentConfig& c) { return fmt(c.M); },                                 \
        [](ExperimentConfig& c, const std::string& v) { c.M = parse_double(v); }           \
  }
#define HETERO_U64(K, M)                                                                   \
  Binding {                                                                                \
    K, [](const ExperimentConfig& c) { return fmt(c.M); },                                 \
        [](ExperimentConfig& c, const std::string& v) { c.M = parse_u64(v); }              \
  }
#define HETERO_DLIST(K, M)                                                                 \
  Binding {                                                                                \
    K, [](const ExperimentConfig& c) { return join(c.M); },                                \
        [](ExperimentConfig& c, const std::string& v) { c.M = parse_doubles(v); }          \
  }
#define HETERO_ULIST(K, M)                                                                 \
  Binding {                                                                                \
    K, [](const ExperimentConfig& c) { return join(c.M); },                                \
        [](ExperimentConfig& c, const std::string& v) { c.M = parse_u64s(v); }             \
  }

inline const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = {
      Binding{"run.experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); },
              [](ExperimentConfig& c, const std::string& v) { c.experiment = experiment_from_string(v); }},
      HETERO_U64("run.seed", seed),
      Binding{"run.out", [](const ExperimentConfig& c) { return c.out; },
              [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
      HETERO_NUM("model.gamma0", params.gamma0),
      HETERO_NUM("model.alpha", params.alpha),
      HETERO_NUM("model.sigma_eps", params.sigma_eps),
      HETERO_NUM("model.omega", params.omega),
      HETERO_NUM("model.c", params.c),
      HETERO_NUM("noise.n", n),
      HETERO_NUM("noise.a", a),
      HETERO_NUM("noise.a_fraction", a_fraction),
      Binding{"noise.bump", [](const ExperimentConfig& c) { return std::string(to_string(c.bump)); },
              [](ExperimentConfig& c, const std::string& v) { c.bump = bump_from_string(v); }},
      Binding{"noise.sigma_mode", [](const ExperimentConfig& c) { return std::string(to_string(c.sigma_mode)); },
              [](ExperimentConfig& c, const std::string& v) { c.sigma_mode = sigma_mode_from_string(v); }},
      HETERO_NUM("orbit.x0", x0),
      HETERO_U64("orbit.length", length),
      HETERO_U64("orbit.burn_in", burn_in),
      HETERO_U64("orbit.bins", bins),
      HETERO_U64("stationary.cells", ulam_cells),
      HETERO_NUM("scan.c_min", c_min),
      HETERO_NUM("scan.c_max", c_max),
      HETERO_U64("scan.c_steps", c_steps),
      HETERO_DLIST("scan.n_list", n_list),
      HETERO_U64("scan.t", lyapunov_t),
      HETERO_U64("scan.transient", transient),
      HETERO_U64("scan.keep", keep),
      HETERO_U64("clt.count", clt_count),
      HETERO_U64("clt.center_cells", clt_center_cells),
      HETERO_ULIST("clt.t", clt_t),
      HETERO_DLIST("clt.ldp_eps", ldp_eps),
      HETERO_DLIST("dq.q", q_list),
      HETERO_NUM("dq.r_min", r_min),
      HETERO_NUM("dq.r_max", r_max),
      HETERO_U64("dq.r_count", r_count),
      HETERO_NUM("evt.z", z),
      HETERO_NUM("evt.tau", tau),
      HETERO_ULIST("evt.t", evt_t),
      HETERO_U64("evt.density_length", evt_density_length),
      HETERO_U64("evt.orbit_length", evt_orbit_length),
      HETERO_DLIST("evt.poisson_s", poisson_s),
      HETERO_ULIST("micro.n", micro_n),
      HETERO_U64("micro.horizon", micro_horizon),
      HETERO_U64("micro.reduced_length", reduced_length),
  };
  return b;
}

#undef HETERO_NUM
#undef HETERO_U64
#undef HETERO_DLIST
#undef HETERO_ULIST

}  // namespace detail

/// Canonical text: one "[section]" header per group, keys in a fixed order.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& b : detail::bindings()) {
    const auto dot = b.key.find('.');
    const std::string sec = b.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << b.key.substr(dot + 1) << " = " << b.get(c) << "\n";
  }
  return os.str();
}

/// Parses config text; keys not present keep their defaults, unknown keys are rejected.
inline ExperimentConfig parse_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  std::map<std::string, const detail::Binding*> index;
  for (const auto& b : detail::bindings()) index[b.key] = &b;
  ExperimentConfig c;
  for (const auto& [sec, node] : tree) {
    if (node.empty() && !node.data().empty()) throw ParameterError("config: key '" + sec + "' outside a section");
    for (const auto& [key, val] : node) {
      const std::string full = sec + "." + key;
      const auto it = index.find(full);
      if (it == index.end()) throw ParameterError("config: unknown key '" + full + "'");
      try {
        it->second->set(c, val.data());
      } catch (const ParameterError& e) {
        throw ParameterError("config: " + full + ": " + e.what());
      }
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << to_config_text(c);
  if (!out) throw Error("cannot write " + path.string());
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(to_config_text(c));
  return os.str();
}

/// Commented metadata block: hash, seed, version and the full config.
inline std::string metadata_block(const ExperimentConfig& c, const std::string& what) {
  std::ostringstream os;
  os << "# hetero " << kVersion << "\n";
  os << "# artifact: " << what << "\n";
  os << "# config_hash: " << config_hash(c) << "\n";
  os << "# seed: " << c.seed << "\n";
  std::istringstream cfg(to_config_text(c));
  std::string line;
  while (std::getline(cfg, line))
    if (!line.empty()) os << "# config: " << line << "\n";
  return os.str();
}

/// CSV file with metadata comments, one header row, LF endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns, const std::string& meta)
      : out_(path, std::ios::binary), path_(path), cols_(columns.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    out_ << meta;
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  template <class... Ts>
  void row(const Ts&... vals) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != cols_) throw Error("CsvWriter: column count mismatch in " + path_.string());
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(vals)), ...);
    out_ << "\n";
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(std::uint64_t v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t cols_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace hetero
