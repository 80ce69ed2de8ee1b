#include "gevlab/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gevlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("config: cannot parse value '" + raw + "' for key " + key);
  return value;
}

bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: expected a boolean for key " + key + ", got '" + raw + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& raw, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : split_list(raw)) out.push_back(parse_number<T>(item, key));
  if (out.empty()) throw ConfigError("config: empty list for key " + key);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;
};

struct Section {
  std::string name;
  std::vector<Key> keys;
};

#define GEVLAB_NUM(sec, key, member, type)                                                          \
  Key {                                                                                           \
    key, [](ExperimentConfig& c, const std::string& v) { c.member = parse_number<type>(v, sec "." key); }, \
        [](const ExperimentConfig& c) {                                                           \
          if constexpr (std::is_floating_point_v<type>)                                           \
            return fmt(c.member);                                                                 \
          else                                                                                    \
            return std::to_string(c.member);                                                      \
        }                                                                                         \
  }

const std::vector<Section>& schema() {
  static const std::vector<Section> s = {
      {"grid", {GEVLAB_NUM("grid", "dim", dim, int), GEVLAB_NUM("grid", "n", n, int)}},
      {"initial_data",
       {GEVLAB_NUM("initial_data", "m0", m0, double), GEVLAB_NUM("initial_data", "u_share", u_share, double),
        GEVLAB_NUM("initial_data", "alpha", alpha, double), GEVLAB_NUM("initial_data", "k_c", k_c, double),
        Key{"d_bar",
            [](ExperimentConfig& c, const std::string& v) {
              const auto xs = parse_list<double>(v, "initial_data.d_bar");
              if (xs.size() != 3) throw ConfigError("config: initial_data.d_bar needs 3 entries");
              c.d_bar = Eigen::Vector3d(xs[0], xs[1], xs[2]);
            },
            [](const ExperimentConfig& c) {
              return fmt_list(std::vector<double>{c.d_bar[0], c.d_bar[1], c.d_bar[2]});
            }},
        GEVLAB_NUM("initial_data", "seed", seed, std::uint64_t)}},
      {"solver",
       {GEVLAB_NUM("solver", "dt", dt, double),
        Key{"scheme",
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.scheme = parse_scheme(trim(v));
              } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: solver.scheme: ") + e.what());
              }
            },
            [](const ExperimentConfig& c) { return scheme_name(c.scheme); }},
        GEVLAB_NUM("solver", "cfl", cfl, double),
        Key{"renormalize",
            [](ExperimentConfig& c, const std::string& v) { c.renormalize = parse_bool(v, "solver.renormalize"); },
            [](const ExperimentConfig& c) { return std::string(c.renormalize ? "true" : "false"); }},
        GEVLAB_NUM("solver", "t_end", t_end, double)}},
      {"picard",
       {GEVLAB_NUM("picard", "max_iters", picard.max_iters, int),
        GEVLAB_NUM("picard", "contraction_tol", picard.contraction_tol, double),
        GEVLAB_NUM("picard", "horizon", picard.horizon, double), GEVLAB_NUM("picard", "steps", picard.steps, int),
        GEVLAB_NUM("picard", "epsilon", picard.epsilon, double), GEVLAB_NUM("picard", "zeta", picard.zeta, double),
        GEVLAB_NUM("picard", "c0", picard.c0, double), GEVLAB_NUM("picard", "c1", picard.c1, double),
        GEVLAB_NUM("picard", "max_ratio", picard.max_ratio, double),
        GEVLAB_NUM("picard", "large_m0", large_m0, double),
        GEVLAB_NUM("picard", "max_halvings", max_halvings, int)}},
      {"norms",
       {GEVLAB_NUM("norms", "p", p, double), GEVLAB_NUM("norms", "q", q, double),
        GEVLAB_NUM("norms", "theta", theta, double), GEVLAB_NUM("norms", "sample_interval", sample_interval, double),
        Key{"decay_times",
            [](ExperimentConfig& c, const std::string& v) { c.decay_times = parse_list<double>(v, "norms.decay_times"); },
            [](const ExperimentConfig& c) { return fmt_list(c.decay_times); }},
        Key{"orders", [](ExperimentConfig& c, const std::string& v) { c.orders = parse_list<int>(v, "norms.orders"); },
            [](const ExperimentConfig& c) { return fmt_list(c.orders); }},
        GEVLAB_NUM("norms", "kernel_n", kernel_n, int), GEVLAB_NUM("norms", "kernel_check_n", kernel_check_n, int),
        GEVLAB_NUM("norms", "kernel_box_factor", kernel_box_factor, double)}},
      {"output",
       {Key{"dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = trim(v); },
            [](const ExperimentConfig& c) { return c.out_dir; }},
        Key{"csv", [](ExperimentConfig& c, const std::string& v) { c.csv = parse_bool(v, "output.csv"); },
            [](const ExperimentConfig& c) { return std::string(c.csv ? "true" : "false"); }},
        GEVLAB_NUM("output", "snapshot_every", snapshot_every, int)}},
  };
  return s;
}

#undef GEVLAB_NUM

}  // namespace

void ExperimentConfig::validate() const {
  try {
    GridSpec::make(dim, n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: grid: ") + e.what());
  }
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(m0 >= 0.0, "initial_data.m0 must be >= 0");
  need(u_share >= 0.0 && u_share <= 1.0, "initial_data.u_share must lie in [0, 1]");
  need(k_c > 0.0, "initial_data.k_c must be > 0");
  need(std::abs(d_bar.norm() - 1.0) <= 1e-12, "initial_data.d_bar must be a unit vector");
  need(dt > 0.0 && t_end > 0.0 && cfl > 0.0, "solver.dt, solver.t_end and solver.cfl must be > 0");
  need(sample_interval > 0.0 && sample_interval <= t_end, "norms.sample_interval must lie in (0, t_end]");
  need(theta > 0.0 && theta <= 1.0, "norms.theta must lie in (0, 1]");
  need(p > 1.0 && q > 1.0 && std::isfinite(p) && std::isfinite(q), "norms.p and norms.q must lie in (1, inf)");
  const double gap = 1.0 / q - 1.0 / p;
  need(-std::min(1.0 / 3.0, 1.0 / (2.0 * p)) <= gap + 1e-14 && gap <= 1.0 / 3.0 + 1e-14,
       "(p, q) violates -inf{1/3, 1/(2p)} <= 1/q - 1/p <= 1/3");
  need(kernel_n >= 8 && (kernel_n & (kernel_n - 1)) == 0, "norms.kernel_n must be a power of two >= 8");
  need(kernel_check_n >= 8 && (kernel_check_n & (kernel_check_n - 1)) == 0,
       "norms.kernel_check_n must be a power of two >= 8");
  need(kernel_box_factor > 0.0, "norms.kernel_box_factor must be > 0");
  need(large_m0 > 0.0 && max_halvings >= 0, "picard.large_m0 > 0 and picard.max_halvings >= 0 required");
  need(snapshot_every >= 0, "output.snapshot_every must be >= 0");
  for (int m : orders) need(m >= 0, "norms.orders must be >= 0");
  for (double t : decay_times) need(t > 0.0 && t <= t_end, "norms.decay_times must lie in (0, t_end]");
  try {
    picard.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: picard: ") + e.what());
  }
}

InitialDataSpec ExperimentConfig::initial_data() const {
  InitialDataSpec s;
  s.m0 = m0;
  s.u_share = u_share;
  s.alpha = alpha;
  s.k_c = k_c;
  s.p = p;
  s.q = q;
  s.d_bar = d_bar;
  s.seed = seed;
  return s;
}

ExperimentConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError("config: key '" + section + "' outside any section");
    const Section* sec = nullptr;
    for (const auto& s : schema())
      if (s.name == section) sec = &s;
    if (!sec) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : node) {
      const Key* k = nullptr;
      for (const auto& cand : sec->keys)
        if (cand.name == key) k = &cand;
      if (!k) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      k->set(cfg, value.data());
    }
  }
  cfg.picard.p = cfg.p;
  cfg.picard.q = cfg.q;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  return parse_config(is);
}

std::string default_config_text() {
  const ExperimentConfig cfg;
  std::ostringstream os;
  bool first = true;
  for (const auto& sec : schema()) {
    if (!first) os << '\n';
    first = false;
    os << '[' << sec.name << "]\n";
    for (const auto& k : sec.keys) os << k.name << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& sec : schema()) {
    nlohmann::ordered_json s;
    for (const auto& k : sec.keys) s[k.name] = k.get(cfg);
    j[sec.name] = s;
  }
  return j;
}

}  // namespace gevlab
