#include "shearstab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <toml.hpp>

namespace shearstab {
namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::resolvent_scan, "resolvent-scan"},
      {ExperimentKind::coercivity_check, "coercivity-check"},
      {ExperimentKind::corrector_check, "corrector-check"},
      {ExperimentKind::airy_table, "airy-table"},
      {ExperimentKind::evolve_linear, "evolve-linear"},
      {ExperimentKind::evolve_euler, "evolve-euler"},
      {ExperimentKind::evolve_nonlinear, "evolve-nonlinear"},
      {ExperimentKind::threshold_sweep, "threshold-sweep"},
      {ExperimentKind::estimate_sweep, "estimate-sweep"},
      {ExperimentKind::accept, "accept"}};
  return names;
}

void check_keys(const toml::table& t, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, node] : t) {
    const std::string k(key.str());
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

const toml::table* subtable(const toml::table& root, const std::string& name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError("'" + name + "' must be a table");
  return n->as_table();
}

double to_double(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError("'" + key + "' must be a number");
}

long long to_int(const toml::node& n, const std::string& key) {
  if (n.is_integer()) return *n.value<long long>();
  throw ConfigError("'" + key + "' must be an integer");
}

std::string to_str(const toml::node& n, const std::string& key) {
  if (auto v = n.value<std::string>()) return *v;
  throw ConfigError("'" + key + "' must be a string");
}

/// Scalar or array of scalars.
template <class T, class F>
std::vector<T> list(const toml::node& n, const std::string& key, F&& conv) {
  std::vector<T> out;
  if (const toml::array* a = n.as_array()) {
    for (const toml::node& e : *a) out.push_back(conv(e, key));
  } else {
    out.push_back(conv(n, key));
  }
  return out;
}

void read_double(const toml::table& t, const std::string& key, double& dst) {
  if (const toml::node* n = t.get(key)) dst = to_double(*n, key);
}

void read_int(const toml::table& t, const std::string& key, int& dst) {
  if (const toml::node* n = t.get(key)) dst = static_cast<int>(to_int(*n, key));
}

std::vector<double> read_lambdas(const toml::node& n) {
  if (const toml::table* t = n.as_table()) {
    check_keys(*t, "sweep.lambda", {"min", "max", "points"});
    double lo = 0.1, hi = 0.9;
    int points = 9;
    read_double(*t, "min", lo);
    read_double(*t, "max", hi);
    read_int(*t, "points", points);
    if (points < 1) throw ConfigError("sweep.lambda.points must be >= 1");
    std::vector<double> out;
    for (int i = 0; i < points; ++i)
      out.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    return out;
  }
  return list<double>(n, "sweep.lambda", to_double);
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [k, name] : kind_names()) {
    std::string alt = name;
    for (char& c : alt)
      if (c == '-') c = '_';
    if (s == name || s == alt) return k;
  }
  throw ConfigError("unknown experiment kind: " + s);
}

std::string to_string(ExperimentKind k) {
  for (const auto& [q, name] : kind_names())
    if (q == k) return name;
  return "unknown";
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> all = [] {
    std::vector<ExperimentKind> v;
    for (const auto& [k, name] : kind_names()) v.push_back(k);
    return v;
  }();
  return all;
}

bool uses_seed(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::coercivity_check:
    case ExperimentKind::corrector_check:
    case ExperimentKind::evolve_linear:
    case ExperimentKind::evolve_euler:
    case ExperimentKind::evolve_nonlinear:
    case ExperimentKind::threshold_sweep:
    case ExperimentKind::estimate_sweep:
    case ExperimentKind::accept:
      return true;
    default:
      return false;
  }
}

std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  check_keys(root, "config",
             {"experiment", "seed", "seeds", "threads", "output_dir", "profile", "grid", "sweep",
              "tolerances", "scan", "evolution", "euler", "nonlinear", "airy", "acceptance"});

  ExperimentConfig c;
  if (const toml::node* n = root.get("experiment"))
    c.kind = parse_experiment_kind(to_str(*n, "experiment"));
  if (root.get("seed") && root.get("seeds")) throw ConfigError("give either seed or seeds");
  for (const char* key : {"seed", "seeds"}) {
    if (const toml::node* n = root.get(key)) {
      for (long long s : list<long long>(*n, key, to_int)) {
        if (s < 0) throw ConfigError("seeds must be non-negative");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
  }
  read_int(root, "threads", c.threads);
  if (const toml::node* n = root.get("output_dir")) c.output_dir = to_str(*n, "output_dir");

  if (const toml::table* t = subtable(root, "profile")) {
    check_keys(*t, "profile", {"kind", "coefficients"});
    if (const toml::node* n = t->get("kind")) c.profile = parse_profile_kind(to_str(*n, "kind"));
    if (const toml::node* n = t->get("coefficients"))
      c.profile_coefficients = list<double>(*n, "coefficients", to_double);
  }
  if (const toml::table* t = subtable(root, "grid")) {
    check_keys(*t, "grid", {"n"});
    if (const toml::node* n = t->get("n")) {
      c.grids.clear();
      for (long long v : list<long long>(*n, "grid.n", to_int)) c.grids.push_back(int(v));
    }
  }
  if (const toml::table* t = subtable(root, "sweep")) {
    check_keys(*t, "sweep", {"nu", "alpha", "lambda", "bc", "pairs", "samples"});
    if (const toml::node* n = t->get("nu")) c.nus = list<double>(*n, "sweep.nu", to_double);
    if (const toml::node* n = t->get("alpha")) {
      c.alphas.clear();
      for (long long v : list<long long>(*n, "sweep.alpha", to_int)) c.alphas.push_back(int(v));
    }
    if (const toml::node* n = t->get("lambda")) c.lambdas = read_lambdas(*n);
    if (const toml::node* n = t->get("bc")) {
      c.bcs.clear();
      for (const std::string& s : list<std::string>(*n, "sweep.bc", to_str))
        c.bcs.push_back(parse_bc(s));
    }
    if (const toml::node* n = t->get("pairs"))
      for (const std::string& s : list<std::string>(*n, "sweep.pairs", to_str))
        c.pairs.push_back(parse_norm_pair(s));
    read_int(*t, "samples", c.samples);
  }
  if (const toml::table* t = subtable(root, "tolerances")) {
    check_keys(*t, "tolerances", {"nu0", "eps0", "corrector_threshold", "o_shift"});
    read_double(*t, "nu0", c.nu0);
    read_double(*t, "eps0", c.eps0);
    read_double(*t, "corrector_threshold", c.corrector_threshold);
    read_double(*t, "o_shift", c.o_shift);
  }
  if (const toml::table* t = subtable(root, "scan")) {
    check_keys(*t, "scan", {"points", "refine_tol"});
    read_int(*t, "points", c.scan_points);
    read_double(*t, "refine_tol", c.scan_refine_tol);
  }
  if (const toml::table* t = subtable(root, "evolution")) {
    check_keys(*t, "evolution",
               {"dt", "t_final", "eps_weight", "record_stride", "checkpoint_every"});
    read_double(*t, "dt", c.dt);
    read_double(*t, "t_final", c.t_final);
    read_double(*t, "eps_weight", c.eps_weight);
    read_int(*t, "record_stride", c.record_stride);
    read_int(*t, "checkpoint_every", c.checkpoint_every);
  }
  if (const toml::table* t = subtable(root, "euler")) {
    check_keys(*t, "euler", {"t_final", "dt", "n_max", "tail_tolerance"});
    read_double(*t, "t_final", c.euler_t_final);
    read_double(*t, "dt", c.euler_dt);
    read_int(*t, "n_max", c.euler_n_max);
    read_double(*t, "tail_tolerance", c.euler_tail_tolerance);
  }
  if (const toml::table* t = subtable(root, "nonlinear")) {
    check_keys(*t, "nonlinear", {"modes", "amplitudes", "t_final", "dt"});
    read_int(*t, "modes", c.modes);
    if (const toml::node* n = t->get("amplitudes"))
      c.amplitudes = list<double>(*n, "nonlinear.amplitudes", to_double);
    read_double(*t, "t_final", c.nonlinear_t_final);
    read_double(*t, "dt", c.nonlinear_dt);
  }
  if (const toml::table* t = subtable(root, "airy")) {
    check_keys(*t, "airy", {"radii", "angles"});
    if (const toml::node* n = t->get("radii")) c.airy_radii = list<double>(*n, "radii", to_double);
    read_int(*t, "angles", c.airy_angles);
  }
  if (const toml::table* t = subtable(root, "acceptance")) {
    check_keys(*t, "acceptance", {"criteria"});
    if (const toml::node* n = t->get("criteria"))
      for (long long v : list<long long>(*n, "acceptance.criteria", to_int))
        c.criteria.push_back(int(v));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  if (!(c.nu0 > 0.0)) throw ConfigError("nu0 must be positive");
  if (!(c.eps0 >= 0.0)) throw ConfigError("eps0 must be non-negative");
  for (double nu : c.nus)
    if (!(nu > 0.0 && nu <= c.nu0))
      throw ConfigError("nu = " + std::to_string(nu) + " outside (0, nu0]");
  for (int a : c.alphas)
    if (a < 1) throw ConfigError("alpha values must be >= 1");
  for (int n : c.grids)
    if (n < 8 || n > 1024) throw ConfigError("grid sizes must lie in [8, 1024]");
  for (double l : c.lambdas)
    if (!std::isfinite(l)) throw ConfigError("lambda values must be finite");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.samples < 0) throw ConfigError("samples must be >= 0");
  if (!(c.corrector_threshold > 0.0)) throw ConfigError("corrector_threshold must be positive");
  if (std::abs(c.o_shift) > c.eps0)
    throw ConfigError("o_shift exceeds eps0 (units of nu^{1/2} alpha^{1/2})");
  if (c.scan_points < 3) throw ConfigError("scan.points must be >= 3");
  if (!(c.dt > 0.0) || !(c.euler_dt > 0.0) || !(c.nonlinear_dt > 0.0))
    throw ConfigError("time steps must be positive");
  if (c.t_final < 0.0) throw ConfigError("evolution.t_final must be >= 0");
  if (c.euler_t_final <= 0.0 || c.euler_t_final > 200.0)
    throw ConfigError("euler.t_final must lie in (0, 200]");
  if (c.modes < 1 || c.modes > 16) throw ConfigError("nonlinear.modes must lie in [1, 16]");
  for (double a : c.amplitudes)
    if (!(a > 0.0)) throw ConfigError("nonlinear amplitudes must be positive");
  if (c.airy_angles < 1) throw ConfigError("airy.angles must be >= 1");
  for (int k : c.criteria)
    if (k < 1 || k > 10) throw ConfigError("acceptance criteria are numbered 1..10");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (uses_seed(c.kind) && c.seeds.empty())
    throw ConfigError("experiment '" + to_string(c.kind) + "' needs a seed (config or --seed)");
  try {
    (void)make_profile(c.profile, c.profile_coefficients);
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
}

}  // namespace shearstab
