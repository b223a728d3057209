#include "pmcf/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pmcf {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError(ConfigErrorKind::Parse, key, "key '" + key + "': bad number '" + tok + "'");
  return v;
}

long parse_int(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError(ConfigErrorKind::Parse, key, "key '" + key + "': bad integer '" + tok + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& tok) {
  if (tok == "true" || tok == "1" || tok == "yes") return true;
  if (tok == "false" || tok == "0" || tok == "no") return false;
  throw ConfigError(ConfigErrorKind::Parse, key, "key '" + key + "': bad boolean '" + tok + "'");
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

[[noreturn]] void range_error(const std::string& key, const std::string& what) {
  throw ConfigError(ConfigErrorKind::Range, key, "key '" + key + "': " + what);
}

}  // namespace

std::vector<double> RunConfig::resolve_h_list() const {
  if (!task.h.empty()) return task.h;
  std::vector<double> out;
  if (!task.r.empty()) {
    const double m = family.metric_kind == MetricKind::Euclidean ? 0.0 : family.m;
    for (double r : task.r) out.push_back(schwarzschild_mean_curvature(m, r));
    return out;
  }
  double h = task.h_start;
  for (int i = 0; i < task.h_count; ++i, h *= solver.newton.h_ratio) out.push_back(h);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  bool saw_pert_section = false;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(ConfigErrorKind::Parse, "",
                          "line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "family" && section != "perturbation" && section != "solver" &&
          section != "task")
        throw ConfigError(ConfigErrorKind::Schema, section, "unknown section '" + section + "'");
      if (section == "perturbation") saw_pert_section = true;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigErrorKind::Parse, "",
                        "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(ConfigErrorKind::Parse, key,
                        "line " + std::to_string(lineno) + ": empty key or value");

    if (section.empty()) {
      if (key == "schema") {
        cfg.schema = int(parse_int(key, val));
        if (cfg.schema != 1) range_error(key, "unsupported schema version");
      } else {
        throw ConfigError(ConfigErrorKind::Schema, key, "unknown top-level key '" + key + "'");
      }
    } else if (section == "family") {
      if (key == "mass") cfg.family.m = parse_double(key, val);
      else if (key == "delta") cfg.family.delta = parse_double(key, val);
      else if (key == "sigma") cfg.family.sigma = parse_double(key, val);
      else if (key == "eta") cfg.family.perturbation.eta = parse_double(key, val);
      else if (key == "tau") cfg.family.tau = parse_double(key, val);
      else if (key == "metric") {
        if (val == "euclidean") cfg.family.metric_kind = MetricKind::Euclidean;
        else if (val == "schwarzschild") cfg.family.metric_kind = MetricKind::Schwarzschild;
        else if (val == "schwarzschild_plus_perturbation")
          cfg.family.metric_kind = MetricKind::SchwarzschildPlusPerturbation;
        else range_error(key, "unknown metric kind '" + val + "'");
      } else if (key == "k") {
        if (val == "zero") cfg.family.k_kind = KKind::Zero;
        else if (val == "york") cfg.family.k_kind = KKind::York;
        else if (val == "corvino_schoen") cfg.family.k_kind = KKind::CorvinoSchoen;
        else range_error(key, "unknown k kind '" + val + "'");
      } else if (key == "momentum") {
        auto toks = split_ws(val);
        if (toks.size() != 3) range_error(key, "momentum needs 3 components");
        for (int i = 0; i < 3; ++i) cfg.family.momentum[i] = parse_double(key, toks[i]);
      } else if (key == "york_coefficient") {
        cfg.family.york_coefficient = int(parse_int(key, val));
        if (cfg.family.york_coefficient != 1 && cfg.family.york_coefficient != 2)
          range_error(key, "york coefficient must be 1 or 2");
      } else if (key == "branch") {
        if (val == "plus") cfg.family.branch = SignBranch::Plus;
        else if (val == "minus") cfg.family.branch = SignBranch::Minus;
        else range_error(key, "branch must be plus or minus");
      } else {
        throw ConfigError(ConfigErrorKind::Schema, key, "unknown family key '" + key + "'");
      }
    } else if (section == "perturbation") {
      if (key == "term") {
        auto toks = split_ws(val);
        if (toks.size() != 9)
          range_error(key, "term needs 9 numbers: c l m M11 M12 M13 M22 M23 M33");
        PerturbationTerm t;
        t.c = parse_double(key, toks[0]);
        t.l = int(parse_int(key, toks[1]));
        t.m = int(parse_int(key, toks[2]));
        if (t.l < 0 || std::abs(t.m) > t.l) range_error(key, "invalid (l, m) in term");
        double M11 = parse_double(key, toks[3]), M12 = parse_double(key, toks[4]);
        double M13 = parse_double(key, toks[5]), M22 = parse_double(key, toks[6]);
        double M23 = parse_double(key, toks[7]), M33 = parse_double(key, toks[8]);
        t.M << M11, M12, M13, M12, M22, M23, M13, M23, M33;
        cfg.family.perturbation.terms.push_back(t);
      } else {
        throw ConfigError(ConfigErrorKind::Schema, key, "unknown perturbation key '" + key + "'");
      }
    } else if (section == "solver") {
      if (key == "L") {
        cfg.solver.L = int(parse_int(key, val));
        if (cfg.solver.L < 7 || cfg.solver.L > 127) range_error(key, "L must be in [7,127]");
      } else if (key == "tolerance") {
        cfg.solver.newton.tolerance = parse_double(key, val);
        if (cfg.solver.newton.tolerance < 1e-13) range_error(key, "tolerance below 1e-13");
      } else if (key == "max_iterations") {
        cfg.solver.newton.max_iterations = int(parse_int(key, val));
        if (cfg.solver.newton.max_iterations <= 0) range_error(key, "must be positive");
      } else if (key == "step_halving") {
        cfg.solver.newton.step_halving = int(parse_int(key, val));
        if (cfg.solver.newton.step_halving <= 0) range_error(key, "must be positive");
      } else if (key == "dtau") {
        cfg.solver.newton.dtau = parse_double(key, val);
        if (cfg.solver.newton.dtau <= 0.0 || cfg.solver.newton.dtau > 1.0)
          range_error(key, "dtau must lie in (0,1]");
      } else if (key == "h_ratio") {
        cfg.solver.newton.h_ratio = parse_double(key, val);
        if (cfg.solver.newton.h_ratio <= 0.0 || cfg.solver.newton.h_ratio >= 1.0)
          range_error(key, "h_ratio must lie in (0,1)");
      } else {
        throw ConfigError(ConfigErrorKind::Schema, key, "unknown solver key '" + key + "'");
      }
    } else if (section == "task") {
      if (key == "h") {
        for (const auto& t : split_ws(val)) {
          double h = parse_double(key, t);
          if (!(h > 0.0)) range_error(key, "h values must be positive");
          cfg.task.h.push_back(h);
        }
      } else if (key == "r") {
        for (const auto& t : split_ws(val)) {
          double r = parse_double(key, t);
          if (!(r > 0.0)) range_error(key, "r values must be positive");
          cfg.task.r.push_back(r);
        }
      } else if (key == "h_start") {
        cfg.task.h_start = parse_double(key, val);
        if (!(cfg.task.h_start > 0.0)) range_error(key, "h_start must be positive");
      } else if (key == "h_count") {
        cfg.task.h_count = int(parse_int(key, val));
        if (cfg.task.h_count < 1) range_error(key, "h_count must be at least 1");
      } else if (key == "kappa") {
        for (const auto& t : split_ws(val)) {
          const std::size_t colon = t.find(':');
          if (colon == std::string::npos)
            throw ConfigError(ConfigErrorKind::Parse, key, "kappa knots are h:tau pairs");
          double h = parse_double(key, t.substr(0, colon));
          double tau = parse_double(key, t.substr(colon + 1));
          if (!(h > 0.0)) range_error(key, "kappa h must be positive");
          if (tau < 0.0 || tau > 1.0) range_error(key, "kappa tau must lie in [0,1]");
          cfg.task.kappa.emplace_back(h, tau);
        }
      } else if (key == "output") {
        cfg.task.output = val;
      } else if (key == "strict") {
        cfg.task.strict = parse_bool(key, val);
      } else if (key == "seed") {
        cfg.task.seed = std::uint64_t(parse_int(key, val));
      } else if (key == "momentum_form") {
        if (val == "york") cfg.task.momentum_form = MomentumForm::York;
        else if (val == "corvino_schoen") cfg.task.momentum_form = MomentumForm::CorvinoSchoen;
        else range_error(key, "momentum_form must be york or corvino_schoen");
      } else {
        throw ConfigError(ConfigErrorKind::Schema, key, "unknown task key '" + key + "'");
      }
    }
  }

  // cross-field validation, naming keys
  if (cfg.family.metric_kind != MetricKind::Euclidean && !(cfg.family.m > 0.0))
    range_error("mass", "must be positive for non-Euclidean metrics");
  if (!(cfg.family.sigma > 0.0)) range_error("sigma", "must be positive");
  if (cfg.family.delta < 0.0) range_error("delta", "must be nonnegative");
  if (cfg.family.tau < 0.0 || cfg.family.tau > 1.0) range_error("tau", "must lie in [0,1]");
  if (cfg.family.perturbation.eta < 0.0) range_error("eta", "must be nonnegative");
  if (cfg.family.metric_kind == MetricKind::SchwarzschildPlusPerturbation &&
      cfg.family.perturbation.terms.empty())
    range_error("term", "perturbed metric requires at least one perturbation term");
  if (saw_pert_section && cfg.family.metric_kind != MetricKind::SchwarzschildPlusPerturbation)
    range_error("metric", "perturbation terms given but metric is not perturbed");

  if (!cfg.family.perturbation.terms.empty()) normalize_perturbation(cfg.family);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(ConfigErrorKind::Parse, "", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pmcf
