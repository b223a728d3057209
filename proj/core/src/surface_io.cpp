#include "pmcf/surface_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pmcf {

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {
std::string format_vec(const Vec3& v) {
  return format_float(v[0]) + " " + format_float(v[1]) + " " + format_float(v[2]);
}
}  // namespace

SurfaceFileData make_surface_file(const SolveResult& result, const DataFamily& family) {
  SurfaceFileData d;
  d.fingerprint = family.fingerprint();
  d.L = result.surface.grid->degree();
  d.h = result.h;
  d.tau = result.tau;
  d.branch = family.branch;
  d.coeffs = result.surface.grid->analyze(ScalarField(result.surface.grid, result.surface.u)).a;
  d.summary = result.summary;
  d.iterations = result.iterations;
  d.residual = result.residual_history.empty() ? 0.0 : result.residual_history.back();
  return d;
}

namespace {

void put_flags(std::ostream& os, const char* name, const ConditionFlags& f) {
  os << name << " = " << int(f.c1) << " " << int(f.c2) << " " << int(f.c3) << " " << int(f.c4)
     << "\n";
  os << name << "_margins = " << format_float(f.margin1) << " " << format_float(f.margin2)
     << " " << format_float(f.margin3) << " " << format_float(f.margin4) << "\n";
}

}  // namespace

void write_surface(const SurfaceFileData& d, const std::string& path) {
  std::ostringstream os;
  char fp[32];
  std::snprintf(fp, sizeof fp, "0x%016" PRIx64, d.fingerprint);
  os << "pmcf-surface\n";
  os << "schema = " << d.schema << "\n";
  os << "fingerprint = " << fp << "\n";
  os << "L = " << d.L << "\n";
  os << "h = " << format_float(d.h) << "\n";
  os << "tau = " << format_float(d.tau) << "\n";
  os << "branch = " << (d.branch == SignBranch::Plus ? "plus" : "minus") << "\n";
  os << "iterations = " << d.iterations << "\n";
  os << "residual = " << format_float(d.residual) << "\n";
  os << "coefficients = " << d.coeffs.size() << "\n";
  for (Eigen::Index i = 0; i < d.coeffs.size(); ++i) os << format_float(d.coeffs[i]) << "\n";
  const SurfaceSummary& s = d.summary;
  os << "summary\n";
  os << "area_g = " << format_float(s.area_g) << "\n";
  os << "area_e = " << format_float(s.area_e) << "\n";
  os << "R_e = " << format_float(s.R_e) << "\n";
  os << "R_geom = " << format_float(s.R_geom) << "\n";
  os << "r_min = " << format_float(s.r_min) << "\n";
  os << "a_e = " << format_vec(s.a_e) << "\n";
  os << "a_g = " << format_vec(s.a_g) << "\n";
  os << "m_H = " << format_float(s.hawking) << "\n";
  os << "aring_l2 = " << format_float(s.aring_l2) << "\n";
  os << "grad_aring_l2 = " << format_float(s.grad_aring_l2) << "\n";
  os << "hp_min = " << format_float(s.hp_min) << "\n";
  os << "hp_max = " << format_float(s.hp_max) << "\n";
  os << "convexity_margin = " << format_float(s.convexity_margin) << "\n";
  put_flags(os, "flags_c", s.flags_c);
  put_flags(os, "flags_b", s.flags_b);
  os << "phi_bar = " << format_float(s.phi_bar) << "\n";
  os << "H_bar = " << format_float(s.H_bar) << "\n";
  write_text_file(path, os.str());
}

namespace {

struct LineReader {
  std::istringstream in;
  std::string path;
  explicit LineReader(const std::string& text, std::string p) : in(text), path(std::move(p)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in, line))
      throw ConfigError(ConfigErrorKind::Parse, "", path + ": truncated surface file");
    return line;
  }
  // reads "key = rest", checks key
  std::string expect(const std::string& key) {
    std::string line = next();
    const std::string prefix = key + " = ";
    if (line.rfind(prefix, 0) != 0)
      throw ConfigError(ConfigErrorKind::Schema, key,
                        path + ": expected '" + key + "', got '" + line + "'");
    return line.substr(prefix.size());
  }
};

double to_double(const std::string& s, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw ConfigError(ConfigErrorKind::Parse, key, "bad float in surface file: " + s);
  return v;
}

Vec3 to_vec(const std::string& s, const std::string& key) {
  std::istringstream is(s);
  Vec3 v;
  if (!(is >> v[0] >> v[1] >> v[2]))
    throw ConfigError(ConfigErrorKind::Parse, key, "bad vector in surface file: " + s);
  return v;
}

void get_flags(LineReader& r, const char* name, ConditionFlags& f) {
  std::istringstream is(r.expect(name));
  int a, b, c, d;
  is >> a >> b >> c >> d;
  f.c1 = a;
  f.c2 = b;
  f.c3 = c;
  f.c4 = d;
  std::istringstream im(r.expect(std::string(name) + "_margins"));
  im >> f.margin1 >> f.margin2 >> f.margin3 >> f.margin4;
}

}  // namespace

SurfaceFileData load_surface(const std::string& path) {
  LineReader r(read_text_file(path), path);
  if (r.next() != "pmcf-surface")
    throw ConfigError(ConfigErrorKind::Schema, "", path + ": not a pmcf surface file");
  SurfaceFileData d;
  d.schema = int(to_double(r.expect("schema"), "schema"));
  if (d.schema != 1)
    throw ConfigError(ConfigErrorKind::Schema, "schema", path + ": unsupported schema");
  d.fingerprint = std::strtoull(r.expect("fingerprint").c_str(), nullptr, 16);
  d.L = int(to_double(r.expect("L"), "L"));
  d.h = to_double(r.expect("h"), "h");
  d.tau = to_double(r.expect("tau"), "tau");
  const std::string branch = r.expect("branch");
  if (branch == "plus") d.branch = SignBranch::Plus;
  else if (branch == "minus") d.branch = SignBranch::Minus;
  else throw ConfigError(ConfigErrorKind::Schema, "branch", path + ": bad branch");
  d.iterations = int(to_double(r.expect("iterations"), "iterations"));
  d.residual = to_double(r.expect("residual"), "residual");
  const int n = int(to_double(r.expect("coefficients"), "coefficients"));
  if (n != (d.L + 1) * (d.L + 1))
    throw ConfigError(ConfigErrorKind::Schema, "coefficients",
                      path + ": coefficient count does not match L");
  d.coeffs.resize(n);
  for (int i = 0; i < n; ++i) d.coeffs[i] = to_double(r.next(), "coefficients");
  if (r.next() != "summary")
    throw ConfigError(ConfigErrorKind::Schema, "summary", path + ": missing summary block");
  SurfaceSummary& s = d.summary;
  s.area_g = to_double(r.expect("area_g"), "area_g");
  s.area_e = to_double(r.expect("area_e"), "area_e");
  s.R_e = to_double(r.expect("R_e"), "R_e");
  s.R_geom = to_double(r.expect("R_geom"), "R_geom");
  s.r_min = to_double(r.expect("r_min"), "r_min");
  s.a_e = to_vec(r.expect("a_e"), "a_e");
  s.a_g = to_vec(r.expect("a_g"), "a_g");
  s.hawking = to_double(r.expect("m_H"), "m_H");
  s.aring_l2 = to_double(r.expect("aring_l2"), "aring_l2");
  s.grad_aring_l2 = to_double(r.expect("grad_aring_l2"), "grad_aring_l2");
  s.hp_min = to_double(r.expect("hp_min"), "hp_min");
  s.hp_max = to_double(r.expect("hp_max"), "hp_max");
  s.convexity_margin = to_double(r.expect("convexity_margin"), "convexity_margin");
  get_flags(r, "flags_c", s.flags_c);
  get_flags(r, "flags_b", s.flags_b);
  s.phi_bar = to_double(r.expect("phi_bar"), "phi_bar");
  s.H_bar = to_double(r.expect("H_bar"), "H_bar");
  return d;
}

GraphSurface to_graph_surface(const SurfaceFileData& data, const GridPtr& grid) {
  if (data.L != grid->degree())
    throw ConfigError(ConfigErrorKind::Schema, "L",
                      "surface file degree does not match the run grid");
  HarmonicCoeffs c{data.L, data.coeffs};
  return GraphSurface(grid, grid->synthesize(c).v);
}

bool fingerprint_matches(const SurfaceFileData& data, const DataFamily& family) {
  return data.fingerprint == family.fingerprint();
}

std::string summary_csv_header() {
  return "h,tau,R_e,r_min,a_e_x,a_e_y,a_e_z,a_g_x,a_g_y,a_g_z,m_H,aring_l2,"
         "hp_min,hp_max,convexity_margin,C1,C2,C3,C4,iterations,residual";
}

std::string summary_csv_row(double h, double tau, const SolveResult& r) {
  const SurfaceSummary& s = r.summary;
  std::ostringstream os;
  os << format_float(h) << "," << format_float(tau) << "," << format_float(s.R_e) << ","
     << format_float(s.r_min) << "," << format_float(s.a_e[0]) << "," << format_float(s.a_e[1])
     << "," << format_float(s.a_e[2]) << "," << format_float(s.a_g[0]) << ","
     << format_float(s.a_g[1]) << "," << format_float(s.a_g[2]) << ","
     << format_float(s.hawking) << "," << format_float(s.aring_l2) << ","
     << format_float(s.hp_min) << "," << format_float(s.hp_max) << ","
     << format_float(s.convexity_margin) << "," << int(s.flags_c.c1) << ","
     << int(s.flags_c.c2) << "," << int(s.flags_c.c3) << "," << int(s.flags_c.c4) << ","
     << r.iterations << ","
     << format_float(r.residual_history.empty() ? 0.0 : r.residual_history.back());
  return os.str();
}

std::string foliation_csv(const FoliationResult& fol) {
  std::ostringstream os;
  os << summary_csv_header() << "\n";
  for (const auto& [h, res] : fol.members)
    os << summary_csv_row(h, res.tau, res) << "\n";
  return os.str();
}

std::string drift_csv(const DriftSeries& series) {
  std::ostringstream os;
  os << "h,R_e,a_e_x,a_e_y,a_e_z,a_g_x,a_g_y,a_g_z,drift_x,drift_y,drift_z,"
        "center_diff_x,center_diff_y,center_diff_z\n";
  for (const auto& r : series.rows) {
    os << format_float(r.h) << "," << format_float(r.R_e);
    for (int k = 0; k < 3; ++k) os << "," << format_float(r.a_e[k]);
    for (int k = 0; k < 3; ++k) os << "," << format_float(r.a_g[k]);
    for (int k = 0; k < 3; ++k) os << "," << format_float(r.a_e_over_Re[k]);
    for (int k = 0; k < 3; ++k) os << "," << format_float(r.center_diff[k]);
    os << "\n";
  }
  return os.str();
}

std::string gap_csv(const std::vector<GapRow>& rows) {
  std::ostringstream os;
  os << "R_e,mu1,bound_6m_Re3,ratio\n";
  for (const auto& r : rows)
    os << format_float(r.R_e) << "," << format_float(r.mu1) << "," << format_float(r.bound)
       << "," << format_float(r.ratio) << "\n";
  return os.str();
}

std::string momentum_report(const MomentumEstimate& est, double m, double delta) {
  nlohmann::json j;
  j["tau_hat"] = est.tau_hat;
  j["direction"] = {est.direction[0], est.direction[1], est.direction[2]};
  j["p_hat"] = {est.p_hat[0], est.p_hat[1], est.p_hat[2]};
  j["magnitude"] = est.p_hat.norm();
  j["form"] = est.form == MomentumForm::York ? "york" : "corvino_schoen";
  j["branch"] = est.branch == SignBranch::Plus ? "plus" : "minus";
  j["fit_residual"] = est.fit_residual;
  j["mass"] = m;
  j["delta"] = delta;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << content;
  if (!os) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open for reading: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace pmcf
