// Command-line driver: solve | foliate | momentum | gap | verify.
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pmcf/config.hpp"
#include "pmcf/momentum.hpp"
#include "pmcf/solver.hpp"
#include "pmcf/surface_io.hpp"

namespace fs = std::filesystem;
using namespace pmcf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitSolver = 2;
constexpr int kExitFlags = 3;
constexpr int kExitParse = 4;
constexpr int kExitSchema = 5;
constexpr int kExitRange = 6;

void usage() {
  std::fprintf(stderr,
               "usage: pmcf <solve|foliate|momentum|gap|verify> <config> [--output DIR]\n");
}

std::string surface_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "surface_%03zu.pmcf", index);
  return buf;
}

void prepare_output(const RunConfig& cfg, const std::string& config_text) {
  fs::create_directories(cfg.task.output);
  write_text_file((fs::path(cfg.task.output) / "run.cfg").string(), config_text);
}

// tau-sweep from the exact Schwarzschild sphere to the family's tau at h.
SolveResult solve_at(const GridPtr& grid, const RunConfig& cfg, double h) {
  std::vector<std::pair<double, double>> kappa;
  const double target = cfg.family.tau;
  const double dtau = cfg.solver.newton.dtau;
  kappa.emplace_back(h, 0.0);
  const int steps = std::max(1, int(std::ceil(target / dtau)));
  for (int i = 1; i <= steps; ++i)
    kappa.emplace_back(h, std::min(target, i * dtau));
  if (target == 0.0) kappa = {{h, 0.0}};
  auto sols = continuation(grid, cfg.family, kappa, cfg.solver.newton);
  return sols.back();
}

int check_strict_flags(const RunConfig& cfg, const SolveResult& r) {
  if (cfg.task.strict && !r.summary.flags_c.all()) {
    std::fprintf(stderr, "condition flags C1-C4 not all satisfied (strict mode)\n");
    return kExitFlags;
  }
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg, const std::string& text) {
  prepare_output(cfg, text);
  const GridPtr grid = SphericalGrid::make(cfg.solver.L);
  SolveResult r;
  if (!cfg.task.kappa.empty()) {
    // explicit continuation curve from the config
    r = continuation(grid, cfg.family, cfg.task.kappa, cfg.solver.newton).back();
  } else {
    auto h_list = cfg.resolve_h_list();
    if (h_list.empty())
      throw ConfigError(ConfigErrorKind::Range, "h", "solve needs h, r, or kappa");
    r = solve_at(grid, cfg, h_list.front());
  }
  write_surface(make_surface_file(r, cfg.family),
                (fs::path(cfg.task.output) / "surface.pmcf").string());
  write_text_file((fs::path(cfg.task.output) / "solve.csv").string(),
                  summary_csv_header() + "\n" + summary_csv_row(r.h, r.tau, r) + "\n");
  std::printf("solved h=%s R_e=%s m_H=%s iterations=%d residual=%s\n",
              format_float(r.h).c_str(), format_float(r.summary.R_e).c_str(),
              format_float(r.summary.hawking).c_str(), r.iterations,
              format_float(r.residual_history.back()).c_str());
  return check_strict_flags(cfg, r);
}

FoliationResult run_foliation(const GridPtr& grid, const RunConfig& cfg) {
  auto h_list = cfg.resolve_h_list();
  if (h_list.size() < 2)
    throw ConfigError(ConfigErrorKind::Range, "h", "foliate needs at least 2 h values");
  return foliate(grid, cfg.family, h_list, cfg.solver.newton);
}

int write_foliation_outputs(const RunConfig& cfg, const FoliationResult& fol) {
  write_text_file((fs::path(cfg.task.output) / "foliation.csv").string(), foliation_csv(fol));
  for (std::size_t i = 0; i < fol.members.size(); ++i)
    write_surface(make_surface_file(fol.members[i].second, cfg.family),
                  (fs::path(cfg.task.output) / surface_filename(i)).string());
  int rc = kExitOk;
  for (const auto& [h, r] : fol.members) {
    int c = check_strict_flags(cfg, r);
    if (c != kExitOk) rc = c;
  }
  return rc;
}

int cmd_foliate(const RunConfig& cfg, const std::string& text) {
  prepare_output(cfg, text);
  const GridPtr grid = SphericalGrid::make(cfg.solver.L);
  FoliationResult fol = run_foliation(grid, cfg);
  int rc = write_foliation_outputs(cfg, fol);
  std::printf("foliation: %zu members, R_e from %s to %s\n", fol.members.size(),
              format_float(fol.members.front().second.summary.R_e).c_str(),
              format_float(fol.members.back().second.summary.R_e).c_str());
  for (const auto& p : fol.pairs)
    std::printf("  pair h=%s -> h=%s lapse %s nesting margin %s\n",
                format_float(p.h_from).c_str(), format_float(p.h_to).c_str(),
                p.lapse_sign_definite ? (p.lapse_sign > 0 ? "positive" : "negative")
                                      : "indefinite",
                format_float(p.nesting_margin).c_str());
  return rc;
}

int cmd_momentum(const RunConfig& cfg, const std::string& text) {
  prepare_output(cfg, text);
  const GridPtr grid = SphericalGrid::make(cfg.solver.L);
  FoliationResult fol = run_foliation(grid, cfg);
  int rc = write_foliation_outputs(cfg, fol);
  DriftSeries series = center_drift_series(fol);
  write_text_file((fs::path(cfg.task.output) / "drift.csv").string(), drift_csv(series));
  const double m = cfg.family.metric_kind == MetricKind::Euclidean ? 0.0 : cfg.family.m;
  MomentumEstimate est = recover_momentum(series, m, cfg.family.delta,
                                          cfg.task.momentum_form, cfg.family.branch);
  const std::string report = momentum_report(est, m, cfg.family.delta);
  write_text_file((fs::path(cfg.task.output) / "momentum.json").string(), report);
  std::fputs(report.c_str(), stdout);
  return rc;
}

int cmd_gap(const RunConfig& cfg, const std::string& text) {
  auto h_list = cfg.resolve_h_list();
  if (h_list.empty()) throw ConfigError(ConfigErrorKind::Range, "h", "gap needs h or r values");
  prepare_output(cfg, text);
  const GridPtr grid = SphericalGrid::make(cfg.solver.L);
  const double m = cfg.family.metric_kind == MetricKind::Euclidean ? 0.0 : cfg.family.m;
  std::vector<GapRow> rows;
  std::printf("%14s %22s %22s %10s\n", "R_e", "mu1", "6m/R_e^3", "ratio");
  for (double h : h_list) {
    SolveResult r = solve_at(grid, cfg, h);
    SurfaceGeometry geom = compute_geometry(r.surface, cfg.family);
    LinearizedOperator op = assemble_linearization(geom, cfg.family);
    GapRow row;
    row.R_e = r.summary.R_e;
    row.mu1 = spectral_gap(op, geom);
    row.bound = 6.0 * m / std::pow(row.R_e, 3);
    row.ratio = row.bound != 0.0 ? row.mu1 / row.bound : 0.0;
    rows.push_back(row);
    std::printf("%14.6g %22.15g %22.15g %10.6g\n", row.R_e, row.mu1, row.bound, row.ratio);
  }
  write_text_file((fs::path(cfg.task.output) / "gap.csv").string(), gap_csv(rows));
  return kExitOk;
}

struct VerifyReport {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
  }
};

int cmd_verify(const RunConfig& cfg, const std::string&) {
  VerifyReport rep;
  const GridPtr grid = SphericalGrid::make(std::min(cfg.solver.L, 15));
  const DataFamily& fam = cfg.family;
  const double m = fam.metric_kind == MetricKind::Euclidean ? 0.0 : fam.m;
  std::mt19937_64 rng(cfg.task.seed ? cfg.task.seed : 20240817ull);

  rep.check("grid: quadrature weights sum to 4pi",
            std::abs(grid->weights().sum() - 4.0 * M_PI) < 1e-12);

  {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    HarmonicCoeffs c;
    c.L = grid->degree();
    c.a.setZero(grid->ncoeff());
    for (int i = 0; i < grid->ncoeff(); ++i) c.a[i] = dist(rng);
    ScalarField f = grid->synthesize(c);
    HarmonicCoeffs back = grid->analyze(f);
    rep.check("transform: band-limited round trip",
              (back.a - c.a).cwiseAbs().maxCoeff() < 1e-12);
    const double parseval =
        std::abs(c.a.squaredNorm() - quadrature(ScalarField(f.grid, f.v * f.v)));
    rep.check("transform: Parseval identity", parseval < 1e-9 * c.a.squaredNorm());
  }

  {
    auto [d1, d2] = surface_derivative(grid->constant(1.0));
    rep.check("derivative: annihilates constants",
              d1.v.abs().maxCoeff() < 1e-13 && d2.v.abs().maxCoeff() < 1e-13);
  }

  {
    // off-center quadrature against the closed-form radial integral; needs
    // the production band limit to resolve the integrand to 1e-10
    const GridPtr gq = SphericalGrid::make(31);
    const double R = 2.0, a = 1.0;
    Eigen::ArrayXd integ(gq->nodes());
    for (int n = 0; n < gq->nodes(); ++n) {
      const double st = gq->sin_theta()[n], ct = gq->cos_theta()[n];
      const double ph = gq->phi()[n];
      const Vec3 p(st * std::cos(ph), st * std::sin(ph), ct);
      integ[n] = std::pow((Vec3(0, 0, a) + R * p).norm(), -3.0);
    }
    const double numeric = quadrature(ScalarField(gq, integ), gq->constant(R * R));
    rep.check("quadrature: off-center sphere r^-3 closed form",
              std::abs(numeric - 4.0 * M_PI * R / (R * R - a * a)) < 1e-10);
  }

  const Vec3 probe = Vec3(0.4, -0.35, 0.2).normalized() * std::max(8.0, 4.0 * fam.sigma);
  {
    const MetricEval me = eval_metric(fam, probe);
    rep.check("metric: g g^{-1} = identity",
              (me.g * me.g_inv - Mat3::Identity()).norm() < 1e-12);
    if (fam.metric_kind != MetricKind::SchwarzschildPlusPerturbation) {
      const double r = probe.norm();
      const Vec3 rho = probe / r;
      const Mat3 expected = m == 0.0 ? Mat3::Zero()
                                     : Mat3(m / (r * r * r) / (me.phi * me.phi) *
                                            (Mat3::Identity() - 3.0 * rho * rho.transpose()));
      rep.check("metric: Ricci closed form",
                (me.ricci - expected).norm() < 1e-10 && std::abs(me.scal) < 1e-10);
    } else {
      const DecayBounds b = sampled_decay_bounds(fam, std::max(3.0, 3.0 * fam.sigma), 150.0);
      rep.check("metric: perturbation decay bounds within eta",
                b.g <= fam.perturbation.eta && b.christoffel <= fam.perturbation.eta &&
                    b.ricci <= fam.perturbation.eta);
    }
    // FD Christoffel comparison
    const double h = 1e-4 * probe.norm();
    double sup = 0.0;
    std::array<Mat3, 3> dg;
    for (int k = 0; k < 3; ++k) {
      Vec3 xp = probe, xm = probe;
      xp[k] += h;
      xm[k] -= h;
      dg[k] = (eval_metric(fam, xp).g - eval_metric(fam, xm).g) / (2.0 * h);
    }
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double v = 0.0;
          for (int l = 0; l < 3; ++l)
            v += 0.5 * me.g_inv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          sup = std::max(sup, std::abs(v - me.christoffel[k](i, j)));
        }
    rep.check("metric: Christoffels match finite differences", sup < 1e-7);
  }

  {
    const ExtrinsicEval ee = eval_extrinsic(fam, probe);
    rep.check("K: symmetric", (ee.K - ee.K.transpose()).norm() == 0.0);
    if (fam.k_kind == KKind::Zero)
      rep.check("K: zero family vanishes", ee.K.norm() == 0.0 && ee.trK == 0.0);
    if (fam.k_kind == KKind::York && fam.york_coefficient == 1 && fam.tau > 0)
      rep.check("K: york leading term trace-free", std::abs(ee.K.trace()) < 1e-12);
    const ExtrinsicEval e0 = eval_extrinsic(interpolate_data(fam, 0.0), probe);
    rep.check("interpolation: tau=0 has K=0", e0.K.norm() == 0.0);
  }

  {
    const double r0 = std::max(6.0, 3.0 * fam.sigma);
    const SurfaceGeometry geom = compute_geometry(GraphSurface::sphere(grid, r0), fam);
    if (fam.metric_kind != MetricKind::SchwarzschildPlusPerturbation) {
      const double Hexp = m == 0.0 ? 2.0 / r0 : schwarzschild_mean_curvature(m, r0);
      rep.check("geometry: sphere mean curvature closed form",
                (geom.H - Hexp).abs().maxCoeff() < 1e-9);
      rep.check("geometry: Hawking mass of centered sphere",
                std::abs(hawking_mass(geom) - m) < 1e-8);
    } else {
      rep.check("geometry: Hawking mass near m on perturbed sphere",
                std::abs(hawking_mass(geom) - m) < 0.2 * std::max(m, 1e-6));
    }
    // integrated linearization identity on the probe sphere
    HarmonicCoeffs c;
    c.L = grid->degree();
    c.a.setZero(grid->ncoeff());
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int l = 0; l <= 6; ++l)
      for (int mm = -l; mm <= l; ++mm) c.a[HarmonicCoeffs::index(l, mm)] = dist(rng);
    auto [direct, decomposed] = quadratic_form(geom, fam, grid->synthesize(c));
    rep.check("linearization: quadratic form identity",
              std::abs(direct - decomposed) <= 1e-6 * std::abs(direct));
  }

  {
    bool mono = true;
    double prev = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double t = tau_of_v(i / 40.0, MomentumForm::York);
      if (t <= prev || t > 1.0) mono = false;
      prev = t;
    }
    rep.check("momentum: tau(v) monotone and bounded by 1", mono);
  }

  std::printf("%s\n", rep.failures == 0 ? "verify: all properties pass"
                                        : "verify: FAILURES detected");
  return rep.failures == 0 ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    usage();
    return kExitParse;
  }
  const std::string cmd = argv[1];
  const std::string config_path = argv[2];
  std::string output_override;
  for (int i = 3; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--output" && i + 1 < argc) {
      output_override = argv[++i];
    } else {
      usage();
      return kExitParse;
    }
  }

  try {
    const std::string text = read_text_file(config_path);
    RunConfig cfg = parse_config(text);
    if (!output_override.empty()) cfg.task.output = output_override;

    if (cmd == "solve") return cmd_solve(cfg, text);
    if (cmd == "foliate") return cmd_foliate(cfg, text);
    if (cmd == "momentum") return cmd_momentum(cfg, text);
    if (cmd == "gap") return cmd_gap(cfg, text);
    if (cmd == "verify") return cmd_verify(cfg, text);
    usage();
    return kExitParse;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    switch (e.kind) {
      case ConfigErrorKind::Parse: return kExitParse;
      case ConfigErrorKind::Schema: return kExitSchema;
      case ConfigErrorKind::Range: return kExitRange;
    }
    return kExitParse;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return kExitSolver;
  } catch (const ContinuationError& e) {
    std::fprintf(stderr, "continuation failed: %s (last good h=%g tau=%g)\n", e.what(),
                 e.last_good_h, e.last_good_tau);
    return kExitSolver;
  } catch (const SingularOperatorError& e) {
    std::fprintf(stderr, "linear solve failed: %s (smallest singular value %g)\n", e.what(),
                 e.smallest_singular_value);
    return kExitSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
}
