#include "pmcf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "linalg.hpp"

namespace pmcf {

namespace {
constexpr double kPi = 3.14159265358979323846;

double effective_mass(const DataFamily& f) {
  return f.metric_kind == MetricKind::Euclidean ? 0.0 : f.m;
}

// PMCF_VERBOSE=1 prints per-iteration progress to stderr.
bool verbose() {
  static const bool on = [] {
    const char* v = std::getenv("PMCF_VERBOSE");
    return v != nullptr && v[0] != '\0' && v[0] != '0';
  }();
  return on;
}
}  // namespace

void NewtonSettings::validate() const {
  if (tolerance < 1e-13) throw Error("newton tolerance below 1e-13");
  if (max_iterations <= 0 || step_halving <= 0) throw Error("newton iteration limits must be positive");
  if (dtau <= 0.0 || dtau > 1.0) throw Error("continuation dtau must lie in (0,1]");
  if (h_ratio <= 0.0 || h_ratio >= 1.0) throw Error("h ratio must lie in (0,1)");
}

double schwarzschild_mean_curvature(double m, double r) {
  const double phi = 1.0 + 0.5 * m / r;
  return (2.0 / r - m / (r * r)) / (phi * phi * phi);
}

double initial_radius(double m, double h) {
  if (!(h > 0.0)) throw Error("initial_radius: h must be positive");
  if (m == 0.0) return 2.0 / h;
  if (m < 0.0) throw Error("initial_radius: mass must be nonnegative");

  // H^S has its maximum at r1 = m (2 + sqrt(3)) / 2 and decreases beyond it.
  const double r1 = 0.5 * m * (2.0 + std::sqrt(3.0));
  if (h >= schwarzschild_mean_curvature(m, r1))
    throw Error("initial_radius: h too large, no root on the monotone branch");

  double lo = r1, hi = std::max(2.0 / h + 2.0 * m, 4.0 * r1);
  while (schwarzschild_mean_curvature(m, hi) > h) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (schwarzschild_mean_curvature(m, mid) > h)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {  // Newton polish
    const double phi = 1.0 + 0.5 * m / r;
    const double dphi = -0.5 * m / (r * r);
    const double base = 2.0 / r - m / (r * r);
    const double H = base / (phi * phi * phi);
    const double dH = (-2.0 / (r * r) + 2.0 * m / (r * r * r)) / (phi * phi * phi) -
                      3.0 * base * dphi / (phi * phi * phi * phi);
    r -= (H - h) / dH;
  }
  return r;
}

ScalarField LinearizedOperator::apply(const ScalarField& f) const {
  HarmonicCoeffs c = grid->analyze(f);
  return ScalarField(grid, (coeff_to_node * c.a).array());
}

LinearizedOperator assemble_linearization(const SurfaceGeometry& geom,
                                          const DataFamily& family) {
  const auto& grid = *geom.grid;
  const double sgn = branch_sign(family.branch);

  // potential: |A|^2 + Ric(nu,nu) ± grad_nu K(nu,nu) ∓ grad_nu tr K
  Eigen::ArrayXd pot =
      geom.normA2 + geom.ric_nu_nu + sgn * (geom.gradK_nu_nu - geom.grad_trK_nu);

  // contracted connection, gamma^{ab} w^d_ab
  Eigen::ArrayXd w1 = geom.ginv11 * geom.wconn[0][0][0] +
                      geom.ginv12 * (geom.wconn[0][0][1] + geom.wconn[0][1][0]) +
                      geom.ginv22 * geom.wconn[0][1][1];
  Eigen::ArrayXd w2 = geom.ginv11 * geom.wconn[1][0][0] +
                      geom.ginv12 * (geom.wconn[1][0][1] + geom.wconn[1][1][0]) +
                      geom.ginv22 * geom.wconn[1][1][1];

  // first-order coefficients: +w^d (from -Lap) and ±2 K(grad f, nu)
  Eigen::ArrayXd b1 = w1 + sgn * 2.0 * (geom.ginv11 * geom.theta1 + geom.ginv12 * geom.theta2);
  Eigen::ArrayXd b2 = w2 + sgn * 2.0 * (geom.ginv12 * geom.theta1 + geom.ginv22 * geom.theta2);

  LinearizedOperator op;
  op.grid = geom.grid;
  op.coeff_to_node =
      (-geom.ginv11).matrix().asDiagonal() * grid.synthesis_matrix(Deriv::D11);
  op.coeff_to_node.noalias() +=
      (-geom.ginv12).matrix().asDiagonal() *
      (grid.synthesis_matrix(Deriv::D12) + grid.synthesis_matrix(Deriv::D21));
  op.coeff_to_node.noalias() +=
      (-geom.ginv22).matrix().asDiagonal() * grid.synthesis_matrix(Deriv::D22);
  op.coeff_to_node.noalias() += b1.matrix().asDiagonal() * grid.synthesis_matrix(Deriv::D1);
  op.coeff_to_node.noalias() += b2.matrix().asDiagonal() * grid.synthesis_matrix(Deriv::D2);
  op.coeff_to_node.noalias() +=
      (-pot).matrix().asDiagonal() * grid.synthesis_matrix(Deriv::Value);

  op.projected = linalg::multiply(grid.analysis_matrix(), op.coeff_to_node);
  return op;
}

namespace {

struct IterationState {
  GraphSurface u;
  SurfaceGeometry geom;
  Eigen::ArrayXd residual_field;
  double residual = 0.0;
};

}  // namespace

SolveResult newton_solve(const GraphSurface& u0, const DataFamily& family, double h,
                         const NewtonSettings& settings) {
  settings.validate();
  family.validate();
  if (!(h > 0.0)) throw Error("newton_solve: h must be positive");

  SolveResult result;
  result.h = h;
  result.tau = family.tau;

  IterationState state{u0, compute_geometry(u0, family), {}, 0.0};
  state.residual_field = h - state.geom.HP;
  state.residual = state.residual_field.abs().maxCoeff();
  result.residual_history.push_back(state.residual);

  const auto& grid = *u0.grid;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    if (state.residual <= settings.tolerance) {
      result.converged = true;
      break;
    }
    LinearizedOperator op = assemble_linearization(state.geom, family);
    Eigen::VectorXd rhs = grid.analysis_matrix() * state.residual_field.matrix();
    Eigen::VectorXd c;
    try {
      c = linalg::least_squares_solve(op.projected, rhs);
    } catch (const Error&) {
      throw SingularOperatorError("linearized operator is singular",
                                  linalg::smallest_singular_value(op.projected));
    }
    if (!c.allFinite())
      throw SingularOperatorError("linearized operator is singular",
                                  linalg::smallest_singular_value(op.projected));

    HarmonicCoeffs hc{grid.degree(), c};
    Eigen::ArrayXd f = grid.synthesize(hc).v;
    Eigen::ArrayXd delta_u = f / state.geom.q;

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= settings.step_halving; ++halving) {
      GraphSurface candidate(u0.grid, state.u.u + lambda * delta_u);
      try {
        SurfaceGeometry geom = compute_geometry(candidate, family);
        Eigen::ArrayXd rf = h - geom.HP;
        double res = rf.abs().maxCoeff();
        if (std::isfinite(res) && res < state.residual) {
          state.u = std::move(candidate);
          state.geom = std::move(geom);
          state.residual_field = std::move(rf);
          state.residual = res;
          accepted = true;
          break;
        }
      } catch (const GraphConditionError&) {
        // shrink the step and retry
      }
      lambda *= 0.5;
    }
    result.iterations = iter + 1;
    if (!accepted)
      throw ConvergenceError("newton_solve: no acceptable step (graph condition or stalled)");
    result.residual_history.push_back(state.residual);
    if (verbose())
      std::fprintf(stderr, "newton h=%.6g tau=%.3g iter %d residual %.3e (step %.3g)\n", h,
                   family.tau, result.iterations, state.residual, lambda);
    if (state.residual <= settings.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    throw ConvergenceError("newton_solve: maximum iterations exceeded");

  result.surface = state.u;
  result.summary = summarize(state.geom, family);
  return result;
}

namespace {

SolveResult walk_segment(const GridPtr& grid, const DataFamily& family,
                         const GraphSurface& from, std::pair<double, double> a,
                         std::pair<double, double> b, const NewtonSettings& settings,
                         int depth) {
  DataFamily fb = interpolate_data(family, b.second);
  try {
    return newton_solve(from, fb, b.first, settings);
  } catch (const Error&) {
    if (depth >= settings.step_halving)
      throw ContinuationError("continuation: segment bisection exhausted", a.first, a.second);
    std::pair<double, double> mid{0.5 * (a.first + b.first), 0.5 * (a.second + b.second)};
    SolveResult sm = walk_segment(grid, family, from, a, mid, settings, depth + 1);
    return walk_segment(grid, family, sm.surface, mid, b, settings, depth + 1);
  }
}

}  // namespace

std::vector<SolveResult> continuation(const GridPtr& grid, const DataFamily& family,
                                      const std::vector<std::pair<double, double>>& kappa,
                                      const NewtonSettings& settings) {
  settings.validate();
  if (kappa.empty()) throw Error("continuation: empty curve");
  if (kappa.front().second != 0.0) throw Error("continuation: curve must start at tau = 0");

  std::vector<SolveResult> out;
  const double r0 = initial_radius(effective_mass(family), kappa.front().first);
  GraphSurface u = GraphSurface::sphere(grid, r0);
  out.push_back(newton_solve(u, interpolate_data(family, 0.0), kappa.front().first, settings));

  for (std::size_t i = 1; i < kappa.size(); ++i) {
    out.push_back(walk_segment(grid, family, out.back().surface, kappa[i - 1], kappa[i],
                               settings, 0));
  }
  return out;
}

FoliationResult foliate(const GridPtr& grid, const DataFamily& family,
                        const std::vector<double>& h_list, const NewtonSettings& settings) {
  settings.validate();
  if (h_list.empty()) throw Error("foliate: empty h list");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0)) throw Error("foliate: h values must be positive");
    if (i > 0 && !(h_list[i] < h_list[i - 1]))
      throw Error("foliate: h list must be strictly decreasing");
  }

  // tau-sweep at the first h, then the h-sweep at tau = 1.
  std::vector<std::pair<double, double>> kappa;
  const double h0 = h_list.front();
  int nsteps = int(std::ceil(1.0 / settings.dtau));
  for (int i = 0; i <= nsteps; ++i)
    kappa.emplace_back(h0, std::min(1.0, i * settings.dtau));
  std::vector<SolveResult> sweep = continuation(grid, family, kappa, settings);

  FoliationResult fol;
  fol.family = family;
  fol.members.emplace_back(h0, sweep.back());
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    std::pair<double, double> a{h_list[i - 1], 1.0}, b{h_list[i], 1.0};
    fol.members.emplace_back(
        h_list[i],
        walk_segment(grid, family, fol.members.back().second.surface, a, b, settings, 0));
  }

  for (std::size_t i = 0; i + 1 < fol.members.size(); ++i) {
    const auto& [ha, ra] = fol.members[i];
    const auto& [hb, rb] = fol.members[i + 1];
    SurfaceGeometry ga = compute_geometry(ra.surface, interpolate_data(family, ra.tau));
    Eigen::ArrayXd du = rb.surface.u - ra.surface.u;
    Eigen::ArrayXd lapse = du * ga.q / (hb - ha);
    FoliationPairRecord rec;
    rec.h_from = ha;
    rec.h_to = hb;
    rec.nesting_margin = du.minCoeff();
    const bool all_pos = (lapse > 0.0).all();
    const bool all_neg = (lapse < 0.0).all();
    rec.lapse_sign_definite = all_pos || all_neg;
    rec.lapse_sign = all_pos ? 1 : (all_neg ? -1 : 0);
    fol.pairs.push_back(rec);
  }
  return fol;
}

double spectral_gap(const LinearizedOperator& op, const SurfaceGeometry& geom) {
  const auto& grid = *geom.grid;
  const int M = grid.ncoeff();

  Eigen::ArrayXd wmu = grid.weights() * geom.dmu;
  const Eigen::MatrixXd& S0 = grid.synthesis_matrix(Deriv::Value);
  Eigen::MatrixXd S0w = wmu.matrix().asDiagonal() * S0;

  Eigen::MatrixXd Q = linalg::multiply_at_b(S0w, op.coeff_to_node);
  Eigen::MatrixXd S = 0.5 * (Q + Q.transpose());
  Eigen::MatrixXd Gram = linalg::multiply_at_b(S0w, S0);
  Eigen::VectorXd d = S0.transpose() * wmu.matrix();

  Eigen::MatrixXd Lc = linalg::cholesky_lower(Gram);
  auto solve_lower = [&](Eigen::MatrixXd B) {
    cblas_dtrsm(CblasColMajor, CblasLeft, CblasLower, CblasNoTrans, CblasNonUnit, M,
                int(B.cols()), 1.0, Lc.data(), M, B.data(), M);
    return B;
  };
  // B = Lc^{-1} S Lc^{-T}
  Eigen::MatrixXd B = solve_lower(S);
  B.transposeInPlace();
  B = solve_lower(B);
  B = 0.5 * (B + B.transpose());

  Eigen::VectorXd qdir = solve_lower(d);
  qdir.normalize();

  // project out the constant direction and push it to a large eigenvalue
  Eigen::VectorXd Bq = B * qdir;
  B -= Bq * qdir.transpose() + qdir * Bq.transpose();
  const double shift = 10.0 * B.cwiseAbs().maxCoeff() + qdir.dot(Bq) + 1.0;
  B += shift * (qdir * qdir.transpose());

  Eigen::VectorXd evals = linalg::sym_eigenvalues(std::move(B));
  return evals[0];
}

std::vector<std::complex<double>> operator_eigenvalues(const LinearizedOperator& op) {
  return linalg::eigenvalues(op.projected);
}

std::pair<double, double> quadratic_form(const SurfaceGeometry& geom,
                                         const DataFamily& family, const ScalarField& f) {
  if (f.grid != geom.grid) throw GridMismatchError("quadratic_form: grid mismatch");
  const auto& grid = *geom.grid;
  const double sgn = branch_sign(family.branch);

  // direct: int f L f dmu assembled pointwise
  HarmonicCoeffs c = grid.analyze(f);
  Eigen::ArrayXd d1 = grid.synthesize(c, Deriv::D1).v;
  Eigen::ArrayXd d2 = grid.synthesize(c, Deriv::D2).v;
  Eigen::ArrayXd lap = laplace_beltrami(geom, f).v;
  Eigen::ArrayXd pot =
      geom.normA2 + geom.ric_nu_nu + sgn * (geom.gradK_nu_nu - geom.grad_trK_nu);
  Eigen::ArrayXd ktheta =
      (geom.ginv11 * geom.theta1 + geom.ginv12 * geom.theta2) * d1 +
      (geom.ginv12 * geom.theta1 + geom.ginv22 * geom.theta2) * d2;
  Eigen::ArrayXd Lf = -lap - pot * f.v + sgn * 2.0 * ktheta;
  const double direct = quadrature(geom.field(f.v * Lf), geom.field(geom.dmu));

  // decomposed: |grad f|^2 - f^2 (8 pi (mu ∓ J(nu)) + |(K^T)° ± Å|^2 / 2 + |theta|^2)
  //             - f^2/2 (:(H±P)^2/2 + (H ∓ K(nu,nu))^2 - (tr K)^2 - 2G)
  Eigen::ArrayXd grad2 = geom.ginv11 * d1 * d1 + 2.0 * geom.ginv12 * d1 * d2 +
                         geom.ginv22 * d2 * d2;

  // traceless tangential K slice combined with Å
  Eigen::ArrayXd KT0_11 = geom.KT11 - 0.5 * geom.P * geom.gam11;
  Eigen::ArrayXd KT0_12 = geom.KT12 - 0.5 * geom.P * geom.gam12;
  Eigen::ArrayXd KT0_22 = geom.KT22 - 0.5 * geom.P * geom.gam22;
  Eigen::ArrayXd C11 = KT0_11 + sgn * geom.Ar11;
  Eigen::ArrayXd C12 = KT0_12 + sgn * geom.Ar12;
  Eigen::ArrayXd C22 = KT0_22 + sgn * geom.Ar22;
  auto norm2_sym = [&](const Eigen::ArrayXd& t11, const Eigen::ArrayXd& t12,
                       const Eigen::ArrayXd& t22) {
    return geom.ginv11 * geom.ginv11 * t11 * t11 + geom.ginv22 * geom.ginv22 * t22 * t22 +
           2.0 * geom.ginv12 * geom.ginv12 * t11 * t22 +
           4.0 * geom.ginv11 * geom.ginv12 * t11 * t12 +
           4.0 * geom.ginv22 * geom.ginv12 * t22 * t12 +
           2.0 * (geom.ginv11 * geom.ginv22 + geom.ginv12 * geom.ginv12) * t12 * t12;
  };
  Eigen::ArrayXd combo2 = norm2_sym(C11, C12, C22);
  Eigen::ArrayXd theta2n = geom.ginv11 * geom.theta1 * geom.theta1 +
                           2.0 * geom.ginv12 * geom.theta1 * geom.theta2 +
                           geom.ginv22 * geom.theta2 * geom.theta2;

  Eigen::ArrayXd f2 = f.v * f.v;
  Eigen::ArrayXd hp = geom.H + sgn * geom.P;
  Eigen::ArrayXd hk = geom.H - sgn * geom.K_nu_nu;
  Eigen::ArrayXd integrand =
      grad2 -
      f2 * (8.0 * kPi * (geom.mu_constraint - sgn * geom.J_nu) + 0.5 * combo2 + theta2n) -
      0.5 * f2 * (0.5 * hp * hp + hk * hk - geom.trK * geom.trK - 2.0 * geom.G);
  const double decomposed = quadrature(geom.field(integrand), geom.field(geom.dmu));
  return {direct, decomposed};
}

}  // namespace pmcf
