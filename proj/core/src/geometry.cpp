#include "pmcf/geometry.hpp"

#include <cmath>

namespace pmcf {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double k16Pi = 16.0 * kPi;
}  // namespace

GraphSurface GraphSurface::sphere(const GridPtr& grid, double radius) {
  return GraphSurface(grid, Eigen::ArrayXd::Constant(grid->nodes(), radius));
}

ImmersionFields immersion_from_graph(const GraphSurface& s) {
  const auto& grid = *s.grid;
  const int N = grid.nodes();
  HarmonicCoeffs c = grid.analyze(ScalarField(s.grid, s.u));

  Eigen::ArrayXd u = s.u;
  Eigen::ArrayXd d1u = grid.synthesize(c, Deriv::D1).v;
  Eigen::ArrayXd d2u = grid.synthesize(c, Deriv::D2).v;
  Eigen::ArrayXd d11u = grid.synthesize(c, Deriv::D11).v;
  Eigen::ArrayXd d12u = grid.synthesize(c, Deriv::D12).v;
  Eigen::ArrayXd d21u = grid.synthesize(c, Deriv::D21).v;
  Eigen::ArrayXd d22u = grid.synthesize(c, Deriv::D22).v;

  ImmersionFields f;
  f.X.resize(N, 3);
  f.d1X.resize(N, 3);
  f.d2X.resize(N, 3);
  f.d11X.resize(N, 3);
  f.d12X.resize(N, 3);
  f.d21X.resize(N, 3);
  f.d22X.resize(N, 3);

  const auto& st = grid.sin_theta();
  const auto& ct = grid.cos_theta();
  const auto& ph = grid.phi();
  for (int n = 0; n < N; ++n) {
    const double sp = std::sin(ph[n]), cp = std::cos(ph[n]);
    const Vec3 p(st[n] * cp, st[n] * sp, ct[n]);
    const Vec3 d1p(ct[n] * cp, ct[n] * sp, -st[n]);
    const Vec3 d2p(-sp, cp, 0.0);
    const Vec3 d11p = -p;
    const Vec3 d21p = (ct[n] / st[n]) * d2p;          // D2(D1 p)
    const Vec3 d22p = Vec3(-cp, -sp, 0.0) / st[n];    // D2(D2 p)

    f.X.row(n) = u[n] * p;
    f.d1X.row(n) = d1u[n] * p + u[n] * d1p;
    f.d2X.row(n) = d2u[n] * p + u[n] * d2p;
    f.d11X.row(n) = d11u[n] * p + 2.0 * d1u[n] * d1p + u[n] * d11p;
    // D1(D2 p) = 0
    f.d12X.row(n) = d12u[n] * p + d2u[n] * d1p + d1u[n] * d2p;
    f.d21X.row(n) = d21u[n] * p + d1u[n] * d2p + d2u[n] * d1p + u[n] * d21p;
    f.d22X.row(n) = d22u[n] * p + 2.0 * d2u[n] * d2p + u[n] * d22p;
  }
  return f;
}

SurfaceGeometry compute_geometry(const GraphSurface& surface, const DataFamily& family) {
  if ((surface.u <= 2.0 * family.sigma).any())
    throw GraphConditionError("surface leaves the chart domain u > 2 sigma");
  return compute_geometry(surface.grid, immersion_from_graph(surface), family);
}

SurfaceGeometry compute_geometry(const GridPtr& grid, const ImmersionFields& imm,
                                 const DataFamily& family) {
  const int N = grid->nodes();
  SurfaceGeometry o;
  o.grid = grid;
  o.family = family;
  o.imm = imm;

  auto alloc = [N](Eigen::ArrayXd& a) { a.resize(N); };
  alloc(o.gam11), alloc(o.gam12), alloc(o.gam22);
  alloc(o.ginv11), alloc(o.ginv12), alloc(o.ginv22);
  alloc(o.game11), alloc(o.game12), alloc(o.game22);
  alloc(o.dmu), alloc(o.dmu_e);
  for (int d = 0; d < 2; ++d)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) alloc(o.wconn[d][a][b]);
  alloc(o.A11), alloc(o.A12), alloc(o.A22), alloc(o.H), alloc(o.normA2), alloc(o.detA);
  alloc(o.Ar11), alloc(o.Ar12), alloc(o.Ar22), alloc(o.normAring2);
  alloc(o.Ae11), alloc(o.Ae12), alloc(o.Ae22), alloc(o.H_e);
  alloc(o.G), alloc(o.G_alt);
  alloc(o.KT11), alloc(o.KT12), alloc(o.KT22), alloc(o.theta1), alloc(o.theta2);
  alloc(o.K_nu_nu), alloc(o.trK), alloc(o.P);
  alloc(o.ric_nu_nu), alloc(o.scal), alloc(o.gradK_nu_nu), alloc(o.grad_trK_nu);
  alloc(o.mu_constraint), alloc(o.J_nu);
  alloc(o.q), alloc(o.HP), alloc(o.r);
  o.nu.resize(N, 3);
  o.nu_e.resize(N, 3);

  const double sgn = branch_sign(family.branch);

  for (int n = 0; n < N; ++n) {
    const Vec3 X = imm.X.row(n);
    const Vec3 e1 = imm.d1X.row(n);
    const Vec3 e2 = imm.d2X.row(n);
    o.r[n] = X.norm();

    const MetricEval me = eval_metric(family, X);
    const ExtrinsicEval ee = eval_extrinsic(family, X, me);

    // induced metrics
    const Vec3 ge1 = me.g * e1, ge2 = me.g * e2;
    const double g11 = e1.dot(ge1), g12 = e1.dot(ge2), g22 = e2.dot(ge2);
    const double det = g11 * g22 - g12 * g12;
    if (!(det > 0.0)) throw GraphConditionError("degenerate induced metric");
    o.gam11[n] = g11;
    o.gam12[n] = g12;
    o.gam22[n] = g22;
    o.ginv11[n] = g22 / det;
    o.ginv12[n] = -g12 / det;
    o.ginv22[n] = g11 / det;
    o.dmu[n] = std::sqrt(det);

    const double h11 = e1.dot(e1), h12 = e1.dot(e2), h22 = e2.dot(e2);
    const double dete = h11 * h22 - h12 * h12;
    o.game11[n] = h11;
    o.game12[n] = h12;
    o.game22[n] = h22;
    o.dmu_e[n] = std::sqrt(dete);

    // normals; cross(e1, e2) points outward for radial graphs
    const Vec3 w = e1.cross(e2);
    o.nu_e.row(n) = w / w.norm();
    const Vec3 ginvw = me.g_inv * w;
    const Vec3 nu = ginvw / std::sqrt(w.dot(ginvw));
    o.nu.row(n) = nu;

    const Vec3 rho = X / o.r[n];
    if (!(o.nu_e.row(n).dot(rho) > 0.5))
      throw GraphConditionError("graph condition g^e(nu^e, rho) > 1/2 violated");

    // ambient second derivative vectors V_ab = D_a D_b X + Gamma(e_a, e_b)
    Vec3 V[2][2] = {{imm.d11X.row(n), imm.d12X.row(n)}, {imm.d21X.row(n), imm.d22X.row(n)}};
    const Vec3 ev[2] = {e1, e2};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec3 gam_term;
        for (int k = 0; k < 3; ++k) gam_term[k] = ev[a].dot(me.christoffel[k] * ev[b]);
        V[a][b] += gam_term;
      }

    // connection coefficients of the induced metric
    const double gi[2][2] = {{o.ginv11[n], o.ginv12[n]}, {o.ginv12[n], o.ginv22[n]}};
    const Vec3 gev[2] = {ge1, ge2};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double c1 = V[a][b].dot(gev[0]);
        const double c2 = V[a][b].dot(gev[1]);
        o.wconn[0][a][b][n] = gi[0][0] * c1 + gi[0][1] * c2;
        o.wconn[1][a][b][n] = gi[1][0] * c1 + gi[1][1] * c2;
      }

    // second fundamental form, A(X,Y) = g(nabla_X nu, Y) = -g(nu, nabla_X Y)
    const Vec3 gnu = me.g * nu;
    const double a11 = -gnu.dot(V[0][0]);
    const double a12 = -0.5 * (gnu.dot(V[0][1]) + gnu.dot(V[1][0]));
    const double a22 = -gnu.dot(V[1][1]);
    o.A11[n] = a11;
    o.A12[n] = a12;
    o.A22[n] = a22;
    o.H[n] = gi[0][0] * a11 + 2.0 * gi[0][1] * a12 + gi[1][1] * a22;
    o.detA[n] = (a11 * a22 - a12 * a12) / det;
    // |A|^2 with indices raised by gamma^{-1}
    {
      const double b11 = gi[0][0] * a11 + gi[0][1] * a12;
      const double b12 = gi[0][0] * a12 + gi[0][1] * a22;
      const double b21 = gi[1][0] * a11 + gi[1][1] * a12;
      const double b22 = gi[1][0] * a12 + gi[1][1] * a22;
      o.normA2[n] = b11 * b11 + b12 * b21 + b21 * b12 + b22 * b22;
    }
    o.Ar11[n] = a11 - 0.5 * o.H[n] * g11;
    o.Ar12[n] = a12 - 0.5 * o.H[n] * g12;
    o.Ar22[n] = a22 - 0.5 * o.H[n] * g22;
    // contract the traceless components directly; the algebraic shortcut
    // |A|^2 - H^2/2 loses all digits on umbilic surfaces
    {
      const double t11 = o.Ar11[n], t12 = o.Ar12[n], t22 = o.Ar22[n];
      const double b11 = gi[0][0] * t11 + gi[0][1] * t12;
      const double b12 = gi[0][0] * t12 + gi[0][1] * t22;
      const double b21 = gi[1][0] * t11 + gi[1][1] * t12;
      const double b22 = gi[1][0] * t12 + gi[1][1] * t22;
      o.normAring2[n] = b11 * b11 + b12 * b21 + b21 * b12 + b22 * b22;
    }

    // Euclidean second fundamental form (flat ambient, no Gamma)
    const Vec3 nue = o.nu_e.row(n);
    const double ae11 = -nue.dot(Vec3(imm.d11X.row(n)));
    const double ae12 = -0.5 * (nue.dot(Vec3(imm.d12X.row(n))) + nue.dot(Vec3(imm.d21X.row(n))));
    const double ae22 = -nue.dot(Vec3(imm.d22X.row(n)));
    o.Ae11[n] = ae11;
    o.Ae12[n] = ae12;
    o.Ae22[n] = ae22;
    o.H_e[n] = (h22 * ae11 - 2.0 * h12 * ae12 + h11 * ae22) / dete;

    // K slices
    o.KT11[n] = e1.dot(ee.K * e1);
    o.KT12[n] = e1.dot(ee.K * e2);
    o.KT22[n] = e2.dot(ee.K * e2);
    o.theta1[n] = e1.dot(ee.K * nu);
    o.theta2[n] = e2.dot(ee.K * nu);
    o.K_nu_nu[n] = nu.dot(ee.K * nu);
    o.trK[n] = ee.trK;
    o.P[n] = gi[0][0] * o.KT11[n] + 2.0 * gi[0][1] * o.KT12[n] + gi[1][1] * o.KT22[n];

    // ambient samples along the normal
    o.ric_nu_nu[n] = nu.dot(me.ricci * nu);
    o.scal[n] = me.scal;
    double gk_nn = 0.0, gtr = 0.0;
    for (int k = 0; k < 3; ++k) {
      gk_nn += nu[k] * nu.dot(ee.gradK[k] * nu);
      gtr += nu[k] * (me.g_inv * ee.gradK[k]).trace();
    }
    o.gradK_nu_nu[n] = gk_nn;
    o.grad_trK_nu[n] = gtr;

    // constraint densities: 16 pi mu = Scal - |K|^2 + (tr K)^2,
    // 8 pi J = grad tr K - div K
    const Mat3 Kup = me.g_inv * ee.K;
    const double normK2 = (Kup * Kup).trace();
    o.mu_constraint[n] = (me.scal - normK2 + ee.trK * ee.trK) / k16Pi;
    double jnu = 0.0;
    for (int j = 0; j < 3; ++j) {
      double grad_tr_j = (me.g_inv * ee.gradK[j]).trace();
      double div_j = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) div_j += me.g_inv(i, k) * ee.gradK[i](k, j);
      jnu += (grad_tr_j - div_j) * nu[j];
    }
    o.J_nu[n] = jnu / (8.0 * kPi);

    o.G[n] = o.detA[n] - o.ric_nu_nu[n] + 0.5 * me.scal;
    o.G_alt[n] = o.detA[n] + o.ric_nu_nu[n] - 0.5 * me.scal;

    o.q[n] = rho.dot(me.g * nu);
    o.HP[n] = o.H[n] + sgn * o.P[n];
  }
  return o;
}

ScalarField laplace_beltrami(const SurfaceGeometry& geom, const ScalarField& f) {
  if (f.grid != geom.grid) throw GridMismatchError("laplace_beltrami: grid mismatch");
  const auto& grid = *geom.grid;
  HarmonicCoeffs c = grid.analyze(f);
  Eigen::ArrayXd d1 = grid.synthesize(c, Deriv::D1).v;
  Eigen::ArrayXd d2 = grid.synthesize(c, Deriv::D2).v;
  Eigen::ArrayXd d11 = grid.synthesize(c, Deriv::D11).v;
  Eigen::ArrayXd d12 = grid.synthesize(c, Deriv::D12).v;
  Eigen::ArrayXd d21 = grid.synthesize(c, Deriv::D21).v;
  Eigen::ArrayXd d22 = grid.synthesize(c, Deriv::D22).v;

  // trace of the gamma-Hessian: gamma^{ab} (D_a D_b f - w^d_ab D_d f)
  Eigen::ArrayXd w1 = geom.ginv11 * geom.wconn[0][0][0] +
                      geom.ginv12 * (geom.wconn[0][0][1] + geom.wconn[0][1][0]) +
                      geom.ginv22 * geom.wconn[0][1][1];
  Eigen::ArrayXd w2 = geom.ginv11 * geom.wconn[1][0][0] +
                      geom.ginv12 * (geom.wconn[1][0][1] + geom.wconn[1][1][0]) +
                      geom.ginv22 * geom.wconn[1][1][1];
  Eigen::ArrayXd lap = geom.ginv11 * d11 + geom.ginv12 * (d12 + d21) + geom.ginv22 * d22 -
                       w1 * d1 - w2 * d2;
  return ScalarField(geom.grid, std::move(lap));
}

double hawking_mass(const SurfaceGeometry& geom) {
  const double area = quadrature(geom.field(Eigen::ArrayXd::Ones(geom.grid->nodes())),
                                 geom.field(geom.dmu));
  const double willmore = quadrature(geom.field(geom.H * geom.H), geom.field(geom.dmu));
  return std::sqrt(area) / std::pow(k16Pi, 1.5) * (k16Pi - willmore);
}

namespace {

// L2 norm of the covariant derivative of the traceless second fundamental
// form. Diagnostic accuracy: frame components of tensors are analyzed on the
// grid even though they are only piecewise smooth at the (excluded) poles.
double grad_aring_norm(const SurfaceGeometry& geom) {
  const auto& grid = *geom.grid;
  const Eigen::ArrayXd* T[2][2] = {{&geom.Ar11, &geom.Ar12}, {&geom.Ar12, &geom.Ar22}};
  Eigen::ArrayXd dT[2][2][2];  // dT[d][a][b]
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      HarmonicCoeffs c = grid.analyze(ScalarField(geom.grid, *T[a][b]));
      dT[0][a][b] = grid.synthesize(c, Deriv::D1).v;
      dT[1][a][b] = grid.synthesize(c, Deriv::D2).v;
      if (a != b) {
        dT[0][b][a] = dT[0][a][b];
        dT[1][b][a] = dT[1][a][b];
      }
    }
  const int N = grid.nodes();
  Eigen::ArrayXd dens(N);
  for (int n = 0; n < N; ++n) {
    const double gi[2][2] = {{geom.ginv11[n], geom.ginv12[n]}, {geom.ginv12[n], geom.ginv22[n]}};
    double cov[2][2][2];
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = dT[d][a][b][n];
          for (int e = 0; e < 2; ++e)
            v -= geom.wconn[e][d][a][n] * (*T[e][b])[n] + geom.wconn[e][d][b][n] * (*T[a][e])[n];
          cov[d][a][b] = v;
        }
    double s = 0.0;
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int d2 = 0; d2 < 2; ++d2)
            for (int a2 = 0; a2 < 2; ++a2)
              for (int b2 = 0; b2 < 2; ++b2)
                s += gi[d][d2] * gi[a][a2] * gi[b][b2] * cov[d][a][b] * cov[d2][a2][b2];
    dens[n] = s;
  }
  return std::sqrt(quadrature(ScalarField(geom.grid, dens), ScalarField(geom.grid, geom.dmu)));
}

ConditionFlags evaluate_flags(double R_geom, double r_min, double hp_min, double conv_margin,
                              double ae_norm, double R_e, double c_radius, double c_center) {
  ConditionFlags f;
  f.margin1 = c_radius * r_min - R_geom;
  f.c1 = f.margin1 >= 0.0;
  f.margin2 = hp_min - 1.0 / (c_radius * R_geom);
  f.c2 = f.margin2 >= 0.0;
  f.margin3 = conv_margin;
  f.c3 = f.margin3 >= 0.0;
  f.margin4 = c_center * R_e - ae_norm;
  f.c4 = f.margin4 >= 0.0;
  return f;
}

}  // namespace

SurfaceSummary summarize(const SurfaceGeometry& geom, const DataFamily& family) {
  SurfaceSummary s;
  const int N = geom.grid->nodes();
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(N);
  const ScalarField one = geom.field(ones);
  const ScalarField dmu = geom.field(geom.dmu);
  const ScalarField dmue = geom.field(geom.dmu_e);

  s.area_g = quadrature(one, dmu);
  s.area_e = quadrature(one, dmue);
  s.R_e = std::sqrt(s.area_e / (4.0 * kPi));
  s.R_geom = std::sqrt(s.area_g / (4.0 * kPi));
  s.r_min = geom.r.minCoeff();
  for (int k = 0; k < 3; ++k) {
    const Eigen::ArrayXd xk = geom.imm.X.col(k).array();
    s.a_e[k] = quadrature(geom.field(xk), dmue) / s.area_e;
    s.a_g[k] = quadrature(geom.field(xk), dmu) / s.area_g;
  }
  s.hawking = hawking_mass(geom);
  s.aring_l2 = std::sqrt(quadrature(geom.field(geom.normAring2), dmu));
  s.grad_aring_l2 = grad_aring_norm(geom);
  s.hp_min = geom.HP.minCoeff();
  s.hp_max = geom.HP.maxCoeff();
  s.convexity_margin = (4.0 * geom.detA - geom.normA2).minCoeff();
  const double conv_b = (8.0 * geom.detA - geom.normA2).minCoeff();

  s.flags_b = evaluate_flags(s.R_geom, s.r_min, s.hp_min, conv_b, s.a_e.norm(),
                             s.R_e, 8.0, 0.75);
  s.flags_c = evaluate_flags(s.R_geom, s.r_min, s.hp_min, s.convexity_margin, s.a_e.norm(),
                             s.R_e, 4.0, 0.875);

  const double m = family.metric_kind == MetricKind::Euclidean ? 0.0 : family.m;
  s.phi_bar = 1.0 + 0.5 * m / s.R_e;
  s.H_bar = 2.0 / (s.phi_bar * s.phi_bar * s.R_e) -
            2.0 * m / (std::pow(s.phi_bar, 3) * s.R_e * s.R_e);
  return s;
}

}  // namespace pmcf
