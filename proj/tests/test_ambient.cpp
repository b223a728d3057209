#include <doctest.h>

#include <cmath>
#include <random>

#include "pmcf/ambient.hpp"
#include "test_helpers.hpp"

using namespace pmcf;
using namespace pmcf::testing;

TEST_CASE("euclidean family: identity metric, no curvature") {
  const DataFamily f = euclidean_family();
  const MetricEval me = eval_metric(f, Vec3(3, 0, 0));
  CHECK((me.g - Mat3::Identity()).norm() == 0.0);
  CHECK(me.ricci.norm() == 0.0);
  CHECK(me.scal == 0.0);
  for (int k = 0; k < 3; ++k) CHECK(me.christoffel[k].norm() == 0.0);
}

TEST_CASE("schwarzschild m=2 at x=(10,0,0): conformal factor, metric, Ricci") {
  const DataFamily f = schwarzschild_family(2.0);
  const MetricEval me = eval_metric(f, Vec3(10, 0, 0));
  CHECK(me.phi == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(me.g(0, 0) == doctest::Approx(1.4641).epsilon(1e-15));
  // Ric_11 = -2m/(r^3 phi^2)
  const double ric11 = -2.0 * 2.0 / (1000.0 * 1.1 * 1.1);
  CHECK(std::abs(me.ricci(0, 0) - ric11) < 1e-15);
  CHECK(std::abs(ric11 - (-0.00330578512396694)) < 1e-15);
  CHECK(std::abs(me.scal) < 1e-10);
  CHECK((me.g * me.g_inv - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("schwarzschild Ricci formula at 100 random points") {
  const DataFamily f = schwarzschild_family(1.7);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double sup = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec3 x(dist(rng), dist(rng), dist(rng));
    x = (2.0 + 40.0 * std::abs(dist(rng))) * x.normalized();
    const MetricEval me = eval_metric(f, x);
    const double r = x.norm();
    const Vec3 rho = x / r;
    const Mat3 expected = f.m / (r * r * r) / (me.phi * me.phi) *
                          (Mat3::Identity() - 3.0 * rho * rho.transpose());
    sup = std::max(sup, (me.ricci - expected).cwiseAbs().maxCoeff());
    sup = std::max(sup, std::abs(me.scal));
  }
  CHECK(sup < 1e-10);
}

TEST_CASE("analytic vs finite-difference Christoffels, pure Schwarzschild") {
  const DataFamily f = schwarzschild_family(1.3);
  const Vec3 x(4.0, -7.0, 2.5);
  const MetricEval me = eval_metric(f, x);
  const double h = 1e-4 * x.norm();
  // FD of the metric, then assemble
  std::array<Mat3, 3> dg;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg[k] = (eval_metric(f, xp).g - eval_metric(f, xm).g) / (2.0 * h);
  }
  double sup = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        for (int l = 0; l < 3; ++l)
          v += 0.5 * me.g_inv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        sup = std::max(sup, std::abs(v - me.christoffel[k](i, j)));
      }
  CHECK(sup < 1e-8);
}

TEST_CASE("ricci cross-check by finite differences of Christoffels") {
  const DataFamily f = schwarzschild_family(2.0);
  const Vec3 x(10, 0, 0);
  const MetricEval me = eval_metric(f, x);
  const double h = 1e-3;
  std::array<std::array<Mat3, 3>, 3> Gp, Gm;
  for (int a = 0; a < 3; ++a) {
    Vec3 xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    Gp[a] = eval_metric(f, xp).christoffel;
    Gm[a] = eval_metric(f, xm).christoffel;
  }
  auto dG = [&](int a, int k, int i, int j) {
    return (Gp[a][k](i, j) - Gm[a][k](i, j)) / (2 * h);
  };
  Mat3 ric;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += dG(k, k, i, j) - dG(i, k, k, j);
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          v += me.christoffel[k](k, l) * me.christoffel[l](i, j) -
               me.christoffel[k](j, l) * me.christoffel[l](i, k);
      ric(i, j) = v;
    }
  CHECK((ric - me.ricci).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("evaluation inside the inner boundary is rejected") {
  DataFamily f = schwarzschild_family(1.0);
  f.sigma = 2.0;
  CHECK_THROWS_AS((void)eval_metric(f, Vec3(1.0, 0, 0)), DomainError);
  CHECK_THROWS_AS((void)eval_extrinsic(f, Vec3(0, 1.5, 0)), DomainError);
}

TEST_CASE("oversized perturbation loses definiteness and is reported") {
  DataFamily f = perturbed_family(1.0, 1.0);
  f.perturbation.normalization = 1e-4;  // deliberately break the scaling
  CHECK_THROWS_AS((void)eval_metric(f, Vec3(1.2, 0.3, 0.1)), MetricDefinitenessError);
}

TEST_CASE("zero K family vanishes identically") {
  const DataFamily f = schwarzschild_family(1.0);
  const ExtrinsicEval ee = eval_extrinsic(f, Vec3(5, 2, -1));
  CHECK(ee.K.norm() == 0.0);
  CHECK(ee.trK == 0.0);
  for (int k = 0; k < 3; ++k) CHECK(ee.gradK[k].norm() == 0.0);
}

TEST_CASE("york K: closed form entries and symmetry") {
  const DataFamily f = york_family(1.0, Vec3(0, 0, 0.1), 1);
  const ExtrinsicEval ee = eval_extrinsic(f, Vec3(10, 0, 0));
  // rho = e1, <p,rho> = 0: K = 3/(2 r^2) (rho p^T + p rho^T)
  CHECK(ee.K(0, 2) == doctest::Approx(0.0015).epsilon(1e-14));
  CHECK(ee.K(2, 0) == doctest::Approx(0.0015).epsilon(1e-14));
  CHECK(std::abs(ee.K(0, 0)) < 1e-16);
  CHECK(std::abs(ee.K(1, 1)) < 1e-16);
  CHECK(std::abs(ee.K(2, 2)) < 1e-16);
  CHECK(std::abs(ee.K(0, 1)) < 1e-16);
  CHECK((ee.K - ee.K.transpose()).norm() == 0.0);
}

TEST_CASE("york K with coefficient 1 is trace-free; coefficient 2 is not") {
  const Vec3 x(0, 0, 10);
  const ExtrinsicEval e1 = eval_extrinsic(york_family(1.0, Vec3(0, 0, 0.1), 1), x);
  CHECK(std::abs(e1.K.trace()) < 1e-12);  // Euclidean trace
  const ExtrinsicEval e2 = eval_extrinsic(york_family(1.0, Vec3(0, 0, 0.1), 2), x);
  CHECK(std::abs(e2.K.trace()) > 1e-5);
}

TEST_CASE("york gradK agrees with finite differences") {
  const DataFamily f = york_family(1.0, Vec3(0.03, -0.07, 0.1), 1);
  const Vec3 x(3.0, 5.0, -4.0);
  const MetricEval me = eval_metric(f, x);
  const ExtrinsicEval ee = eval_extrinsic(f, x, me);
  const double h = 1e-5 * x.norm();
  double sup = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Mat3 dK = (eval_extrinsic(f, xp).K - eval_extrinsic(f, xm).K) / (2 * h);
    // covariant correction
    Mat3 cov = dK;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          cov(i, j) -= me.christoffel[l](k, i) * ee.K(l, j) +
                       me.christoffel[l](k, j) * ee.K(i, l);
    sup = std::max(sup, (cov - ee.gradK[k]).cwiseAbs().maxCoeff());
  }
  CHECK(sup < 1e-9);
}

TEST_CASE("corvino-schoen K has the stated trace") {
  const Vec3 p(0, 0, 0.1);
  DataFamily f = schwarzschild_family(1.0);
  f.k_kind = KKind::CorvinoSchoen;
  f.momentum = p;
  const Vec3 x(0, 0, 10);
  const ExtrinsicEval ee = eval_extrinsic(f, x);
  // K^CS = 2/r^2 (p rho^T + rho p^T - <p,rho> I): euclidean trace = -2 <p,rho>/r^2
  CHECK(std::abs(ee.K.trace() - (-2.0 * 0.1 / 100.0)) < 1e-15);
}

TEST_CASE("interpolate_data: tau=0 is exact Schwarzschild with K=0") {
  DataFamily f = perturbed_family(1.0, 1e-3);
  f.k_kind = KKind::York;
  f.momentum = Vec3(0, 0, 0.1);
  const DataFamily f0 = interpolate_data(f, 0.0);
  const Vec3 x(7, -2, 3);
  const ExtrinsicEval ee = eval_extrinsic(f0, x);
  CHECK(ee.K.norm() == 0.0);
  const MetricEval me = eval_metric(f0, x);
  const double phi = conformal_phi(1.0, x.norm());
  CHECK((me.g - std::pow(phi, 4) * Mat3::Identity()).norm() < 1e-15);
  CHECK_THROWS_AS((void)interpolate_data(f, 1.5), Error);
  CHECK_THROWS_AS((void)interpolate_data(f, -0.1), Error);
}

TEST_CASE("interpolate_data: tau=1 reproduces the family, tau=1/2 halves the offset") {
  DataFamily f = perturbed_family(1.0, 1e-3);
  const Vec3 x(9, 4, -6);
  const Mat3 g1 = eval_metric(interpolate_data(f, 1.0), x).g;
  const Mat3 gfull = eval_metric(f, x).g;
  CHECK((g1 - gfull).norm() < 1e-15);

  const double phi = conformal_phi(1.0, x.norm());
  const Mat3 gS = std::pow(phi, 4) * Mat3::Identity();
  const Mat3 ghalf = eval_metric(interpolate_data(f, 0.5), x).g;
  CHECK(((ghalf - gS) - 0.5 * (gfull - gS)).norm() < 1e-12);
}

TEST_CASE("perturbation decay: weighted sups bounded by eta on probes") {
  const double eta = 1e-3;
  const DataFamily f = perturbed_family(1.0, eta);
  // probe radii differ from those used by normalize_perturbation
  const DecayBounds b = sampled_decay_bounds(f, 3.0, 150.0, 7, 20);
  CHECK(b.g <= eta);
  CHECK(b.christoffel <= eta);
  CHECK(b.ricci <= eta);
  // sampled |g - g^S| at r = 50 against the configured amplitude
  const Vec3 x = 50.0 * Vec3(0.6, 0.64, std::sqrt(1 - 0.36 - 0.4096));
  const double phi = conformal_phi(1.0, 50.0);
  const Mat3 diff = eval_metric(f, x).g - std::pow(phi, 4) * Mat3::Identity();
  CHECK(diff.norm() <= eta * std::pow(50.0, -1.0 - f.delta));
}

TEST_CASE("york K decay: r^2 K and r^3 gradK stay bounded") {
  const DataFamily f = york_family(1.0, Vec3(0, 0, 0.1), 1);
  const DecayBounds b = sampled_decay_bounds(f, 5.0, 500.0, 8, 16);
  // |K| <= c |p| / r^2 with a geometry constant of order 3
  CHECK(b.K <= 10.0 * f.momentum.norm());
  CHECK(b.K >= 0.1 * f.momentum.norm());
  CHECK(b.gradK <= 100.0 * f.momentum.norm());
}

TEST_CASE("family validation") {
  DataFamily f = schwarzschild_family(1.0);
  f.m = -1.0;
  CHECK_THROWS_AS(f.validate(), Error);
  f = schwarzschild_family(1.0);
  f.tau = 1.5;
  CHECK_THROWS_AS(f.validate(), Error);
  f = euclidean_family();
  f.m = 0.0;
  CHECK_NOTHROW(f.validate());
}
