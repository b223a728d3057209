#include "pmcf/ambient.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "pmcf/sphere.hpp"

namespace pmcf {

namespace {

double euclidean_radius(const Vec3& x) { return x.norm(); }

void require_outside(const DataFamily& family, const Vec3& x) {
  if (euclidean_radius(x) <= family.sigma)
    throw DomainError("evaluation point inside the inner boundary r <= sigma");
}

double effective_mass(const DataFamily& family) {
  return family.metric_kind == MetricKind::Euclidean ? 0.0 : family.m;
}

bool perturbation_active(const DataFamily& family) {
  return family.metric_kind == MetricKind::SchwarzschildPlusPerturbation &&
         family.tau * family.perturbation.eta != 0.0 && !family.perturbation.terms.empty();
}

// Schwarzschild conformal part, all closed form.
struct SchwPoint {
  double r, phi;
  Vec3 rho, dphi;
};

SchwPoint schw_point(double m, const Vec3& x) {
  SchwPoint s;
  s.r = x.norm();
  s.rho = x / s.r;
  s.phi = 1.0 + 0.5 * m / s.r;
  s.dphi = -0.5 * m / (s.r * s.r) * s.rho;
  return s;
}

std::array<Mat3, 3> conformal_christoffel(const SchwPoint& s) {
  // g = phi^4 g^e:  Gamma^k_ij = 2/phi (delta^k_i d_j phi + delta^k_j d_i phi
  //                              - delta_ij d_k phi)
  std::array<Mat3, 3> G;
  const double f = 2.0 / s.phi;
  for (int k = 0; k < 3; ++k) {
    Mat3& Gk = G[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        if (i == k) v += s.dphi[j];
        if (j == k) v += s.dphi[i];
        if (i == j) v -= s.dphi[k];
        Gk(i, j) = f * v;
      }
  }
  return G;
}

Mat3 schw_ricci(double m, const SchwPoint& s) {
  return m / (s.r * s.r * s.r) / (s.phi * s.phi) *
         (Mat3::Identity() - 3.0 * s.rho * s.rho.transpose());
}

Mat3 metric_tensor_at(const DataFamily& family, const Vec3& x, bool with_pert) {
  const SchwPoint s = schw_point(effective_mass(family), x);
  Mat3 g = std::pow(s.phi, 4) * Mat3::Identity();
  if (with_pert)
    g += family.tau * family.perturbation.value(x, family.delta);
  return g;
}

// Christoffels of g_tau at x; Schwarzschild part analytic, perturbation part
// through central differences of the metric with step max(1e-4 r, 1e-6).
std::array<Mat3, 3> christoffel_at(const DataFamily& family, const Vec3& x, bool with_pert) {
  const SchwPoint s = schw_point(effective_mass(family), x);
  if (!with_pert) return conformal_christoffel(s);

  std::array<Mat3, 3> dg;  // dg[k] = partial_k g
  const double h = std::max(1e-4 * s.r, 1e-6);
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Mat3 dpert = (family.perturbation.value(xp, family.delta) -
                  family.perturbation.value(xm, family.delta)) /
                 (2.0 * h);
    dg[k] = 4.0 * std::pow(s.phi, 3) * s.dphi[k] * Mat3::Identity() + family.tau * dpert;
  }
  const Mat3 g = metric_tensor_at(family, x, true);
  const Mat3 ginv = g.inverse();
  std::array<Mat3, 3> G;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 3; ++l)
          sum += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G[k](i, j) = 0.5 * sum;
      }
  }
  return G;
}

// Ricci by central differences of the Christoffel field.
Mat3 ricci_fd(const DataFamily& family, const Vec3& x, bool with_pert) {
  const double r = x.norm();
  const double h = std::max(1e-4 * r, 1e-6);
  std::array<std::array<Mat3, 3>, 3> Gp, Gm;  // stencil values per direction
  for (int a = 0; a < 3; ++a) {
    Vec3 xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    Gp[a] = christoffel_at(family, xp, with_pert);
    Gm[a] = christoffel_at(family, xm, with_pert);
  }
  const std::array<Mat3, 3> G = christoffel_at(family, x, with_pert);
  auto dGamma = [&](int a, int k, int i, int j) {
    return (Gp[a][k](i, j) - Gm[a][k](i, j)) / (2.0 * h);
  };
  Mat3 ric;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += dGamma(k, k, i, j) - dGamma(i, k, k, j);
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          v += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
      ric(i, j) = v;
    }
  return 0.5 * (ric + ric.transpose());
}

}  // namespace

Mat3 PerturbationSpec::raw(const Vec3& x, double delta) const {
  const double r = x.norm();
  const double theta = std::acos(std::clamp(x[2] / r, -1.0, 1.0));
  const double phi = std::atan2(x[1], x[0]);
  Mat3 out = Mat3::Zero();
  const double radial = std::pow(r, -1.0 - delta);
  for (const auto& t : terms) out += t.c * radial * real_sph_harm(t.l, t.m, theta, phi) * t.M;
  return out;
}

Mat3 PerturbationSpec::value(const Vec3& x, double delta) const {
  if (terms.empty() || eta == 0.0) return Mat3::Zero();
  return (eta / normalization) * raw(x, delta);
}

void DataFamily::validate() const {
  if (metric_kind != MetricKind::Euclidean && !(m > 0.0))
    throw Error("mass must be positive for non-Euclidean data");
  if (!(sigma > 0.0)) throw Error("inner radius sigma must be positive");
  if (delta < 0.0) throw Error("decay exponent delta must be nonnegative");
  if (tau < 0.0 || tau > 1.0) throw Error("tau must lie in [0,1]");
  if (perturbation.eta < 0.0) throw Error("perturbation amplitude eta must be nonnegative");
  if (york_coefficient != 1 && york_coefficient != 2)
    throw Error("york transverse coefficient must be 1 or 2");
}

std::uint64_t DataFamily::fingerprint() const {
  char buf[256];
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&](const char* s) {
    for (; *s; ++s) {
      h ^= static_cast<unsigned char>(*s);
      h *= 1099511628211ull;
    }
  };
  std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%d|%.17g|%d|%.17g|%.17g|%.17g|%d|%d", m,
                delta, sigma, int(metric_kind), perturbation.eta, int(k_kind), momentum[0],
                momentum[1], momentum[2], york_coefficient, int(branch));
  mix(buf);
  for (const auto& t : perturbation.terms) {
    std::snprintf(buf, sizeof buf, "|%.17g|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g", t.c, t.l,
                  t.m, t.M(0, 0), t.M(0, 1), t.M(0, 2), t.M(1, 1), t.M(1, 2), t.M(2, 2));
    mix(buf);
  }
  return h;
}

MetricEval eval_metric(const DataFamily& family, const Vec3& x) {
  require_outside(family, x);
  const double meff = effective_mass(family);
  const SchwPoint s = schw_point(meff, x);
  const bool pert = perturbation_active(family);

  MetricEval me;
  me.x = x;
  me.phi = s.phi;
  me.g = metric_tensor_at(family, x, pert);

  Eigen::SelfAdjointEigenSolver<Mat3> es(me.g, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw MetricDefinitenessError("metric not positive definite at evaluation point");
  me.g_inv = me.g.inverse();

  me.christoffel = christoffel_at(family, x, pert);

  if (!pert) {
    me.ricci = schw_ricci(meff, s);
    me.scal = 0.0;
  } else {
    me.ricci = schw_ricci(meff, s) + ricci_fd(family, x, true) - ricci_fd(family, x, false);
    me.scal = (me.g_inv * me.ricci).trace();
  }
  return me;
}

namespace {

// Leading-order K (before the tau factor) and its flat partial derivatives.
void k_profile(const DataFamily& family, const Vec3& x, Mat3& K, std::array<Mat3, 3>& dK) {
  K.setZero();
  for (auto& d : dK) d.setZero();
  if (family.k_kind == KKind::Zero) return;

  const double r = x.norm();
  const Vec3 rho = x / r;
  const Vec3& p = family.momentum;
  const double pr = p.dot(rho);
  const Mat3 I = Mat3::Identity();

  auto drho = [&](int k) -> Vec3 { return (Vec3::Unit(k) - rho[k] * rho) / r; };

  if (family.k_kind == KKind::York) {
    const double c = double(family.york_coefficient);
    const double f = 1.5 / (r * r);
    const Mat3 S = rho * p.transpose() + p * rho.transpose();
    const Mat3 T = I - rho * rho.transpose();
    K = f * (S - c * pr * T);
    for (int k = 0; k < 3; ++k) {
      const Vec3 dr = drho(k);
      const double df = -3.0 * rho[k] / (r * r * r);
      const Mat3 dS = dr * p.transpose() + p * dr.transpose();
      const Mat3 dT = -(dr * rho.transpose() + rho * dr.transpose());
      const double dpr = (p[k] - pr * rho[k]) / r;
      dK[k] = df * (S - c * pr * T) + f * (dS - c * (dpr * T + pr * dT));
    }
  } else {  // Corvino-Schoen
    const double f = 2.0 / (r * r);
    const Mat3 S = rho * p.transpose() + p * rho.transpose();
    K = f * (S - pr * I);
    for (int k = 0; k < 3; ++k) {
      const Vec3 dr = drho(k);
      const double df = -4.0 * rho[k] / (r * r * r);
      const Mat3 dS = dr * p.transpose() + p * dr.transpose();
      const double dpr = (p[k] - pr * rho[k]) / r;
      dK[k] = df * (S - pr * I) + f * (dS - dpr * I);
    }
  }
}

}  // namespace

ExtrinsicEval eval_extrinsic(const DataFamily& family, const Vec3& x, const MetricEval& me) {
  require_outside(family, x);
  ExtrinsicEval ee;
  if (family.k_kind == KKind::Zero || family.tau == 0.0) {
    ee.K.setZero();
    for (auto& g : ee.gradK) g.setZero();
    ee.trK = 0.0;
    return ee;
  }
  Mat3 K;
  std::array<Mat3, 3> dK;
  k_profile(family, x, K, dK);
  ee.K = family.tau * K;
  for (int k = 0; k < 3; ++k) {
    Mat3 cov = family.tau * dK[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          cov(i, j) -= me.christoffel[l](k, i) * ee.K(l, j) +
                       me.christoffel[l](k, j) * ee.K(i, l);
    ee.gradK[k] = cov;
  }
  ee.trK = (me.g_inv * ee.K).trace();
  return ee;
}

ExtrinsicEval eval_extrinsic(const DataFamily& family, const Vec3& x) {
  return eval_extrinsic(family, x, eval_metric(family, x));
}

DataFamily interpolate_data(const DataFamily& family, double tau) {
  if (tau < 0.0 || tau > 1.0) throw Error("interpolate_data: tau outside [0,1]");
  DataFamily out = family;
  out.tau = tau;
  return out;
}

DecayBounds sampled_decay_bounds(const DataFamily& family, double r_lo, double r_hi,
                                 int n_radii, int n_angles) {
  DecayBounds b;
  const double meff = effective_mass(family);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int ir = 0; ir < n_radii; ++ir) {
    const double r = r_lo * std::pow(r_hi / r_lo, double(ir) / (n_radii - 1));
    for (int ia = 0; ia < n_angles; ++ia) {
      // Fibonacci sphere directions
      const double z = 1.0 - 2.0 * (ia + 0.5) / n_angles;
      const double ang = 2.0 * 3.14159265358979323846 * ia / golden;
      const double s = std::sqrt(1.0 - z * z);
      const Vec3 x = r * Vec3(s * std::cos(ang), s * std::sin(ang), z);

      const SchwPoint sp = schw_point(meff, x);
      const MetricEval me = eval_metric(family, x);
      const ExtrinsicEval ee = eval_extrinsic(family, x, me);

      const Mat3 gS = std::pow(sp.phi, 4) * Mat3::Identity();
      b.g = std::max(b.g, std::pow(r, 1.0 + family.delta) * (me.g - gS).norm());
      const auto GS = conformal_christoffel(sp);
      double dg = 0.0;
      for (int k = 0; k < 3; ++k) dg += (me.christoffel[k] - GS[k]).squaredNorm();
      b.christoffel =
          std::max(b.christoffel, std::pow(r, 2.0 + family.delta) * std::sqrt(dg));
      b.ricci = std::max(b.ricci, std::pow(r, 3.0 + family.delta) *
                                      (me.ricci - schw_ricci(meff, sp)).norm());
      b.K = std::max(b.K, std::pow(r, 2.0 + family.delta) * ee.K.norm());
      double gk = 0.0;
      for (int k = 0; k < 3; ++k) gk += ee.gradK[k].squaredNorm();
      b.gradK = std::max(b.gradK, std::pow(r, 3.0 + family.delta) * std::sqrt(gk));
    }
  }
  return b;
}

void normalize_perturbation(DataFamily& family, double r_lo, double r_hi) {
  if (family.perturbation.terms.empty()) return;
  DataFamily probe = family;
  probe.tau = 1.0;
  probe.perturbation.eta = 1.0;
  probe.perturbation.normalization = 1.0;
  probe.k_kind = KKind::Zero;
  const DecayBounds b = sampled_decay_bounds(probe, r_lo, r_hi, 12, 256);
  const double sup = std::max({b.g, b.christoffel, b.ricci});
  family.perturbation.normalization = (sup > 0.0) ? 1.1 * sup : 1.0;
}

}  // namespace pmcf
