#include "pmcf/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmcf {

double tau_of_v(double v, MomentumForm form) {
  // written as v / (1 + sqrt(1 - v^2)) to avoid cancellation near v = 0
  if (form == MomentumForm::York) {
    if (v < 0.0 || v > 1.0) throw Error("tau_of_v: york form needs v in [0,1]");
    return v / (1.0 + std::sqrt(1.0 - v * v));
  }
  const double vmax = std::sqrt(15.0) / 4.0;
  if (v < 0.0 || v >= vmax)
    throw Error("tau_of_v: corvino-schoen form needs v in [0, sqrt(15)/4)");
  return (2.0 / 3.0) * v / (1.0 + std::sqrt(1.0 - 16.0 / 15.0 * v * v));
}

DriftSeries center_drift_series(const FoliationResult& fol) {
  if (fol.members.size() < 3)
    throw Error("center_drift_series: need at least 3 converged members");
  DriftSeries s;
  double prev_h = std::numeric_limits<double>::infinity();
  double prev_Re = 0.0;
  for (const auto& [h, res] : fol.members) {
    if (!res.converged) throw Error("center_drift_series: non-converged member");
    if (!(h < prev_h)) throw Error("center_drift_series: h not decreasing");
    if (!(res.summary.R_e > prev_Re)) throw Error("center_drift_series: R_e not increasing");
    prev_h = h;
    prev_Re = res.summary.R_e;
    DriftRow row;
    row.h = h;
    row.R_e = res.summary.R_e;
    row.a_e = res.summary.a_e;
    row.a_g = res.summary.a_g;
    row.a_e_over_Re = res.summary.a_e / res.summary.R_e;
    row.center_diff = res.summary.a_e - res.summary.a_g;
    s.rows.push_back(row);
  }
  return s;
}

MomentumEstimate recover_momentum(const DriftSeries& series, double m, double delta,
                                  MomentumForm form, SignBranch branch) {
  const auto& rows = series.rows;
  if (rows.size() < 3) throw Error("recover_momentum: need at least 3 rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].R_e > rows[i - 1].R_e))
      throw Error("recover_momentum: R_e must be increasing");

  // fit window: top third of rows by R_e, at least 3
  std::size_t nfit = std::max<std::size_t>(3, rows.size() / 3);
  std::size_t start = rows.size() - nfit;

  // linear extrapolation of a_e/R_e against x = R_e^(-delta) (delta=0 -> 1/R_e)
  const double expo = (delta > 0.0) ? delta : 1.0;
  double sx = 0, sxx = 0;
  Eigen::Vector3d sy = Vec3::Zero(), sxy = Vec3::Zero();
  const double n = double(nfit);
  for (std::size_t i = start; i < rows.size(); ++i) {
    const double x = std::pow(rows[i].R_e, -expo);
    sx += x;
    sxx += x * x;
    sy += rows[i].a_e_over_Re;
    sxy += x * rows[i].a_e_over_Re;
  }
  const double det = n * sxx - sx * sx;
  Vec3 intercept, slope;
  if (std::abs(det) < 1e-300) {
    intercept = sy / n;
    slope.setZero();
  } else {
    slope = (n * sxy - sx * sy) / det;
    intercept = (sy - slope * sx) / n;
  }
  double res2 = 0.0;
  for (std::size_t i = start; i < rows.size(); ++i) {
    const double x = std::pow(rows[i].R_e, -expo);
    res2 += (rows[i].a_e_over_Re - intercept - slope * x).squaredNorm();
  }

  MomentumEstimate est;
  est.form = form;
  est.branch = branch;
  est.fit_residual = std::sqrt(res2 / n);
  est.tau_hat = intercept.norm();

  const double noise_floor = 1e-12;
  if (est.tau_hat < noise_floor) {
    est.tau_hat = 0.0;
    est.direction = Vec3::Zero();
    est.p_hat = Vec3::Zero();
    return est;
  }
  est.direction = intercept / est.tau_hat;

  double magnitude;
  if (form == MomentumForm::York) {
    magnitude = 2.0 * m * est.tau_hat / (1.0 + est.tau_hat * est.tau_hat);
  } else {
    // invert tau~(v) = (1 - sqrt(1 - 16/15 v^2)) / (8/5 v) for v = |p|/m
    const double t = est.tau_hat;
    magnitude = m * 2.0 * 1.6 * t / ((16.0 / 15.0) + (1.6 * t) * (1.6 * t));
  }
  const double sgn = (branch == SignBranch::Plus) ? 1.0 : -1.0;
  est.p_hat = sgn * magnitude * est.direction;
  return est;
}

}  // namespace pmcf
