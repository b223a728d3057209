#include <doctest.h>

#include <cmath>

#include "pmcf/momentum.hpp"
#include "test_helpers.hpp"

using namespace pmcf;
using namespace pmcf::testing;

TEST_CASE("tau_of_v: york closed form and limits") {
  CHECK(tau_of_v(0.0, MomentumForm::York) == 0.0);
  CHECK(tau_of_v(1.0, MomentumForm::York) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(tau_of_v(0.5, MomentumForm::York) == doctest::Approx(0.26794919243112270).epsilon(1e-14));
  // small-v slope 1/2
  CHECK(tau_of_v(1e-6, MomentumForm::York) / 1e-6 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS((void)tau_of_v(1.0001, MomentumForm::York), Error);
  CHECK_THROWS_AS((void)tau_of_v(-0.1, MomentumForm::York), Error);
}

TEST_CASE("tau_of_v: corvino-schoen slope and admissible range") {
  CHECK(tau_of_v(0.0, MomentumForm::CorvinoSchoen) == 0.0);
  CHECK(tau_of_v(1e-6, MomentumForm::CorvinoSchoen) / 1e-6 ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  // admissibility is the radicand bound v < sqrt(15)/4 = 0.9682; the looser
  // quoted value 15/16 = 0.9375 lies inside it and stays admissible
  const double vmax = std::sqrt(15.0) / 4.0;
  CHECK_NOTHROW((void)tau_of_v(vmax - 1e-9, MomentumForm::CorvinoSchoen));
  CHECK_NOTHROW((void)tau_of_v(15.0 / 16.0, MomentumForm::CorvinoSchoen));
  CHECK_THROWS_AS((void)tau_of_v(vmax, MomentumForm::CorvinoSchoen), Error);
  CHECK_THROWS_AS((void)tau_of_v(0.99, MomentumForm::CorvinoSchoen), Error);
}

TEST_CASE("tau_of_v: monotone increasing, bounded by 1") {
  for (auto form : {MomentumForm::York, MomentumForm::CorvinoSchoen}) {
    const double vmax = form == MomentumForm::York ? 1.0 : std::sqrt(15.0) / 4.0 - 1e-9;
    double prev = -1.0;
    for (int i = 0; i <= 50; ++i) {
      const double v = vmax * i / 50.0;
      const double t = tau_of_v(v, form);
      CHECK(t > prev);
      CHECK(t <= 1.0 + 1e-12);
      prev = t;
    }
  }
}

namespace {

// synthetic series with a_e/R_e equal to the asymptotic drift
DriftSeries synthetic_series(double tau, const Vec3& dir, int n = 9) {
  DriftSeries s;
  for (int i = 0; i < n; ++i) {
    DriftRow row;
    row.h = 0.1 / (i + 1);
    row.R_e = 20.0 * (i + 1);
    row.a_e_over_Re = tau * dir;
    row.a_e = row.a_e_over_Re * row.R_e;
    row.a_g = row.a_e;
    s.rows.push_back(row);
  }
  return s;
}

}  // namespace

TEST_CASE("recover_momentum: exact round trip of the drift law") {
  const Vec3 dir = Vec3(1, 2, -2).normalized();
  for (double v : {0.05, 0.1, 0.2}) {
    const double tau = tau_of_v(v, MomentumForm::York);
    const MomentumEstimate est = recover_momentum(synthetic_series(tau, dir), 1.0, 0.0,
                                                  MomentumForm::York, SignBranch::Plus);
    CHECK(std::abs(est.p_hat.norm() - v) < 1e-10);
    CHECK((est.direction - dir).norm() < 1e-12);
    CHECK(std::abs(est.direction.norm() - 1.0) < 1e-12);
    CHECK(est.tau_hat >= 0.0);
    CHECK(est.tau_hat < 1.0);
  }
  // corvino-schoen inversion round-trips too
  for (double v : {0.05, 0.1}) {
    const double tau = tau_of_v(v, MomentumForm::CorvinoSchoen);
    const MomentumEstimate est = recover_momentum(synthetic_series(tau, dir), 1.0, 0.0,
                                                  MomentumForm::CorvinoSchoen, SignBranch::Plus);
    CHECK(std::abs(est.p_hat.norm() - v) < 1e-10);
  }
}

TEST_CASE("recover_momentum: branch fixes the sign") {
  const Vec3 dir(0, 0, 1);
  const double tau = tau_of_v(0.1, MomentumForm::York);
  const auto plus = recover_momentum(synthetic_series(tau, dir), 1.0, 0.0, MomentumForm::York,
                                     SignBranch::Plus);
  const auto minus = recover_momentum(synthetic_series(tau, dir), 1.0, 0.0, MomentumForm::York,
                                      SignBranch::Minus);
  CHECK(plus.p_hat[2] > 0.0);
  CHECK(minus.p_hat[2] < 0.0);
  CHECK((plus.p_hat + minus.p_hat).norm() < 1e-14);
}

TEST_CASE("recover_momentum: zero drift reports zero momentum with residual") {
  DriftSeries s = synthetic_series(0.0, Vec3(0, 0, 1));
  const MomentumEstimate est =
      recover_momentum(s, 1.0, 0.0, MomentumForm::York, SignBranch::Plus);
  CHECK(est.tau_hat == 0.0);
  CHECK(est.p_hat.norm() == 0.0);
}

TEST_CASE("recover_momentum rejects bad series") {
  DriftSeries s = synthetic_series(0.05, Vec3(1, 0, 0));
  std::swap(s.rows[2].R_e, s.rows[3].R_e);
  CHECK_THROWS_AS(
      (void)recover_momentum(s, 1.0, 0.0, MomentumForm::York, SignBranch::Plus), Error);
  DriftSeries tiny;
  tiny.rows = {s.rows[0], s.rows[1]};
  CHECK_THROWS_AS(
      (void)recover_momentum(tiny, 1.0, 0.0, MomentumForm::York, SignBranch::Plus), Error);
}

TEST_CASE("center_drift_series validates and tabulates") {
  FoliationResult fol;
  fol.family = schwarzschild_family(1.0);
  for (int i = 0; i < 4; ++i) {
    SolveResult r;
    r.converged = true;
    r.h = 0.1 / (i + 1);
    r.summary.R_e = 20.0 * (i + 1);
    r.summary.a_e = Vec3(0.01, 0, 0) * (i + 1);
    r.summary.a_g = Vec3(0.005, 0, 0) * (i + 1);
    fol.members.emplace_back(r.h, r);
  }
  DriftSeries s = center_drift_series(fol);
  REQUIRE(s.rows.size() == 4);
  CHECK((s.rows[1].center_diff - Vec3(0.01, 0, 0)).norm() < 1e-15);
  CHECK((s.rows[2].a_e_over_Re - Vec3(0.03 / 60.0, 0, 0)).norm() < 1e-15);

  FoliationResult short_fol;
  short_fol.members = {fol.members[0], fol.members[1]};
  CHECK_THROWS_AS((void)center_drift_series(short_fol), Error);

  FoliationResult bad = fol;
  bad.members[2].second.converged = false;
  CHECK_THROWS_AS((void)center_drift_series(bad), Error);
}

TEST_CASE("direction invariance: rotating p rotates the recovered momentum") {
  // full solver runs at a coarse grid; drift directions must track the data
  const auto grid = SphericalGrid::make(11);
  const double angle = 40.0 * M_PI / 180.0;
  Eigen::Matrix3d Q = Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
  const Vec3 p0(0, 0, 0.1);

  auto run = [&](const Vec3& p) {
    const DataFamily f = york_family(1.0, p, 1);
    std::vector<double> h_list;
    for (double r : {60.0, 90.0, 135.0, 200.0, 300.0})
      h_list.push_back(schwarzschild_mean_curvature(1.0, r));
    FoliationResult fol = foliate(grid, f, h_list, {});
    return recover_momentum(center_drift_series(fol), 1.0, f.delta, MomentumForm::York,
                            f.branch);
  };
  const MomentumEstimate e0 = run(p0);
  const MomentumEstimate e1 = run(Q * p0);
  CHECK((Q * e0.p_hat - e1.p_hat).norm() < 0.02 * p0.norm());
  CHECK(std::abs(e0.p_hat.norm() - 0.1) < 0.01);
}
