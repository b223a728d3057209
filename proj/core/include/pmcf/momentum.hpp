#ifndef PMCF_MOMENTUM_HPP
#define PMCF_MOMENTUM_HPP

#include <vector>

#include "pmcf/solver.hpp"

namespace pmcf {

// Asymptotic translation of the foliation as a function of v = |p|/m.
// York form: tau(v) = (1 - sqrt(1 - v^2)) / v on [0, 1].
// Corvino-Schoen form: (1 - sqrt(1 - 16/15 v^2)) / (8/5 v); the radicand
// limits the domain to v < sqrt(15)/4.
enum class MomentumForm { York, CorvinoSchoen };

double tau_of_v(double v, MomentumForm form);

struct DriftRow {
  double h = 0;
  double R_e = 0;
  Vec3 a_e = Vec3::Zero();
  Vec3 a_g = Vec3::Zero();
  Vec3 a_e_over_Re = Vec3::Zero();
  Vec3 center_diff = Vec3::Zero();  // a_e - a_g
};

struct DriftSeries {
  std::vector<DriftRow> rows;  // ordered by decreasing h, R_e increasing
};

DriftSeries center_drift_series(const FoliationResult& fol);

struct MomentumEstimate {
  double tau_hat = 0;                 // fitted drift magnitude
  Vec3 direction = Vec3::Zero();      // unit drift direction
  Vec3 p_hat = Vec3::Zero();          // signed momentum estimate
  MomentumForm form = MomentumForm::York;
  double fit_residual = 0;
  SignBranch branch = SignBranch::Plus;
};

// Extrapolates a_e/R_e against R_e^(-delta) (R_e^(-1) when delta = 0) over
// the top third of rows by R_e, then inverts the drift law
// |p| = 2 m tau / (1 + tau^2). The H+P branch drifts parallel to p and H-P
// opposite; the returned p_hat carries the branch-consistent sign.
MomentumEstimate recover_momentum(const DriftSeries& series, double m, double delta,
                                  MomentumForm form, SignBranch branch);

}  // namespace pmcf

#endif
