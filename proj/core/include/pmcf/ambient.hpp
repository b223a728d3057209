#ifndef PMCF_AMBIENT_HPP
#define PMCF_AMBIENT_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "pmcf/errors.hpp"

namespace pmcf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class MetricKind { Euclidean, Schwarzschild, SchwarzschildPlusPerturbation };
enum class KKind { Zero, York, CorvinoSchoen };
enum class SignBranch { Plus, Minus };

inline double branch_sign(SignBranch b) { return b == SignBranch::Plus ? 1.0 : -1.0; }

// One term of the metric perturbation: c * r^(-1-delta) * Y_lm(x/r) * M.
struct PerturbationTerm {
  double c = 1.0;
  int l = 0;
  int m = 0;
  Mat3 M = Mat3::Identity();  // fixed symmetric matrix
};

// Smooth compactly-describable perturbation recipe with decay r^(-1-delta).
// Terms are rescaled at construction so that the sampled weighted sup of
// |g - g^S| and its first two derivatives stays below the amplitude eta.
struct PerturbationSpec {
  double eta = 0.0;
  std::vector<PerturbationTerm> terms;
  double normalization = 1.0;  // divides the raw term sum

  // Raw angular-radial profile sum (before eta and normalization).
  Mat3 raw(const Vec3& x, double delta) const;
  // eta-scaled perturbation tensor at x.
  Mat3 value(const Vec3& x, double delta) const;
};

// Ambient data family selecting (g_tau, K_tau) on R^3 minus B_sigma(0).
struct DataFamily {
  double m = 1.0;        // Schwarzschild mass; > 0 unless metric is Euclidean
  double delta = 0.0;    // decay exponent
  double sigma = 0.5;    // inner radius of the chart
  MetricKind metric_kind = MetricKind::Schwarzschild;
  PerturbationSpec perturbation;
  double tau = 1.0;      // interpolation weight in [0,1]
  KKind k_kind = KKind::Zero;
  Vec3 momentum = Vec3::Zero();
  int york_coefficient = 1;  // transverse-term coefficient; 1 is trace-free
  SignBranch branch = SignBranch::Plus;

  void validate() const;
  // Stable hash of the physical parameters, used to fingerprint output files.
  std::uint64_t fingerprint() const;
};

// Pointwise metric data of g_tau at x.
struct MetricEval {
  Vec3 x;
  Mat3 g;
  Mat3 g_inv;
  std::array<Mat3, 3> christoffel;  // christoffel[k](i,j) = Gamma^k_ij
  Mat3 ricci;
  double scal = 0.0;
  double phi = 1.0;
};

// Pointwise extrinsic curvature data of K_tau at x.
struct ExtrinsicEval {
  Mat3 K;
  std::array<Mat3, 3> gradK;  // gradK[k](i,j) = (nabla_k K)_ij, ambient covariant
  double trK = 0.0;           // g_tau-trace
};

MetricEval eval_metric(const DataFamily& family, const Vec3& x);
ExtrinsicEval eval_extrinsic(const DataFamily& family, const Vec3& x);
ExtrinsicEval eval_extrinsic(const DataFamily& family, const Vec3& x, const MetricEval& me);

// Same family with the interpolation parameter replaced.
DataFamily interpolate_data(const DataFamily& family, double tau);

// Sup over a log-spaced radial probe set of the weighted decay quantities
// r^(1+delta)|g-g^S|, r^(2+delta)|Gamma-Gamma^S|, r^(3+delta)|Ric-Ric^S|,
// r^(2+delta)|K|, r^(3+delta)|grad K|.
struct DecayBounds {
  double g = 0.0;
  double christoffel = 0.0;
  double ricci = 0.0;
  double K = 0.0;
  double gradK = 0.0;
};
DecayBounds sampled_decay_bounds(const DataFamily& family, double r_lo, double r_hi,
                                 int n_radii = 8, int n_angles = 24);

// Rescales the perturbation recipe so that the sampled decay bounds of the
// metric quantities at eta = 1, tau = 1 stay at or below 1. After this the
// configured eta is an honest amplitude for the weighted sup norms.
void normalize_perturbation(DataFamily& family, double r_lo = 2.0, double r_hi = 200.0);

// Conformal factor of the Schwarzschild part and its gradient.
inline double conformal_phi(double m, double r) { return 1.0 + 0.5 * m / r; }

}  // namespace pmcf

#endif
