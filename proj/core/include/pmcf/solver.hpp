#ifndef PMCF_SOLVER_HPP
#define PMCF_SOLVER_HPP

#include <complex>
#include <utility>
#include <vector>

#include "pmcf/geometry.hpp"

namespace pmcf {

// Dense collocation representation of the linearization L^{H±P}:
//   L f = -Lap f - f (|A|^2 + Ric(nu,nu) ± grad_nu K(nu,nu) ∓ grad_nu tr K)
//         ± 2 K(grad f, nu).
// `coeff_to_node` maps harmonic coefficients of f to nodal values of L f;
// `projected` is the square system obtained by composing with analysis.
struct LinearizedOperator {
  GridPtr grid;
  Eigen::MatrixXd coeff_to_node;  // nodes x ncoeff
  Eigen::MatrixXd projected;      // ncoeff x ncoeff

  // L applied to a nodal field (band-limited content).
  ScalarField apply(const ScalarField& f) const;
};

struct NewtonSettings {
  double tolerance = 1e-10;  // sup-norm residual
  int max_iterations = 50;
  int step_halving = 8;
  double dtau = 0.1;     // continuation step in tau
  double h_ratio = 0.8;  // default geometric spacing of h sweeps

  void validate() const;
};

struct SolveResult {
  GraphSurface surface;
  SurfaceSummary summary;
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
  double h = 0.0;
  double tau = 0.0;
};

// Lapse/nesting record for one adjacent pair of foliation members.
struct FoliationPairRecord {
  double h_from = 0, h_to = 0;
  bool lapse_sign_definite = false;
  int lapse_sign = 0;           // sign of the proxy where definite
  double nesting_margin = 0.0;  // min of u_{h'} - u_h
};

struct FoliationResult {
  DataFamily family;
  std::vector<std::pair<double, SolveResult>> members;  // ordered as h_list
  std::vector<FoliationPairRecord> pairs;
};

// Mean curvature of the centered coordinate sphere of radius r in the
// Schwarzschild metric of mass m.
double schwarzschild_mean_curvature(double m, double r);

// Radius with H^S(r) = h on the monotone branch r > r1(m), by bisection to
// 1e-12 relative. m = 0 reduces to r = 2/h.
double initial_radius(double m, double h);

LinearizedOperator assemble_linearization(const SurfaceGeometry& geom,
                                          const DataFamily& family);

SolveResult newton_solve(const GraphSurface& u0, const DataFamily& family, double h,
                         const NewtonSettings& settings);

// Walks the curve kappa of (h, tau) knots starting from the exact
// Schwarzschild sphere at kappa.front() (which must have tau = 0), using the
// previous solution as predictor and bisecting segments on Newton failure.
std::vector<SolveResult> continuation(const GridPtr& grid, const DataFamily& family,
                                      const std::vector<std::pair<double, double>>& kappa,
                                      const NewtonSettings& settings);

// tau-sweep to 1 at h_list.front(), then h-sweep along h_list.
FoliationResult foliate(const GridPtr& grid, const DataFamily& family,
                        const std::vector<double>& h_list, const NewtonSettings& settings);

// Smallest eigenvalue of the symmetrized quadratic form f -> int f L f dmu on
// the dmu-mean-zero subspace, constant mode projected out.
double spectral_gap(const LinearizedOperator& op, const SurfaceGeometry& geom);

// Eigenvalues of the projected collocation matrix (nonsymmetric); diagnostic,
// used to exhibit the flat-space translation kernel.
std::vector<std::complex<double>> operator_eigenvalues(const LinearizedOperator& op);

// Both sides of the integrated linearization identity: direct = int f L f dmu
// and the decomposition through the constraint densities. Returns
// {direct, decomposed}.
std::pair<double, double> quadratic_form(const SurfaceGeometry& geom,
                                         const DataFamily& family, const ScalarField& f);

}  // namespace pmcf

#endif
