#ifndef PMCF_SPHERE_HPP
#define PMCF_SPHERE_HPP

#include <Eigen/Dense>
#include <memory>
#include <utility>

#include "pmcf/errors.hpp"

namespace pmcf {

// Pseudospectral scalar calculus on S^2.
//
// Grid: (L+1) Gauss--Legendre colatitudes (no pole nodes) times 2L+2
// equispaced longitudes. Real spherical harmonics, orthonormal, no
// Condon--Shortley phase; coefficients ordered l ascending, m from -l to l.
// All tangential derivatives are frame components in the orthonormal frame
// (e_theta, e_phi/sin theta) of the round sphere, synthesized pointwise from
// harmonic coefficients, so no derivative ever touches the poles.

class SphericalGrid;
using GridPtr = std::shared_ptr<const SphericalGrid>;

struct ScalarField {
  GridPtr grid;
  Eigen::ArrayXd v;  // one value per node, theta-major ordering

  ScalarField() = default;
  ScalarField(GridPtr g, Eigen::ArrayXd values) : grid(std::move(g)), v(std::move(values)) {}
};

struct HarmonicCoeffs {
  int L = 0;
  Eigen::VectorXd a;  // size (L+1)^2, index l*l + (l+m)

  static int index(int l, int m) { return l * l + l + m; }
};

// Successive frame derivatives D1 = d/dtheta, D2 = (1/sin theta) d/dphi.
enum class Deriv { Value, D1, D2, D11, D12, D21, D22 };

class SphericalGrid : public std::enable_shared_from_this<SphericalGrid> {
 public:
  static GridPtr make(int L);

  int degree() const { return L_; }
  int ntheta() const { return L_ + 1; }
  int nphi() const { return 2 * L_ + 2; }
  int nodes() const { return ntheta() * nphi(); }
  int ncoeff() const { return (L_ + 1) * (L_ + 1); }

  int node_index(int itheta, int jphi) const { return itheta * nphi() + jphi; }

  // Per-node angular data.
  const Eigen::ArrayXd& theta() const { return theta_node_; }
  const Eigen::ArrayXd& phi() const { return phi_node_; }
  const Eigen::ArrayXd& sin_theta() const { return sin_theta_node_; }
  const Eigen::ArrayXd& cos_theta() const { return cos_theta_node_; }
  // Quadrature weights against the round measure; sum to 4*pi.
  const Eigen::ArrayXd& weights() const { return w_node_; }

  ScalarField constant(double value) const;

  HarmonicCoeffs analyze(const ScalarField& f) const;
  ScalarField synthesize(const HarmonicCoeffs& c, Deriv d = Deriv::Value) const;

  // Evaluate a harmonic expansion (or a frame derivative of it) at an
  // arbitrary point; used by oracles and surface interpolation.
  double evaluate(const HarmonicCoeffs& c, double theta, double phi,
                  Deriv d = Deriv::Value) const;

  // Dense synthesis operator as a matrix (nodes x ncoeff).
  const Eigen::MatrixXd& synthesis_matrix(Deriv d) const;
  // Dense analysis operator (ncoeff x nodes).
  const Eigen::MatrixXd& analysis_matrix() const { return analysis_; }

 private:
  explicit SphericalGrid(int L);

  int L_;
  Eigen::ArrayXd gl_x_, gl_w_;                       // Gauss-Legendre nodes/weights in cos(theta)
  Eigen::ArrayXd theta_node_, phi_node_, w_node_;    // per node
  Eigen::ArrayXd sin_theta_node_, cos_theta_node_;
  Eigen::MatrixXd analysis_;
  Eigen::MatrixXd synth_[7];

  void build_tables();
};

// Frame gradient of a band-limited field: (d_theta f, (1/sin theta) d_phi f).
std::pair<ScalarField, ScalarField> surface_derivative(const ScalarField& f);

// sum over nodes of w * field * area_element. `area_element` is the density
// of the surface measure relative to the round measure.
double quadrature(const ScalarField& field, const ScalarField& area_element);
double quadrature(const ScalarField& field);

// Normalized associated Legendre P̄_lm(cos theta) and its first two theta
// derivatives; exposed for tests.
void legendre_row(int L, double theta, int m, Eigen::Ref<Eigen::VectorXd> P,
                  Eigen::Ref<Eigen::VectorXd> dP, Eigen::Ref<Eigen::VectorXd> d2P);

// Real spherical harmonic Y_lm at (theta, phi).
double real_sph_harm(int l, int m, double theta, double phi);

}  // namespace pmcf

#endif
