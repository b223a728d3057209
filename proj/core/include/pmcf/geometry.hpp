#ifndef PMCF_GEOMETRY_HPP
#define PMCF_GEOMETRY_HPP

#include <Eigen/Dense>

#include "pmcf/ambient.hpp"
#include "pmcf/sphere.hpp"

namespace pmcf {

// Radial graph over S^2: the surface { u(p) p : p in S^2 }.
struct GraphSurface {
  GridPtr grid;
  Eigen::ArrayXd u;  // Euclidean radius per node, positive

  GraphSurface() = default;
  GraphSurface(GridPtr g, Eigen::ArrayXd radius) : grid(std::move(g)), u(std::move(radius)) {}
  static GraphSurface sphere(const GridPtr& grid, double radius);
};

// Ambient position field of a parameterized surface together with its
// successive frame derivatives on the parameter sphere. Rows are nodes.
struct ImmersionFields {
  Eigen::MatrixX3d X, d1X, d2X, d11X, d12X, d21X, d22X;
};

ImmersionFields immersion_from_graph(const GraphSurface& s);

// Full pointwise geometry of a surface in (M, g_tau, K_tau).
//
// Conventions: nu is the outward g-unit normal, A(X,Y) = g(nabla_X nu, Y), so
// Euclidean spheres have H > 0; G = det A - Ric(nu,nu) + Scal/2 is the Gauss
// curvature (the sign fixed by G = 1/r^2 on Euclidean spheres); G_alt is the
// opposite-sign variant kept as a diagnostic.
struct SurfaceGeometry {
  GridPtr grid;
  DataFamily family;
  ImmersionFields imm;

  // frames and metrics (orthonormal round-sphere frame components)
  Eigen::MatrixX3d nu, nu_e;
  Eigen::ArrayXd gam11, gam12, gam22;      // induced metric, g
  Eigen::ArrayXd ginv11, ginv12, ginv22;
  Eigen::ArrayXd game11, game12, game22;   // induced metric, Euclidean
  Eigen::ArrayXd dmu, dmu_e;               // area densities w.r.t. round measure

  // induced connection: w[d][a][b] = frame coefficient of nabla_{e_a} e_b
  Eigen::ArrayXd wconn[2][2][2];

  // second fundamental forms and curvatures
  Eigen::ArrayXd A11, A12, A22, H, normA2, detA;
  Eigen::ArrayXd Ar11, Ar12, Ar22, normAring2;   // traceless part
  Eigen::ArrayXd Ae11, Ae12, Ae22, H_e;
  Eigen::ArrayXd G, G_alt;

  // K slices and ambient samples
  Eigen::ArrayXd KT11, KT12, KT22;   // tangential slice of K
  Eigen::ArrayXd theta1, theta2;     // K(e_alpha, nu)
  Eigen::ArrayXd K_nu_nu, trK, P;
  Eigen::ArrayXd ric_nu_nu, scal, gradK_nu_nu, grad_trK_nu;
  Eigen::ArrayXd mu_constraint, J_nu;  // constraint densities; J_nu = J(nu)

  Eigen::ArrayXd q;    // g(rho, nu): converts normal speed to radial speed
  Eigen::ArrayXd HP;   // H + s P with s the family's sign branch
  Eigen::ArrayXd r;    // Euclidean radius per node

  ScalarField field(const Eigen::ArrayXd& values) const {
    return ScalarField(grid, values);
  }
};

SurfaceGeometry compute_geometry(const GraphSurface& surface, const DataFamily& family);
SurfaceGeometry compute_geometry(const GridPtr& grid, const ImmersionFields& imm,
                                 const DataFamily& family);

// Laplace-Beltrami operator of the induced metric applied to a band-limited
// scalar, assembled from frame derivatives.
ScalarField laplace_beltrami(const SurfaceGeometry& geom, const ScalarField& f);

double hawking_mass(const SurfaceGeometry& geom);

struct ConditionFlags {
  // (C1) R <= c r_min, (C2) 1/R <= c (H±P), (C3) |A|^2 <= c det A,
  // (C4) |a_e| <= c' R_e. Margins are positive when the condition holds.
  bool c1 = false, c2 = false, c3 = false, c4 = false;
  double margin1 = 0, margin2 = 0, margin3 = 0, margin4 = 0;
  bool all() const { return c1 && c2 && c3 && c4; }
};

struct SurfaceSummary {
  double area_g = 0, area_e = 0;
  double R_e = 0;        // Euclidean area radius
  double R_geom = 0;     // g-area radius
  double r_min = 0;
  Vec3 a_e = Vec3::Zero(), a_g = Vec3::Zero();
  double hawking = 0;
  double aring_l2 = 0, grad_aring_l2 = 0;
  double hp_min = 0, hp_max = 0;
  double convexity_margin = 0;  // min over nodes of 4 det A - |A|^2
  ConditionFlags flags_b;  // constants 8 and 3/4
  ConditionFlags flags_c;  // constants 4 and 7/8
  double phi_bar = 0, H_bar = 0;  // reference values at radius R_e
};

SurfaceSummary summarize(const SurfaceGeometry& geom, const DataFamily& family);

}  // namespace pmcf

#endif
