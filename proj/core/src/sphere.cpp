#include "pmcf/sphere.hpp"

#include <cmath>
#include <vector>

namespace pmcf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, Eigen::ArrayXd& x, Eigen::ArrayXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int l = 0; l < n; ++l) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * l + 1) * xi * p1 - l * p2) / (l + 1);
      }
      double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      double dx = p0 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int l = 0; l < n; ++l) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2 * l + 1) * xi * p1 - l * p2) / (l + 1);
    }
    double dp = n * (xi * p0 - p1) / (xi * xi - 1.0);
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

// Azimuthal factor t_m(phi): 1, sqrt(2) cos(m phi), sqrt(2) sin(|m| phi).
inline double trig_factor(int m, double phi) {
  if (m == 0) return 1.0;
  if (m > 0) return std::sqrt(2.0) * std::cos(m * phi);
  return std::sqrt(2.0) * std::sin(-m * phi);
}

}  // namespace

void legendre_row(int L, double theta, int m, Eigen::Ref<Eigen::VectorXd> P,
                  Eigen::Ref<Eigen::VectorXd> dP, Eigen::Ref<Eigen::VectorXd> d2P) {
  const double ct = std::cos(theta), st = std::sin(theta);
  P.setZero();
  dP.setZero();
  d2P.setZero();
  // Diagonal start P̄_mm, then upward recurrence in l.
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
  if (m <= L) P[m] = pmm;
  if (m + 1 <= L) P[m + 1] = std::sqrt(2.0 * m + 3.0) * ct * pmm;
  for (int l = m + 2; l <= L; ++l) {
    double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
    double b = -std::sqrt((2.0 * l + 1.0) / (2.0 * l - 3.0) *
                          ((l - 1.0) * (l - 1.0) - double(m) * m) /
                          (double(l) * l - double(m) * m));
    P[l] = a * ct * P[l - 1] + b * P[l - 2];
  }
  for (int l = m; l <= L; ++l) {
    double below = (l - 1 >= m) ? P[l - 1] : 0.0;
    double c = std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0));
    dP[l] = (l * ct * P[l] - c * below) / st;
    d2P[l] = -ct / st * dP[l] - (l * (l + 1.0) - double(m) * m / (st * st)) * P[l];
  }
}

double real_sph_harm(int l, int m, double theta, double phi) {
  int ma = std::abs(m);
  Eigen::VectorXd P(l + 1), dP(l + 1), d2P(l + 1);
  legendre_row(l, theta, ma, P, dP, d2P);
  return P[l] * trig_factor(m, phi);
}

SphericalGrid::SphericalGrid(int L) : L_(L) {
  if (L < 3) throw Error("grid degree L must be at least 3");
  gauss_legendre(ntheta(), gl_x_, gl_w_);

  const int nt = ntheta(), np = nphi(), N = nodes();
  theta_node_.resize(N);
  phi_node_.resize(N);
  w_node_.resize(N);
  sin_theta_node_.resize(N);
  cos_theta_node_.resize(N);
  for (int i = 0; i < nt; ++i) {
    double th = std::acos(gl_x_[i]);
    for (int j = 0; j < np; ++j) {
      int n = node_index(i, j);
      theta_node_[n] = th;
      phi_node_[n] = 2.0 * kPi * j / np;
      w_node_[n] = gl_w_[i] * (2.0 * kPi / np);
      sin_theta_node_[n] = std::sin(th);
      cos_theta_node_[n] = gl_x_[i];
    }
  }
  build_tables();
}

GridPtr SphericalGrid::make(int L) { return GridPtr(new SphericalGrid(L)); }

void SphericalGrid::build_tables() {
  const int nt = ntheta(), np = nphi(), N = nodes(), M = ncoeff();

  analysis_.resize(M, N);
  for (auto& s : synth_) s.resize(N, M);

  // Per theta node: P̄, dP̄, d2P̄ for all (l,m).
  Eigen::VectorXd P(L_ + 1), dP(L_ + 1), d2P(L_ + 1);
  for (int i = 0; i < nt; ++i) {
    const double th = theta_node_[node_index(i, 0)];
    const double st = sin_theta_node_[node_index(i, 0)];
    const double ct = cos_theta_node_[node_index(i, 0)];
    for (int ma = 0; ma <= L_; ++ma) {
      legendre_row(L_, th, ma, P, dP, d2P);
      for (int l = ma; l <= L_; ++l) {
        const double p = P[l], dp = dP[l], d2p = d2P[l];
        const double dp_over_s = dp / st;
        const double p_over_s = p / st;
        const double d_p_over_s = dp / st - ct * p / (st * st);
        for (int sgn = (ma == 0 ? 1 : 0); sgn < 2; ++sgn) {
          const int m = (sgn == 1) ? ma : -ma;
          const int col = HarmonicCoeffs::index(l, m);
          for (int j = 0; j < np; ++j) {
            const int n = node_index(i, j);
            const double t = trig_factor(m, phi_node_[n]);
            const double t_swap = trig_factor(-m, phi_node_[n]);
            const double y = p * t;
            analysis_(col, n) = w_node_[n] * y;
            synth_[int(Deriv::Value)](n, col) = y;
            synth_[int(Deriv::D1)](n, col) = dp * t;
            synth_[int(Deriv::D2)](n, col) = -m * p_over_s * t_swap;
            synth_[int(Deriv::D11)](n, col) = d2p * t;
            synth_[int(Deriv::D12)](n, col) = -m * d_p_over_s * t_swap;
            synth_[int(Deriv::D21)](n, col) = -m * dp_over_s * t_swap;
            synth_[int(Deriv::D22)](n, col) = -double(m) * m * p_over_s / st * t;
          }
        }
      }
    }
  }
}

ScalarField SphericalGrid::constant(double value) const {
  return ScalarField(shared_from_this(), Eigen::ArrayXd::Constant(nodes(), value));
}

HarmonicCoeffs SphericalGrid::analyze(const ScalarField& f) const {
  if (f.grid.get() != this) throw GridMismatchError("analyze: field lives on a different grid");
  if (!f.v.isFinite().all()) throw Error("analyze: field has non-finite values");
  HarmonicCoeffs c;
  c.L = L_;
  c.a = analysis_ * f.v.matrix();
  return c;
}

ScalarField SphericalGrid::synthesize(const HarmonicCoeffs& c, Deriv d) const {
  if (c.L != L_) throw GridMismatchError("synthesize: coefficient degree mismatch");
  ScalarField f;
  f.grid = shared_from_this();
  f.v = (synth_[int(d)] * c.a).array();
  return f;
}

const Eigen::MatrixXd& SphericalGrid::synthesis_matrix(Deriv d) const { return synth_[int(d)]; }

double SphericalGrid::evaluate(const HarmonicCoeffs& c, double theta, double phi,
                               Deriv d) const {
  if (c.L != L_) throw GridMismatchError("evaluate: coefficient degree mismatch");
  const double st = std::sin(theta), ct = std::cos(theta);
  Eigen::VectorXd P(L_ + 1), dP(L_ + 1), d2P(L_ + 1);
  double out = 0.0;
  for (int ma = 0; ma <= L_; ++ma) {
    legendre_row(L_, theta, ma, P, dP, d2P);
    for (int l = ma; l <= L_; ++l) {
      for (int sgn = (ma == 0 ? 1 : 0); sgn < 2; ++sgn) {
        const int m = (sgn == 1) ? ma : -ma;
        const double a = c.a[HarmonicCoeffs::index(l, m)];
        if (a == 0.0) continue;
        const double t = trig_factor(m, phi);
        const double t_swap = trig_factor(-m, phi);
        double w = 0.0;
        switch (d) {
          case Deriv::Value: w = P[l] * t; break;
          case Deriv::D1: w = dP[l] * t; break;
          case Deriv::D2: w = -m * P[l] / st * t_swap; break;
          case Deriv::D11: w = d2P[l] * t; break;
          case Deriv::D12: w = -m * (dP[l] / st - ct * P[l] / (st * st)) * t_swap; break;
          case Deriv::D21: w = -m * dP[l] / st * t_swap; break;
          case Deriv::D22: w = -double(m) * m * P[l] / (st * st) * t; break;
        }
        out += a * w;
      }
    }
  }
  return out;
}

std::pair<ScalarField, ScalarField> surface_derivative(const ScalarField& f) {
  if (!f.grid) throw GridMismatchError("surface_derivative: field without grid");
  HarmonicCoeffs c = f.grid->analyze(f);
  return {f.grid->synthesize(c, Deriv::D1), f.grid->synthesize(c, Deriv::D2)};
}

double quadrature(const ScalarField& field, const ScalarField& area_element) {
  if (field.grid != area_element.grid)
    throw GridMismatchError("quadrature: fields live on different grids");
  return (field.grid->weights() * field.v * area_element.v).sum();
}

double quadrature(const ScalarField& field) {
  return (field.grid->weights() * field.v).sum();
}

}  // namespace pmcf
