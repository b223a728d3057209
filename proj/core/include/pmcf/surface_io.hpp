#ifndef PMCF_SURFACE_IO_HPP
#define PMCF_SURFACE_IO_HPP

#include <string>
#include <vector>

#include "pmcf/momentum.hpp"
#include "pmcf/solver.hpp"

namespace pmcf {

// Frozen float formatting for all serialized numbers: 17 significant digits,
// lowercase e-notation.
std::string format_float(double v);

// On-disk surface: header, harmonic coefficients of u in (l, m) order
// (l ascending, m from -l to l), and the summary scalars block.
struct SurfaceFileData {
  int schema = 1;
  std::uint64_t fingerprint = 0;
  int L = 0;
  double h = 0.0;
  double tau = 0.0;
  SignBranch branch = SignBranch::Plus;
  Eigen::VectorXd coeffs;  // (L+1)^2 values
  SurfaceSummary summary;
  int iterations = 0;
  double residual = 0.0;
};

SurfaceFileData make_surface_file(const SolveResult& result, const DataFamily& family);

void write_surface(const SurfaceFileData& data, const std::string& path);
SurfaceFileData load_surface(const std::string& path);

// Rebuild the nodal surface; throws ConfigError(Schema) when the stored L
// does not match the grid.
GraphSurface to_graph_surface(const SurfaceFileData& data, const GridPtr& grid);

// fingerprint check is advisory; callers may warn and proceed.
bool fingerprint_matches(const SurfaceFileData& data, const DataFamily& family);

// CSV emitters. Column orders are frozen by golden files.
std::string foliation_csv(const FoliationResult& fol);
std::string drift_csv(const DriftSeries& series);

struct GapRow {
  double R_e = 0, mu1 = 0, bound = 0, ratio = 0;
};
std::string gap_csv(const std::vector<GapRow>& rows);

std::string summary_csv_header();
std::string summary_csv_row(double h, double tau, const SolveResult& r);

// Structured momentum report (JSON).
std::string momentum_report(const MomentumEstimate& est, double m, double delta);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace pmcf

#endif
