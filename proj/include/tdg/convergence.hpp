#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tdg/hdg2d.hpp"
#include "tdg/implicit1d.hpp"

namespace tdg {

/// One line of a refinement table; order is computed from the previous row
/// (log(e_prev/e)/log(h_prev/h)) and is NaN on the first row or after a
/// failed level.
struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string diagnostic;
};

/// Refinement series for one polynomial degree and one solution component.
struct ConvergenceSeries {
  int p = 0;
  int component = 0;
  std::vector<ConvergenceRow> rows;
};

struct RunConfig {
  std::string problem = "heat";
  std::vector<int> degrees = {2};
  std::string scheme = "third";          // third | fourth | "k,l"
  double ratio = 1.0;                    // dt / dx
  std::vector<int> levels = {4, 8, 16};  // element count (1D) / squares per side (2D)
  double T_override = -1.0;
  std::string out;
  int samples = 1000;
  bool plotdata = false;

  // solver knobs
  double newton_tol = 1e-10;
  double gmres_tol = 1e-12;
  std::string d2f_boundary = "normal";   // normal | literal
  std::string hybrid_flux = "implicit";  // implicit | total
  std::string trace_solve = "gmres";     // gmres | direct
  double eta_override = -1.0;
  double theta_override = -1.0;
  std::string mesh_out;

  bool is_2d() const { return problem == "linear2d" || problem == "euler2d"; }
  void validate() const;
};

RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& config, const std::string& key, const std::string& value);

SchemeCoeffs scheme_by_name(const std::string& name);
SolverConfig solver_config_from(const RunConfig& config);
HDGConfig hdg_config_from(const RunConfig& config);

/// L2 error of the discrete solution against a reference function, with
/// quadrature exact to degree 2p + 4 (oversampled for transcendental
/// references).
double compute_l2_error(const PolyField& w, const Basis1D& basis,
                        const std::function<double(double)>& reference);
double compute_l2_error_2d(const TriMesh2D& mesh, const BasisTri& basis, const Eigen::VectorXd& w,
                           int m, int component,
                           const std::function<double(const Eigen::Vector2d&)>& reference);

/// Orders for a synthetic or measured error sequence.
double observed_order(double h_prev, double e_prev, double h, double e);

struct SolveOutcome1D {
  IntegrationResult result;
  double error = 0.0;
  int degree = 0;
};

/// Run one 1D solve at the given resolution; exposes the integration log for
/// conservation checks.
SolveOutcome1D run_single_1d(const RunConfig& config, int p, int num_elements);

struct SolveOutcome2D {
  IntegrationResult2D result;
  Eigen::VectorXd errors;  // per component
  int degree = 0;
};

SolveOutcome2D run_single_2d(const RunConfig& config, int p, int squares_per_side);

/// Full refinement study: one series per (degree, component). Solver
/// failures become NaN rows with diagnostics.
std::vector<ConvergenceSeries> run_convergence(const RunConfig& config);

void emit_csv(const ConvergenceSeries& series, const std::string& path);
void emit_plotdata(const ConvergenceSeries& series, const std::string& path);

/// File name for a series: <base>_p<p>[_w<comp>].csv (component tag only for
/// systems).
std::string series_path(const std::string& base, const ConvergenceSeries& series, int m,
                        const std::string& extension);

/// Parse back an emitted CSV (round-trip checks).
std::vector<ConvergenceRow> read_csv(const std::string& path);

}  // namespace tdg
