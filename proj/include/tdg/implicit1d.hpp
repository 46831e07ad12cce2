#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "tdg/ldg1d.hpp"
#include "tdg/linalg.hpp"
#include "tdg/problems1d.hpp"
#include "tdg/schemes.hpp"

namespace tdg {

struct SolverConfig {
  double newton_tol = 1e-10;       // L2 norm of the coupled residual
  int newton_max_iter = 25;
  bool fd_jacobian = false;        // finite-difference Jacobian (cross-check mode)
  double fd_step = 1e-7;           // scaled by (1 + |coeff|)
  double linear_rel_tol = 1e-12;
  D2fBoundaryMode d2f_mode = D2fBoundaryMode::PhiNormal;
};

struct StepRecord {
  int index = 0;
  double t = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  double mass = 0.0;
};

struct IntegrationResult {
  AuxState1D state;
  std::vector<StepRecord> log;
  double mass_initial = 0.0;
  double mass_final = 0.0;
};

/// Coupled implicit step for the bundled unknown (w, w_x, w_xx, w_xxx):
/// the three weak derivative relations plus the two-derivative update of w,
/// solved monolithically. Linear fluxes assemble the operator once per step
/// size and reuse the factorization; Burgers runs Newton with an analytic
/// Jacobian.
class ImplicitSolver1D {
 public:
  ImplicitSolver1D(const Mesh1D& mesh, int degree, const Problem1D& problem,
                   const SchemeCoeffs& scheme, SolverConfig config = {});

  const LdgOperator& op() const { return op_; }
  const Problem1D& problem() const { return problem_; }

  /// Project w0; fill the derivative chain from analytic derivatives when the
  /// problem supplies them, otherwise fall back to the weak derivative solve.
  AuxState1D initial_state() const;

  /// w = projection of w0; derivatives from the weak relations regardless of
  /// smoothness (the right construction for non-smooth data).
  AuxState1D init_aux_discontinuous() const;

  AuxState1D step(const AuxState1D& xn, double dt);

  /// Uniform steps; the final step is shortened so the last time equals T
  /// exactly. Failures are rethrown with the step index attached.
  IntegrationResult integrate(const AuxState1D& x0, double T, double dt);

  /// Newton iterations taken by the most recent step (0 for linear solves).
  int last_newton_iterations() const { return last_newton_iterations_; }

  /// Coupled residual of a candidate state x against time level xn
  /// (diagnostics and finite-difference cross checks).
  Eigen::VectorXd coupled_residual(const AuxState1D& x, const AuxState1D& xn, double dt) const;

  /// Analytic Newton matrix at x (the constant operator for linear fluxes).
  Eigen::SparseMatrix<double> newton_matrix(const AuxState1D& x, double dt) const;

 private:
  Mesh1D mesh_;
  int degree_;
  Problem1D problem_;
  SchemeCoeffs scheme_;
  SolverConfig config_;
  LdgOperator op_;
  bool linear_flux_;

  // cached linear operator, keyed by dt
  std::optional<double> cached_dt_;
  std::unique_ptr<DirectSolver> cached_solver_;
  int last_newton_iterations_ = 0;

  int nm() const { return degree_ + 1; }
  int field_index(int element, int field, int mode) const {
    return element * 4 * nm() + field * nm() + mode;
  }

  Eigen::VectorXd pack(const AuxState1D& x) const;
  AuxState1D unpack(const Eigen::VectorXd& v) const;

  /// Full coupled residual; rhs_n collects the explicit time-level terms.
  Eigen::VectorXd residual(const AuxState1D& x, const Eigen::MatrixXd& rhs_n,
                           const Eigen::MatrixXd& wn, double dt) const;

  Eigen::SparseMatrix<double> fd_jacobian(const AuxState1D& x, const Eigen::MatrixXd& rhs_n,
                                          const Eigen::MatrixXd& wn, double dt) const;
};

/// Per-element projection that integrates each smooth piece separately when
/// the function has known jump locations.
PolyField project_initial_condition(const Mesh1D& mesh, int degree,
                                    const std::function<double(double)>& f,
                                    const std::vector<double>& jumps = {});

}  // namespace tdg
