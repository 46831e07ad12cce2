#pragma once

#include <vector>

#include "tdg/basis.hpp"
#include "tdg/linalg.hpp"
#include "tdg/problems2d.hpp"
#include "tdg/schemes.hpp"
#include "tdg/trimesh.hpp"

namespace tdg {

/// Unknowns of the hybridized discretization. Layouts (all element-major):
///   w:     [(elem * m + comp) * Nb + mode]
///   grad:  [((elem * 2 + dir) * m + comp) * Nb + mode]
///   trace: [(edge * m + comp) * (p + 1) + mode]
struct HDGState {
  Eigen::VectorXd grad, w, trace;
};

struct StabilizationParams {
  double eta = 1.0;
  double theta = 1.0;
  /// Recompute eta each step as the max spectral radius of n . f'(w).
  bool auto_eta = true;
  /// Flip theta's sign whenever its time-integrator coefficient is negative,
  /// keeping the assembled stabilization dissipative.
  bool theta_sign_fix = true;
};

/// Which time levels enter the flux-continuity condition on the trace: only
/// the implicit-side terms (the default; stable at every tested degree) or
/// the full time-integrated numerical flux (conservative for arbitrary data
/// but observed to destabilize p = 2 refinements).
enum class HybridFluxMode { ImplicitOnly, TotalFlux };

struct HDGConfig {
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  double gmres_tol = 1e-12;
  int gmres_restart = 60;
  int gmres_max_iter = 5000;
  bool trace_solve_direct = false;  // sparse direct instead of GMRES
  HybridFluxMode hybrid_mode = HybridFluxMode::ImplicitOnly;
  StabilizationParams stab;
  int volume_quad_degree = -1;  // < 0: 2p+1 linear / 3p+1 nonlinear
  int edge_quad_degree = -1;
};

struct StepRecord2D {
  int index = 0;
  double t = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
  int gmres_iterations = 0;
  Eigen::VectorXd mass;  // per component
};

struct IntegrationResult2D {
  HDGState state;
  std::vector<StepRecord2D> log;
  Eigen::VectorXd mass_initial, mass_final;
};

/// Implicit two-derivative HDG solver for first-order systems: the weak
/// gradient relation, the element evolution update, and the trace
/// flux-continuity condition, solved by Newton with per-element static
/// condensation onto the trace space.
class HDGSolver {
 public:
  HDGSolver(const TriMesh2D& mesh, int degree, const Problem2D& problem,
            const SchemeCoeffs& scheme, HDGConfig config = {});

  const TriMesh2D& mesh() const { return mesh_; }
  const BasisTri& basis() const { return basis_; }
  const Problem2D& problem() const { return problem_; }
  int degree() const { return degree_; }
  int num_basis() const { return basis_.size(); }

  int w_size() const { return ne_ * m_ * nb_; }
  int grad_size() const { return 2 * w_size(); }
  int trace_size() const { return nf_ * m_ * np1_; }
  int monolithic_size() const { return grad_size() + w_size() + trace_size(); }

  /// w = element L2 projection of w0; trace = edge-wise L2 projection of w0;
  /// grad from the element-local weak gradient relation (aux residual = 0).
  HDGState initial_state() const;

  /// Weak-gradient residual over the gradient test space.
  Eigen::VectorXd aux_residual(const HDGState& x) const;

  /// Moments of -div f(w) with the eta-stabilized trace flux.
  Eigen::VectorXd residual_wt(const HDGState& x, double eta) const;

  /// Moments of the second time derivative div(f'(w) div f(w)) with the
  /// theta-stabilized trace flux; theta_signed carries any sign correction.
  Eigen::VectorXd residual_wtt(const HDGState& x, double eta, double theta_signed) const;

  /// Trace flux-continuity residual for the step from xn to x.
  Eigen::VectorXd hybrid_residual(const HDGState& x, const HDGState& xn, double dt) const;

  /// Full coupled residual [aux; evolution; hybrid] for a candidate x.
  Eigen::VectorXd coupled_residual(const HDGState& x, const HDGState& xn, double dt) const;

  HDGState step(const HDGState& xn, double dt);
  IntegrationResult2D integrate(const HDGState& x0, double T, double dt);

  /// Newton directions for condensation cross-checks (statically condensed
  /// trace solve + local recovery vs. one monolithic sparse solve).
  Eigen::VectorXd newton_direction_condensed(const HDGState& x, const HDGState& xn, double dt);
  Eigen::VectorXd newton_direction_monolithic(const HDGState& x, const HDGState& xn, double dt);

  /// Monolithic Newton matrix (testing hook; also used for the dissipativity
  /// regression on the theta stabilization).
  Eigen::SparseMatrix<double> monolithic_matrix(const HDGState& x, double dt);

  Eigen::VectorXd mass(const HDGState& x) const;  // per-component integral of w

  double current_eta() const { return eta_; }
  void set_eta(double eta) { eta_ = eta; }
  /// Stabilization magnitude from the state (max wave speed over edge
  /// quadrature points), or the configured constant when auto_eta is off.
  double compute_eta(const HDGState& x) const;

  int last_newton_iterations() const { return last_newton_iterations_; }
  int last_gmres_iterations() const { return last_gmres_iterations_; }

  int w_index(int k, int c, int j) const { return (k * m_ + c) * nb_ + j; }
  int grad_index(int k, int d, int c, int j) const { return ((k * 2 + d) * m_ + c) * nb_ + j; }
  int trace_index(int e, int c, int j) const { return (e * m_ + c) * np1_ + j; }

 private:
  TriMesh2D mesh_;
  int degree_;
  Problem2D problem_;
  SchemeCoeffs scheme_;
  HDGConfig config_;
  BasisTri basis_;
  Basis1D edge_basis_;
  int m_, nb_, np1_, ne_, nf_;

  // volume caches
  QuadratureRule vol_quad_;
  Eigen::MatrixXd Vq_;                      // nqv x Nb
  std::vector<Eigen::MatrixXd> Gx_, Gy_;    // per element, nqv x Nb (physical)
  std::vector<double> detJ_;

  // edge caches
  struct EdgeCache {
    Eigen::MatrixXd psi;            // nqe x (p+1)
    Eigen::MatrixXd phi[2];         // minus/plus element values, nqe x Nb
    Eigen::VectorXd weights;        // quadrature weights * length
  };
  std::vector<EdgeCache> edge_cache_;

  double eta_ = 1.0;
  int last_newton_iterations_ = 0;
  int last_gmres_iterations_ = 0;

  struct JacobianBlocks;
  void assemble_jacobian(const HDGState& x, double dt, JacobianBlocks& out) const;
  Eigen::VectorXd explicit_moments(const HDGState& xn, double dt) const;
  void hybrid_accumulate(const HDGState& state, double coef_f, double coef_g, double theta_s,
                         Eigen::VectorXd& r) const;

  // per-side edge values
  void side_info(int e, int side, int& elem, Eigen::Vector2d& n) const;
  double theta_signed(double beta) const;
};

}  // namespace tdg
