#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdg/field.hpp"

namespace tdg {

enum class FluxKind { None, Linear, Burgers, Custom };

/// Convective flux f(w) with derivatives; Custom fluxes may be integrated
/// explicitly but have no registered second-derivative discretization.
struct Flux1D {
  FluxKind kind = FluxKind::None;
  double c = 0.0;
  std::function<double(double)> f, df, ddf;

  double value(double w) const;
  double deriv(double w) const;
  double deriv2(double w) const;

  static Flux1D none();
  static Flux1D linear(double c);
  static Flux1D burgers();
  static Flux1D custom(std::function<double(double)> f, std::function<double(double)> df,
                       std::function<double(double)> ddf);
};

enum class RiemannKind { Zero, Upwind, LocalLaxFriedrichs };

RiemannKind default_riemann(const Flux1D& flux);

/// Interface flux value and its derivatives w.r.t. the two trace states.
struct RiemannEval {
  double value = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;
};

/// Consistent, conservative interface flux: upwind c*w^- for positive linear
/// transport, local Lax-Friedrichs with lambda = max(|f'(w^-)|, |f'(w^+)|)
/// otherwise.
RiemannEval riemann_flux(const Flux1D& flux, RiemannKind kind, double w_minus, double w_plus);

/// Left (-) and right (+) limits at each interface. Interface i sits at the
/// right end of element i, between elements i and (i+1) mod N.
struct TraceValues {
  Eigen::VectorXd minus, plus;
};

/// Bundled LDG unknown (w, w_x, w_xx, w_xxx).
struct AuxState1D {
  PolyField w, wx, wxx, wxxx;
};

/// Alternating ("upwinded") LDG trace selection: w from the right, the first
/// derivative from the left, the second from the right, the third from the
/// left.
struct LdgHats {
  Eigen::VectorXd w, wx, wxx, wxxx;
};

LdgHats alternating_fluxes(const TraceValues& w, const TraceValues& wx, const TraceValues& wxx,
                           const TraceValues& wxxx);

/// Volume values (at the operator's quadrature points) and single-valued
/// interface values of the discrete f(w)_xx.
struct FluxSecondDerivative {
  Eigen::MatrixXd volume;  // quad points x elements
  Eigen::VectorXd hat;     // per interface
};

/// How the boundary term of the discrete f(w)_xx enters the second-derivative
/// residual: tested against phi*n (the conservative weak form) or against the
/// trace of (phi)_x.
enum class D2fBoundaryMode { PhiNormal, PhiDerivative };

/// Spatial LDG operators on a fixed (mesh, degree, quadrature) triple.
/// Residual fields are Riesz representatives in V_h: the L2 projection of the
/// operator applied to the discrete state.
class LdgOperator {
 public:
  LdgOperator(const Mesh1D& mesh, int degree, int quad_degree);

  const Mesh1D& mesh() const { return mesh_; }
  const Basis1D& basis() const { return basis_; }
  const QuadratureRule& quadrature() const { return quad_; }
  int degree() const { return degree_; }

  TraceValues traces(const PolyField& u) const;

  /// Sequentially reconstruct w_x, w_xx, w_xxx via the weak first-derivative
  /// relations with alternating fluxes. Each solve is an explicit per-element
  /// update (diagonal mass matrix).
  AuxState1D solve_aux(const PolyField& w) const;

  /// Weak residual of w_t = -f(w)_x + eps w_xx.
  PolyField residual_wt(const AuxState1D& x, const Flux1D& flux, double eps,
                        RiemannKind riemann) const;

  /// Discrete f(w)_xx per flux kind (rejects Custom).
  FluxSecondDerivative flux_xx(const AuxState1D& x, const Flux1D& flux) const;

  /// Weak residual of w_tt (the second time derivative written in space).
  PolyField residual_wtt(const AuxState1D& x, const Flux1D& flux, double eps,
                         D2fBoundaryMode mode = D2fBoundaryMode::PhiNormal) const;

  /// Moment forms (residuals tested against basis functions, without the
  /// inverse mass scaling); used by the implicit stepper.
  Eigen::MatrixXd wt_moments(const AuxState1D& x, const Flux1D& flux, double eps,
                             RiemannKind riemann) const;
  Eigen::MatrixXd wtt_moments(const AuxState1D& x, const Flux1D& flux, double eps,
                              D2fBoundaryMode mode) const;

  // Cached reference-element pieces shared with the stepper.
  const Eigen::MatrixXd& stiffness() const { return S_; }        // S_ij = int phi_i' phi_j
  const Eigen::MatrixXd& vandermonde() const { return V_; }      // quad x modes
  const Eigen::MatrixXd& grad_vandermonde() const { return Vd_; }
  const Eigen::VectorXd& left_values() const { return basis_.left_values(); }
  const Eigen::VectorXd& right_values() const { return basis_.right_values(); }

 private:
  Mesh1D mesh_;
  int degree_;
  Basis1D basis_;
  QuadratureRule quad_;
  Eigen::MatrixXd V_, Vd_, S_;

  PolyField ldg_derivative(const PolyField& u, const Eigen::VectorXd& u_hat) const;
};

}  // namespace tdg
