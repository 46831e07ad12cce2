#include "tdg/implicit1d.hpp"

#include <algorithm>
#include <cmath>

namespace tdg {

namespace {

int quad_degree_for(const Flux1D& flux, int p) {
  // overintegration for nonlinear fluxes suppresses aliasing in the f'(w)^2
  // and f(w)_xx terms
  const bool nonlinear = flux.kind == FluxKind::Burgers || flux.kind == FluxKind::Custom;
  return nonlinear ? 3 * p + 1 : 2 * p + 1;
}

}  // namespace

PolyField project_initial_condition(const Mesh1D& mesh, int degree,
                                    const std::function<double(double)>& f,
                                    const std::vector<double>& jumps) {
  const Basis1D basis(degree);
  const QuadratureRule quad = interval_rule(2 * degree + 12);
  PolyField w(mesh, degree);
  for (int k = 0; k < mesh.num_elements; ++k) {
    const double xl = mesh.element_left(k), xr = mesh.element_right(k);
    // collect interior breakpoints, integrate each smooth piece separately
    std::vector<double> cuts = {xl};
    for (double j : jumps)
      if (j > xl + 1e-14 && j < xr - 1e-14) cuts.push_back(j);
    cuts.push_back(xr);
    std::sort(cuts.begin(), cuts.end());

    Eigen::VectorXd moments = Eigen::VectorXd::Zero(degree + 1);
    for (size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      const double lo = cuts[piece], hi = cuts[piece + 1];
      for (int q = 0; q < quad.size(); ++q) {
        const double x = lo + 0.5 * (hi - lo) * (quad.nodes(q, 0) + 1.0);
        const double xi = 2.0 * (x - xl) / mesh.h - 1.0;
        const double wgt = 0.5 * (hi - lo) * quad.weights(q) * f(x);
        for (int j = 0; j <= degree; ++j) moments(j) += wgt * basis.value(j, xi);
      }
    }
    // moments are physical integrals; the reference-coefficient map divides
    // by the (h/2) mass factor
    w.coeffs.col(k) = (2.0 / mesh.h) * moments;
  }
  return w;
}

ImplicitSolver1D::ImplicitSolver1D(const Mesh1D& mesh, int degree, const Problem1D& problem,
                                   const SchemeCoeffs& scheme, SolverConfig config)
    : mesh_(mesh),
      degree_(degree),
      problem_(problem),
      scheme_(scheme),
      config_(config),
      op_(mesh, degree, quad_degree_for(problem.flux, degree)),
      linear_flux_(problem.flux.kind == FluxKind::None || problem.flux.kind == FluxKind::Linear) {}

AuxState1D ImplicitSolver1D::initial_state() const {
  PolyField w = project_initial_condition(mesh_, degree_, problem_.w0, problem_.ic_jumps);
  if (problem_.smooth_ic && problem_.has_ic_derivatives()) {
    AuxState1D x;
    x.w = w;
    x.wx = project_initial_condition(mesh_, degree_, problem_.w0_x);
    x.wxx = project_initial_condition(mesh_, degree_, problem_.w0_xx);
    x.wxxx = project_initial_condition(mesh_, degree_, problem_.w0_xxx);
    return x;
  }
  return op_.solve_aux(w);
}

AuxState1D ImplicitSolver1D::init_aux_discontinuous() const {
  return op_.solve_aux(project_initial_condition(mesh_, degree_, problem_.w0, problem_.ic_jumps));
}

Eigen::VectorXd ImplicitSolver1D::pack(const AuxState1D& x) const {
  const int n = mesh_.num_elements;
  Eigen::VectorXd v(4 * nm() * n);
  for (int k = 0; k < n; ++k) {
    v.segment(field_index(k, 0, 0), nm()) = x.w.coeffs.col(k);
    v.segment(field_index(k, 1, 0), nm()) = x.wx.coeffs.col(k);
    v.segment(field_index(k, 2, 0), nm()) = x.wxx.coeffs.col(k);
    v.segment(field_index(k, 3, 0), nm()) = x.wxxx.coeffs.col(k);
  }
  return v;
}

AuxState1D ImplicitSolver1D::unpack(const Eigen::VectorXd& v) const {
  const int n = mesh_.num_elements;
  AuxState1D x{PolyField(mesh_, degree_), PolyField(mesh_, degree_), PolyField(mesh_, degree_),
               PolyField(mesh_, degree_)};
  for (int k = 0; k < n; ++k) {
    x.w.coeffs.col(k) = v.segment(field_index(k, 0, 0), nm());
    x.wx.coeffs.col(k) = v.segment(field_index(k, 1, 0), nm());
    x.wxx.coeffs.col(k) = v.segment(field_index(k, 2, 0), nm());
    x.wxxx.coeffs.col(k) = v.segment(field_index(k, 3, 0), nm());
  }
  return x;
}

Eigen::VectorXd ImplicitSolver1D::residual(const AuxState1D& x, const Eigen::MatrixXd& rhs_n,
                                           const Eigen::MatrixXd& wn, double dt) const {
  const int n = mesh_.num_elements;
  const double h2 = 0.5 * mesh_.h;
  const Eigen::MatrixXd& S = op_.stiffness();
  const Eigen::VectorXd& el = op_.left_values();
  const Eigen::VectorXd& er = op_.right_values();

  const Eigen::MatrixXd mwt = op_.wt_moments(x, problem_.flux, problem_.eps, problem_.riemann);
  Eigen::MatrixXd mwtt;
  if (scheme_.beta2 != 0.0)
    mwtt = op_.wtt_moments(x, problem_.flux, problem_.eps, config_.d2f_mode);

  const TraceValues tw = op_.traces(x.w);
  const TraceValues twx = op_.traces(x.wx);
  const TraceValues twxx = op_.traces(x.wxx);

  Eigen::VectorXd r(4 * nm() * n);
  for (int k = 0; k < n; ++k) {
    const int li = (k + n - 1) % n;  // interface at the left end of element k

    Eigen::VectorXd evo = h2 / dt * (x.w.coeffs.col(k) - wn.col(k));
    evo -= scheme_.alpha2 * mwt.col(k);
    if (scheme_.beta2 != 0.0) evo -= dt * scheme_.beta2 * mwtt.col(k);
    evo -= rhs_n.col(k);
    r.segment(field_index(k, 0, 0), nm()) = evo;

    Eigen::VectorXd aux1 = h2 * x.wx.coeffs.col(k) + S * x.w.coeffs.col(k);
    aux1 -= tw.plus(k) * er;
    aux1 += tw.plus(li) * el;
    r.segment(field_index(k, 1, 0), nm()) = aux1;

    Eigen::VectorXd aux2 = h2 * x.wxx.coeffs.col(k) + S * x.wx.coeffs.col(k);
    aux2 -= twx.minus(k) * er;
    aux2 += twx.minus(li) * el;
    r.segment(field_index(k, 2, 0), nm()) = aux2;

    Eigen::VectorXd aux3 = h2 * x.wxxx.coeffs.col(k) + S * x.wxx.coeffs.col(k);
    aux3 -= twxx.plus(k) * er;
    aux3 += twxx.plus(li) * el;
    r.segment(field_index(k, 3, 0), nm()) = aux3;
  }
  return r;
}

Eigen::VectorXd ImplicitSolver1D::coupled_residual(const AuxState1D& x, const AuxState1D& xn,
                                                   double dt) const {
  Eigen::MatrixXd rhs_n = scheme_.alpha1 * op_.wt_moments(xn, problem_.flux, problem_.eps,
                                                          problem_.riemann);
  if (scheme_.beta1 != 0.0)
    rhs_n += dt * scheme_.beta1 * op_.wtt_moments(xn, problem_.flux, problem_.eps, config_.d2f_mode);
  return residual(x, rhs_n, xn.w.coeffs, dt);
}

Eigen::SparseMatrix<double> ImplicitSolver1D::newton_matrix(const AuxState1D& x, double dt) const {
  const int n = mesh_.num_elements;
  const int bs = 4 * nm();
  const double h2 = 0.5 * mesh_.h;
  const double eps = problem_.eps;
  const Flux1D& flux = problem_.flux;
  const Eigen::MatrixXd& S = op_.stiffness();
  const Eigen::MatrixXd& V = op_.vandermonde();
  const Eigen::MatrixXd& Vd = op_.grad_vandermonde();
  const Eigen::VectorXd& Wq = op_.quadrature().weights;
  const Eigen::VectorXd& el = op_.left_values();
  const Eigen::VectorXd& er = op_.right_values();
  const int nq = op_.quadrature().size();

  const double a2 = scheme_.alpha2;
  const double b2dt = scheme_.beta2 * dt;
  const bool with_wtt = scheme_.beta2 != 0.0;

  Eigen::VectorXd dphi_l(nm()), dphi_r(nm());
  for (int j = 0; j < nm(); ++j) {
    dphi_l(j) = 2.0 / mesh_.h * op_.basis().deriv(j, -1.0);
    dphi_r(j) = 2.0 / mesh_.h * op_.basis().deriv(j, 1.0);
  }

  const Eigen::MatrixXd wq = V * x.w.coeffs;
  const Eigen::MatrixXd wxq = V * x.wx.coeffs;
  const Eigen::MatrixXd wxxq = V * x.wxx.coeffs;
  const TraceValues tw = op_.traces(x.w);
  const TraceValues twx = op_.traces(x.wx);
  const TraceValues twxx = op_.traces(x.wxx);

  // dense blocks: diag[k], lower[k] (couples element k-1), upper[k] (element k+1)
  std::vector<Eigen::MatrixXd> diag(n, Eigen::MatrixXd::Zero(bs, bs));
  std::vector<Eigen::MatrixXd> lower(n, Eigen::MatrixXd::Zero(bs, bs));
  std::vector<Eigen::MatrixXd> upper(n, Eigen::MatrixXd::Zero(bs, bs));

  auto block = [&](std::vector<Eigen::MatrixXd>& target, int k, int row_field, int col_field)
      -> Eigen::Block<Eigen::MatrixXd> {
    return target[k].block(row_field * nm(), col_field * nm(), nm(), nm());
  };

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nm(), nm());
  const Eigen::MatrixXd el_el = el * el.transpose();
  const Eigen::MatrixXd er_el = er * el.transpose();
  const Eigen::MatrixXd er_er = er * er.transpose();
  const Eigen::MatrixXd el_er = el * er.transpose();

  for (int k = 0; k < n; ++k) {
    const int li = (k + n - 1) % n;

    // ---- aux rows (fields 1..3), state independent ----
    block(diag, k, 1, 1) = h2 * I;
    block(diag, k, 1, 0) = S + el_el;
    block(upper, k, 1, 0) = -er_el;

    block(diag, k, 2, 2) = h2 * I;
    block(diag, k, 2, 1) = S - er_er;
    block(lower, k, 2, 1) = el_er;

    block(diag, k, 3, 3) = h2 * I;
    block(diag, k, 3, 2) = S + el_el;
    block(upper, k, 3, 2) = -er_el;

    // ---- evolution rows (field 0) ----
    block(diag, k, 0, 0) = h2 / dt * I;

    // d(wt moments): volume (f(w) - eps wx, phi_x)
    Eigen::VectorXd fprime_q(nq);
    for (int q = 0; q < nq; ++q) fprime_q(q) = flux.deriv(wq(q, k));
    block(diag, k, 0, 0) -= a2 * (Vd.transpose() * (Wq.cwiseProduct(fprime_q)).asDiagonal() * V);
    block(diag, k, 0, 1) += a2 * eps * S;

    // interface flux at the right (index k) and left (index li) interfaces
    const RiemannEval fr = riemann_flux(flux, problem_.riemann, tw.minus(k), tw.plus(k));
    const RiemannEval fl = riemann_flux(flux, problem_.riemann, tw.minus(li), tw.plus(li));
    // - f_hat(k) * er with d wm = er' w_k, d wp = el' w_{k+1}
    block(diag, k, 0, 0) += a2 * fr.d_minus * er_er;
    block(upper, k, 0, 0) += a2 * fr.d_plus * er_el;
    // + f_hat(li) * el with wm from element k-1, wp from element k
    block(lower, k, 0, 0) -= a2 * fl.d_minus * el_er;
    block(diag, k, 0, 0) -= a2 * fl.d_plus * el_el;
    // -(-eps wx_hat) terms: wx_hat = minus trace
    block(diag, k, 0, 1) -= a2 * eps * er_er;
    block(lower, k, 0, 1) += a2 * eps * el_er;

    if (!with_wtt) continue;

    // ---- d(wtt moments) ----
    // volume 1: -(f'(w)^2 wx - eps f'(w) wxx, phi_x)
    Eigen::VectorXd c_w(nq), c_wx(nq), c_wxx(nq);
    for (int q = 0; q < nq; ++q) {
      const double a = flux.deriv(wq(q, k));
      const double ap = flux.deriv2(wq(q, k));
      c_w(q) = 2.0 * a * ap * wxq(q, k) - eps * ap * wxxq(q, k);
      c_wx(q) = a * a;
      c_wxx(q) = -eps * a;
    }
    block(diag, k, 0, 0) += b2dt * (Vd.transpose() * (Wq.cwiseProduct(c_w)).asDiagonal() * V);
    block(diag, k, 0, 1) += b2dt * (Vd.transpose() * (Wq.cwiseProduct(c_wx)).asDiagonal() * V);
    block(diag, k, 0, 2) += b2dt * (Vd.transpose() * (Wq.cwiseProduct(c_wxx)).asDiagonal() * V);

    // boundary 1: +A(k) er - A(li) el, A = f'(w_hat)^2 wx_hat - eps f'(w_hat) wxx_hat,
    // w_hat = plus, wx_hat = minus, wxx_hat = plus
    {
      const double ar = flux.deriv(tw.plus(k));
      const double arp = flux.deriv2(tw.plus(k));
      const double dA_dwhat_r = 2.0 * ar * arp * twx.minus(k) - eps * arp * twxx.plus(k);
      block(upper, k, 0, 0) -= b2dt * dA_dwhat_r * er_el;
      block(diag, k, 0, 1) -= b2dt * ar * ar * er_er;
      block(upper, k, 0, 2) += b2dt * eps * ar * er_el;

      const double al = flux.deriv(tw.plus(li));
      const double alp = flux.deriv2(tw.plus(li));
      const double dA_dwhat_l = 2.0 * al * alp * twx.minus(li) - eps * alp * twxx.plus(li);
      block(diag, k, 0, 0) += b2dt * dA_dwhat_l * el_el;
      block(lower, k, 0, 1) += b2dt * al * al * el_er;
      block(diag, k, 0, 2) -= b2dt * eps * al * el_el;
    }

    // f(w)_xx block (scaled by eps)
    if (eps != 0.0) {
      // volume: +eps (D2f, phi_x)
      if (flux.kind == FluxKind::Linear) {
        block(diag, k, 0, 2) -=
            b2dt * eps * flux.c * (Vd.transpose() * Wq.asDiagonal() * V);
      } else if (flux.kind == FluxKind::Burgers) {
        Eigen::VectorXd d_w(nq), d_wx(nq), d_wxx(nq);
        for (int q = 0; q < nq; ++q) {
          d_w(q) = wxxq(q, k);
          d_wx(q) = 2.0 * wxq(q, k);
          d_wxx(q) = wq(q, k);
        }
        block(diag, k, 0, 0) -= b2dt * eps * (Vd.transpose() * (Wq.cwiseProduct(d_w)).asDiagonal() * V);
        block(diag, k, 0, 1) -= b2dt * eps * (Vd.transpose() * (Wq.cwiseProduct(d_wx)).asDiagonal() * V);
        block(diag, k, 0, 2) -= b2dt * eps * (Vd.transpose() * (Wq.cwiseProduct(d_wxx)).asDiagonal() * V);
      }

      // boundary: -eps <D2f_hat, .>; D2f_hat at interface i uses
      // w_hat = plus, wx_hat = minus, wxx_hat = plus
      const Eigen::VectorXd& test_r =
          (config_.d2f_mode == D2fBoundaryMode::PhiNormal) ? er : dphi_r;
      const Eigen::VectorXd test_l_signed =
          (config_.d2f_mode == D2fBoundaryMode::PhiNormal) ? Eigen::VectorXd(-el)
                                                           : Eigen::VectorXd(dphi_l);
      // moments carry -eps D2f_hat(k) * test_r  and  -eps D2f_hat(li) * test_l_signed
      // The moments carry -eps * D2f_hat * test_vec and the evolution row
      // carries -dt*beta2 * moments, so the Jacobian entry picks up a net
      // +dt*beta2*eps factor.
      auto add_d2f_hat_deriv = [&](int iface, const Eigen::VectorXd& test_vec) {
        if (flux.kind == FluxKind::Linear) {
          // D2f_hat = c * wxx_hat = c * (el' wxx_next)
          const Eigen::MatrixXd contrib = eps * flux.c * (test_vec * el.transpose());
          if (iface == k)
            block(upper, k, 0, 2) += b2dt * contrib;
          else
            block(diag, k, 0, 2) += b2dt * contrib;
        } else if (flux.kind == FluxKind::Burgers) {
          const double w_hat = tw.plus(iface);
          const double wx_hat = twx.minus(iface);
          const double wxx_hat = twxx.plus(iface);
          // d/d(w_hat) = wxx_hat, d/d(wx_hat) = 2 wx_hat, d/d(wxx_hat) = w_hat
          if (iface == k) {
            block(upper, k, 0, 0) += b2dt * (eps * wxx_hat) * (test_vec * el.transpose());
            block(diag, k, 0, 1) += b2dt * (eps * 2.0 * wx_hat) * (test_vec * er.transpose());
            block(upper, k, 0, 2) += b2dt * (eps * w_hat) * (test_vec * el.transpose());
          } else {
            block(diag, k, 0, 0) += b2dt * (eps * wxx_hat) * (test_vec * el.transpose());
            block(lower, k, 0, 1) += b2dt * (eps * 2.0 * wx_hat) * (test_vec * er.transpose());
            block(diag, k, 0, 2) += b2dt * (eps * w_hat) * (test_vec * el.transpose());
          }
        }
      };
      add_d2f_hat_deriv(k, test_r);
      add_d2f_hat_deriv(li, test_l_signed);
    }

    // third-derivative block: -(eps^2 wxxx, phi_x) + <eps^2 wxxx_hat, phi n>,
    // wxxx_hat = minus trace
    block(diag, k, 0, 3) += b2dt * eps * eps * S;
    block(diag, k, 0, 3) -= b2dt * eps * eps * er_er;
    block(lower, k, 0, 3) += b2dt * eps * eps * el_er;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n) * bs * bs * 3);
  auto emit = [&](int krow, int kcol, const Eigen::MatrixXd& blockmat) {
    for (int i = 0; i < bs; ++i)
      for (int j = 0; j < bs; ++j)
        if (blockmat(i, j) != 0.0)
          triplets.emplace_back(krow * bs + i, kcol * bs + j, blockmat(i, j));
  };
  for (int k = 0; k < n; ++k) {
    emit(k, k, diag[k]);
    emit(k, (k + n - 1) % n, lower[k]);
    emit(k, (k + 1) % n, upper[k]);
  }
  Eigen::SparseMatrix<double> J(bs * n, bs * n);
  J.setFromTriplets(triplets.begin(), triplets.end());
  J.makeCompressed();
  return J;
}

Eigen::SparseMatrix<double> ImplicitSolver1D::fd_jacobian(const AuxState1D& x,
                                                          const Eigen::MatrixXd& rhs_n,
                                                          const Eigen::MatrixXd& wn,
                                                          double dt) const {
  const Eigen::VectorXd base = pack(x);
  const Eigen::VectorXd r0 = residual(x, rhs_n, wn, dt);
  const int n = static_cast<int>(base.size());
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd pert = base;
    const double step = config_.fd_step * (1.0 + std::abs(base(j)));
    pert(j) += step;
    const Eigen::VectorXd rj = residual(unpack(pert), rhs_n, wn, dt);
    J.col(j) = (rj - r0) / step;
  }
  return J.sparseView(1e-300);
}

AuxState1D ImplicitSolver1D::step(const AuxState1D& xn, double dt) {
  // explicit time-level contributions
  Eigen::MatrixXd rhs_n = scheme_.alpha1 * op_.wt_moments(xn, problem_.flux, problem_.eps,
                                                          problem_.riemann);
  if (scheme_.beta1 != 0.0)
    rhs_n += dt * scheme_.beta1 * op_.wtt_moments(xn, problem_.flux, problem_.eps, config_.d2f_mode);

  if (linear_flux_ && !config_.fd_jacobian) {
    if (!cached_dt_ || *cached_dt_ != dt) {
      cached_solver_ = std::make_unique<DirectSolver>();
      cached_solver_->factorize(newton_matrix(xn, dt));
      cached_dt_ = dt;
    }
    // residual is affine: solve J dx = -F(x) once, starting from xn
    const Eigen::VectorXd f0 = residual(xn, rhs_n, xn.w.coeffs, dt);
    const Eigen::VectorXd dx = cached_solver_->solve(-f0);
    AuxState1D x = unpack(pack(xn) + dx);
    last_newton_iterations_ = 1;
    const double res = residual(x, rhs_n, xn.w.coeffs, dt).norm();
    if (!(res <= std::max(config_.newton_tol, 1e-9 * f0.norm())))
      throw SolverError(SolverFailure::SingularSystem, "linear step residual too large");
    return x;
  }

  AuxState1D x = xn;  // warm start
  double res = residual(x, rhs_n, xn.w.coeffs, dt).norm();
  int iter = 0;
  while (res > config_.newton_tol) {
    if (iter >= config_.newton_max_iter)
      throw SolverError(SolverFailure::NewtonDiverged,
                        "Newton residual " + std::to_string(res) + " after " +
                            std::to_string(iter) + " iterations");
    const Eigen::VectorXd f = residual(x, rhs_n, xn.w.coeffs, dt);
    Eigen::SparseMatrix<double> J =
        config_.fd_jacobian ? fd_jacobian(x, rhs_n, xn.w.coeffs, dt) : newton_matrix(x, dt);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
    if (lu.info() != Eigen::Success)
      throw SolverError(SolverFailure::SingularSystem, "Newton matrix factorization failed");
    const Eigen::VectorXd dx = lu.solve(-f);
    x = unpack(pack(x) + dx);
    res = residual(x, rhs_n, xn.w.coeffs, dt).norm();
    ++iter;
  }
  last_newton_iterations_ = iter;
  return x;
}

IntegrationResult ImplicitSolver1D::integrate(const AuxState1D& x0, double T, double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");

  IntegrationResult result;
  result.state = x0;
  result.mass_initial = x0.w.integral();

  int n_full = static_cast<int>(std::floor(T / dt + 1e-10));
  double remainder = T - n_full * dt;
  if (std::abs(remainder) < 1e-14 * std::max(1.0, T)) remainder = 0.0;

  int index = 0;
  auto advance = [&](double step_dt, double t_after) {
    try {
      result.state = step(result.state, step_dt);
    } catch (const SolverError& err) {
      throw SolverError(err.kind(), "step " + std::to_string(index) + " (t = " +
                                        std::to_string(t_after) + "): " + err.what());
    }
    StepRecord rec;
    rec.index = index;
    rec.t = t_after;
    rec.dt = step_dt;
    rec.newton_iterations = last_newton_iterations_;
    rec.mass = result.state.w.integral();
    result.log.push_back(rec);
    ++index;
  };

  for (int i = 0; i < n_full; ++i) advance(dt, (i + 1) * dt);
  if (remainder > 0.0) advance(remainder, T);

  result.mass_final = result.state.w.integral();
  return result;
}

}  // namespace tdg
