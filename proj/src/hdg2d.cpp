#include "tdg/hdg2d.hpp"

#include <cmath>

namespace tdg {

namespace {

int default_quad_degree(bool linear, int p) { return linear ? 2 * p + 1 : 3 * p + 1; }

}  // namespace

struct HDGSolver::JacobianBlocks {
  // element-local unknown u_K = [grad (2 m Nb); w (m Nb)], trace columns are
  // the three adjacent edges' (m (p+1)) blocks in local-edge order
  std::vector<Eigen::MatrixXd> Auu;  // ne: Lu x Lu
  std::vector<Eigen::MatrixXd> Aul;  // ne: Lu x Ll
  std::vector<Eigen::MatrixXd> Cu;   // ne: Ll x Lu (hybrid rows of own edges w.r.t. u_K)
  std::vector<Eigen::MatrixXd> Dll;  // nf: (m np1) x (m np1), both sides accumulated
};

HDGSolver::HDGSolver(const TriMesh2D& mesh, int degree, const Problem2D& problem,
                     const SchemeCoeffs& scheme, HDGConfig config)
    : mesh_(mesh),
      degree_(degree),
      problem_(problem),
      scheme_(scheme),
      config_(config),
      basis_(degree),
      edge_basis_(degree),
      m_(problem.m),
      nb_(basis_.size()),
      np1_(degree + 1),
      ne_(mesh.num_elements()),
      nf_(mesh.num_edges()) {
  const int vol_deg = config_.volume_quad_degree > 0 ? config_.volume_quad_degree
                                                     : default_quad_degree(problem_.linear, degree_);
  const int edge_deg = config_.edge_quad_degree > 0 ? config_.edge_quad_degree
                                                    : default_quad_degree(problem_.linear, degree_);
  vol_quad_ = triangle_rule(vol_deg);
  Vq_ = basis_.vandermonde(vol_quad_.nodes);
  auto [Vr, Vs] = basis_.grad_vandermonde(vol_quad_.nodes);

  Gx_.resize(ne_);
  Gy_.resize(ne_);
  detJ_.resize(ne_);
  for (int k = 0; k < ne_; ++k) {
    const Eigen::Matrix2d Ji = mesh_.jacobian(k).inverse();
    detJ_[k] = mesh_.jacobian(k).determinant();
    Gx_[k] = Ji(0, 0) * Vr + Ji(1, 0) * Vs;
    Gy_[k] = Ji(0, 1) * Vr + Ji(1, 1) * Vs;
  }

  const QuadratureRule edge_rule = interval_rule(edge_deg);
  const int nqe = edge_rule.size();
  edge_cache_.resize(nf_);
  for (int e = 0; e < nf_; ++e) {
    const TriMesh2D::Edge& edge = mesh_.edges[e];
    EdgeCache& cache = edge_cache_[e];
    cache.psi = edge_basis_.vandermonde(edge_rule.nodes.col(0));
    cache.weights = 0.5 * edge.length * edge_rule.weights;  // dt * |e| over t in [0,1]
    Eigen::MatrixXd pts_m(nqe, 2), pts_p(nqe, 2);
    for (int q = 0; q < nqe; ++q) {
      const double t = 0.5 * (edge_rule.nodes(q, 0) + 1.0);
      const Eigen::Vector2d x = edge.a + t * (edge.b - edge.a);
      pts_m.row(q) = mesh_.to_reference(edge.elem_minus, x).transpose();
      pts_p.row(q) = mesh_.to_reference(edge.elem_plus, x + edge.offset_plus).transpose();
    }
    cache.phi[0] = basis_.vandermonde(pts_m);
    cache.phi[1] = basis_.vandermonde(pts_p);
  }
}

void HDGSolver::side_info(int e, int side, int& elem, Eigen::Vector2d& n) const {
  const TriMesh2D::Edge& edge = mesh_.edges[e];
  elem = (side == 0) ? edge.elem_minus : edge.elem_plus;
  n = (side == 0) ? edge.normal : Eigen::Vector2d(-edge.normal);
}

double HDGSolver::theta_signed(double beta) const {
  const double theta = config_.stab.theta;
  if (!config_.stab.theta_sign_fix) return theta;
  if (beta > 0.0) return theta;
  if (beta < 0.0) return -theta;
  return 0.0;
}

double HDGSolver::compute_eta(const HDGState& x) const {
  if (!config_.stab.auto_eta) return config_.stab.eta;
  double eta = 0.0;
  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
      const Eigen::MatrixXd wq = cache.phi[side] * W;  // nqe x m
      for (int q = 0; q < wq.rows(); ++q)
        eta = std::max(eta, problem_.max_wave_speed(wq.row(q).transpose(), n));
    }
  }
  return eta;
}

HDGState HDGSolver::initial_state() const {
  HDGState x;
  x.w.setZero(w_size());
  x.grad.setZero(grad_size());
  x.trace.setZero(trace_size());

  const QuadratureRule proj_rule = triangle_rule(2 * degree_ + 6);
  for (int k = 0; k < ne_; ++k)
    for (int c = 0; c < m_; ++c) {
      auto f = [&](double r, double s) {
        return problem_.w0(mesh_.to_physical(k, r, s))(c);
      };
      const Eigen::VectorXd coeffs = project_l2_tri(f, basis_, proj_rule);
      for (int j = 0; j < nb_; ++j) x.w(w_index(k, c, j)) = coeffs(j);
    }

  const QuadratureRule line = interval_rule(2 * degree_ + 6);
  for (int e = 0; e < nf_; ++e) {
    const TriMesh2D::Edge& edge = mesh_.edges[e];
    for (int q = 0; q < line.size(); ++q) {
      const double xi = line.nodes(q, 0);
      const double t = 0.5 * (xi + 1.0);
      const Eigen::VectorXd w0 = problem_.w0(edge.a + t * (edge.b - edge.a));
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < np1_; ++j)
          x.trace(trace_index(e, c, j)) += line.weights(q) * w0(c) * edge_basis_.value(j, xi);
    }
  }

  // element-local weak gradient: detJ grad = sum_e <lambda, phi n_d> - (w, d_d phi)
  const Eigen::VectorXd aux0 = aux_residual(x);
  for (int k = 0; k < ne_; ++k)
    for (int d = 0; d < 2; ++d)
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < nb_; ++j) {
          const int idx = grad_index(k, d, c, j);
          x.grad(idx) = -aux0(idx) / detJ_[k];
        }
  return x;
}

Eigen::VectorXd HDGSolver::aux_residual(const HDGState& x) const {
  Eigen::VectorXd r(grad_size());
  for (int k = 0; k < ne_; ++k) {
    const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
    const Eigen::MatrixXd wq = Vq_ * W;  // nqv x m
    for (int d = 0; d < 2; ++d) {
      const Eigen::MatrixXd& Gd = (d == 0) ? Gx_[k] : Gy_[k];
      // (w, d_d phi)_K
      Eigen::MatrixXd vol = Gd.transpose() * (detJ_[k] * vol_quad_.weights).asDiagonal() * wq;
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < nb_; ++j)
          r(grad_index(k, d, c, j)) = detJ_[k] * x.grad(grad_index(k, d, c, j)) + vol(j, c);
    }
  }
  // - <lambda, phi n_d>
  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    const Eigen::Map<const Eigen::MatrixXd> L(x.trace.data() + e * m_ * np1_, np1_, m_);
    const Eigen::MatrixXd lam = cache.psi * L;  // nqe x m
    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      const Eigen::MatrixXd contrib = cache.phi[side].transpose() * cache.weights.asDiagonal() * lam;
      for (int d = 0; d < 2; ++d)
        for (int c = 0; c < m_; ++c)
          for (int j = 0; j < nb_; ++j) r(grad_index(k, d, c, j)) -= n(d) * contrib(j, c);
    }
  }
  return r;
}

Eigen::VectorXd HDGSolver::residual_wt(const HDGState& x, double eta) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(w_size());
  Eigen::VectorXd fval;
  for (int k = 0; k < ne_; ++k) {
    const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
    const Eigen::MatrixXd wq = Vq_ * W;
    Eigen::MatrixXd f1(vol_quad_.size(), m_), f2(vol_quad_.size(), m_);
    for (int q = 0; q < vol_quad_.size(); ++q) {
      fval = problem_.flux(0, wq.row(q).transpose());
      f1.row(q) = fval.transpose();
      fval = problem_.flux(1, wq.row(q).transpose());
      f2.row(q) = fval.transpose();
    }
    const Eigen::VectorXd scaled = detJ_[k] * vol_quad_.weights;
    const Eigen::MatrixXd vol =
        Gx_[k].transpose() * scaled.asDiagonal() * f1 + Gy_[k].transpose() * scaled.asDiagonal() * f2;
    for (int c = 0; c < m_; ++c)
      for (int j = 0; j < nb_; ++j) r(w_index(k, c, j)) += vol(j, c);
  }

  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    const Eigen::Map<const Eigen::MatrixXd> L(x.trace.data() + e * m_ * np1_, np1_, m_);
    const Eigen::MatrixXd lam = cache.psi * L;
    const int nqe = static_cast<int>(lam.rows());
    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
      const Eigen::MatrixXd wq = cache.phi[side] * W;
      Eigen::MatrixXd fn(nqe, m_);
      for (int q = 0; q < nqe; ++q) {
        const Eigen::VectorXd lq = lam.row(q).transpose();
        fn.row(q) = (n.x() * problem_.flux(0, lq) + n.y() * problem_.flux(1, lq) +
                     eta * (wq.row(q).transpose() - lq))
                        .transpose();
      }
      const Eigen::MatrixXd contrib = cache.phi[side].transpose() * cache.weights.asDiagonal() * fn;
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < nb_; ++j) r(w_index(k, c, j)) -= contrib(j, c);
    }
  }
  return r;
}

Eigen::VectorXd HDGSolver::residual_wtt(const HDGState& x, double eta, double theta_s) const {
  (void)eta;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(w_size());
  for (int k = 0; k < ne_; ++k) {
    const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
    const Eigen::Map<const Eigen::MatrixXd> Sg(x.grad.data() + k * 2 * m_ * nb_, nb_, 2 * m_);
    const Eigen::MatrixXd wq = Vq_ * W;
    const Eigen::MatrixXd sq = Vq_ * Sg;  // columns (dir * m + c)
    Eigen::MatrixXd d1(vol_quad_.size(), m_), d2(vol_quad_.size(), m_);
    for (int q = 0; q < vol_quad_.size(); ++q) {
      const Eigen::VectorXd wv = wq.row(q).transpose();
      const Eigen::MatrixXd A1 = problem_.jacobian(0, wv);
      const Eigen::MatrixXd A2 = problem_.jacobian(1, wv);
      const Eigen::VectorXd U =
          A1 * sq.row(q).segment(0, m_).transpose() + A2 * sq.row(q).segment(m_, m_).transpose();
      d1.row(q) = (A1 * U).transpose();
      d2.row(q) = (A2 * U).transpose();
    }
    const Eigen::VectorXd scaled = detJ_[k] * vol_quad_.weights;
    const Eigen::MatrixXd vol =
        Gx_[k].transpose() * scaled.asDiagonal() * d1 + Gy_[k].transpose() * scaled.asDiagonal() * d2;
    for (int c = 0; c < m_; ++c)
      for (int j = 0; j < nb_; ++j) r(w_index(k, c, j)) -= vol(j, c);
  }

  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    const Eigen::Map<const Eigen::MatrixXd> L(x.trace.data() + e * m_ * np1_, np1_, m_);
    const Eigen::MatrixXd lam = cache.psi * L;
    const int nqe = static_cast<int>(lam.rows());
    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
      const Eigen::Map<const Eigen::MatrixXd> Sg(x.grad.data() + k * 2 * m_ * nb_, nb_, 2 * m_);
      const Eigen::MatrixXd wq = cache.phi[side] * W;
      const Eigen::MatrixXd sq = cache.phi[side] * Sg;
      Eigen::MatrixXd g(nqe, m_);
      for (int q = 0; q < nqe; ++q) {
        const Eigen::VectorXd lq = lam.row(q).transpose();
        const Eigen::MatrixXd A1 = problem_.jacobian(0, lq);
        const Eigen::MatrixXd A2 = problem_.jacobian(1, lq);
        const Eigen::VectorXd U =
            A1 * sq.row(q).segment(0, m_).transpose() + A2 * sq.row(q).segment(m_, m_).transpose();
        g.row(q) = ((n.x() * A1 + n.y() * A2) * U -
                    theta_s * (wq.row(q).transpose() - lq))
                       .transpose();
      }
      const Eigen::MatrixXd contrib = cache.phi[side].transpose() * cache.weights.asDiagonal() * g;
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < nb_; ++j) r(w_index(k, c, j)) += contrib(j, c);
    }
  }
  return r;
}

void HDGSolver::hybrid_accumulate(const HDGState& state, double coef_f, double coef_g,
                                  double theta_s, Eigen::VectorXd& r) const {
  if (coef_f == 0.0 && coef_g == 0.0) return;
  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    const Eigen::Map<const Eigen::MatrixXd> L(state.trace.data() + e * m_ * np1_, np1_, m_);
    const Eigen::MatrixXd lam = cache.psi * L;
    const int nqe = static_cast<int>(lam.rows());
    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      const Eigen::Map<const Eigen::MatrixXd> W(state.w.data() + k * m_ * nb_, nb_, m_);
      const Eigen::Map<const Eigen::MatrixXd> Sg(state.grad.data() + k * 2 * m_ * nb_, nb_, 2 * m_);
      const Eigen::MatrixXd wq = cache.phi[side] * W;
      const Eigen::MatrixXd sq = cache.phi[side] * Sg;
      Eigen::MatrixXd total(nqe, m_);
      for (int q = 0; q < nqe; ++q) {
        const Eigen::VectorXd lq = lam.row(q).transpose();
        const Eigen::VectorXd jump = wq.row(q).transpose() - lq;
        Eigen::VectorXd val = Eigen::VectorXd::Zero(m_);
        if (coef_f != 0.0)
          val += coef_f *
                 (n.x() * problem_.flux(0, lq) + n.y() * problem_.flux(1, lq) + eta_ * jump);
        if (coef_g != 0.0) {
          const Eigen::MatrixXd A1 = problem_.jacobian(0, lq);
          const Eigen::MatrixXd A2 = problem_.jacobian(1, lq);
          const Eigen::VectorXd U = A1 * sq.row(q).segment(0, m_).transpose() +
                                    A2 * sq.row(q).segment(m_, m_).transpose();
          val += coef_g * ((n.x() * A1 + n.y() * A2) * U - theta_s * jump);
        }
        total.row(q) = val.transpose();
      }
      const Eigen::MatrixXd contrib = cache.psi.transpose() * cache.weights.asDiagonal() * total;
      for (int c = 0; c < m_; ++c)
        for (int j = 0; j < np1_; ++j) r(trace_index(e, c, j)) += contrib(j, c);
    }
  }
}

Eigen::VectorXd HDGSolver::hybrid_residual(const HDGState& x, const HDGState& xn, double dt) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(trace_size());
  hybrid_accumulate(x, -scheme_.alpha2, dt * scheme_.beta2, theta_signed(scheme_.beta2), r);
  if (config_.hybrid_mode == HybridFluxMode::TotalFlux)
    hybrid_accumulate(xn, -scheme_.alpha1, dt * scheme_.beta1, theta_signed(scheme_.beta1), r);
  return r;
}

Eigen::VectorXd HDGSolver::explicit_moments(const HDGState& xn, double dt) const {
  Eigen::VectorXd rhs = scheme_.alpha1 * residual_wt(xn, eta_);
  if (scheme_.beta1 != 0.0)
    rhs += dt * scheme_.beta1 * residual_wtt(xn, eta_, theta_signed(scheme_.beta1));
  return rhs;
}

Eigen::VectorXd HDGSolver::coupled_residual(const HDGState& x, const HDGState& xn, double dt) const {
  const Eigen::VectorXd rhs_n = explicit_moments(xn, dt);
  Eigen::VectorXd r(monolithic_size());

  r.segment(0, grad_size()) = aux_residual(x);

  Eigen::VectorXd evo = -scheme_.alpha2 * residual_wt(x, eta_);
  if (scheme_.beta2 != 0.0)
    evo -= dt * scheme_.beta2 * residual_wtt(x, eta_, theta_signed(scheme_.beta2));
  evo -= rhs_n;
  for (int k = 0; k < ne_; ++k)
    for (int c = 0; c < m_; ++c)
      for (int j = 0; j < nb_; ++j) {
        const int idx = w_index(k, c, j);
        evo(idx) += detJ_[k] / dt * (x.w(idx) - xn.w(idx));
      }
  r.segment(grad_size(), w_size()) = evo;

  r.segment(grad_size() + w_size(), trace_size()) = hybrid_residual(x, xn, dt);
  return r;
}

void HDGSolver::assemble_jacobian(const HDGState& x, double dt, JacobianBlocks& out) const {
  const int Lu = 3 * m_ * nb_;
  const int Ll = 3 * m_ * np1_;
  const int lel = m_ * np1_;  // trace block per edge
  const double a2 = scheme_.alpha2;
  const double b2dt = scheme_.beta2 * dt;
  const bool with_wtt = scheme_.beta2 != 0.0;
  const double th_s = theta_signed(scheme_.beta2);

  out.Auu.assign(ne_, Eigen::MatrixXd::Zero(Lu, Lu));
  out.Aul.assign(ne_, Eigen::MatrixXd::Zero(Lu, Ll));
  out.Cu.assign(ne_, Eigen::MatrixXd::Zero(Ll, Lu));
  out.Dll.assign(nf_, Eigen::MatrixXd::Zero(lel, lel));

  // local offsets inside u_K: grad (d, c) then w (c)
  auto og = [&](int d, int c) { return (d * m_ + c) * nb_; };
  auto ow = [&](int c) { return 2 * m_ * nb_ + c * nb_; };
  auto ol = [&](int le, int c) { return (le * m_ + c) * np1_; };

  // ---- volume contributions ----
  for (int k = 0; k < ne_; ++k) {
    Eigen::MatrixXd& Auu = out.Auu[k];
    const Eigen::Map<const Eigen::MatrixXd> W(x.w.data() + k * m_ * nb_, nb_, m_);
    const Eigen::Map<const Eigen::MatrixXd> Sg(x.grad.data() + k * 2 * m_ * nb_, nb_, 2 * m_);
    const Eigen::MatrixXd wq = Vq_ * W;
    const Eigen::MatrixXd sq = Vq_ * Sg;

    // aux rows: detJ on grad, (phi_j, d_d phi_i) on w
    for (int d = 0; d < 2; ++d) {
      const Eigen::MatrixXd& Gd = (d == 0) ? Gx_[k] : Gy_[k];
      const Eigen::MatrixXd Dd = Gd.transpose() * (detJ_[k] * vol_quad_.weights).asDiagonal() * Vq_;
      for (int c = 0; c < m_; ++c) {
        Auu.block(og(d, c), og(d, c), nb_, nb_).diagonal().array() += detJ_[k];
        Auu.block(og(d, c), ow(c), nb_, nb_) += Dd;
      }
    }

    // evolution rows: mass/dt + flux linearizations
    for (int c = 0; c < m_; ++c)
      Auu.block(ow(c), ow(c), nb_, nb_).diagonal().array() += detJ_[k] / dt;

    for (int q = 0; q < vol_quad_.size(); ++q) {
      const double wgt = detJ_[k] * vol_quad_.weights(q);
      const Eigen::VectorXd wv = wq.row(q).transpose();
      const Eigen::MatrixXd A1 = problem_.jacobian(0, wv);
      const Eigen::MatrixXd A2 = problem_.jacobian(1, wv);
      const Eigen::VectorXd phi = Vq_.row(q).transpose();
      const Eigen::VectorXd gx = Gx_[k].row(q).transpose();
      const Eigen::VectorXd gy = Gy_[k].row(q).transpose();
      const Eigen::MatrixXd opx = gx * phi.transpose();  // Nb x Nb
      const Eigen::MatrixXd opy = gy * phi.transpose();

      // - a2 * d/dw (f_d, d_d phi)
      for (int c = 0; c < m_; ++c)
        for (int cp = 0; cp < m_; ++cp) {
          const double w1 = -a2 * wgt * A1(c, cp);
          const double w2 = -a2 * wgt * A2(c, cp);
          if (w1 != 0.0) Auu.block(ow(c), ow(cp), nb_, nb_) += w1 * opx;
          if (w2 != 0.0) Auu.block(ow(c), ow(cp), nb_, nb_) += w2 * opy;
        }

      if (!with_wtt) continue;
      const Eigen::VectorXd s1 = sq.row(q).segment(0, m_).transpose();
      const Eigen::VectorXd s2 = sq.row(q).segment(m_, m_).transpose();
      const Eigen::VectorXd U = A1 * s1 + A2 * s2;

      // d/dsigma_dir of -(A_d U, d_d phi): -(A_d A_dir)
      const Eigen::MatrixXd P11 = A1 * A1, P12 = A1 * A2, P21 = A2 * A1, P22 = A2 * A2;
      for (int c = 0; c < m_; ++c)
        for (int cp = 0; cp < m_; ++cp) {
          // Nwtt volume derivative is -(...); the evolution row adds
          // -b2dt * dNwtt, i.e. +b2dt * (...)
          Auu.block(ow(c), og(0, cp), nb_, nb_) += b2dt * wgt * (P11(c, cp) * opx + P21(c, cp) * opy);
          Auu.block(ow(c), og(1, cp), nb_, nb_) += b2dt * wgt * (P12(c, cp) * opx + P22(c, cp) * opy);
        }

      if (!problem_.linear) {
        const Eigen::MatrixXd H1U = problem_.hessian_apply(0, wv, U);
        const Eigen::MatrixXd H2U = problem_.hessian_apply(1, wv, U);
        const Eigen::MatrixXd SH =
            problem_.hessian_apply(0, wv, s1) + problem_.hessian_apply(1, wv, s2);
        const Eigen::MatrixXd M1 = H1U + A1 * SH;
        const Eigen::MatrixXd M2 = H2U + A2 * SH;
        for (int c = 0; c < m_; ++c)
          for (int cp = 0; cp < m_; ++cp)
            Auu.block(ow(c), ow(cp), nb_, nb_) +=
                b2dt * wgt * (M1(c, cp) * opx + M2(c, cp) * opy);
      }
    }
  }

  // ---- edge contributions ----
  for (int e = 0; e < nf_; ++e) {
    const EdgeCache& cache = edge_cache_[e];
    const Eigen::Map<const Eigen::MatrixXd> L(x.trace.data() + e * m_ * np1_, np1_, m_);
    const Eigen::MatrixXd lam = cache.psi * L;
    const int nqe = static_cast<int>(lam.rows());

    for (int side = 0; side < 2; ++side) {
      int k;
      Eigen::Vector2d n;
      side_info(e, side, k, n);
      Eigen::MatrixXd& Auu = out.Auu[k];
      Eigen::MatrixXd& Aul = out.Aul[k];
      Eigen::MatrixXd& Cu = out.Cu[k];
      const Eigen::MatrixXd& Phi = cache.phi[side];
      int le = -1;
      for (int i = 0; i < 3; ++i)
        if (mesh_.elem_edges[k][i] == e) le = i;

      const Eigen::Map<const Eigen::MatrixXd> Sg(x.grad.data() + k * 2 * m_ * nb_, nb_, 2 * m_);
      const Eigen::MatrixXd sq = Phi * Sg;

      for (int q = 0; q < nqe; ++q) {
        const double wgt = cache.weights(q);
        const Eigen::VectorXd lq = lam.row(q).transpose();
        const Eigen::MatrixXd A1 = problem_.jacobian(0, lq);
        const Eigen::MatrixXd A2 = problem_.jacobian(1, lq);
        const Eigen::MatrixXd Nmat = n.x() * A1 + n.y() * A2;
        const Eigen::VectorXd phi = Phi.row(q).transpose();
        const Eigen::VectorXd psi = cache.psi.row(q).transpose();
        const Eigen::MatrixXd phiphi = phi * phi.transpose();
        const Eigen::MatrixXd phipsi = phi * psi.transpose();
        const Eigen::MatrixXd psiphi = psi * phi.transpose();
        const Eigen::MatrixXd psipsi = psi * psi.transpose();

        // aux rows w.r.t. lambda: -n_d <lambda, phi>
        for (int d = 0; d < 2; ++d)
          for (int c = 0; c < m_; ++c)
            Aul.block(og(d, c), ol(le, c), nb_, np1_) -= wgt * n(d) * phipsi;

        // evolution rows, first-derivative flux: -a2 * dNwt
        // dNwt/dw = -eta phiphi ; dNwt/dlam = -(Nmat - eta I) phipsi
        for (int c = 0; c < m_; ++c) {
          Auu.block(ow(c), ow(c), nb_, nb_) += a2 * eta_ * wgt * phiphi;
          for (int cp = 0; cp < m_; ++cp) {
            const double entry = Nmat(c, cp) - (c == cp ? eta_ : 0.0);
            if (entry != 0.0) Aul.block(ow(c), ol(le, cp), nb_, np1_) += a2 * wgt * entry * phipsi;
          }
        }

        // hybrid rows, first-derivative flux: -a2 * dF
        // dF/dw = eta ; dF/dlam = Nmat - eta I
        for (int c = 0; c < m_; ++c) {
          Cu.block(ol(le, c), ow(c), np1_, nb_) -= a2 * eta_ * wgt * psiphi;
          for (int cp = 0; cp < m_; ++cp) {
            const double entry = Nmat(c, cp) - (c == cp ? eta_ : 0.0);
            if (entry != 0.0)
              out.Dll[e].block(c * np1_, cp * np1_, np1_, np1_) -= a2 * wgt * entry * psipsi;
          }
        }

        if (!with_wtt) continue;

        const Eigen::VectorXd s1 = sq.row(q).segment(0, m_).transpose();
        const Eigen::VectorXd s2 = sq.row(q).segment(m_, m_).transpose();
        const Eigen::VectorXd U = A1 * s1 + A2 * s2;
        const Eigen::MatrixXd NA1 = Nmat * A1;
        const Eigen::MatrixXd NA2 = Nmat * A2;
        Eigen::MatrixXd GJlam;  // d/dlam of (n.A(lam)) U(lam, sigma_K)
        if (problem_.linear) {
          GJlam = Eigen::MatrixXd::Zero(m_, m_);
        } else {
          const Eigen::MatrixXd HnU = n.x() * problem_.hessian_apply(0, lq, U) +
                                      n.y() * problem_.hessian_apply(1, lq, U);
          const Eigen::MatrixXd SH =
              problem_.hessian_apply(0, lq, s1) + problem_.hessian_apply(1, lq, s2);
          GJlam = HnU + Nmat * SH;
        }

        // evolution rows, second-derivative flux: -b2dt * dNwtt
        // Nwtt edge = +<G, phi>: dG/dw = -th_s, dG/dsig_d = Nmat A_d,
        // dG/dlam = GJlam + th_s I
        for (int c = 0; c < m_; ++c) {
          Auu.block(ow(c), ow(c), nb_, nb_) += b2dt * th_s * wgt * phiphi;
          for (int cp = 0; cp < m_; ++cp) {
            if (NA1(c, cp) != 0.0)
              Auu.block(ow(c), og(0, cp), nb_, nb_) -= b2dt * wgt * NA1(c, cp) * phiphi;
            if (NA2(c, cp) != 0.0)
              Auu.block(ow(c), og(1, cp), nb_, nb_) -= b2dt * wgt * NA2(c, cp) * phiphi;
            const double entry = GJlam(c, cp) + (c == cp ? th_s : 0.0);
            if (entry != 0.0) Aul.block(ow(c), ol(le, cp), nb_, np1_) -= b2dt * wgt * entry * phipsi;
          }
        }

        // hybrid rows, second-derivative flux: +b2dt * dG
        for (int c = 0; c < m_; ++c) {
          Cu.block(ol(le, c), ow(c), np1_, nb_) -= b2dt * th_s * wgt * psiphi;
          for (int cp = 0; cp < m_; ++cp) {
            if (NA1(c, cp) != 0.0)
              Cu.block(ol(le, c), og(0, cp), np1_, nb_) += b2dt * wgt * NA1(c, cp) * psiphi;
            if (NA2(c, cp) != 0.0)
              Cu.block(ol(le, c), og(1, cp), np1_, nb_) += b2dt * wgt * NA2(c, cp) * psiphi;
            const double entry = GJlam(c, cp) + (c == cp ? th_s : 0.0);
            if (entry != 0.0)
              out.Dll[e].block(c * np1_, cp * np1_, np1_, np1_) += b2dt * wgt * entry * psipsi;
          }
        }
      }
    }
  }
}

Eigen::SparseMatrix<double> HDGSolver::monolithic_matrix(const HDGState& x, double dt) {
  JacobianBlocks blocks;
  assemble_jacobian(x, dt, blocks);

  const int Lu = 3 * m_ * nb_;
  const int gsz = grad_size(), wsz = w_size();
  auto row_of_local = [&](int k, int lu) {
    // local u ordering: grad block then w block
    if (lu < 2 * m_ * nb_) return k * 2 * m_ * nb_ + lu;
    return gsz + k * m_ * nb_ + (lu - 2 * m_ * nb_);
  };
  auto trace_col = [&](int e, int ll) { return gsz + wsz + e * m_ * np1_ + ll; };

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < ne_; ++k) {
    for (int i = 0; i < Lu; ++i)
      for (int j = 0; j < Lu; ++j)
        if (blocks.Auu[k](i, j) != 0.0)
          trip.emplace_back(row_of_local(k, i), row_of_local(k, j), blocks.Auu[k](i, j));
    for (int le = 0; le < 3; ++le) {
      const int e = mesh_.elem_edges[k][le];
      for (int i = 0; i < Lu; ++i)
        for (int j = 0; j < m_ * np1_; ++j) {
          const double v = blocks.Aul[k](i, le * m_ * np1_ + j);
          if (v != 0.0) trip.emplace_back(row_of_local(k, i), trace_col(e, j), v);
        }
      for (int i = 0; i < m_ * np1_; ++i)
        for (int j = 0; j < Lu; ++j) {
          const double v = blocks.Cu[k](le * m_ * np1_ + i, j);
          if (v != 0.0) trip.emplace_back(trace_col(e, i), row_of_local(k, j), v);
        }
    }
  }
  for (int e = 0; e < nf_; ++e)
    for (int i = 0; i < m_ * np1_; ++i)
      for (int j = 0; j < m_ * np1_; ++j)
        if (blocks.Dll[e](i, j) != 0.0)
          trip.emplace_back(trace_col(e, i), trace_col(e, j), blocks.Dll[e](i, j));

  Eigen::SparseMatrix<double> J(monolithic_size(), monolithic_size());
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

Eigen::VectorXd HDGSolver::newton_direction_monolithic(const HDGState& x, const HDGState& xn,
                                                       double dt) {
  eta_ = compute_eta(xn);  // eta is frozen at the old state over a step
  const Eigen::SparseMatrix<double> J = monolithic_matrix(x, dt);
  const Eigen::VectorXd F = coupled_residual(x, xn, dt);
  return solve_direct(J, -F);
}

Eigen::VectorXd HDGSolver::newton_direction_condensed(const HDGState& x, const HDGState& xn,
                                                      double dt) {
  eta_ = compute_eta(xn);
  JacobianBlocks blocks;
  assemble_jacobian(x, dt, blocks);
  const Eigen::VectorXd F = coupled_residual(x, xn, dt);

  const int Lu = 3 * m_ * nb_;
  const int lel = m_ * np1_;
  const int gsz = grad_size(), wsz = w_size();

  // local residual gather
  auto local_residual = [&](int k) {
    Eigen::VectorXd f(Lu);
    f.segment(0, 2 * m_ * nb_) = F.segment(k * 2 * m_ * nb_, 2 * m_ * nb_);
    f.segment(2 * m_ * nb_, m_ * nb_) = F.segment(gsz + k * m_ * nb_, m_ * nb_);
    return f;
  };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = -F.segment(gsz + wsz, trace_size());
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lus;
  lus.reserve(ne_);
  std::vector<Eigen::MatrixXd> Xs(ne_);

  for (int e = 0; e < nf_; ++e)
    for (int i = 0; i < lel; ++i)
      for (int j = 0; j < lel; ++j)
        if (blocks.Dll[e](i, j) != 0.0)
          trip.emplace_back(e * lel + i, e * lel + j, blocks.Dll[e](i, j));

  for (int k = 0; k < ne_; ++k) {
    lus.emplace_back(blocks.Auu[k]);
    const Eigen::MatrixXd X = lus.back().solve(blocks.Aul[k]);
    if (!X.allFinite())
      throw SolverError(SolverFailure::LocalSolverSingular,
                        "element block solve produced non-finite values");
    Xs[k] = X;
    const Eigen::MatrixXd CAinvB = blocks.Cu[k] * X;                    // Ll x Ll
    const Eigen::VectorXd CAinvF = blocks.Cu[k] * lus.back().solve(local_residual(k));
    for (int lea = 0; lea < 3; ++lea) {
      const int ea = mesh_.elem_edges[k][lea];
      rhs.segment(ea * lel, lel) += CAinvF.segment(lea * lel, lel);
      for (int leb = 0; leb < 3; ++leb) {
        const int eb = mesh_.elem_edges[k][leb];
        const Eigen::MatrixXd blockm = CAinvB.block(lea * lel, leb * lel, lel, lel);
        for (int i = 0; i < lel; ++i)
          for (int j = 0; j < lel; ++j)
            if (blockm(i, j) != 0.0) trip.emplace_back(ea * lel + i, eb * lel + j, -blockm(i, j));
      }
    }
  }

  Eigen::SparseMatrix<double> S(trace_size(), trace_size());
  S.setFromTriplets(trip.begin(), trip.end());
  S.makeCompressed();

  Eigen::VectorXd dlam;
  if (config_.trace_solve_direct) {
    dlam = solve_direct(S, rhs);
    last_gmres_iterations_ = 0;
  } else {
    const BlockJacobiPreconditioner precond(S, lel);
    auto apply = [&S](const Eigen::VectorXd& v) -> Eigen::VectorXd { return S * v; };
    auto pre = [&precond](const Eigen::VectorXd& v) { return precond.apply(v); };
    const GmresResult res =
        gmres(apply, rhs, pre, config_.gmres_tol, config_.gmres_restart, config_.gmres_max_iter);
    if (!res.converged)
      throw SolverError(SolverFailure::GmresStalled,
                        "trace solve stalled at relative residual " +
                            std::to_string(res.relative_residual));
    dlam = res.x;
    last_gmres_iterations_ = res.iterations;
  }

  // local recovery
  Eigen::VectorXd delta(monolithic_size());
  delta.segment(gsz + wsz, trace_size()) = dlam;
  for (int k = 0; k < ne_; ++k) {
    Eigen::VectorXd dlam_local(3 * lel);
    for (int le = 0; le < 3; ++le)
      dlam_local.segment(le * lel, lel) = dlam.segment(mesh_.elem_edges[k][le] * lel, lel);
    const Eigen::VectorXd du = -(lus[k].solve(local_residual(k)) + Xs[k] * dlam_local);
    delta.segment(k * 2 * m_ * nb_, 2 * m_ * nb_) = du.segment(0, 2 * m_ * nb_);
    delta.segment(gsz + k * m_ * nb_, m_ * nb_) = du.segment(2 * m_ * nb_, m_ * nb_);
  }
  return delta;
}

HDGState HDGSolver::step(const HDGState& xn, double dt) {
  eta_ = compute_eta(xn);
  HDGState x = xn;
  double res = coupled_residual(x, xn, dt).norm();
  int iter = 0;
  int gmres_total = 0;
  while (res > config_.newton_tol) {
    if (iter >= config_.newton_max_iter)
      throw SolverError(SolverFailure::NewtonDiverged,
                        "Newton residual " + std::to_string(res) + " after " +
                            std::to_string(iter) + " iterations");
    const Eigen::VectorXd delta = newton_direction_condensed(x, xn, dt);
    gmres_total += last_gmres_iterations_;
    x.grad += delta.segment(0, grad_size());
    x.w += delta.segment(grad_size(), w_size());
    x.trace += delta.segment(grad_size() + w_size(), trace_size());
    res = coupled_residual(x, xn, dt).norm();
    ++iter;
  }
  last_newton_iterations_ = iter;
  last_gmres_iterations_ = gmres_total;
  return x;
}

Eigen::VectorXd HDGSolver::mass(const HDGState& x) const {
  // only mode 0 contributes: int_ref phi_0 = 1/sqrt(2)
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m_);
  for (int k = 0; k < ne_; ++k)
    for (int c = 0; c < m_; ++c) total(c) += detJ_[k] * x.w(w_index(k, c, 0)) / std::sqrt(2.0);
  return total;
}

IntegrationResult2D HDGSolver::integrate(const HDGState& x0, double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("integrate: T and dt must be positive");
  IntegrationResult2D result;
  result.state = x0;
  result.mass_initial = mass(x0);

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
    StepRecord2D rec;
    rec.index = index;
    rec.t = t_after;
    rec.dt = step_dt;
    rec.newton_iterations = last_newton_iterations_;
    rec.gmres_iterations = last_gmres_iterations_;
    rec.mass = mass(result.state);
    result.log.push_back(rec);
    ++index;
  };
  for (int i = 0; i < n_full; ++i) advance(dt, (i + 1) * dt);
  if (remainder > 0.0) advance(remainder, T);
  result.mass_final = mass(result.state);
  return result;
}

}  // namespace tdg
