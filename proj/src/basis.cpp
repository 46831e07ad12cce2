#include "tdg/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace tdg {

double jacobi_p(int n, double alpha, double beta, double x) {
  // Recurrence in the orthonormal normalization (Hesthaven/Warburton A.2).
  const double ab = alpha + beta;
  const double gamma0 = std::pow(2.0, ab + 1.0) / (ab + 1.0) *
                        std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(ab + 1.0));
  double pm1 = 1.0 / std::sqrt(gamma0);
  if (n == 0) return pm1;
  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (ab + 3.0) * gamma0;
  double p = ((ab + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1);
  if (n == 1) return p;
  double aold = 2.0 / (2.0 + ab) * std::sqrt((alpha + 1.0) * (beta + 1.0) / (ab + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + ab;
    const double anew = 2.0 / (h1 + 2.0) *
                        std::sqrt((i + 1.0) * (i + 1.0 + ab) * (i + 1.0 + alpha) * (i + 1.0 + beta) /
                                  ((h1 + 1.0) * (h1 + 3.0)));
    const double bnew = -(alpha * alpha - beta * beta) / (h1 * (h1 + 2.0));
    const double pnew = ((x - bnew) * p - aold * pm1) / anew;
    pm1 = p;
    p = pnew;
    aold = anew;
  }
  return p;
}

double grad_jacobi_p(int n, double alpha, double beta, double x) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(n - 1, alpha + 1.0, beta + 1.0, x);
}

Basis1D::Basis1D(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("Basis1D: degree must be >= 0");
  left_.resize(size());
  right_.resize(size());
  for (int j = 0; j < size(); ++j) {
    left_(j) = value(j, -1.0);
    right_(j) = value(j, 1.0);
  }
}

double Basis1D::value(int j, double x) const { return jacobi_p(j, 0.0, 0.0, x); }

double Basis1D::deriv(int j, double x) const { return grad_jacobi_p(j, 0.0, 0.0, x); }

Eigen::MatrixXd Basis1D::vandermonde(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd V(points.size(), size());
  for (int q = 0; q < points.size(); ++q)
    for (int j = 0; j < size(); ++j) V(q, j) = value(j, points(q));
  return V;
}

Eigen::MatrixXd Basis1D::grad_vandermonde(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd V(points.size(), size());
  for (int q = 0; q < points.size(); ++q)
    for (int j = 0; j < size(); ++j) V(q, j) = deriv(j, points(q));
  return V;
}

BasisTri::BasisTri(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("BasisTri: degree must be >= 0");
  for (int d = 0; d <= degree; ++d)
    for (int k = d; k >= 0; --k) modes_.emplace_back(k, d - k);
}

namespace {

// Collapsed coordinates for the (0,0)-(1,0)-(0,1) triangle. At the singular
// vertex s = 1 the value limit is taken along r = 0.
inline void collapse(double r, double s, double& xi, double& zeta) {
  const double denom = 1.0 - s;
  xi = (std::abs(denom) > 1e-14) ? 2.0 * r / denom - 1.0 : -1.0;
  zeta = 2.0 * s - 1.0;
}

}  // namespace

double BasisTri::value(int j, double r, double s) const {
  const auto [k, l] = modes_[j];
  double xi, zeta;
  collapse(r, s, xi, zeta);
  const double scale = std::pow(2.0, k + 1.5);
  return scale * jacobi_p(k, 0.0, 0.0, xi) * jacobi_p(l, 2.0 * k + 1.0, 0.0, zeta) *
         std::pow(1.0 - s, k);
}

Eigen::Vector2d BasisTri::grad(int j, double r, double s) const {
  const auto [k, l] = modes_[j];
  double xi, zeta;
  collapse(r, s, xi, zeta);
  const double scale = std::pow(2.0, k + 1.5);
  const double pk = jacobi_p(k, 0.0, 0.0, xi);
  const double dpk = grad_jacobi_p(k, 0.0, 0.0, xi);
  const double pl = jacobi_p(l, 2.0 * k + 1.0, 0.0, zeta);
  const double dpl = grad_jacobi_p(l, 2.0 * k + 1.0, 0.0, zeta);
  const double pow_km1 = (k >= 1) ? std::pow(1.0 - s, k - 1) : 0.0;
  const double pow_k = std::pow(1.0 - s, k);
  Eigen::Vector2d g;
  // All (1-s)^(k-1) factors are multiplied by terms that vanish for k = 0.
  g(0) = scale * 2.0 * dpk * pow_km1 * pl;
  g(1) = scale * (dpk * (1.0 + xi) * pow_km1 * pl - static_cast<double>(k) * pk * pow_km1 * pl +
                  2.0 * pk * pow_k * dpl);
  if (k == 0) {
    g(0) = 0.0;
    g(1) = scale * 2.0 * pk * dpl;
  }
  return g;
}

Eigen::MatrixXd BasisTri::vandermonde(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd V(points.rows(), size());
  for (int q = 0; q < points.rows(); ++q)
    for (int j = 0; j < size(); ++j) V(q, j) = value(j, points(q, 0), points(q, 1));
  return V;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> BasisTri::grad_vandermonde(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd Vr(points.rows(), size()), Vs(points.rows(), size());
  for (int q = 0; q < points.rows(); ++q)
    for (int j = 0; j < size(); ++j) {
      const Eigen::Vector2d g = grad(j, points(q, 0), points(q, 1));
      Vr(q, j) = g(0);
      Vs(q, j) = g(1);
    }
  return {Vr, Vs};
}

Eigen::VectorXd project_l2(const std::function<double(double)>& f, const Basis1D& basis,
                           const QuadratureRule& quad) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (int q = 0; q < quad.size(); ++q) {
    const double x = quad.nodes(q, 0);
    const double wf = quad.weights(q) * f(x);
    for (int j = 0; j < basis.size(); ++j) c(j) += wf * basis.value(j, x);
  }
  return c;
}

Eigen::VectorXd project_l2_tri(const std::function<double(double, double)>& f, const BasisTri& basis,
                               const QuadratureRule& quad) {
  // Basis is orthonormal w.r.t. the triangle measure, so the projection is a
  // plain moment computation.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
  for (int q = 0; q < quad.size(); ++q) {
    const double r = quad.nodes(q, 0), s = quad.nodes(q, 1);
    const double wf = quad.weights(q) * f(r, s);
    for (int j = 0; j < basis.size(); ++j) c(j) += wf * basis.value(j, r, s);
  }
  return c;
}

double eval(const Eigen::VectorXd& coeffs, const Basis1D& basis, double x) {
  double v = 0.0;
  for (int j = 0; j < basis.size(); ++j) v += coeffs(j) * basis.value(j, x);
  return v;
}

double eval_deriv(const Eigen::VectorXd& coeffs, const Basis1D& basis, double x) {
  double v = 0.0;
  for (int j = 0; j < basis.size(); ++j) v += coeffs(j) * basis.deriv(j, x);
  return v;
}

}  // namespace tdg
