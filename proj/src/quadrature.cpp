#include "tdg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace tdg {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal matrix
// built from the three-term recurrence of the (monic) orthogonal polynomials;
// the weight of node k is mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = diag(i);
    if (i + 1 < n) {
      J(i, i + 1) = offdiag(i);
      J(i + 1, i) = offdiag(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
  const double ab = alpha + beta;
  // mu0 = integral of the weight over [-1,1]:
  //   2^(a+b+1) * Gamma(a+1) Gamma(b+1) / Gamma(a+b+2)
  const double mu0 = std::pow(2.0, ab + 1.0) *
                     std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    const double dk = static_cast<double>(k);
    const double denom = (2.0 * dk + ab) * (2.0 * dk + ab + 2.0);
    diag(k) = (k == 0 && ab + 2.0 == 0.0) ? 0.0
                                          : (beta * beta - alpha * alpha) / (denom == 0.0 ? 1.0 : denom);
    if (k == 0 && alpha + beta == 0.0) diag(k) = 0.0;
  }
  for (int k = 1; k < n; ++k) {
    const double dk = static_cast<double>(k);
    double num = 4.0 * dk * (dk + alpha) * (dk + beta) * (dk + ab);
    double den = (2.0 * dk + ab - 1.0) * (2.0 * dk + ab) * (2.0 * dk + ab) * (2.0 * dk + ab + 1.0);
    if (k == 1 && ab + 1.0 == 0.0) {
      // degenerate alpha+beta = -1 case, not used here
      num = 4.0 * (1.0 + alpha) * (1.0 + beta);
      den = (ab + 2.0) * (ab + 2.0) * (ab + 3.0);
    }
    off(k - 1) = std::sqrt(num / den);
  }
  return golub_welsch(diag, off, mu0);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  return gauss_jacobi(n, 0.0, 0.0);
}

QuadratureRule interval_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2);  // 2n - 1 >= degree
  return gauss_legendre(n);
}

QuadratureRule triangle_rule(int degree) {
  // Duffy substitution r = u (1 - s): for a monomial of total degree d the
  // u-integrand has degree <= d and the s-integrand degree <= d against the
  // weight (1 - s). Map [-1,1] rules to [0,1].
  const int n = std::max(1, (degree + 2) / 2);
  const QuadratureRule gu = gauss_legendre(n);
  const QuadratureRule gs = gauss_jacobi(n, 1.0, 0.0);
  QuadratureRule rule;
  rule.nodes.resize(n * n, 2);
  rule.weights.resize(n * n);
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (gu.nodes(i, 0) + 1.0);
    const double wu = 0.5 * gu.weights(i);
    for (int j = 0; j < n; ++j) {
      const double s = 0.5 * (gs.nodes(j, 0) + 1.0);
      // gauss_jacobi weight contains (1-x) on [-1,1]; rescaling to (1-s) on
      // [0,1] contributes 1/2 * 1/2.
      const double ws = 0.25 * gs.weights(j);
      rule.nodes(idx, 0) = u * (1.0 - s);
      rule.nodes(idx, 1) = s;
      rule.weights(idx) = wu * ws;
      ++idx;
    }
  }
  return rule;
}

}  // namespace tdg
