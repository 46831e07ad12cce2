#pragma once

#include <Eigen/Dense>

namespace tdg {

/// Nodes and weights of a quadrature rule. For interval rules the nodes live
/// on [-1, 1] and the weights sum to 2. For triangle rules the nodes are
/// (r, s) pairs on the reference triangle {r, s >= 0, r + s <= 1} and the
/// weights sum to 1/2.
struct QuadratureRule {
  Eigen::MatrixXd nodes;   // n x dim
  Eigen::VectorXd weights; // n

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(nodes.cols()); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
/// 2n - 1. Nodes/weights from the Golub-Welsch eigenvalue problem.
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Jacobi rule on [-1, 1] with weight (1-x)^alpha (1+x)^beta.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// Interval rule exact for polynomials of total degree >= `degree`.
QuadratureRule interval_rule(int degree);

/// Rule on the reference triangle (vertices (0,0), (1,0), (0,1)) exact for
/// polynomials of total degree >= `degree`. Built from a collapsed
/// Gauss-Legendre x Gauss-Jacobi(1,0) tensor product, so the weights are
/// strictly positive at every order.
QuadratureRule triangle_rule(int degree);

}  // namespace tdg
