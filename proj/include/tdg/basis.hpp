#pragma once

#include <functional>

#include <Eigen/Dense>

#include "tdg/quadrature.hpp"

namespace tdg {

/// Orthonormal Jacobi polynomial P~_n^(alpha,beta) at x in [-1,1],
/// normalized so that int (1-x)^a (1+x)^b P~_m P~_n dx = delta_mn.
double jacobi_p(int n, double alpha, double beta, double x);

/// d/dx of the orthonormal Jacobi polynomial.
double grad_jacobi_p(int n, double alpha, double beta, double x);

/// Orthonormal Legendre basis on [-1, 1]; dimension p + 1.
class Basis1D {
 public:
  explicit Basis1D(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  double value(int j, double x) const;
  double deriv(int j, double x) const;

  /// rows = points, cols = modes
  Eigen::MatrixXd vandermonde(const Eigen::VectorXd& points) const;
  Eigen::MatrixXd grad_vandermonde(const Eigen::VectorXd& points) const;

  /// Basis values at the reference endpoints -1 / +1.
  const Eigen::VectorXd& left_values() const { return left_; }
  const Eigen::VectorXd& right_values() const { return right_; }

 private:
  int degree_;
  Eigen::VectorXd left_, right_;
};

/// Orthonormal modal (Dubiner-type) basis on the reference triangle with
/// vertices (0,0), (1,0), (0,1); dimension (p+1)(p+2)/2.
class BasisTri {
 public:
  explicit BasisTri(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(modes_.size()); }

  double value(int j, double r, double s) const;
  /// (d/dr, d/ds) of mode j.
  Eigen::Vector2d grad(int j, double r, double s) const;

  Eigen::MatrixXd vandermonde(const Eigen::MatrixXd& points) const;
  /// Two matrices stacked: [d/dr; d/ds], each points x modes.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> grad_vandermonde(const Eigen::MatrixXd& points) const;

 private:
  int degree_;
  std::vector<std::pair<int, int>> modes_;  // (k, l) with k + l <= p
};

/// L2 projection of a pointwise-evaluable function onto the reference
/// interval basis using the supplied quadrature (must be exact to degree
/// >= 2p for exact reproduction of polynomials).
Eigen::VectorXd project_l2(const std::function<double(double)>& f, const Basis1D& basis,
                           const QuadratureRule& quad);

/// Same on the reference triangle.
Eigen::VectorXd project_l2_tri(const std::function<double(double, double)>& f, const BasisTri& basis,
                               const QuadratureRule& quad);

/// Polynomial evaluation of a coefficient vector at a reference point.
double eval(const Eigen::VectorXd& coeffs, const Basis1D& basis, double x);
double eval_deriv(const Eigen::VectorXd& coeffs, const Basis1D& basis, double x);

}  // namespace tdg
