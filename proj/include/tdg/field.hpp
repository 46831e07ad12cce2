#pragma once

#include <functional>

#include <Eigen/Dense>

#include "tdg/basis.hpp"
#include "tdg/mesh1d.hpp"
#include "tdg/quadrature.hpp"

namespace tdg {

/// Piecewise-polynomial scalar field: modal coefficients w.r.t. the
/// orthonormal reference basis, one column per element. The element mass
/// matrix is (h/2) * I throughout.
struct PolyField {
  Mesh1D mesh;
  int degree = 0;
  Eigen::MatrixXd coeffs;  // (degree + 1) x num_elements

  PolyField() = default;
  PolyField(const Mesh1D& m, int p)
      : mesh(m), degree(p), coeffs(Eigen::MatrixXd::Zero(p + 1, m.num_elements)) {}

  int num_elements() const { return mesh.num_elements; }
  int modes() const { return degree + 1; }

  /// Flat view in element-major order (element k occupies the contiguous
  /// range [k*(p+1), (k+1)*(p+1))).
  Eigen::VectorXd flat() const { return Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size()); }
  void set_flat(const Eigen::VectorXd& v) {
    Eigen::Map<Eigen::VectorXd>(coeffs.data(), coeffs.size()) = v;
  }

  double eval(const Basis1D& basis, int element, double xi) const;
  /// Physical-space derivative (chain rule through the element map).
  double eval_deriv(const Basis1D& basis, int element, double xi) const;

  /// sqrt(int w^2 dx); exact by orthonormality.
  double l2_norm() const { return std::sqrt(0.5 * mesh.h * coeffs.squaredNorm()); }

  /// int w dx over the whole domain.
  double integral() const;
};

/// L2 projection of f onto each element using a quadrature rule exact to the
/// given polynomial degree (transcendental integrands are oversampled by the
/// caller's choice of degree).
PolyField project_field(const Mesh1D& mesh, int degree, const std::function<double(double)>& f,
                        int quad_degree);

/// sqrt(int (w_h - g)^2 dx) with per-element Gauss quadrature exact to
/// quad_degree against the polynomial part.
double l2_error(const PolyField& w, const Basis1D& basis, const std::function<double(double)>& g,
                int quad_degree);

}  // namespace tdg
