#include "tdg/field.hpp"

namespace tdg {

double PolyField::eval(const Basis1D& basis, int element, double xi) const {
  double v = 0.0;
  for (int j = 0; j < modes(); ++j) v += coeffs(j, element) * basis.value(j, xi);
  return v;
}

double PolyField::eval_deriv(const Basis1D& basis, int element, double xi) const {
  double v = 0.0;
  for (int j = 0; j < modes(); ++j) v += coeffs(j, element) * basis.deriv(j, xi);
  return v * 2.0 / mesh.h;
}

double PolyField::integral() const {
  // int_elem phi_0 = sqrt(2) for the orthonormal Legendre mode 0.
  return 0.5 * mesh.h * std::sqrt(2.0) * coeffs.row(0).sum();
}

PolyField project_field(const Mesh1D& mesh, int degree, const std::function<double(double)>& f,
                        int quad_degree) {
  const Basis1D basis(degree);
  const QuadratureRule quad = interval_rule(quad_degree);
  PolyField w(mesh, degree);
  for (int k = 0; k < mesh.num_elements; ++k) {
    auto local = [&](double xi) { return f(mesh.to_physical(k, xi)); };
    w.coeffs.col(k) = project_l2(local, basis, quad);
  }
  return w;
}

double l2_error(const PolyField& w, const Basis1D& basis, const std::function<double(double)>& g,
                int quad_degree) {
  const QuadratureRule quad = interval_rule(quad_degree);
  const Eigen::MatrixXd V = basis.vandermonde(quad.nodes.col(0));
  double acc = 0.0;
  for (int k = 0; k < w.num_elements(); ++k) {
    const Eigen::VectorXd wh = V * w.coeffs.col(k);
    for (int q = 0; q < quad.size(); ++q) {
      const double diff = wh(q) - g(w.mesh.to_physical(k, quad.nodes(q, 0)));
      acc += 0.5 * w.mesh.h * quad.weights(q) * diff * diff;
    }
  }
  return std::sqrt(acc);
}

}  // namespace tdg
