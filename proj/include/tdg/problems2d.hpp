#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace tdg {

/// First-order 2D system w_t + div f(w) = 0 on the periodic square [0, L]^2.
/// flux(d, w) is the d-th spatial component (an m-vector); jacobian(d, w) its
/// m x m derivative; hessian_apply(d, w, v) the directional derivative of
/// jacobian(d, .) * v, i.e. M with M(i,j) = sum_k d2 f_{d,i}/dw_j dw_k v_k.
struct Problem2D {
  std::string name;
  int m = 1;
  double L = 2.0;
  double T = 0.5;
  bool linear = false;

  std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)> flux;
  std::function<Eigen::MatrixXd(int, const Eigen::VectorXd&)> jacobian;
  std::function<Eigen::MatrixXd(int, const Eigen::VectorXd&, const Eigen::VectorXd&)> hessian_apply;

  std::function<Eigen::VectorXd(const Eigen::Vector2d&)> w0;
  std::function<Eigen::VectorXd(const Eigen::Vector2d&, double)> exact;

  /// Spectral radius of n . f'(w); drives the Rusanov stabilization.
  std::function<double(const Eigen::VectorXd&, const Eigen::Vector2d&)> max_wave_speed;
};

/// Coupled linear advection system: f_d = A_d w with the fixed 2x2 matrix
/// pair sharing an eigenbasis; exact solution is a plane wave along x + y.
Problem2D linear_system_2d();

/// Compressible Euler (density advection test): periodic [0, 2]^2,
/// rho = 1 + 0.2 sin(pi(x + y - (u+v) t)), u = 0.7, v = 0.3, P = 1,
/// gamma = 1.4. Flux evaluation rejects rho <= 0 or P <= 0.
Problem2D euler_problem();

/// Scalar advection f = (c1 w, c2 w); exercised by tests.
Problem2D scalar_advection_2d(double c1, double c2);

Problem2D problem2d_by_name(const std::string& name);

}  // namespace tdg
