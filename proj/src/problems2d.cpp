#include "tdg/problems2d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tdg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGamma = 1.4;

Eigen::Matrix2d a1_matrix() {
  Eigen::Matrix2d A;
  A << 1.0 / 3.0, 8.0 / 3.0, 16.0 / 3.0, -7.0 / 3.0;
  return A;
}

Eigen::Matrix2d a2_matrix() {
  Eigen::Matrix2d A;
  A << -7.0 / 3.0, -5.0 / 3.0, -10.0 / 3.0, -2.0 / 3.0;
  return A;
}

void check_physical(double rho, double P) {
  if (!(rho > 0.0) || !(P > 0.0))
    throw std::domain_error("euler flux: nonphysical state (rho or P <= 0)");
}

Eigen::Vector4d euler_flux(int d, const Eigen::Vector4d& w) {
  const double rho = w(0), m1 = w(1), m2 = w(2), E = w(3);
  const double u = m1 / rho, v = m2 / rho;
  const double P = (kGamma - 1.0) * (E - 0.5 * rho * (u * u + v * v));
  check_physical(rho, P);
  if (d == 0) return Eigen::Vector4d(m1, P + m1 * u, m1 * v, u * (E + P));
  return Eigen::Vector4d(m2, m2 * u, P + m2 * v, v * (E + P));
}

Eigen::Matrix4d euler_jacobian(int d, const Eigen::Vector4d& w) {
  const double rho = w(0), m1 = w(1), m2 = w(2), E = w(3);
  const double g = kGamma;
  const double r2 = rho * rho, r3 = r2 * rho;
  const double q2 = m1 * m1 + m2 * m2;
  Eigen::Matrix4d A;
  if (d == 0) {
    A(0, 0) = 0.0;
    A(0, 1) = 1.0;
    A(0, 2) = 0.0;
    A(0, 3) = 0.0;
    A(1, 0) = (-m1 * m1 + 0.5 * (g - 1.0) * q2) / r2;
    A(1, 1) = m1 * (3.0 - g) / rho;
    A(1, 2) = m2 * (1.0 - g) / rho;
    A(1, 3) = g - 1.0;
    A(2, 0) = -m1 * m2 / r2;
    A(2, 1) = m2 / rho;
    A(2, 2) = m1 / rho;
    A(2, 3) = 0.0;
    A(3, 0) = m1 * (-E * g * rho + (g - 1.0) * q2) / r3;
    A(3, 1) = 0.5 * (2.0 * E * g * rho - 3.0 * (g - 1.0) * m1 * m1 - (g - 1.0) * m2 * m2) / r2;
    A(3, 2) = m1 * m2 * (1.0 - g) / r2;
    A(3, 3) = g * m1 / rho;
  } else {
    A(0, 0) = 0.0;
    A(0, 1) = 0.0;
    A(0, 2) = 1.0;
    A(0, 3) = 0.0;
    A(1, 0) = -m1 * m2 / r2;
    A(1, 1) = m2 / rho;
    A(1, 2) = m1 / rho;
    A(1, 3) = 0.0;
    A(2, 0) = (-m2 * m2 + 0.5 * (g - 1.0) * q2) / r2;
    A(2, 1) = m1 * (1.0 - g) / rho;
    A(2, 2) = m2 * (3.0 - g) / rho;
    A(2, 3) = g - 1.0;
    A(3, 0) = m2 * (-E * g * rho + (g - 1.0) * q2) / r3;
    A(3, 1) = m1 * m2 * (1.0 - g) / r2;
    A(3, 2) = 0.5 * (2.0 * E * g * rho - (g - 1.0) * m1 * m1 - 3.0 * (g - 1.0) * m2 * m2) / r2;
    A(3, 3) = g * m2 / rho;
  }
  return A;
}

// Directional derivative of euler_jacobian(d, .) * v with respect to w
// (symbolically generated, exercised against finite differences in tests).
Eigen::Matrix4d euler_hessian_apply(int d, const Eigen::Vector4d& w, const Eigen::Vector4d& v) {
  const double rho = w(0), m1 = w(1), m2 = w(2), E = w(3);
  const double v0 = v(0), v1 = v(1), v2 = v(2), v3 = v(3);
  const double g = kGamma;
  const double r2 = rho * rho, r3 = r2 * rho, r4 = r3 * rho;
  const double q2 = m1 * m1 + m2 * m2;
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
  if (d == 0) {
    H(1, 0) = (rho * (m1 * v1 * (g - 3.0) + m2 * v2 * (g - 1.0)) +
               v0 * (2.0 * m1 * m1 - (g - 1.0) * q2)) / r3;
    H(1, 1) = (g - 3.0) * (m1 * v0 - rho * v1) / r2;
    H(1, 2) = (g - 1.0) * (m2 * v0 - rho * v2) / r2;
    H(2, 0) = (2.0 * m1 * m2 * v0 - rho * (m1 * v2 + m2 * v1)) / r3;
    H(2, 1) = (-m2 * v0 + rho * v2) / r2;
    H(2, 2) = (-m1 * v0 + rho * v1) / r2;
    H(3, 0) = (-g * m1 * r2 * v3 -
               m1 * v0 * (-2.0 * E * rho + 2.0 * (g - 1.0) * q2 + (g - 1.0) * (-2.0 * E * rho + q2)) +
               0.5 * rho * (4.0 * m1 * m2 * v2 * (g - 1.0) -
                            v1 * (2.0 * E * rho + m1 * m1 * (4.0 - 4.0 * g) - (g - 1.0) * q2 -
                                  (g - 1.0) * (-2.0 * E * rho + q2)))) / r4;
    H(3, 1) = (g * r2 * v3 - rho * (g - 1.0) * (3.0 * m1 * v1 + m2 * v2) -
               0.5 * v0 * (2.0 * E * rho + m1 * m1 * (4.0 - 4.0 * g) - (g - 1.0) * q2 +
                           (g - 1.0) * (2.0 * E * rho - q2))) / r3;
    H(3, 2) = (g - 1.0) * (2.0 * m1 * m2 * v0 - rho * (m1 * v2 + m2 * v1)) / r3;
    H(3, 3) = g * (-m1 * v0 + rho * v1) / r2;
  } else {
    H(1, 0) = (2.0 * m1 * m2 * v0 - rho * (m1 * v2 + m2 * v1)) / r3;
    H(1, 1) = (-m2 * v0 + rho * v2) / r2;
    H(1, 2) = (-m1 * v0 + rho * v1) / r2;
    H(2, 0) = (rho * (m1 * v1 * (g - 1.0) + m2 * v2 * (g - 3.0)) +
               v0 * (2.0 * m2 * m2 - (g - 1.0) * q2)) / r3;
    H(2, 1) = (g - 1.0) * (m1 * v0 - rho * v1) / r2;
    H(2, 2) = (g - 3.0) * (m2 * v0 - rho * v2) / r2;
    H(3, 0) = (-g * m2 * r2 * v3 -
               m2 * v0 * (-2.0 * E * rho + 2.0 * (g - 1.0) * q2 + (g - 1.0) * (-2.0 * E * rho + q2)) +
               0.5 * rho * (4.0 * m1 * m2 * v1 * (g - 1.0) -
                            v2 * (2.0 * E * rho + m2 * m2 * (4.0 - 4.0 * g) - (g - 1.0) * q2 -
                                  (g - 1.0) * (-2.0 * E * rho + q2)))) / r4;
    H(3, 1) = (g - 1.0) * (2.0 * m1 * m2 * v0 - rho * (m1 * v2 + m2 * v1)) / r3;
    H(3, 2) = (g * r2 * v3 - rho * (g - 1.0) * (m1 * v1 + 3.0 * m2 * v2) -
               0.5 * v0 * (2.0 * E * rho + m2 * m2 * (4.0 - 4.0 * g) - (g - 1.0) * q2 +
                           (g - 1.0) * (2.0 * E * rho - q2))) / r3;
    H(3, 3) = g * (-m2 * v0 + rho * v2) / r2;
  }
  return H;
}

}  // namespace

Problem2D linear_system_2d() {
  Problem2D p;
  p.name = "linear2d";
  p.m = 2;
  p.L = 2.0;
  p.T = 0.1;
  p.linear = true;
  const Eigen::Matrix2d A1 = a1_matrix(), A2 = a2_matrix();
  p.flux = [A1, A2](int d, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return (d == 0 ? A1 : A2) * w;
  };
  p.jacobian = [A1, A2](int d, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return d == 0 ? A1 : A2;
  };
  p.hessian_apply = [](int, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::Matrix2d::Zero();
  };
  p.w0 = [](const Eigen::Vector2d& x) -> Eigen::VectorXd {
    return Eigen::Vector2d::Constant(std::sin(kPi * (x.x() + x.y())));
  };
  p.exact = [](const Eigen::Vector2d& x, double t) -> Eigen::VectorXd {
    return Eigen::Vector2d::Constant(std::sin(kPi * (x.x() + x.y() + t)));
  };
  p.max_wave_speed = [A1, A2](const Eigen::VectorXd&, const Eigen::Vector2d& n) {
    const Eigen::Matrix2d An = n.x() * A1 + n.y() * A2;
    return An.eigenvalues().cwiseAbs().maxCoeff();
  };
  return p;
}

Problem2D euler_problem() {
  Problem2D p;
  p.name = "euler2d";
  p.m = 4;
  p.L = 2.0;
  p.T = 0.5;
  p.linear = false;
  const double u = 0.7, v = 0.3, P = 1.0;
  p.flux = [](int d, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return euler_flux(d, Eigen::Vector4d(w));
  };
  p.jacobian = [](int d, const Eigen::VectorXd& w) -> Eigen::MatrixXd {
    return euler_jacobian(d, Eigen::Vector4d(w));
  };
  p.hessian_apply = [](int d, const Eigen::VectorXd& w, const Eigen::VectorXd& dir) -> Eigen::MatrixXd {
    return euler_hessian_apply(d, Eigen::Vector4d(w), Eigen::Vector4d(dir));
  };
  auto state = [u, v, P](double rho) {
    Eigen::Vector4d w;
    w << rho, rho * u, rho * v, P / (kGamma - 1.0) + 0.5 * rho * (u * u + v * v);
    return w;
  };
  p.w0 = [state](const Eigen::Vector2d& x) -> Eigen::VectorXd {
    return state(1.0 + 0.2 * std::sin(kPi * (x.x() + x.y())));
  };
  p.exact = [state, u, v](const Eigen::Vector2d& x, double t) -> Eigen::VectorXd {
    return state(1.0 + 0.2 * std::sin(kPi * (x.x() + x.y() - (u + v) * t)));
  };
  p.max_wave_speed = [](const Eigen::VectorXd& w, const Eigen::Vector2d& n) {
    const double rho = w(0);
    const double un = (w(1) * n.x() + w(2) * n.y()) / rho;
    const double q2 = (w(1) * w(1) + w(2) * w(2)) / (rho * rho);
    const double P = (kGamma - 1.0) * (w(3) - 0.5 * rho * q2);
    check_physical(rho, P);
    return std::abs(un) + std::sqrt(kGamma * P / rho);
  };
  return p;
}

Problem2D scalar_advection_2d(double c1, double c2) {
  Problem2D p;
  p.name = "advection2d";
  p.m = 1;
  p.L = 2.0;
  p.T = 0.5;
  p.linear = true;
  p.flux = [c1, c2](int d, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return (d == 0 ? c1 : c2) * w;
  };
  p.jacobian = [c1, c2](int d, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::MatrixXd A(1, 1);
    A(0, 0) = (d == 0 ? c1 : c2);
    return A;
  };
  p.hessian_apply = [](int, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(1, 1);
  };
  p.w0 = [](const Eigen::Vector2d& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, std::sin(kPi * (x.x() + x.y())));
  };
  p.exact = [c1, c2](const Eigen::Vector2d& x, double t) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, std::sin(kPi * (x.x() - c1 * t + x.y() - c2 * t)));
  };
  p.max_wave_speed = [c1, c2](const Eigen::VectorXd&, const Eigen::Vector2d& n) {
    return std::abs(c1 * n.x() + c2 * n.y());
  };
  return p;
}

Problem2D problem2d_by_name(const std::string& name) {
  if (name == "linear2d") return linear_system_2d();
  if (name == "euler2d") return euler_problem();
  throw std::invalid_argument("unknown 2d problem: " + name);
}

}  // namespace tdg
