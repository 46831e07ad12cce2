#include "tdg/problems1d.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tdg/quadrature.hpp"

namespace tdg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fourier modes of the discontinuous profile H(sin(2 pi (x-0.3))) e^{sin(2 pi x)},
/// i.e. e^{sin(2 pi x)} restricted to (0.3, 0.8). The integrand is analytic on
/// that interval, so a fixed high-order Gauss rule reaches machine precision.
struct DiscontinuousFourier {
  std::vector<std::complex<double>> modes;  // modes[k] = int_{0.3}^{0.8} g(x) e^{-2 pi i k x} dx
  int max_mode;

  explicit DiscontinuousFourier(int K) : max_mode(K) {
    const QuadratureRule rule = gauss_legendre(220);
    const double lo = 0.3, hi = 0.8;
    modes.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int q = 0; q < rule.size(); ++q) {
        const double x = lo + 0.5 * (hi - lo) * (rule.nodes(q, 0) + 1.0);
        const double w = 0.5 * (hi - lo) * rule.weights(q);
        acc += w * std::exp(std::sin(kTwoPi * x)) *
               std::exp(std::complex<double>(0.0, -kTwoPi * k * x));
      }
      modes[k] = acc;
    }
  }

  // w(x, t) = sum_k modes_k e^{-4 pi^2 k^2 eps t} e^{2 pi i k (x - c t)},
  // truncated when the next term's amplitude drops below 1e-14.
  double eval(double x, double t, double c, double eps) const {
    double value = modes[0].real();
    for (int k = 1; k <= max_mode; ++k) {
      const double decay = std::exp(-4.0 * kPi * kPi * k * k * eps * t);
      if (2.0 * std::abs(modes[k]) * decay < 1e-14 && k > 4) break;
      const std::complex<double> phase =
          std::exp(std::complex<double>(0.0, kTwoPi * k * (x - c * t)));
      value += 2.0 * decay * (modes[k] * phase).real();
    }
    return value;
  }
};

/// Cole-Hopf data: Fourier coefficients of phi_0 = exp(-(1/(2 eps)) int_0^x w0),
/// computed by a trapezoid sum (spectrally exact for the smooth periodic
/// integrand). w = -2 eps phi_x / phi with every mode decaying analytically.
struct ColeHopf {
  std::vector<double> modes;  // phi_0 is even, so the coefficients are real
  double eps;

  explicit ColeHopf(double viscosity, int K = 320, int samples = 4096) : eps(viscosity) {
    modes.resize(K + 1, 0.0);
    for (int k = 0; k <= K; ++k) {
      double acc = 0.0;
      for (int j = 0; j < samples; ++j) {
        const double x = static_cast<double>(j) / samples;
        const double phi0 = std::exp(-(1.0 - std::cos(kTwoPi * x)) / (4.0 * kPi * eps));
        acc += phi0 * std::cos(kTwoPi * k * x);
      }
      modes[k] = acc / samples;
    }
  }

  double eval(double x, double t) const {
    const int K = static_cast<int>(modes.size()) - 1;
    const double tail = std::abs(modes[K]) * std::exp(-4.0 * kPi * kPi * K * K * eps * t);
    if (tail > 1e-13 * std::abs(modes[0]))
      throw std::runtime_error("cole-hopf oracle: mode expansion not converged");
    double phi = modes[0];
    double phi_x = 0.0;
    for (int k = 1; k <= K; ++k) {
      const double decay = std::exp(-4.0 * kPi * kPi * k * k * eps * t);
      const double amplitude = 2.0 * modes[k] * decay;
      if (std::abs(amplitude) < 1e-17 && k > 4) break;
      phi += amplitude * std::cos(kTwoPi * k * x);
      phi_x -= amplitude * kTwoPi * k * std::sin(kTwoPi * k * x);
    }
    return -2.0 * eps * phi_x / phi;
  }
};

}  // namespace

Problem1D heat_problem() {
  Problem1D p;
  p.name = "heat";
  p.flux = Flux1D::none();
  p.riemann = RiemannKind::Zero;
  p.eps = 0.1;
  p.w0 = [](double x) { return std::sin(kTwoPi * x); };
  p.w0_x = [](double x) { return kTwoPi * std::cos(kTwoPi * x); };
  p.w0_xx = [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); };
  p.w0_xxx = [](double x) { return -kTwoPi * kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
  const double eps = p.eps;
  p.exact = [eps](double x, double t) {
    return std::exp(-4.0 * kPi * kPi * eps * t) * std::sin(kTwoPi * x);
  };
  return p;
}

Problem1D convection_problem() {
  Problem1D p;
  p.name = "convection";
  p.flux = Flux1D::linear(1.0);
  p.riemann = RiemannKind::Upwind;
  p.eps = 0.0;
  p.w0 = [](double x) { return std::sin(kTwoPi * x); };
  p.w0_x = [](double x) { return kTwoPi * std::cos(kTwoPi * x); };
  p.w0_xx = [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); };
  p.w0_xxx = [](double x) { return -kTwoPi * kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
  const double c = p.flux.c;
  p.exact = [c](double x, double t) { return std::sin(kTwoPi * (x - c * t)); };
  return p;
}

Problem1D convection_diffusion_problem(bool smooth) {
  Problem1D p;
  p.flux = Flux1D::linear(1.0);
  p.riemann = RiemannKind::Upwind;
  p.eps = 0.1;
  const double c = 1.0, eps = p.eps;
  if (smooth) {
    p.name = "convdiff";
    p.w0 = [](double x) { return std::sin(kTwoPi * x); };
    p.w0_x = [](double x) { return kTwoPi * std::cos(kTwoPi * x); };
    p.w0_xx = [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); };
    p.w0_xxx = [](double x) { return -kTwoPi * kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
    p.exact = [c, eps](double x, double t) {
      return std::exp(-4.0 * kPi * kPi * eps * t) * std::sin(kTwoPi * (x - c * t));
    };
  } else {
    p.name = "convdiff-disc";
    p.smooth_ic = false;
    p.ic_jumps = {0.3, 0.8};
    auto w0 = [](double x) {
      return (std::sin(kTwoPi * (x - 0.3)) > 0.0) ? std::exp(std::sin(kTwoPi * x)) : 0.0;
    };
    p.w0 = w0;
    auto series = std::make_shared<DiscontinuousFourier>(2048);
    p.exact = [series, w0, c, eps](double x, double t) {
      if (t == 0.0) return w0(x);
      return series->eval(x, t, c, eps);
    };
  }
  return p;
}

Problem1D burgers_problem() {
  Problem1D p;
  p.name = "burgers";
  p.flux = Flux1D::burgers();
  p.riemann = RiemannKind::LocalLaxFriedrichs;
  p.eps = 0.1;
  p.w0 = [](double x) { return std::sin(kTwoPi * x); };
  p.w0_x = [](double x) { return kTwoPi * std::cos(kTwoPi * x); };
  p.w0_xx = [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); };
  p.w0_xxx = [](double x) { return -kTwoPi * kTwoPi * kTwoPi * std::cos(kTwoPi * x); };
  auto ch = std::make_shared<ColeHopf>(p.eps);
  p.exact = [ch](double x, double t) { return ch->eval(x, t); };
  return p;
}

Problem1D problem_by_name(const std::string& name) {
  if (name == "heat") return heat_problem();
  if (name == "convection") return convection_problem();
  if (name == "convdiff") return convection_diffusion_problem(true);
  if (name == "convdiff-disc") return convection_diffusion_problem(false);
  if (name == "burgers") return burgers_problem();
  throw std::invalid_argument("unknown 1d problem: " + name);
}

}  // namespace tdg
