#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tdg/ldg1d.hpp"

namespace tdg {

/// A 1D periodic test problem: flux, viscosity, initial data with optional
/// analytic derivatives (used to initialize the derivative chain for smooth
/// data), and an exact-solution oracle.
struct Problem1D {
  std::string name;
  Flux1D flux;
  RiemannKind riemann = RiemannKind::Zero;
  double eps = 0.0;
  double a = 0.0, b = 1.0;
  double T = 0.5;
  std::function<double(double)> w0;
  std::function<double(double)> w0_x, w0_xx, w0_xxx;  // empty when unavailable
  std::function<double(double, double)> exact;        // (x, t)
  bool smooth_ic = true;
  std::vector<double> ic_jumps;  // known discontinuity locations of w0

  bool has_ic_derivatives() const { return static_cast<bool>(w0_x); }
};

/// w_t = eps w_xx, w0 = sin(2 pi x), eps = 0.1.
Problem1D heat_problem();

/// w_t + c w_x = 0, c = 1, w0 = sin(2 pi x).
Problem1D convection_problem();

/// w_t + c w_x = eps w_xx, c = 1, eps = 0.1. The smooth variant uses
/// w0 = sin(2 pi x); the discontinuous variant uses the Heaviside-modulated
/// profile H(sin(2 pi (x - 0.3))) exp(sin(2 pi x)) with a truncated Fourier
/// series as the exact-solution oracle (modes decay like
/// exp(-4 pi^2 k^2 eps t) and translate at speed c).
Problem1D convection_diffusion_problem(bool smooth);

/// w_t + (w^2/2)_x = eps w_xx, eps = 0.1, w0 = sin(2 pi x); exact solution
/// evaluated through the Cole-Hopf transformation with spectrally computed
/// heat-kernel coefficients.
Problem1D burgers_problem();

Problem1D problem_by_name(const std::string& name);

}  // namespace tdg
