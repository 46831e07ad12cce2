#pragma once

#include <complex>
#include <vector>

#include "tdg/rational.hpp"

namespace tdg {

/// Coefficients of the two-point two-derivative update
///   y^{n+1} = y^n + dt (a1 g(y^n) + a2 g(y^{n+1}))
///           + dt^2 (b1 gdot(y^n) + b2 gdot(y^{n+1})),
/// generated from the Hermite-Birkhoff collocation with k derivative
/// conditions at t^n and l at t^{n+1}; order = k + l.
struct SchemeCoeffs {
  double alpha1 = 0.0, alpha2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
  Rational alpha1_exact, alpha2_exact, beta1_exact, beta2_exact;
  int order = 0;
  int k = 0, l = 0;
};

/// Supported family: (k, l) in {(1,1), (1,2), (2,1), (2,2)}.
SchemeCoeffs generate_scheme(int k, int l);

/// Convenience handles for the two integrators used by the solvers.
SchemeCoeffs third_order_scheme();   // (k, l) = (1, 2), L-stable
SchemeCoeffs fourth_order_scheme();  // (k, l) = (2, 2), A-stable

/// Rational amplification factor h(mu) = num(mu) / den(mu) of the scheme on
/// y' = lambda y with mu = lambda dt. Trailing zero coefficients trimmed.
struct StabilityFunction {
  std::vector<double> num;  // num[j] multiplies mu^j
  std::vector<double> den;

  std::complex<double> operator()(std::complex<double> mu) const;
  int num_degree() const { return static_cast<int>(num.size()) - 1; }
  int den_degree() const { return static_cast<int>(den.size()) - 1; }
};

StabilityFunction stability_function(const SchemeCoeffs& scheme);

struct AStabilityReport {
  bool a_stable = false;
  double max_abs_on_axis = 0.0;
  bool pole_in_left_half_plane = false;
};

/// Samples |h(iy)| over a log-spaced grid y in [1e-6, 1e6] (both signs) and
/// locates denominator roots; A-stable iff the max is <= 1 + 1e-12 and no
/// pole lies in the closed left half-plane.
AStabilityReport check_a_stability(const StabilityFunction& h, int samples_per_decade = 64);

/// True iff deg(num) < deg(den) and the scheme is A-stable.
bool check_l_stability(const StabilityFunction& h);

/// Maximum coefficient deviation between h and the (p, q) Pade approximant
/// of exp(mu).
double pade_check(const StabilityFunction& h, int p, int q);

/// One step of the scheme applied to the scalar test equation y' = lambda y.
std::complex<double> scalar_ode_step(const SchemeCoeffs& scheme, std::complex<double> lambda,
                                     double dt, std::complex<double> y);

}  // namespace tdg
