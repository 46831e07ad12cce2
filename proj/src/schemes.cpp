#include "tdg/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdg {

namespace {

using Poly = std::vector<Rational>;  // coeff[j] multiplies t^j

Poly derivative(const Poly& p) {
  if (p.size() <= 1) return {Rational(0)};
  Poly d(p.size() - 1);
  for (size_t j = 1; j < p.size(); ++j) d[j - 1] = Rational(static_cast<std::int64_t>(j)) * p[j];
  return d;
}

Rational eval_at(const Poly& p, std::int64_t t) {
  Rational v(0);
  Rational power(1);
  for (const Rational& c : p) {
    v = v + c * power;
    power = power * Rational(t);
  }
  return v;
}

std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::int64_t binomial(int n, int k) {
  std::int64_t b = 1;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

}  // namespace

SchemeCoeffs generate_scheme(int k, int l) {
  const bool supported = (k == 1 || k == 2) && (l == 1 || l == 2);
  if (!supported)
    throw std::invalid_argument("generate_scheme: (k, l) must come from {1,2} x {1,2}");

  const int m = k + l;
  // P(t) = t^k (t-1)^l / m!, expanded exactly.
  Poly P(m + 1, Rational(0));
  for (int j = 0; j <= l; ++j) {
    const std::int64_t sign = ((l - j) % 2 == 0) ? 1 : -1;
    P[k + j] = Rational(sign * binomial(l, j), factorial(m));
  }

  // Collocation identity: sum_j dt^j y^(j)(t^{n+1}) P^(m-j)(0)
  //                     = sum_j dt^j y^(j)(t^n)     P^(m-j)(1).
  // P^(m) == 1, so the j = 0 terms carry unit weight and
  //   a1 = P^(m-1)(1), a2 = -P^(m-1)(0), b1 = P^(m-2)(1), b2 = -P^(m-2)(0).
  Poly d = P;
  for (int i = 0; i < m - 2; ++i) d = derivative(d);
  const Poly d2 = d;             // P^(m-2)
  const Poly d1 = derivative(d); // P^(m-1)

  SchemeCoeffs s;
  s.k = k;
  s.l = l;
  s.order = m;
  s.alpha1_exact = eval_at(d1, 1);
  s.alpha2_exact = -eval_at(d1, 0);
  s.beta1_exact = eval_at(d2, 1);
  s.beta2_exact = -eval_at(d2, 0);
  s.alpha1 = s.alpha1_exact.value();
  s.alpha2 = s.alpha2_exact.value();
  s.beta1 = s.beta1_exact.value();
  s.beta2 = s.beta2_exact.value();
  return s;
}

SchemeCoeffs third_order_scheme() { return generate_scheme(1, 2); }
SchemeCoeffs fourth_order_scheme() { return generate_scheme(2, 2); }

std::complex<double> StabilityFunction::operator()(std::complex<double> mu) const {
  std::complex<double> n(0.0), d(0.0), power(1.0);
  const size_t terms = std::max(num.size(), den.size());
  for (size_t j = 0; j < terms; ++j) {
    if (j < num.size()) n += num[j] * power;
    if (j < den.size()) d += den[j] * power;
    power *= mu;
  }
  return n / d;
}

StabilityFunction stability_function(const SchemeCoeffs& s) {
  StabilityFunction h;
  h.num = {1.0, s.alpha1, s.beta1};
  h.den = {1.0, -s.alpha2, -s.beta2};
  auto trim = [](std::vector<double>& c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  };
  trim(h.num);
  trim(h.den);
  return h;
}

AStabilityReport check_a_stability(const StabilityFunction& h, int samples_per_decade) {
  AStabilityReport report;

  // Denominator roots (degree <= 2 in this family).
  const auto& d = h.den;
  std::vector<std::complex<double>> roots;
  if (h.den_degree() == 1) {
    roots.push_back(std::complex<double>(-d[0] / d[1], 0.0));
  } else if (h.den_degree() == 2) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(d[1] * d[1] - 4.0 * d[2] * d[0], 0.0));
    roots.push_back((-d[1] + disc) / (2.0 * d[2]));
    roots.push_back((-d[1] - disc) / (2.0 * d[2]));
  }
  for (const auto& r : roots)
    if (r.real() <= 0.0) report.pole_in_left_half_plane = true;

  double max_abs = std::abs(h(std::complex<double>(0.0, 0.0)));
  const double lo = -6.0, hi = 6.0;
  const int n = static_cast<int>((hi - lo) * samples_per_decade);
  for (int i = 0; i <= n; ++i) {
    const double y = std::pow(10.0, lo + (hi - lo) * i / n);
    max_abs = std::max(max_abs, std::abs(h(std::complex<double>(0.0, y))));
    max_abs = std::max(max_abs, std::abs(h(std::complex<double>(0.0, -y))));
  }
  report.max_abs_on_axis = max_abs;
  report.a_stable = !report.pole_in_left_half_plane && max_abs <= 1.0 + 1e-12;
  return report;
}

bool check_l_stability(const StabilityFunction& h) {
  if (h.num_degree() >= h.den_degree()) return false;
  return check_a_stability(h).a_stable;
}

double pade_check(const StabilityFunction& h, int p, int q) {
  // (p, q) Pade approximant of exp:
  //   N_j = (p+q-j)! p! / ((p+q)! j! (p-j)!),  D_j = N-like with q and (-1)^j.
  std::vector<double> N(p + 1), D(q + 1);
  for (int j = 0; j <= p; ++j)
    N[j] = static_cast<double>(factorial(p + q - j)) * factorial(p) /
           (static_cast<double>(factorial(p + q)) * factorial(j) * factorial(p - j));
  for (int j = 0; j <= q; ++j)
    D[j] = ((j % 2 == 0) ? 1.0 : -1.0) * static_cast<double>(factorial(p + q - j)) * factorial(q) /
           (static_cast<double>(factorial(p + q)) * factorial(j) * factorial(q - j));

  double dev = 0.0;
  const size_t nn = std::max(N.size(), h.num.size());
  for (size_t j = 0; j < nn; ++j) {
    const double a = (j < h.num.size()) ? h.num[j] : 0.0;
    const double b = (j < N.size()) ? N[j] : 0.0;
    dev = std::max(dev, std::abs(a - b));
  }
  const size_t nd = std::max(D.size(), h.den.size());
  for (size_t j = 0; j < nd; ++j) {
    const double a = (j < h.den.size()) ? h.den[j] : 0.0;
    const double b = (j < D.size()) ? D[j] : 0.0;
    dev = std::max(dev, std::abs(a - b));
  }
  return dev;
}

std::complex<double> scalar_ode_step(const SchemeCoeffs& s, std::complex<double> lambda, double dt,
                                     std::complex<double> y) {
  const std::complex<double> mu = lambda * dt;
  const std::complex<double> lhs = 1.0 - s.alpha2 * mu - s.beta2 * mu * mu;
  const std::complex<double> rhs = 1.0 + s.alpha1 * mu + s.beta1 * mu * mu;
  return rhs / lhs * y;
}

}  // namespace tdg
