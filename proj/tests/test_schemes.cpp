#include <doctest.h>

#include <cmath>
#include <complex>

#include "tdg/schemes.hpp"

using namespace tdg;

TEST_CASE("generate_scheme reproduces the third-order coefficients exactly") {
  const SchemeCoeffs s = generate_scheme(1, 2);
  CHECK(s.order == 3);
  CHECK(s.alpha1_exact == Rational(1, 3));
  CHECK(s.alpha2_exact == Rational(2, 3));
  CHECK(s.beta1_exact == Rational(0));
  CHECK(s.beta2_exact == Rational(-1, 6));
  CHECK(s.alpha1 == 1.0 / 3.0);
  CHECK(s.alpha2 == 2.0 / 3.0);
  CHECK(s.beta1 == 0.0);
  CHECK(s.beta2 == -1.0 / 6.0);
}

TEST_CASE("generate_scheme reproduces the fourth-order coefficients exactly") {
  const SchemeCoeffs s = generate_scheme(2, 2);
  CHECK(s.order == 4);
  CHECK(s.alpha1 == 0.5);
  CHECK(s.alpha2 == 0.5);
  CHECK(s.beta1 == 1.0 / 12.0);
  CHECK(s.beta2 == -1.0 / 12.0);
}

TEST_CASE("generate_scheme (1,1) is the trapezoidal rule") {
  // evaluating the collocation polynomial t(t-1)/2 by hand gives
  // a1 = a2 = 1/2, b1 = b2 = 0
  const SchemeCoeffs s = generate_scheme(1, 1);
  CHECK(s.order == 2);
  CHECK(s.alpha1 == 0.5);
  CHECK(s.alpha2 == 0.5);
  CHECK(s.beta1 == 0.0);
  CHECK(s.beta2 == 0.0);
}

TEST_CASE("generate_scheme consistency: alpha1 + alpha2 = 1") {
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const SchemeCoeffs s = generate_scheme(k, l);
      CHECK(s.alpha1 + s.alpha2 == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("generate_scheme rejects unsupported pairs") {
  CHECK_THROWS_AS(generate_scheme(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(generate_scheme(3, 1), std::invalid_argument);
}

TEST_CASE("order conditions hold on monomial solutions y = t^j") {
  // y' = g(t) = j t^(j-1), gdot = j(j-1) t^(j-2); the update must be exact
  // for j <= order when expanded about t = 1 -> t = 1 + dt.
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const SchemeCoeffs s = generate_scheme(k, l);
      const double dt = 0.37;
      const double t0 = 1.0, t1 = t0 + dt;
      for (int j = 0; j <= s.order; ++j) {
        auto d1 = [&](double t) { return j * std::pow(t, j - 1); };
        auto d2 = [&](double t) { return j * (j - 1.0) * std::pow(t, j - 2); };
        const double lhs = std::pow(t1, j);
        const double rhs = std::pow(t0, j) + dt * (s.alpha1 * d1(t0) + s.alpha2 * d1(t1)) +
                           dt * dt * (s.beta1 * d2(t0) + s.beta2 * d2(t1));
        CHECK(std::abs(lhs - rhs) < 1e-12);
      }
    }
}

TEST_CASE("stability functions match the published rational forms") {
  const StabilityFunction h3 = stability_function(third_order_scheme());
  REQUIRE(h3.num.size() == 2);
  REQUIRE(h3.den.size() == 3);
  CHECK(h3.num[0] == 1.0);
  CHECK(h3.num[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(h3.den[0] == 1.0);
  CHECK(h3.den[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(h3.den[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

  const StabilityFunction h4 = stability_function(fourth_order_scheme());
  REQUIRE(h4.num.size() == 3);
  REQUIRE(h4.den.size() == 3);
  CHECK(h4.num[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h4.num[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(h4.den[1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(h4.den[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("h(0) = 1 for every scheme") {
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const StabilityFunction h = stability_function(generate_scheme(k, l));
      CHECK(std::abs(h(std::complex<double>(0.0, 0.0)) - 1.0) < 1e-15);
    }
}

TEST_CASE("fourth-order scheme has |h(iy)| = 1 on the imaginary axis") {
  const StabilityFunction h = stability_function(fourth_order_scheme());
  for (double y : {1e-6, 1e-3, 0.1, 1.0, 2.0, 17.0, 1e3, 1e6})
    CHECK(std::abs(std::abs(h(std::complex<double>(0.0, y))) - 1.0) < 1e-12);
}

TEST_CASE("third-order scheme: |h(2i)|^2 = 13/17") {
  // direct evaluation of |h(iy)|^2 = 4(y^2+9)/(y^4+4y^2+36) at y = 2
  const StabilityFunction h = stability_function(third_order_scheme());
  const double mod2 = std::norm(h(std::complex<double>(0.0, 2.0)));
  CHECK(mod2 == doctest::Approx(13.0 / 17.0).epsilon(1e-13));
}

TEST_CASE("A-stability verdicts") {
  const AStabilityReport r3 = check_a_stability(stability_function(third_order_scheme()));
  CHECK(r3.a_stable);
  CHECK(!r3.pole_in_left_half_plane);
  CHECK(r3.max_abs_on_axis <= 1.0 + 1e-12);

  const AStabilityReport r4 = check_a_stability(stability_function(fourth_order_scheme()));
  CHECK(r4.a_stable);
  CHECK(r4.max_abs_on_axis == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a pole in the left half-plane is reported as a distinct failure") {
  StabilityFunction bad;
  bad.num = {1.0};
  bad.den = {1.0, 1.0};  // pole at mu = -1
  const AStabilityReport r = check_a_stability(bad);
  CHECK(r.pole_in_left_half_plane);
  CHECK(!r.a_stable);
}

TEST_CASE("L-stability: third true, fourth false, trapezoid false") {
  CHECK(check_l_stability(stability_function(third_order_scheme())));
  CHECK(!check_l_stability(stability_function(fourth_order_scheme())));
  CHECK(!check_l_stability(stability_function(generate_scheme(1, 1))));
}

TEST_CASE("Pade identification of the stability functions") {
  CHECK(pade_check(stability_function(third_order_scheme()), 1, 2) < 1e-14);
  CHECK(pade_check(stability_function(fourth_order_scheme()), 2, 2) < 1e-14);
  CHECK(pade_check(stability_function(fourth_order_scheme()), 1, 2) > 1e-3);
}

TEST_CASE("scalar ODE order test: observed order k + l on y' = lambda y") {
  const std::complex<double> lambda(-1.0, 0.5);
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const SchemeCoeffs s = generate_scheme(k, l);
      std::vector<double> errors;
      for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
        const int steps = static_cast<int>(std::round(1.0 / dt));
        std::complex<double> y(1.0, 0.0);
        for (int i = 0; i < steps; ++i) y = scalar_ode_step(s, lambda, dt, y);
        errors.push_back(std::abs(y - std::exp(lambda)));
      }
      for (size_t i = 1; i < errors.size(); ++i) {
        const double order = std::log2(errors[i - 1] / errors[i]);
        CHECK(order == doctest::Approx(s.order).epsilon(0.1 / s.order));
      }
    }
}

TEST_CASE("h approximates exp to order m near zero (log-log slope)") {
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const SchemeCoeffs s = generate_scheme(k, l);
      const StabilityFunction h = stability_function(s);
      // stay above the roundoff floor: |h - exp| ~ mu^(m+1) reaches 1e-15
      // already at mu = 1e-3 for the fourth-order scheme
      std::vector<double> mus = {1e-1, 1e-2};
      std::vector<double> devs;
      for (double mu : mus)
        devs.push_back(std::abs(h(std::complex<double>(mu, 0.0)) - std::exp(mu)));
      const double slope = std::log10(devs[0] / devs[1]);
      CHECK(slope >= s.order + 0.9);
    }
}

TEST_CASE("scalar_ode_step matches the stability function amplification") {
  const std::complex<double> lambda(-2.0, 1.3);
  const double dt = 0.21;
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      const SchemeCoeffs s = generate_scheme(k, l);
      const StabilityFunction h = stability_function(s);
      const std::complex<double> y0(0.7, -0.4);
      const std::complex<double> stepped = scalar_ode_step(s, lambda, dt, y0);
      const std::complex<double> predicted = h(lambda * dt) * y0;
      CHECK(std::abs(stepped - predicted) < 1e-13);
    }
}
