#include <doctest.h>

#include <cmath>

#include "tdg/convergence.hpp"
#include "tdg/implicit1d.hpp"

using namespace tdg;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double table_error(const Problem1D& problem, int p, const SchemeCoeffs& scheme, double ratio,
                   int num_elements, SolverConfig config = {}) {
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, num_elements);
  ImplicitSolver1D solver(mesh, p, problem, scheme, config);
  const IntegrationResult r = solver.integrate(solver.initial_state(), problem.T, ratio * mesh.h);
  auto exact_T = [&](double x) { return problem.exact(x, problem.T); };
  return compute_l2_error(r.state.w, solver.op().basis(), exact_T);
}

}  // namespace

TEST_CASE("constant steady state is an exact fixed point of the step") {
  Problem1D p = heat_problem();
  p.w0 = [](double) { return 3.25; };
  p.w0_x = [](double) { return 0.0; };
  p.w0_xx = [](double) { return 0.0; };
  p.w0_xxx = [](double) { return 0.0; };
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 8);
  ImplicitSolver1D solver(mesh, 2, p, third_order_scheme());
  AuxState1D x = solver.initial_state();
  const Eigen::MatrixXd w0 = x.w.coeffs;
  for (int i = 0; i < 3; ++i) x = solver.step(x, 0.1);
  CHECK((x.w.coeffs - w0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("heat equation, one step: mean value stays zero") {
  const Problem1D p = heat_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 16);
  ImplicitSolver1D solver(mesh, 2, p, third_order_scheme());
  AuxState1D x = solver.initial_state();
  x = solver.step(x, mesh.h);
  CHECK(std::abs(x.w.integral()) < 1e-12);
}

TEST_CASE("integrate: step count and exact final time") {
  const Problem1D p = heat_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 16);
  ImplicitSolver1D solver(mesh, 1, p, third_order_scheme());
  const IntegrationResult r = solver.integrate(solver.initial_state(), 0.5, mesh.h);
  CHECK(r.log.size() == 8);
  CHECK(std::abs(r.log.back().t - 0.5) < 1e-14);

  // non-divisible step: final step shortened
  ImplicitSolver1D solver2(mesh, 1, p, third_order_scheme());
  const IntegrationResult r2 = solver2.integrate(solver2.initial_state(), 0.5, 0.15);
  CHECK(r2.log.size() == 4);
  CHECK(r2.log.back().dt == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(r2.log.back().t - 0.5) < 1e-14);
}

TEST_CASE("published heat-equation errors at spot-check resolutions") {
  // third-order integrator, dt = dx
  const Problem1D heat = heat_problem();
  CHECK(table_error(heat, 2, third_order_scheme(), 1.0, 16) ==
        doctest::Approx(4.786e-5).epsilon(0.02));
  CHECK(table_error(heat, 1, third_order_scheme(), 1.0, 8) ==
        doctest::Approx(3.725e-3).epsilon(0.02));
}

TEST_CASE("published convection error: fourth-order scheme at ratio 0.1") {
  CHECK(table_error(convection_problem(), 3, fourth_order_scheme(), 0.1, 8) ==
        doctest::Approx(7.976e-5).epsilon(0.02));
}

TEST_CASE("published viscous Burgers error: p = 1, third-order scheme") {
  CHECK(table_error(burgers_problem(), 1, third_order_scheme(), 1.0, 16) ==
        doctest::Approx(8.954e-4).epsilon(0.05));
}

TEST_CASE("global conservation over the full horizon") {
  for (const char* name : {"heat", "convdiff", "burgers"}) {
    const Problem1D p = problem_by_name(name);
    const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 16);
    ImplicitSolver1D solver(mesh, 2, p, third_order_scheme());
    const IntegrationResult r = solver.integrate(solver.initial_state(), p.T, mesh.h);
    CHECK(std::abs(r.mass_final - r.mass_initial) < 1e-11);
  }
}

TEST_CASE("analytic Newton matrix matches the finite-difference Jacobian (Burgers)") {
  const Problem1D p = burgers_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 4);
  SolverConfig config;
  ImplicitSolver1D solver(mesh, 1, p, third_order_scheme(), config);
  AuxState1D x = solver.initial_state();
  // advance one step so the state is not special
  x = solver.step(x, 0.05);

  const Eigen::MatrixXd analytic = Eigen::MatrixXd(solver.newton_matrix(x, 0.05));

  // finite differences of the coupled residual
  SolverConfig fd_config;
  fd_config.fd_jacobian = true;
  ImplicitSolver1D fd_solver(mesh, 1, p, third_order_scheme(), fd_config);
  const int n = static_cast<int>(analytic.rows());
  Eigen::MatrixXd fd(n, n);
  const AuxState1D xn = x;
  const Eigen::VectorXd r0 = solver.coupled_residual(x, xn, 0.05);
  // re-pack helpers: perturb through the flat layout
  auto flat = [&](const AuxState1D& s) {
    Eigen::VectorXd v(n);
    const int nm = 2, ne = 4;
    for (int k = 0; k < ne; ++k) {
      v.segment(k * 4 * nm + 0 * nm, nm) = s.w.coeffs.col(k);
      v.segment(k * 4 * nm + 1 * nm, nm) = s.wx.coeffs.col(k);
      v.segment(k * 4 * nm + 2 * nm, nm) = s.wxx.coeffs.col(k);
      v.segment(k * 4 * nm + 3 * nm, nm) = s.wxxx.coeffs.col(k);
    }
    return v;
  };
  auto unflat = [&](const Eigen::VectorXd& v) {
    AuxState1D s{PolyField(mesh, 1), PolyField(mesh, 1), PolyField(mesh, 1), PolyField(mesh, 1)};
    const int nm = 2, ne = 4;
    for (int k = 0; k < ne; ++k) {
      s.w.coeffs.col(k) = v.segment(k * 4 * nm + 0 * nm, nm);
      s.wx.coeffs.col(k) = v.segment(k * 4 * nm + 1 * nm, nm);
      s.wxx.coeffs.col(k) = v.segment(k * 4 * nm + 2 * nm, nm);
      s.wxxx.coeffs.col(k) = v.segment(k * 4 * nm + 3 * nm, nm);
    }
    return s;
  };
  const Eigen::VectorXd base = flat(x);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd pert = base;
    const double step = 1e-7 * (1.0 + std::abs(base(j)));
    pert(j) += step;
    fd.col(j) = (solver.coupled_residual(unflat(pert), xn, 0.05) - r0) / step;
  }
  const double scale = analytic.cwiseAbs().maxCoeff();
  CHECK((analytic - fd).cwiseAbs().maxCoeff() < 2e-6 * scale);
}

TEST_CASE("finite-difference Jacobian mode reproduces the analytic-mode step") {
  const Problem1D p = burgers_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 6);
  ImplicitSolver1D analytic(mesh, 2, p, third_order_scheme());
  SolverConfig fd_config;
  fd_config.fd_jacobian = true;
  ImplicitSolver1D fd(mesh, 2, p, third_order_scheme(), fd_config);
  const AuxState1D x0 = analytic.initial_state();
  const AuxState1D xa = analytic.step(x0, 1.0 / 6.0);
  const AuxState1D xf = fd.step(x0, 1.0 / 6.0);
  CHECK((xa.w.coeffs - xf.w.coeffs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Newton converges in at most 6 iterations on diffusion-dominated Burgers") {
  const Problem1D p = burgers_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 32);
  ImplicitSolver1D solver(mesh, 2, p, third_order_scheme());
  const IntegrationResult r = solver.integrate(solver.initial_state(), p.T, mesh.h);
  for (const auto& rec : r.log) CHECK(rec.newton_iterations <= 6);
}

TEST_CASE("init_aux_discontinuous: constants, bounded fields, projection difference order") {
  Problem1D constant = heat_problem();
  constant.w0 = [](double) { return 1.5; };
  constant.smooth_ic = false;
  {
    const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 8);
    ImplicitSolver1D solver(mesh, 2, constant, third_order_scheme());
    const AuxState1D x = solver.init_aux_discontinuous();
    CHECK(x.wx.coeffs.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(x.wxx.coeffs.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(x.wxxx.coeffs.cwiseAbs().maxCoeff() < 1e-8);
  }

  // Heaviside-modulated profile: finite auxiliary fields
  {
    const Problem1D disc = convection_diffusion_problem(false);
    const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 16);
    ImplicitSolver1D solver(mesh, 2, disc, third_order_scheme());
    const AuxState1D x = solver.init_aux_discontinuous();
    CHECK(x.w.coeffs.allFinite());
    CHECK(x.wx.coeffs.allFinite());
    CHECK(x.wxx.coeffs.allFinite());
    CHECK(x.wxxx.coeffs.allFinite());
  }

  // smooth data: the two constructions converge to each other
  {
    const Problem1D smooth = heat_problem();
    auto diff_at = [&](int n) {
      const Mesh1D mesh = build_mesh_1d(0.0, 1.0, n);
      ImplicitSolver1D solver(mesh, 2, smooth, third_order_scheme());
      const AuxState1D a = solver.initial_state();          // projected derivatives
      const AuxState1D b = solver.init_aux_discontinuous();  // weak derivative solve
      PolyField d = a.wx;
      d.coeffs -= b.wx.coeffs;
      return d.l2_norm();
    };
    const double d16 = diff_at(16), d32 = diff_at(32), d64 = diff_at(64);
    CHECK(std::log2(d16 / d32) >= 1.8);
    CHECK(std::log2(d32 / d64) >= 1.8);
  }
}

TEST_CASE("solver failures carry the step index") {
  // Newton cannot reach a 1e-10 residual in 0 iterations
  const Problem1D p = burgers_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 8);
  SolverConfig config;
  config.newton_max_iter = 0;
  ImplicitSolver1D solver(mesh, 1, p, third_order_scheme(), config);
  try {
    solver.integrate(solver.initial_state(), 0.5, 0.125);
    FAIL("expected NewtonDiverged");
  } catch (const SolverError& err) {
    CHECK(err.kind() == SolverFailure::NewtonDiverged);
    CHECK(std::string(err.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("temporal order isolation on the heat equation [slow]") {
  // fixed fine space, dt refinement only
  const Problem1D p = heat_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 64);
  auto errors_for = [&](const SchemeCoeffs& scheme, const std::vector<double>& dts) {
    std::vector<double> errs;
    for (double dt : dts) {
      ImplicitSolver1D solver(mesh, 4, p, scheme);
      const IntegrationResult r = solver.integrate(solver.initial_state(), p.T, dt);
      auto exact_T = [&](double x) { return p.exact(x, p.T); };
      errs.push_back(compute_l2_error(r.state.w, solver.op().basis(), exact_T));
    }
    return errs;
  };
  const auto e3 = errors_for(third_order_scheme(), {0.1, 0.05, 0.025, 0.0125});
  for (size_t i = 1; i < e3.size(); ++i) CHECK(std::log2(e3[i - 1] / e3[i]) >= 2.8);
  // every dt divides T evenly; a shortened final step would contaminate
  // the pure-order measurement
  const auto e4 = errors_for(fourth_order_scheme(), {0.25, 0.125, 0.0625, 0.03125});
  for (size_t i = 1; i < e4.size(); ++i) CHECK(std::log2(e4[i - 1] / e4[i]) >= 3.8);
}

TEST_CASE("burgers oracle agrees with a fine-grid solver reference [slow]") {
  const Problem1D p = burgers_problem();
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, 512);
  ImplicitSolver1D solver(mesh, 4, p, fourth_order_scheme());
  const IntegrationResult r = solver.integrate(solver.initial_state(), 0.5, mesh.h);
  const Basis1D& basis = solver.op().basis();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = (i + 0.5) / 200.0;
    int k = std::min(static_cast<int>(x * 512), 511);
    const double xi = 2.0 * (x - mesh.element_left(k)) / mesh.h - 1.0;
    worst = std::max(worst, std::abs(r.state.w.eval(basis, k, xi) - p.exact(x, 0.5)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("step operator couples each element only to its periodic neighbors") {
  const Problem1D p = burgers_problem();
  const int ne = 8;
  const Mesh1D mesh = build_mesh_1d(0.0, 1.0, ne);
  ImplicitSolver1D solver(mesh, 2, p, third_order_scheme());
  const AuxState1D x = solver.initial_state();
  const Eigen::MatrixXd J = Eigen::MatrixXd(solver.newton_matrix(x, mesh.h));
  const int bs = 4 * 3;  // four fields, three modes
  for (int kr = 0; kr < ne; ++kr)
    for (int kc = 0; kc < ne; ++kc) {
      const bool neighbor = kc == kr || kc == (kr + 1) % ne || kc == (kr + ne - 1) % ne;
      const double mag = J.block(kr * bs, kc * bs, bs, bs).cwiseAbs().maxCoeff();
      if (!neighbor) CHECK(mag == 0.0);
    }
}
