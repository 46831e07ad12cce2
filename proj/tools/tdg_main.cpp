#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdg/convergence.hpp"

namespace {

using namespace tdg;

void add_common_options(CLI::App* cmd, RunConfig& config, std::string& config_path,
                        std::string& p_list, std::string& level_list) {
  cmd->add_option("--config", config_path, "key = value configuration file");
  cmd->add_option("--problem", config.problem,
                  "heat | convection | convdiff | convdiff-disc | burgers | linear2d | euler2d");
  cmd->add_option("--p", p_list, "polynomial degree(s), comma separated");
  cmd->add_option("--scheme", config.scheme, "third | fourth | k,l");
  cmd->add_option("--ratio", config.ratio, "time step ratio dt/dx");
  cmd->add_option("--levels", level_list, "element counts (1D) / squares per side (2D)");
  cmd->add_option("--T", config.T_override, "final time override");
  cmd->add_option("--out", config.out, "output path prefix");
  cmd->add_option("--samples", config.samples, "sample count for run output");
  cmd->add_flag("--plotdata", config.plotdata, "also emit log-log plot data per series");
  cmd->add_option("--newton-tol", config.newton_tol, "Newton residual tolerance");
  cmd->add_option("--gmres-tol", config.gmres_tol, "trace-solve relative residual tolerance");
  cmd->add_option("--d2f-boundary", config.d2f_boundary,
                  "viscous flux boundary test: normal | literal");
  cmd->add_option("--hybrid-flux", config.hybrid_flux,
                  "trace continuity condition: implicit | total");
  cmd->add_option("--trace-solve", config.trace_solve, "gmres | direct");
  cmd->add_option("--eta", config.eta_override, "convective stabilization override");
  cmd->add_option("--theta", config.theta_override, "second-derivative stabilization override");
  cmd->add_option("--mesh-out", config.mesh_out, "export the 2D mesh with this prefix");
}

RunConfig finalize_config(const std::string& config_path, RunConfig flags, const std::string& p_list,
                          const std::string& level_list) {
  RunConfig config = flags;
  if (!config_path.empty()) {
    config = parse_config_file(config_path);
    // command-line flags override file values where explicitly given
    if (flags.problem != RunConfig{}.problem) config.problem = flags.problem;
    if (flags.scheme != RunConfig{}.scheme) config.scheme = flags.scheme;
    if (flags.ratio != RunConfig{}.ratio) config.ratio = flags.ratio;
    if (flags.T_override > 0.0) config.T_override = flags.T_override;
    if (!flags.out.empty()) config.out = flags.out;
    if (flags.samples != RunConfig{}.samples) config.samples = flags.samples;
    if (flags.newton_tol != RunConfig{}.newton_tol) config.newton_tol = flags.newton_tol;
    if (flags.gmres_tol != RunConfig{}.gmres_tol) config.gmres_tol = flags.gmres_tol;
    if (flags.d2f_boundary != RunConfig{}.d2f_boundary) config.d2f_boundary = flags.d2f_boundary;
    if (flags.hybrid_flux != RunConfig{}.hybrid_flux) config.hybrid_flux = flags.hybrid_flux;
    if (flags.trace_solve != RunConfig{}.trace_solve) config.trace_solve = flags.trace_solve;
    if (flags.eta_override > 0.0) config.eta_override = flags.eta_override;
    if (flags.theta_override >= 0.0) config.theta_override = flags.theta_override;
    if (!flags.mesh_out.empty()) config.mesh_out = flags.mesh_out;
    if (flags.plotdata) config.plotdata = true;
  }
  if (!p_list.empty()) apply_config_line(config, "p", p_list);
  if (!level_list.empty()) apply_config_line(config, "levels", level_list);
  return config;
}

int cmd_stability(const std::string& scheme_name) {
  const SchemeCoeffs s = scheme_by_name(scheme_name);
  const StabilityFunction h = stability_function(s);
  const AStabilityReport report = check_a_stability(h);
  std::printf("scheme (k=%d, l=%d), order %d\n", s.k, s.l, s.order);
  std::printf("  alpha = (%s, %s)  beta = (%s, %s)\n",
              std::to_string(s.alpha1).c_str(), std::to_string(s.alpha2).c_str(),
              std::to_string(s.beta1).c_str(), std::to_string(s.beta2).c_str());
  std::printf("  exact: alpha = (%lld/%lld, %lld/%lld), beta = (%lld/%lld, %lld/%lld)\n",
              static_cast<long long>(s.alpha1_exact.num), static_cast<long long>(s.alpha1_exact.den),
              static_cast<long long>(s.alpha2_exact.num), static_cast<long long>(s.alpha2_exact.den),
              static_cast<long long>(s.beta1_exact.num), static_cast<long long>(s.beta1_exact.den),
              static_cast<long long>(s.beta2_exact.num), static_cast<long long>(s.beta2_exact.den));
  std::printf("  amplification factor h(mu): numerator degree %d, denominator degree %d\n",
              h.num_degree(), h.den_degree());
  for (double y : {0.5, 1.0, 2.0, 10.0})
    std::printf("  |h(%gi)| = %.12f\n", y, std::abs(h(std::complex<double>(0.0, y))));
  std::printf("  max |h(iy)| over y in [1e-6, 1e6]: %.15f\n", report.max_abs_on_axis);
  std::printf("  A-stable: %s%s\n", report.a_stable ? "yes" : "no",
              report.pole_in_left_half_plane ? " (pole in the left half-plane)" : "");
  std::printf("  L-stable: %s\n", check_l_stability(h) ? "yes" : "no");
  std::printf("  Pade deviation vs R_{1,2}: %.3e, vs R_{2,2}: %.3e\n", pade_check(h, 1, 2),
              pade_check(h, 2, 2));
  return 0;
}

int cmd_run(const RunConfig& config) {
  config.validate();
  const int level = config.levels.front();
  const int p = config.degrees.front();
  const std::string out = config.out.empty() ? "run" : config.out;

  if (!config.is_2d()) {
    const Problem1D problem = problem_by_name(config.problem);
    const double T = config.T_override > 0.0 ? config.T_override : problem.T;
    const SolveOutcome1D outcome = run_single_1d(config, p, level);
    std::printf("problem %s, p = %d, N = %d, T = %g: L2 error %.6e, mass drift %.3e\n",
                config.problem.c_str(), p, level, T, outcome.error,
                std::abs(outcome.result.mass_final - outcome.result.mass_initial));

    const std::string path = out + "_samples.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "x,numeric,exact\n");
    const Mesh1D mesh = build_mesh_1d(problem.a, problem.b, level);
    const Basis1D basis(p);
    for (int i = 0; i < config.samples; ++i) {
      const double x = problem.a + (problem.b - problem.a) * (i + 0.5) / config.samples;
      int k = std::min(static_cast<int>((x - problem.a) / mesh.h), level - 1);
      const double xi = 2.0 * (x - mesh.element_left(k)) / mesh.h - 1.0;
      std::fprintf(f, "%.12e,%.12e,%.12e\n", x, outcome.result.state.w.eval(basis, k, xi),
                   problem.exact(x, T));
    }
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }

  const Problem2D problem = problem2d_by_name(config.problem);
  const double T = config.T_override > 0.0 ? config.T_override : problem.T;
  if (!config.mesh_out.empty()) write_mesh(build_tri_mesh(problem.L, level), config.mesh_out);
  const SolveOutcome2D outcome = run_single_2d(config, p, level);
  std::printf("problem %s, p = %d, n = %d, T = %g:\n", config.problem.c_str(), p, level, T);
  for (int c = 0; c < problem.m; ++c)
    std::printf("  component %d: L2 error %.6e\n", c + 1, outcome.errors(c));
  const double drift = (outcome.result.mass_final - outcome.result.mass_initial).cwiseAbs().maxCoeff();
  std::printf("  mass drift (max over components): %.3e\n", drift);

  const std::string path = out + "_samples.csv";
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "x,y");
  for (int c = 0; c < problem.m; ++c) std::fprintf(f, ",w%d,exact%d", c + 1, c + 1);
  std::fprintf(f, "\n");
  const TriMesh2D mesh = build_tri_mesh(problem.L, level);
  const BasisTri basis(p);
  const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(config.samples))));
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const Eigen::Vector2d xy((i + 0.5) * problem.L / side, (j + 0.5) * problem.L / side);
      // locate the containing triangle through the square grid
      const double hsq = problem.L / level;
      const int ci = std::min(static_cast<int>(xy.x() / hsq), level - 1);
      const int cj = std::min(static_cast<int>(xy.y() / hsq), level - 1);
      const double fx = xy.x() / hsq - ci, fy = xy.y() / hsq - cj;
      const int k = 2 * (cj * level + ci) + (fy > fx ? 1 : 0);
      const Eigen::Vector2d rs = mesh.to_reference(k, xy);
      std::fprintf(f, "%.12e,%.12e", xy.x(), xy.y());
      const Eigen::VectorXd exact = problem.exact(xy, T);
      for (int c = 0; c < problem.m; ++c) {
        double val = 0.0;
        for (int jj = 0; jj < basis.size(); ++jj)
          val += outcome.result.state.w((k * problem.m + c) * basis.size() + jj) *
                 basis.value(jj, rs.x(), rs.y());
        std::fprintf(f, ",%.12e,%.12e", val, exact(c));
      }
      std::fprintf(f, "\n");
    }
  std::fclose(f);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_convergence(const RunConfig& config) {
  config.validate();
  const int m = config.is_2d() ? problem2d_by_name(config.problem).m : 1;
  const std::vector<ConvergenceSeries> series = run_convergence(config);
  bool any_failure = false;
  for (const auto& s : series) {
    std::printf("p = %d", s.p);
    if (m > 1) std::printf(", component %d", s.component + 1);
    std::printf("\n  %-14s %-14s %s\n", "h", "error", "order");
    for (const auto& row : s.rows) {
      if (std::isnan(row.order))
        std::printf("  %-14.6e %-14.6e %s\n", row.h, row.error, row.failed ? "FAILED" : "-");
      else
        std::printf("  %-14.6e %-14.6e %.2f\n", row.h, row.error, row.order);
      if (row.failed) {
        std::printf("    diagnostic: %s\n", row.diagnostic.c_str());
        any_failure = true;
      }
    }
    if (!config.out.empty()) {
      emit_csv(s, series_path(config.out, s, m, ".csv"));
      if (config.plotdata) emit_plotdata(s, series_path(config.out, s, m, ".dat"));
    }
  }
  return any_failure ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit two-derivative DG/HDG solvers for viscous conservation laws"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path, p_list, level_list;

  CLI::App* run = app.add_subcommand("run", "single solve: final-state samples and L2 error");
  add_common_options(run, flags, config_path, p_list, level_list);

  CLI::App* conv = app.add_subcommand("convergence", "refinement study with CSV tables");
  add_common_options(conv, flags, config_path, p_list, level_list);

  CLI::App* stab = app.add_subcommand("stability", "scheme coefficients and stability report");
  std::string stab_scheme = "third";
  stab->add_option("--scheme", stab_scheme, "third | fourth | k,l");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stab->parsed()) return cmd_stability(stab_scheme);
    const RunConfig config = finalize_config(config_path, flags, p_list, level_list);
    if (run->parsed()) return cmd_run(config);
    return cmd_convergence(config);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
