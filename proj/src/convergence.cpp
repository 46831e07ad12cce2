#include "tdg/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tdg {

void RunConfig::validate() const {
  if (!(ratio > 0.0)) throw std::invalid_argument("config: ratio must be positive");
  if (levels.empty()) throw std::invalid_argument("config: refinement levels must be nonempty");
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw std::invalid_argument("config: levels must be >= 1");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw std::invalid_argument("config: levels must be strictly decreasing in h");
  }
  if (degrees.empty()) throw std::invalid_argument("config: at least one polynomial degree");
  for (int p : degrees)
    if (p < 0) throw std::invalid_argument("config: degrees must be >= 0");
}

SchemeCoeffs scheme_by_name(const std::string& name) {
  if (name == "third" || name == "3") return third_order_scheme();
  if (name == "fourth" || name == "4") return fourth_order_scheme();
  const auto comma = name.find(',');
  if (comma != std::string::npos) {
    const int k = std::stoi(name.substr(0, comma));
    const int l = std::stoi(name.substr(comma + 1));
    return generate_scheme(k, l);
  }
  throw std::invalid_argument("unknown scheme: " + name + " (use third, fourth, or k,l)");
}

SolverConfig solver_config_from(const RunConfig& config) {
  SolverConfig sc;
  sc.newton_tol = config.newton_tol;
  sc.d2f_mode =
      (config.d2f_boundary == "literal") ? D2fBoundaryMode::PhiDerivative : D2fBoundaryMode::PhiNormal;
  return sc;
}

HDGConfig hdg_config_from(const RunConfig& config) {
  HDGConfig hc;
  hc.newton_tol = config.newton_tol;
  hc.gmres_tol = config.gmres_tol;
  hc.trace_solve_direct = (config.trace_solve == "direct");
  hc.hybrid_mode =
      (config.hybrid_flux == "total") ? HybridFluxMode::TotalFlux : HybridFluxMode::ImplicitOnly;
  if (config.eta_override > 0.0) {
    hc.stab.auto_eta = false;
    hc.stab.eta = config.eta_override;
  }
  if (config.theta_override >= 0.0) hc.stab.theta = config.theta_override;
  return hc;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

void apply_config_line(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "problem") config.problem = value;
  else if (key == "p" || key == "degree") config.degrees = parse_int_list(value);
  else if (key == "scheme") config.scheme = value;
  else if (key == "ratio") config.ratio = std::stod(value);
  else if (key == "levels") config.levels = parse_int_list(value);
  else if (key == "T") config.T_override = std::stod(value);
  else if (key == "out") config.out = value;
  else if (key == "samples") config.samples = std::stoi(value);
  else if (key == "plotdata") config.plotdata = (value == "on" || value == "true" || value == "1");
  else if (key == "newton-tol") config.newton_tol = std::stod(value);
  else if (key == "gmres-tol") config.gmres_tol = std::stod(value);
  else if (key == "d2f-boundary") config.d2f_boundary = value;
  else if (key == "hybrid-flux") config.hybrid_flux = value;
  else if (key == "trace-solve") config.trace_solve = value;
  else if (key == "eta") config.eta_override = std::stod(value);
  else if (key == "theta") config.theta_override = std::stod(value);
  else if (key == "mesh-out") config.mesh_out = value;
  else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_line(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

double compute_l2_error(const PolyField& w, const Basis1D& basis,
                        const std::function<double(double)>& reference) {
  return l2_error(w, basis, reference, 2 * w.degree + 4);
}

double compute_l2_error_2d(const TriMesh2D& mesh, const BasisTri& basis, const Eigen::VectorXd& w,
                           int m, int component,
                           const std::function<double(const Eigen::Vector2d&)>& reference) {
  const QuadratureRule rule = triangle_rule(2 * basis.degree() + 4);
  const Eigen::MatrixXd V = basis.vandermonde(rule.nodes);
  const int nb = basis.size();
  double acc = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double detj = mesh.jacobian(k).determinant();
    const Eigen::VectorXd coeffs = w.segment((k * m + component) * nb, nb);
    const Eigen::VectorXd vals = V * coeffs;
    for (int q = 0; q < rule.size(); ++q) {
      const double diff =
          vals(q) - reference(mesh.to_physical(k, rule.nodes(q, 0), rule.nodes(q, 1)));
      acc += detj * rule.weights(q) * diff * diff;
    }
  }
  return std::sqrt(acc);
}

double observed_order(double h_prev, double e_prev, double h, double e) {
  return std::log(e_prev / e) / std::log(h_prev / h);
}

SolveOutcome1D run_single_1d(const RunConfig& config, int p, int num_elements) {
  const Problem1D problem = problem_by_name(config.problem);
  const double T = config.T_override > 0.0 ? config.T_override : problem.T;
  const Mesh1D mesh = build_mesh_1d(problem.a, problem.b, num_elements);
  ImplicitSolver1D solver(mesh, p, problem, scheme_by_name(config.scheme),
                          solver_config_from(config));
  const AuxState1D x0 = solver.initial_state();
  SolveOutcome1D outcome;
  outcome.degree = p;
  outcome.result = solver.integrate(x0, T, config.ratio * mesh.h);
  auto exact_T = [&](double x) { return problem.exact(x, T); };
  outcome.error = compute_l2_error(outcome.result.state.w, solver.op().basis(), exact_T);
  return outcome;
}

SolveOutcome2D run_single_2d(const RunConfig& config, int p, int squares_per_side) {
  const Problem2D problem = problem2d_by_name(config.problem);
  const double T = config.T_override > 0.0 ? config.T_override : problem.T;
  const TriMesh2D mesh = build_tri_mesh(problem.L, squares_per_side);
  HDGSolver solver(mesh, p, problem, scheme_by_name(config.scheme), hdg_config_from(config));
  const HDGState x0 = solver.initial_state();
  SolveOutcome2D outcome;
  outcome.degree = p;
  outcome.result = solver.integrate(x0, T, config.ratio * mesh.char_h());
  outcome.errors.resize(problem.m);
  for (int c = 0; c < problem.m; ++c) {
    auto exact_T = [&](const Eigen::Vector2d& x) { return problem.exact(x, T)(c); };
    outcome.errors(c) =
        compute_l2_error_2d(mesh, solver.basis(), outcome.result.state.w, problem.m, c, exact_T);
  }
  return outcome;
}

std::vector<ConvergenceSeries> run_convergence(const RunConfig& config) {
  config.validate();
  const bool two_d = config.is_2d();
  const int m = two_d ? problem2d_by_name(config.problem).m : 1;
  const double domain_1d_length =
      two_d ? 0.0 : (problem_by_name(config.problem).b - problem_by_name(config.problem).a);

  std::vector<ConvergenceSeries> all;
  for (int p : config.degrees) {
    std::vector<ConvergenceSeries> series(m);
    for (int c = 0; c < m; ++c) {
      series[c].p = p;
      series[c].component = c;
    }
    for (int level : config.levels) {
      std::vector<ConvergenceRow> rows(m);
      const double h = two_d ? problem2d_by_name(config.problem).L / level : domain_1d_length / level;
      for (int c = 0; c < m; ++c) rows[c].h = h;
      try {
        if (two_d) {
          const SolveOutcome2D outcome = run_single_2d(config, p, level);
          for (int c = 0; c < m; ++c) rows[c].error = outcome.errors(c);
        } else {
          const SolveOutcome1D outcome = run_single_1d(config, p, level);
          rows[0].error = outcome.error;
        }
      } catch (const std::exception& err) {
        for (int c = 0; c < m; ++c) {
          rows[c].failed = true;
          rows[c].error = std::numeric_limits<double>::quiet_NaN();
          rows[c].diagnostic = err.what();
        }
      }
      for (int c = 0; c < m; ++c) {
        auto& out_rows = series[c].rows;
        if (!out_rows.empty() && !out_rows.back().failed && !rows[c].failed)
          rows[c].order = observed_order(out_rows.back().h, out_rows.back().error, rows[c].h,
                                         rows[c].error);
        out_rows.push_back(rows[c]);
      }
    }
    for (int c = 0; c < m; ++c) all.push_back(std::move(series[c]));
  }
  return all;
}

void emit_csv(const ConvergenceSeries& series, const std::string& path) {
  if (series.rows.empty()) throw std::invalid_argument("emit_csv: empty table");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
  std::fprintf(f, "h,error,order\n");
  for (const auto& row : series.rows) {
    if (std::isnan(row.order))
      std::fprintf(f, "%.12e,%.12e,\n", row.h, row.error);
    else
      std::fprintf(f, "%.12e,%.12e,%.6f\n", row.h, row.error, row.order);
    if (row.failed) std::fprintf(f, "# level h=%.6e failed: %s\n", row.h, row.diagnostic.c_str());
  }
  std::fclose(f);
}

void emit_plotdata(const ConvergenceSeries& series, const std::string& path) {
  if (series.rows.empty()) throw std::invalid_argument("emit_plotdata: empty table");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("emit_plotdata: cannot open " + path);
  for (const auto& row : series.rows)
    if (!row.failed) std::fprintf(f, "%.12e %.12e\n", std::log10(row.h), std::log10(row.error));
  std::fclose(f);
}

std::string series_path(const std::string& base, const ConvergenceSeries& series, int m,
                        const std::string& extension) {
  std::string path = base + "_p" + std::to_string(series.p);
  if (m > 1) path += "_w" + std::to_string(series.component + 1);
  return path + extension;
}

std::vector<ConvergenceRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::vector<ConvergenceRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream stream(line);
    std::string field;
    ConvergenceRow row;
    std::getline(stream, field, ',');
    row.h = std::stod(field);
    std::getline(stream, field, ',');
    row.error = std::stod(field);
    if (std::getline(stream, field, ',') && !field.empty()) row.order = std::stod(field);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tdg
