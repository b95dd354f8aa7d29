#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "criteria.hpp"
#include "kinmax/equilibria.hpp"
#include "kinmax/errors.hpp"
#include "kinmax/functionals.hpp"
#include "kinmax/grid.hpp"
#include "kinmax/kinetics.hpp"
#include "kinmax/oracle.hpp"
#include "kinmax/report.hpp"

namespace kinmax::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string human(double v) {
  char buf[64];
  if (v == 0.0 || (std::abs(v) >= 1e-3 && std::abs(v) < 1e6)) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6e", v);
  }
  return buf;
}

// Output collector: key=value lines on stdout, optional one-row table file.
struct Summary {
  std::vector<std::pair<std::string, double>> values;
  std::vector<bool> integral;
  std::vector<std::pair<std::string, std::string>> labels;

  void add(const std::string& key, double v) {
    values.emplace_back(key, v);
    integral.push_back(false);
  }
  void count(const std::string& key, long v) {
    values.emplace_back(key, static_cast<double>(v));
    integral.push_back(true);
  }
  void label(const std::string& key, std::string_view v) { labels.emplace_back(key, std::string(v)); }

  void print(std::ostream& out) const {
    for (const auto& [k, v] : labels) out << k << '=' << v << '\n';
    for (size_t i = 0; i < values.size(); ++i) {
      const auto& [k, v] = values[i];
      out << k << '=' << (integral[i] ? std::to_string(static_cast<long>(v)) : human(v)) << '\n';
    }
  }
  Table table() const {
    Table t;
    std::vector<double> row;
    for (const auto& [k, v] : values) {
      t.columns.push_back(k);
      row.push_back(v);
    }
    t.rows.push_back(row);
    return t;
  }
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("--") + what + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

// key=value lines; blank lines and lines starting with '#' are skipped.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(file, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(number) + ": empty key");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Splices config entries in front of the subcommand's own flags so that
// flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
  std::optional<std::string> config;
  std::vector<std::string> rest;
  for (size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      config = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  std::vector<std::string> out{args.empty() ? std::string("kinmax") : args[0]};
  if (!config) {
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }
  const auto entries = read_config(*config);
  bool spliced = false;
  for (const auto& a : rest) {
    out.push_back(a);
    if (!spliced && std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end()) {
      out.insert(out.end(), entries.begin(), entries.end());
      spliced = true;
    }
  }
  if (!spliced) throw UsageError("--config requires a subcommand");
  return out;
}

struct Output {
  std::string path;
  std::string format = "csv";

  void attach(CLI::App* app) {
    app->add_option("--out", path, "Write the result table to this path");
    app->add_option("--format", format, "Output format for --out")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  ReportFormat kind() const { return format == "json" ? ReportFormat::json : ReportFormat::csv; }
};

struct Physical {
  int n = 2;
  double rho = 1.0;
  double T = 1.0;
  double vol = 1.0;
  double eps = 0.0;

  void attach(CLI::App* app, bool with_eps) {
    app->add_option("--n", n, "Velocity dimension")->check(CLI::Range(1, 3))->capture_default_str();
    app->add_option("--rho", rho, "Total mass")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--T", T, "Temperature")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--vol", vol, "Spatial volume V_omega")->check(CLI::PositiveNumber)->capture_default_str();
    if (with_eps) app->add_option("--eps", eps, "Quantum parameter epsilon")->capture_default_str();
  }
};

void finish(const Summary& summary, const Output& output, std::ostream& out) {
  summary.print(out);
  if (!output.path.empty()) emit_report(summary.table(), output.path, output.kind());
}

int run_equilibrium(const Physical& p, double tol, const Output& output, std::ostream& out) {
  const auto report = solve_normalization(p.rho, p.T, p.vol, p.n, p.eps, tol);
  Summary s;
  s.label("regime", to_string(report.regime));
  s.add("C", report.C);
  s.add("C0", p.rho / (std::pow(2.0 * std::numbers::pi * p.T, 0.5 * p.n) * p.vol));
  s.count("iterations", report.iterations);
  s.add("residual", report.residual);
  if (report.regime != Regime::boson_threshold || p.n > 2) {
    const QuantumEquilibrium eq{p.n, p.T, p.vol, p.eps, report.C, p.rho};
    s.add("E", quantum_energy(eq));
    s.add("S", quantum_entropy_closed(eq));
    s.add("F", quantum_free_closed(eq));
  }
  finish(s, output, out);
  return 0;
}

int run_deltas(const Physical& p, const Output& output, std::ostream& out) {
  const auto d = quantum_deltas(p.rho, p.T, p.vol, p.n, p.eps);
  Summary s;
  s.add("C0", d.C0);
  s.add("C", d.C);
  s.add("dE", d.dE);
  s.add("dS", d.dS);
  s.add("dF", d.dF);
  s.add("predicted_dE", d.predicted_dE);
  s.add("predicted_dS", d.predicted_dS);
  s.add("predicted_dF", d.predicted_dF);
  finish(s, output, out);
  return 0;
}

int run_dist(int n, double rho, double vol, double ref_T, double field_T, int points, double eps,
             const Output& output, std::ostream& out) {
  const MaxwellianSpec ref{n, rho, {}, ref_T, vol};
  const MaxwellianSpec field_spec{n, rho, {}, field_T, vol};
  const auto grid = default_velocity_grid(n, std::max(ref_T, field_T), 0.0, points);
  const auto field = sample_maxwellian(field_spec, grid);
  Summary s;
  if (eps == 0.0) {
    const auto report = distance_report(ref, field, ref_T);
    const double x = field_T / ref_T;
    s.add("dist", report.value);
    s.add("closed_form", 0.5 * n * rho * (x - 1.0 - std::log(x)));
    s.add("integral_form", report.kl_integral);
    s.add("quadrature_tail", report.quadrature_tail);
  } else {
    s.add("dist", distance(ref, renormalized(field, rho), ref_T, eps));
  }
  finish(s, output, out);
  return 0;
}

int run_extremal(int n, double rho, double E1, const std::string& U_text, double T, double vol,
                 bool oracle, int points, const Output& output, std::ostream& out) {
  const auto values = parse_list(U_text, "U");
  if (static_cast<int>(values.size()) != n) throw UsageError("--U must have n comma-separated entries");
  const Eigen::VectorXd U = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  const auto ext = extremal_from_moments(rho, E1, U, T, vol, n);
  Summary s;
  s.add("T1", ext.T1);
  s.add("distance", ext.distance);
  if (oracle) {
    const auto grid = default_velocity_grid(n, std::max(ext.T1, T), U.cwiseAbs().maxCoeff() / rho, points);
    const auto result = minimize_dist_constrained(grid, rho, E1, U, T, 1e-9, vol);
    const auto sampled = sample_maxwellian(ext.spec, grid);
    s.add("oracle_distance", distance({n, rho, {}, T, vol}, result.field, T));
    s.add("oracle_max_deviation", (result.field.values - sampled.values).abs().maxCoeff());
    s.count("oracle_iterations", result.iterations);
  }
  finish(s, output, out);
  return 0;
}

struct SimulateArgs {
  int n = 2;
  double rho = 1.0;
  double T = 1.0 / (2.0 * std::numbers::pi);
  double vol = 1.0;
  double eps = 0.0;
  std::string kernel = "maxwell_pseudo";
  double b0 = 1.0;
  std::string scheme = "lattice";
  int sigma_points = 16;
  std::string boundary = "periodic";
  double wall_T = 0.0;
  double kappa = 1.0;
  int cells = 0;
  int points = 64;
  double zeta_max = 0.0;
  int steps = 100;
  double dt = 0.0;
  std::string integrator = "rk2";
  std::string init = "maxwellian";
  double shift = 0.0;
  double amplitude = 0.1;
  unsigned seed = 1;
  double T_ref = 0.0;
  double flux_tol = 1e-10;
};

DistributionField initial_field(const SimulateArgs& a) {
  const SpatialGrid space = a.cells > 0 ? SpatialGrid::uniform_slab(a.cells, a.vol) : SpatialGrid::single(a.vol);
  double hottest = a.T;
  if (a.init == "hot") hottest = 2.0 * a.T;
  const double zmax = a.zeta_max > 0.0 ? a.zeta_max : std::abs(a.shift) + 6.0 * std::sqrt(hottest);
  const auto grid = make_velocity_grid(a.n, a.points, zmax);
  DistributionField field = make_field(grid, space);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(a.n);
  if (a.init == "maxwellian" || a.init == "perturbed") {
    field = sample_maxwellian({a.n, a.rho, {}, a.T, a.vol}, grid, space);
    if (a.init == "perturbed") {
      std::mt19937_64 rng(a.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      for (Eigen::Index k = 0; k < field.values.size(); ++k) field.values.data()[k] *= 1.0 + a.amplitude * unit(rng);
    }
  } else if (a.init == "bimodal") {
    u(0) = a.shift;
    const auto left = sample_maxwellian({a.n, 0.5 * a.rho, -u, a.T, a.vol}, grid, space);
    const auto right = sample_maxwellian({a.n, 0.5 * a.rho, u, a.T, a.vol}, grid, space);
    field.values = left.values + right.values;
  } else {  // hot: temperature rising linearly from T at the walls to 2T at the centre
    for (int c = 0; c < space.cells(); ++c) {
      const double x = (c + 0.5) / space.cells();
      const double Tc = a.T * (1.0 + (1.0 - std::abs(2.0 * x - 1.0)));
      const MaxwellianSpec spec{a.n, a.rho, {}, Tc, a.vol};
      field.values.col(c) = sample_maxwellian(spec, grid, SpatialGrid::single(a.vol)).values.col(0);
    }
  }
  return renormalized(field, a.rho);
}

int run_simulate(const SimulateArgs& a, const Output& output, std::ostream& out) {
  if (a.init == "hot" && a.cells == 0) throw UsageError("--init hot needs a slab (--cells > 0)");
  const auto init = initial_field(a);
  CollisionKernelSpec kernel;
  kernel.kind = a.kernel == "hard_sphere" ? KernelKind::hard_sphere : KernelKind::maxwell_pseudo;
  kernel.b0 = a.b0;
  kernel.scheme = a.scheme == "interpolated" ? CollisionScheme::interpolated : CollisionScheme::lattice;
  kernel.sigma_quadrature_points = a.sigma_points;
  BoundarySpec boundary;
  if (a.boundary == "bounce_back") boundary.kind = BoundaryKind::bounce_back;
  if (a.boundary == "maxwellian_diffusion") {
    boundary.kind = BoundaryKind::maxwellian_diffusion;
    boundary.wall = {a.n, 1.0, {}, a.wall_T > 0.0 ? a.wall_T : a.T, a.vol};
    boundary.kappa = a.kappa;
  }
  const double T_ref = a.T_ref > 0.0 ? a.T_ref
                       : boundary.kind == BoundaryKind::maxwellian_diffusion ? boundary.wall.T
                                                                             : a.T;
  double dt = a.dt;
  if (!(dt > 0.0)) {
    dt = default_dt(init, kernel);
    if (init.space.slab) dt = std::min(dt, 0.5 * init.space.widths.minCoeff() / init.velocity.zeta_max);
  }
  StepOptions options;
  options.integrator = a.integrator == "euler" ? Integrator::euler : Integrator::rk2;
  options.flux_tol = a.flux_tol;
  const auto run = run_monitored(init, a.steps, dt, kernel, a.eps, boundary, T_ref, options);

  if (!output.path.empty()) emit_report(run.series, output.path, output.kind());
  Summary s;
  s.label("classification", run.fluxes.empty() ? "conservative" : to_string(classify(run.fluxes, a.flux_tol)));
  const auto& first = run.series.front();
  const auto& last = run.series.back();
  double worst_dS = 0.0, worst_dG = 0.0;
  for (size_t i = 1; i < run.series.size(); ++i) {
    worst_dS = std::min(worst_dS, run.series[i].S - run.series[i - 1].S);
    worst_dG = std::max(worst_dG, run.series[i].G - run.series[i - 1].G);
  }
  s.count("steps", a.steps);
  s.add("dt", dt);
  s.add("S", last.S);
  s.add("E", last.E);
  s.add("F", last.F);
  s.add("G", last.G);
  s.add("rho_drift", last.rho - first.rho);
  s.add("min_dS", worst_dS);
  s.add("max_dG", worst_dG);
  s.print(out);
  return 0;
}

int run_roots(double c, const Output& output, std::ostream& out) {
  const auto r = limit_roots(c);
  Summary s;
  s.label("unique", r.unique ? "true" : "false");
  s.add("lower", r.lower);
  s.add("upper", r.upper);
  finish(s, output, out);
  return 0;
}

int run_selftest(const std::string& only_text, std::ostream& out) {
  std::vector<int> only;
  if (!only_text.empty()) {
    for (double v : parse_list(only_text, "only")) {
      const int id = static_cast<int>(v);
      if (id != v || id < 1 || id > acceptance::criterion_count()) {
        throw UsageError("--only: criterion ids run from 1 to " + std::to_string(acceptance::criterion_count()));
      }
      only.push_back(id);
    }
  }
  const auto results = acceptance::run_criteria(out, only);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  out << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinetic-theory numerics: Maxwellian equilibria, functionals and a Boltzmann simulator"};
  app.name(args.empty() ? "kinmax" : args[0]);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key=value file supplying defaults for the subcommand's flags");

  Output output;
  Physical phys;
  double tol = 1e-12;
  auto* equilibrium = app.add_subcommand("equilibrium", "Solve the quantum normalization for C");
  phys.attach(equilibrium, true);
  equilibrium->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
  output.attach(equilibrium);

  auto* deltas = app.add_subcommand("quantum-deltas", "Energy, entropy and F shifts of M_eps vs classical");
  phys.attach(deltas, true);
  output.attach(deltas);

  int dist_n = 2, points = 64;
  double dist_rho = 1.0, dist_vol = 1.0, ref_T = 1.0, field_T = 1.0, dist_eps = 0.0;
  auto* dist = app.add_subcommand("dist", "Distance between two Maxwellians of equal mass");
  dist->add_option("--n", dist_n)->check(CLI::Range(1, 3))->capture_default_str();
  dist->add_option("--rho", dist_rho)->check(CLI::PositiveNumber)->capture_default_str();
  dist->add_option("--vol", dist_vol)->check(CLI::PositiveNumber)->capture_default_str();
  dist->add_option("--ref-T", ref_T, "Reference temperature")->check(CLI::PositiveNumber)->capture_default_str();
  dist->add_option("--field-T", field_T, "Field temperature")->check(CLI::PositiveNumber)->capture_default_str();
  dist->add_option("--points", points, "Grid points per axis")->check(CLI::Range(4, 512))->capture_default_str();
  dist->add_option("--eps", dist_eps)->capture_default_str();
  output.attach(dist);

  int ext_n = 2;
  double ext_rho = 1.0, E1 = 1.0, ext_T = 1.0, ext_vol = 1.0;
  std::string U_text;
  bool use_oracle = false;
  auto* extremal = app.add_subcommand("extremal", "Moment-constrained extremal Maxwellian");
  extremal->add_option("--n", ext_n)->check(CLI::Range(1, 3))->capture_default_str();
  extremal->add_option("--rho", ext_rho)->check(CLI::PositiveNumber)->capture_default_str();
  extremal->add_option("--E1", E1, "Total energy")->required();
  extremal->add_option("--U", U_text, "Total momentum, comma separated")->required();
  extremal->add_option("--T", ext_T, "Reference temperature")->check(CLI::PositiveNumber)->capture_default_str();
  extremal->add_option("--vol", ext_vol)->check(CLI::PositiveNumber)->capture_default_str();
  extremal->add_flag("--oracle", use_oracle, "Also run the constrained minimization oracle");
  extremal->add_option("--points", points)->check(CLI::Range(4, 512))->capture_default_str();
  output.attach(extremal);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the Boltzmann simulator with monitored functionals");
  simulate->add_option("--n", sim.n, "Velocity dimension (collisions need 2)")->capture_default_str();
  simulate->add_option("--rho", sim.rho)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--T", sim.T, "Initial temperature")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--vol", sim.vol, "Volume, or slab length")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--eps", sim.eps)->capture_default_str();
  simulate->add_option("--kernel", sim.kernel)->check(CLI::IsMember({"maxwell_pseudo", "hard_sphere"}))->capture_default_str();
  simulate->add_option("--b0", sim.b0)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--scheme", sim.scheme)->check(CLI::IsMember({"lattice", "interpolated"}))->capture_default_str();
  simulate->add_option("--sigma-points", sim.sigma_points)->check(CLI::Range(2, 1024))->capture_default_str();
  simulate->add_option("--boundary", sim.boundary)
      ->check(CLI::IsMember({"periodic", "bounce_back", "maxwellian_diffusion"}))
      ->capture_default_str();
  simulate->add_option("--wall-T", sim.wall_T, "Wall temperature (default T)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--kappa", sim.kappa, "Re-emitted fraction at a diffusion wall")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--cells", sim.cells, "Slab cells (0 = homogeneous)")->check(CLI::Range(0, 4096))->capture_default_str();
  simulate->add_option("--points", sim.points, "Velocity points per axis")->check(CLI::Range(4, 256))->capture_default_str();
  simulate->add_option("--zeta-max", sim.zeta_max, "Velocity box half-width (default 6 sqrt(T) + shift)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--steps", sim.steps)->check(CLI::NonNegativeNumber)->capture_default_str();
  simulate->add_option("--dt", sim.dt, "Time step (default 0.1 / (b0 rho), capped at CFL 0.5 on slabs)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--integrator", sim.integrator)->check(CLI::IsMember({"rk2", "euler"}))->capture_default_str();
  simulate->add_option("--init", sim.init)->check(CLI::IsMember({"maxwellian", "bimodal", "perturbed", "hot"}))->capture_default_str();
  simulate->add_option("--shift", sim.shift, "Bimodal peak offset along zeta_1")->capture_default_str();
  simulate->add_option("--amplitude", sim.amplitude, "Relative perturbation size")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--T-ref", sim.T_ref, "Temperature in F (default T, or wall T)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--flux-tol", sim.flux_tol)->check(CLI::NonNegativeNumber)->capture_default_str();
  output.attach(simulate);

  double c = 0.0;
  auto* roots = app.add_subcommand("roots", "Roots of x - 1 - log x = c");
  roots->add_option("--c", c)->required();
  output.attach(roots);

  std::string only;
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");
  selftest->add_option("--only", only, "Comma-separated criterion ids");

  const std::vector<std::string> names{"equilibrium", "quantum-deltas", "dist", "extremal",
                                       "simulate", "roots", "selftest"};
  try {
    const auto expanded = expand_config(args, names);
    std::vector<const char*> argv;
    for (const auto& a : expanded) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*equilibrium) return run_equilibrium(phys, tol, output, out);
    if (*deltas) return run_deltas(phys, output, out);
    if (*dist) return run_dist(dist_n, dist_rho, dist_vol, ref_T, field_T, points, dist_eps, output, out);
    if (*extremal) return run_extremal(ext_n, ext_rho, E1, U_text, ext_T, ext_vol, use_oracle, points, output, out);
    if (*simulate) return run_simulate(sim, output, out);
    if (*roots) return run_roots(c, output, out);
    if (*selftest) return run_selftest(only, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const kinmax::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace kinmax::cli
