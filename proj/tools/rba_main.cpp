// Command-line front end: feasibility checks, growth-rate search, toy-model
// simulation, and forward-backward optimal-allocation sweeps.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rba/assembly.hpp"
#include "rba/errors.hpp"
#include "rba/growth.hpp"
#include "rba/lp.hpp"
#include "rba/model.hpp"
#include "rba/pmp.hpp"
#include "rba/random_model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerics = 2;
constexpr int kExitInfeasible = 3;

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string turnover_path;
  bool eukaryote = false;
  std::optional<double> mu;
  double tol = 1e-9;
  std::string output_path;  // empty = stdout
  std::string format = "structured-text";
  std::uint64_t seed = 0;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes either to stdout or to the configured file.
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file.open(path);
      if (!file) throw rba::ParseError("cannot open output file '" + path + "'");
      os = &file;
    }
  }
  std::ostream& out() { return *os; }
};

struct LoadedModel {
  rba::RawModelSpec spec;
  rba::MetabolicModel model;
  std::optional<rba::EukaryoticExtension> ext;
  std::optional<rba::TurnoverSpec> turnover;
};

LoadedModel load(const RunConfig& cfg) {
  LoadedModel lm;
  lm.spec = rba::expand_duplications(rba::load_model_file(cfg.model_path));
  lm.model = rba::compile(lm.spec);
  if (cfg.eukaryote) lm.ext = rba::compile_eukaryote(lm.spec, lm.model);
  if (!cfg.turnover_path.empty())
    lm.turnover = rba::load_turnover_file(cfg.turnover_path, lm.model);
  return lm;
}

rba::ProblemBuilder builder(const LoadedModel& lm) {
  if (lm.ext && lm.turnover)
    return [&lm](double mu) {
      return rba::assemble_eukaryotic(lm.model, *lm.ext, *lm.turnover, mu);
    };
  if (lm.ext)
    return [&lm](double mu) { return rba::assemble_eukaryotic(lm.model, *lm.ext, mu); };
  if (lm.turnover)
    return [&lm](double mu) { return rba::assemble_turnover(lm.model, *lm.turnover, mu); };
  return [&lm](double mu) { return rba::assemble_prokaryotic(lm.model, mu); };
}

int cmd_feasible(const RunConfig& cfg, const std::string& dump_path) {
  LoadedModel lm = load(cfg);
  rba::LinearProgram lp = builder(lm)(*cfg.mu);
  if (!dump_path.empty()) {
    Sink dump(dump_path);
    rba::dump_tableau(lp, dump.out());
  }
  rba::SolveResult r = rba::solve(lp);
  Sink sink(cfg.output_path);
  const bool feasible = r.status == rba::LpStatus::Feasible;
  if (cfg.format == "csv") {
    sink.out() << "status,residual_eq,residual_ineq,iterations,degenerate\n"
               << rba::to_string(r.status) << ',' << fmt(r.max_residual_eq) << ','
               << fmt(r.max_residual_ineq) << ',' << r.iterations << ','
               << (r.degenerate_optimum ? 1 : 0) << '\n';
  } else {
    sink.out() << "status = " << rba::to_string(r.status) << '\n';
    if (feasible) {
      rba::ResidualReport rep = rba::check_point(lp, r.witness, cfg.tol);
      double y_max = 0, nu_max = 0;
      const Eigen::Index n_y = lm.model.dims.n_y();
      for (Eigen::Index j = 0; j < n_y; ++j) y_max = std::max(y_max, r.witness[j]);
      for (Eigen::Index j = n_y; j < n_y + lm.model.dims.n_m; ++j)
        nu_max = std::max(nu_max, std::abs(r.witness[j]));
      sink.out() << "residual_eq = " << fmt(r.max_residual_eq) << '\n'
                 << "residual_ineq = " << fmt(r.max_residual_ineq) << '\n'
                 << "witness_check = " << (rep.pass ? "pass" : "fail") << '\n'
                 << "witness_y_max = " << fmt(y_max) << '\n'
                 << "witness_nu_max = " << fmt(nu_max) << '\n'
                 << "degenerate_optimum = " << (r.degenerate_optimum ? "true" : "false") << '\n';
    }
    sink.out() << "iterations = " << r.iterations << '\n';
  }
  return feasible ? kExitOk : kExitInfeasible;
}

int cmd_mumax(const RunConfig& cfg, double mu_hi, const std::string& profile_path) {
  LoadedModel lm = load(cfg);
  rba::ProblemBuilder build = builder(lm);
  rba::GrowthSearchResult r = rba::mu_max(build, cfg.tol, mu_hi);
  if (!profile_path.empty()) {
    std::vector<double> mus;
    double top = r.basal_inadmissible ? mu_hi : r.bracket_hi;
    for (int i = 0; i <= 50; ++i) mus.push_back(top * i / 50.0);
    rba::FeasibilityProfile profile = rba::feasibility_profile(build, mus);
    Sink psink(profile_path);
    psink.out() << "mu,status\n";
    for (std::size_t i = 0; i < mus.size(); ++i)
      psink.out() << fmt(mus[i]) << ',' << rba::to_string(profile.statuses[i]) << '\n';
  }
  Sink sink(cfg.output_path);
  const char* status = r.basal_inadmissible ? "basal-composition-inadmissible" : "ok";
  if (cfg.format == "csv") {
    sink.out() << "status,mu_max,bracket_lo,bracket_hi,iterations\n"
               << status << ',' << fmt(r.mu_max) << ',' << fmt(r.bracket_lo) << ','
               << fmt(r.bracket_hi) << ',' << r.iterations << '\n';
  } else {
    sink.out() << "status = " << status << '\n'
               << "mu_max = " << fmt(r.mu_max) << '\n'
               << "bracket_lo = " << fmt(r.bracket_lo) << '\n'
               << "bracket_hi = " << fmt(r.bracket_hi) << '\n'
               << "iterations = " << r.iterations << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& instance_path,
                 const std::string& control_path, std::optional<double> alpha,
                 std::optional<double> t_end_flag, double dt_max) {
  rba::ToyInstance inst = rba::load_toy_instance(instance_path);
  double t_end = t_end_flag.value_or(inst.horizon);
  rba::ControlSignal u = control_path.empty()
                             ? rba::ControlSignal::constant(alpha.value_or(0.5), t_end)
                             : rba::load_control_file(control_path);
  rba::Trajectory traj = rba::integrate(inst.x0, u, inst.params, t_end, dt_max);
  Sink sink(cfg.output_path);
  rba::write_trajectory_csv(traj, sink.out());
  return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, const std::string& instance_path, int grid_n,
                 const rba::SweepOptions& opts, const std::string& csv_path) {
  rba::ToyInstance inst = rba::load_toy_instance(instance_path);
  rba::SweepResult r = rba::sweep(inst.x0, inst.params, inst.horizon, grid_n, opts);
  if (!csv_path.empty()) {
    Sink csv(csv_path);
    rba::write_sweep_csv(r, csv.out());
  }
  Sink sink(cfg.output_path);
  sink.out() << "status = ok\n"
             << "cost = " << fmt(r.cost) << '\n'
             << "iterations = " << r.iterations << '\n'
             << "converged = " << (r.converged ? "true" : "false") << '\n'
             << "singular_fraction = " << fmt(r.singular_fraction) << '\n';
  if (r.converged) {
    rba::EnvelopeReport env = rba::envelope_check(r, inst.params);
    sink.out() << "manifold_residual = " << fmt(env.manifold_residual) << '\n'
               << "alpha_avg = " << fmt(env.alpha_avg) << '\n'
               << "alpha_ss = " << fmt(env.alpha_ss) << '\n';
  } else {
    sink.out() << "manifold_residual = nan\nalpha_avg = nan\nalpha_ss = nan\n";
  }
  return kExitOk;  // non-convergence is a soft failure; the data stays useful
}

int cmd_gen_random_model(const RunConfig& cfg) {
  rba::RawModelSpec spec = rba::random_model_spec(cfg.seed);
  // Self-check: the emitted document must round-trip and compile.
  rba::MetabolicModel model =
      rba::compile(rba::expand_duplications(rba::load_model(rba::to_document(spec))));
  (void)model;
  Sink sink(cfg.output_path);
  sink.out() << rba::to_document(spec);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource balance feasibility programs, growth-rate search, and "
               "dynamic allocation sweeps"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_model_flags = [&cfg](CLI::App* cmd) {
    cmd->add_option("--model", cfg.model_path, "model document")->required();
    cmd->add_option("--turnover", cfg.turnover_path, "turnover document");
    cmd->add_flag("--eukaryote", cfg.eukaryote, "use the document's eukaryote section");
    cmd->add_option("--output", cfg.output_path, "report destination (default stdout)");
    cmd->add_option("--format", cfg.format, "structured-text|csv")
        ->check(CLI::IsMember({"structured-text", "csv"}));
  };

  double mu_value = 0.0;
  std::string dump_path;
  CLI::App* feasible = app.add_subcommand("feasible", "solve the feasibility program at a growth rate");
  add_model_flags(feasible);
  feasible->add_option("--mu", mu_value, "growth rate (1/h)")->required();
  feasible->add_option("--tol", cfg.tol, "witness check tolerance")->capture_default_str();
  feasible->add_option("--dump-lp", dump_path, "write the assembled tableau to a file");

  double mu_hi = 1.0;
  double mumax_tol = 1e-8;
  std::string profile_path;
  CLI::App* mumax = app.add_subcommand("mumax", "bisection for the maximal growth rate");
  add_model_flags(mumax);
  mumax->add_option("--tol", mumax_tol, "bracket width tolerance")->capture_default_str();
  mumax->add_option("--mu-hi", mu_hi, "initial doubling ceiling")->capture_default_str();
  mumax->add_option("--profile", profile_path, "write a mu,status feasibility profile CSV");

  std::string instance_path, control_path, csv_path;
  std::optional<double> alpha_flag, t_end_flag;
  double dt_max = 1e-3;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate the two-pool allocation model");
  simulate->add_option("--instance", instance_path, "instance document")->required();
  simulate->add_option("--control", control_path, "piecewise-constant control document");
  simulate->add_option("--alpha", alpha_flag, "constant allocation in [0,1]");
  simulate->add_option("--t-end", t_end_flag, "horizon override");
  simulate->add_option("--dt-max", dt_max, "maximum integration step")->capture_default_str();
  simulate->add_option("--output", cfg.output_path, "trajectory CSV destination");

  int grid_n = 100;
  rba::SweepOptions sweep_opts;
  sweep_opts.tol = 1e-8;
  sweep_opts.max_iter = 200;
  CLI::App* optimize = app.add_subcommand("optimize", "forward-backward allocation sweep");
  optimize->add_option("--instance", instance_path, "instance document")->required();
  optimize->add_option("--grid-n", grid_n, "control grid intervals")->capture_default_str();
  optimize->add_option("--relax", sweep_opts.relax, "update relaxation")->capture_default_str();
  optimize->add_option("--tol", sweep_opts.tol, "update sup-norm tolerance")->capture_default_str();
  optimize->add_option("--max-iter", sweep_opts.max_iter, "iteration cap")->capture_default_str();
  optimize->add_option("--gain", sweep_opts.push_gain, "saturating update gain")
      ->capture_default_str();
  optimize->add_option("--csv", csv_path, "sweep table CSV destination");
  optimize->add_option("--output", cfg.output_path, "report destination (default stdout)");

  CLI::App* gen = app.add_subcommand("gen-random-model", "emit a seeded random model document");
  gen->add_option("--seed", cfg.seed, "generator seed")->required();
  gen->add_option("--output", cfg.output_path, "document destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (feasible->parsed()) {
      cfg.mu = mu_value;
      if (!(mu_value >= 0)) throw rba::ValidationError("--mu must be >= 0");
      return cmd_feasible(cfg, dump_path);
    }
    if (mumax->parsed()) {
      cfg.tol = mumax_tol;
      return cmd_mumax(cfg, mu_hi, profile_path);
    }
    if (simulate->parsed())
      return cmd_simulate(cfg, instance_path, control_path, alpha_flag, t_end_flag, dt_max);
    if (optimize->parsed()) return cmd_optimize(cfg, instance_path, grid_n, sweep_opts, csv_path);
    if (gen->parsed()) return cmd_gen_random_model(cfg);
  } catch (const rba::BracketCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  } catch (const rba::NumericsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  } catch (const rba::IterationLimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  } catch (const rba::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
