// Integration tests that drive the installed binary through a shell, pinning
// the exit-code contract and output stability.
#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "rba/growth.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string scratch(const std::string& name) {
  return "/tmp/rba_cli_" + std::to_string(getpid()) + "_" + name;
}

RunResult run(const std::string& args) {
  std::string out_path = scratch("stdout");
  std::string cmd = std::string(RBA_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string value_of(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.find(" = ");
    if (pos != std::string::npos && line.substr(0, pos) == key) return line.substr(pos + 3);
  }
  return "";
}

std::string model_arg() { return "--model " + fixtures::data_path("toy_prokaryote.yaml"); }

}  // namespace

TEST_CASE("feasible: exit codes for feasible, infeasible, and errors") {
  CHECK(run("feasible " + model_arg() + " --mu 0").exit_code == 0);
  CHECK(run("feasible " + model_arg() + " --mu 1e9").exit_code == 3);
  CHECK(run("feasible --model /nonexistent.yaml --mu 0").exit_code == 1);
  CHECK(run("feasible " + model_arg()).exit_code == 1);  // --mu is required
}

TEST_CASE("feasible: report carries status and residuals") {
  RunResult r = run("feasible " + model_arg() + " --mu 0.005");
  REQUIRE(r.exit_code == 0);
  CHECK(value_of(r.out, "status") == "feasible");
  CHECK(value_of(r.out, "witness_check") == "pass");
  CHECK(std::stod(value_of(r.out, "residual_eq")) <= 1e-9);
}

TEST_CASE("feasible: --dump-lp writes the tableau") {
  std::string dump = scratch("tableau.txt");
  REQUIRE(run("feasible " + model_arg() + " --mu 0.005 --dump-lp " + dump).exit_code == 0);
  std::ifstream in(dump);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str().find("eq[0]") != std::string::npos);
  CHECK(buf.str().find("Y:transporte") != std::string::npos);
}

TEST_CASE("mumax: agrees with the library search and is bit-stable") {
  RunResult a = run("mumax " + model_arg());
  RunResult b = run("mumax " + model_arg());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  rba::MetabolicModel model = fixtures::golden_prokaryote();
  rba::GrowthSearchResult expect =
      rba::mu_max([&model](double mu) { return rba::assemble_prokaryotic(model, mu); });
  CHECK(std::stod(value_of(a.out, "mu_max")) == expect.mu_max);
}

TEST_CASE("mumax: zero turnover reproduces the plain run bit-exactly") {
  RunResult plain = run("mumax " + model_arg());
  RunResult zeros =
      run("mumax " + model_arg() + " --turnover " + fixtures::data_path("turnover_zeros.yaml"));
  CHECK(plain.out == zeros.out);
}

TEST_CASE("mumax: basal-inadmissible models report mu_max zero") {
  std::string path = scratch("basal.yaml");
  write_file(path, R"(
metabolites: [{name: aa}]
reactions:
  - {name: r, stoichiometry: {aa: 1.0}, catalysts: [E], k_forward: 5.0}
processes: [{name: translation, efficiency: 20.0}]
machines:
  - {name: E, kind: enzyme, synthesis_cost: {aa: -10.0},
     process_demand: {translation: 10.0}, compartment: cytosol, density_contribution: 10.0}
  - {name: rib, kind: process-machine, synthesis_cost: {aa: -30.0},
     process_demand: {translation: 30.0}, compartment: cytosol, density_contribution: 30.0}
proteins_g:
  - {name: hk, concentration: 1.0, synthesis_cost: {aa: -100.0},
     process_demand: {translation: 100.0}, compartment: cytosol, density_contribution: 100.0}
density_limits: {cytosol: 0.5}
)");
  RunResult r = run("mumax --model " + path);
  REQUIRE(r.exit_code == 0);
  CHECK(value_of(r.out, "status") == "basal-composition-inadmissible");
  CHECK(std::stod(value_of(r.out, "mu_max")) == 0.0);
}

TEST_CASE("mumax: models without fixed demands trip the doubling cap") {
  std::string path = scratch("unbounded.yaml");
  write_file(path, R"(
metabolites: [{name: aa}]
reactions:
  - {name: r, stoichiometry: {aa: 1.0}, catalysts: [E], k_forward: 5.0}
processes: [{name: translation, efficiency: 20.0}]
machines:
  - {name: E, kind: enzyme, synthesis_cost: {aa: -10.0},
     process_demand: {translation: 10.0}, compartment: cytosol, density_contribution: 10.0}
  - {name: rib, kind: process-machine, synthesis_cost: {aa: -30.0},
     process_demand: {translation: 30.0}, compartment: cytosol, density_contribution: 30.0}
proteins_g: []
density_limits: {cytosol: 10.0}
)");
  CHECK(run("mumax --model " + path).exit_code == 2);
}

TEST_CASE("mumax: profile output is a monotone mu,status table") {
  std::string profile = scratch("profile.csv");
  RunResult r = run("mumax " + model_arg() + " --profile " + profile);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(profile);
  std::string line;
  std::getline(in, line);
  CHECK(line == "mu,status");
  bool seen_infeasible = false;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    bool feasible = line.find("infeasible") == std::string::npos;
    if (!feasible) seen_infeasible = true;
    if (seen_infeasible) CHECK(!feasible);
  }
  CHECK(rows == 51);
  CHECK(seen_infeasible);
}

TEST_CASE("simulate: closed-form dilution endpoint") {
  std::string path = scratch("dilution.yaml");
  write_file(path, R"(
params: {kappa_e: 1.0, kappa_m: 1.0, gamma_e: 0.0, gamma_m: 0.0, nu_e: 0.0, nu_m: 0.0}
initial: {e: 1.0, m: 1.0}
horizon: 1.0
)");
  RunResult r = run("simulate --instance " + path + " --alpha 0.5 --dt-max 1e-3");
  REQUIRE(r.exit_code == 0);
  // Last CSV row, second column = E(1).
  auto last_newline = r.out.find_last_of('\n', r.out.size() - 2);
  std::string last = r.out.substr(last_newline + 1);
  auto c1 = last.find(',');
  auto c2 = last.find(',', c1 + 1);
  auto c3 = last.find(',', c2 + 1);
  double e_end = std::stod(last.substr(c1 + 1, c2 - c1 - 1));
  double m_end = std::stod(last.substr(c2 + 1, c3 - c2 - 1));
  CHECK(e_end == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(e_end == m_end);  // symmetric instance rides the diagonal

  RunResult again = run("simulate --instance " + path + " --alpha 0.5 --dt-max 1e-3");
  CHECK(r.out == again.out);  // bit-stable CSV
}

TEST_CASE("simulate: malformed control files exit 1") {
  std::string path = scratch("badcontrol.yaml");
  write_file(path, "control: {grid: [0.0, 1.0], values: [0.5, 0.5]}\n");
  CHECK(run("simulate --instance " + fixtures::data_path("toy_instance.yaml") +
            " --control " + path)
            .exit_code == 1);
}

TEST_CASE("simulate: negativity guard exits 2") {
  std::string path = scratch("stiff.yaml");
  write_file(path, R"(
params: {kappa_e: 1.0, kappa_m: 1.0, nu_e: 0.0, nu_m: 0.0, smoothing: 0.01}
initial: {e: 1.0, m: 100.0}
horizon: 10.0
)");
  CHECK(run("simulate --instance " + path + " --alpha 0.0 --dt-max 10.0").exit_code == 2);
}

TEST_CASE("optimize: machinery-rich report shows the enzyme-building phase") {
  std::string instance = scratch("bang.yaml");
  write_file(instance, R"(
params: {kappa_e: 1.0, kappa_m: 1.2, gamma_e: 0.05, gamma_m: 0.08, smoothing: 0.01}
initial: {e: 0.05, m: 1.0}
horizon: 0.5
)");
  std::string csv = scratch("sweep.csv");
  RunResult r = run("optimize --instance " + instance + " --gain 12 --max-iter 3000 --csv " + csv);
  REQUIRE(r.exit_code == 0);
  CHECK(value_of(r.out, "converged") == "true");
  std::ifstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "t,E,M,eta_E,eta_M,alpha,H,H1");
  // alpha is the sixth column.
  std::istringstream row(first);
  std::string cell;
  for (int i = 0; i < 6; ++i) std::getline(row, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(1.0).epsilon(1e-6));

  // Refining the grid barely moves the cost.
  RunResult c50 = run("optimize --instance " + instance + " --gain 12 --max-iter 3000 --grid-n 50");
  RunResult c100 = run("optimize --instance " + instance + " --gain 12 --max-iter 3000 --grid-n 100");
  double j50 = std::stod(value_of(c50.out, "cost"));
  double j100 = std::stod(value_of(c100.out, "cost"));
  CHECK(std::abs(j50 - j100) <= 1e-3 * (1.0 + std::abs(j100)));
}

TEST_CASE("optimize: non-convergence is a soft failure") {
  RunResult r = run("optimize --instance " + fixtures::data_path("toy_instance.yaml") +
                    " --max-iter 3 --tol 1e-12");
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.out, "converged") == "false");
  CHECK(value_of(r.out, "alpha_ss") == "nan");
}

TEST_CASE("gen-random-model emits loadable documents") {
  std::string path = scratch("gen.yaml");
  REQUIRE(run("gen-random-model --seed 42 --output " + path).exit_code == 0);
  CHECK(run("mumax --model " + path).exit_code == 0);
  RunResult a = run("gen-random-model --seed 42");
  RunResult b = run("gen-random-model --seed 42");
  CHECK(a.out == b.out);
  RunResult c = run("gen-random-model --seed 43");
  CHECK(a.out != c.out);
}
