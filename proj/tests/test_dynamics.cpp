#include "rba/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "rba/errors.hpp"

using namespace rba;

namespace {

ToyParams dilution_params() {
  // Zero fluxes, no degradation, symmetric efficiencies: on the diagonal the
  // dynamics reduce to de/dt = -e^2 with e(t) = 1/(1+t).
  ToyParams p;
  p.kappa_e = p.kappa_m = 1.0;
  p.nu_e_const = p.nu_m_const = 0.0;
  return p;
}

}  // namespace

TEST_CASE("growth rate basics") {
  ToyParams p;
  CHECK(growth_rate({0, 0}, p) == 0.0);

  p.kappa_e = 2.0;
  p.kappa_m = 1.0;
  CHECK(growth_rate({1.0, 3.0}, p) == 2.0);
}

TEST_CASE("soft-min stays within eps*ln2 below the exact min") {
  ToyParams exact;
  exact.kappa_e = 1.7;
  exact.kappa_m = 0.9;
  ToyParams soft = exact;
  soft.smoothing = 1e-3;
  const double bound = 1e-3 * std::log(2.0);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; j += 7) {
      ToyState s{0.02 * i, 0.02 * j};
      double lo = growth_rate(s, soft);
      double hi = growth_rate(s, exact);
      CHECK(lo <= hi + 1e-15);
      CHECK(hi - lo <= bound + 1e-15);
    }
  }
}

TEST_CASE("growth gradient matches the active branch and flags the kink") {
  ToyParams p;
  p.kappa_e = 2.0;
  p.kappa_m = 1.0;
  GrowthGradient g = growth_rate_gradient({1.0, 3.0}, p);
  CHECK(g.dmu_de == 2.0);
  CHECK(g.dmu_dm == 0.0);
  CHECK_THROWS_AS(growth_rate_gradient({1.0, 2.0}, p), NumericsError);

  p.smoothing = 1e-2;
  GrowthGradient s = growth_rate_gradient({1.0, 2.0}, p);
  CHECK(s.dmu_de == doctest::Approx(1.0));  // equal branches share the weight
  CHECK(s.dmu_dm == doctest::Approx(0.5));
}

TEST_CASE("rhs at the origin is pure synthesis") {
  ToyParams p;
  StateDerivative d = rhs({0, 0}, 0.3, p);
  CHECK(d.de == doctest::Approx(0.3));
  CHECK(d.dm == doctest::Approx(0.7));
}

TEST_CASE("rhs is symmetric on the diagonal") {
  ToyParams p;
  p.gamma_e = p.gamma_m = 0.1;
  StateDerivative d = rhs({0.4, 0.4}, 0.5, p);
  CHECK(d.de == d.dm);
}

TEST_CASE("machine-proportional fluxes vanish without machinery") {
  ToyParams p;
  p.flux_mode = FluxMode::MachineProportional;
  p.flux_coupling = 2.0;
  p.gamma_e = 0.2;
  StateDerivative d = rhs({1.0, 0.0}, 0.6, p);
  CHECK(d.dm == 0.0);
  CHECK(d.de == doctest::Approx(-0.2));  // mu = 0, only degradation acts
}

TEST_CASE("closed-form dilution: e(1) = 0.5 and J = ln 2") {
  ToyParams p = dilution_params();
  Trajectory traj = integrate({1.0, 1.0}, ControlSignal::constant(0.5, 1.0), p, 1.0, 1e-3);
  CHECK(traj.states.back().e == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(traj.states.back().m == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cost(traj) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(cost(traj) == traj.cost_running.back());
}

TEST_CASE("alpha = 1 never grows the machinery pool") {
  ToyParams p;
  p.gamma_m = 0.05;
  Trajectory traj = integrate({0.1, 0.9}, ControlSignal::constant(1.0, 2.0), p, 2.0, 1e-2);
  for (std::size_t i = 1; i < traj.states.size(); ++i)
    CHECK(traj.states[i].m <= traj.states[i - 1].m + 1e-12);
}

TEST_CASE("Richardson order estimate reaches fourth order") {
  ToyParams p;
  p.kappa_e = 1.0;
  p.kappa_m = 1.3;
  p.gamma_e = 0.05;
  p.gamma_m = 0.02;
  p.smoothing = 1e-2;
  ToyState x0{0.4, 0.7};
  auto terminal = [&](double dt) {
    Trajectory t = integrate(x0, ControlSignal::constant(0.3, 1.0), p, 1.0, dt);
    return t.states.back();
  };
  ToyState a = terminal(0.1), b = terminal(0.05), c = terminal(0.025);
  double coarse = std::hypot(a.e - b.e, a.m - b.m);
  double fine = std::hypot(b.e - c.e, b.m - c.m);
  double order = std::log2(coarse / fine);
  CHECK(order >= 3.5);
}

TEST_CASE("constant growth at the balanced steady state") {
  ToyParams p;  // symmetric, alpha = 1/2 fixes e = m = sqrt(1/2)
  double e_star = std::sqrt(0.5);
  Trajectory traj =
      integrate({e_star, e_star}, ControlSignal::constant(0.5, 3.0), p, 3.0, 1e-3);
  CHECK(cost(traj) == doctest::Approx(e_star * 3.0).epsilon(1e-6));
}

TEST_CASE("grid refinement leaves the cost unchanged at 1e-8") {
  ToyParams p = dilution_params();
  double j1 = cost(integrate({1, 1}, ControlSignal::constant(0.5, 1.0), p, 1.0, 2e-4));
  double j2 = cost(integrate({1, 1}, ControlSignal::constant(0.5, 1.0), p, 1.0, 1e-4));
  CHECK(std::abs(j1 - j2) <= 1e-8);
}

TEST_CASE("volume integration matches exp(J)") {
  ToyParams p;
  p.kappa_m = 1.1;
  p.gamma_e = 0.03;
  ControlSignal u = ControlSignal::constant(0.45, 1.0);
  Trajectory traj = integrate({0.5, 0.6}, u, p, 1.0, 1e-3);
  // Integrate V' = mu V with RK4 over the same dynamics.
  double v = 1.0;
  const double h = 1e-3;
  ToyState s{0.5, 0.6};
  auto f = [&](const ToyState& st, double vol) {
    return std::pair<StateDerivative, double>(rhs(st, 0.45, p), growth_rate(st, p) * vol);
  };
  for (int i = 0; i < 1000; ++i) {
    auto [k1, kv1] = f(s, v);
    auto [k2, kv2] = f({s.e + 0.5 * h * k1.de, s.m + 0.5 * h * k1.dm}, v + 0.5 * h * kv1);
    auto [k3, kv3] = f({s.e + 0.5 * h * k2.de, s.m + 0.5 * h * k2.dm}, v + 0.5 * h * kv2);
    auto [k4, kv4] = f({s.e + h * k3.de, s.m + h * k3.dm}, v + h * kv3);
    s = {s.e + h / 6 * (k1.de + 2 * k2.de + 2 * k3.de + k4.de),
         s.m + h / 6 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm)};
    v += h / 6 * (kv1 + 2 * kv2 + 2 * kv3 + kv4);
  }
  CHECK(v == doctest::Approx(std::exp(cost(traj))).epsilon(1e-6));
}

TEST_CASE("diagonal symmetry is preserved under alpha = 1/2") {
  ToyParams p;
  p.gamma_e = p.gamma_m = 0.04;
  Trajectory traj = integrate({0.3, 0.3}, ControlSignal::constant(0.5, 2.0), p, 2.0, 1e-2);
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    CHECK(std::abs(traj.states[i].e - traj.states[i].m) <= 1e-14);
}

TEST_CASE("states stay nonnegative under admissible controls") {
  ToyParams p;
  p.kappa_e = 1.0;
  p.kappa_m = 1.2;
  p.gamma_e = 0.05;
  p.gamma_m = 0.08;
  double rate_scale = std::max({p.kappa_e, p.kappa_m, p.nu_e_const, p.nu_m_const,
                                p.gamma_e, p.gamma_m});
  double dt = 1e-3 / rate_scale;
  ControlSignal zigzag;
  zigzag.grid = {0.0, 0.5, 1.0, 1.5, 2.0};
  zigzag.values = {1.0, 0.0, 1.0, 0.0};
  for (const ControlSignal& u : {ControlSignal::constant(0.0, 2.0),
                                 ControlSignal::constant(1.0, 2.0),
                                 ControlSignal::constant(0.5, 2.0), zigzag}) {
    Trajectory traj = integrate({0.05, 1.0}, u, p, 2.0, dt);
    for (const ToyState& s : traj.states) {
      CHECK(s.e >= -1e-9);
      CHECK(s.m >= -1e-9);
    }
  }
}

TEST_CASE("kink crossings insert trajectory nodes") {
  ToyParams p;  // exact min, asymmetric start crossing the kink
  Trajectory traj = integrate({0.0, 1.0}, ControlSignal::constant(1.0, 2.0), p, 2.0, 0.05);
  // alpha = 1 builds e only: kappa_e*e crosses kappa_m*m from below.
  bool crossed = false;
  for (std::size_t i = 0; i < traj.states.size() && !crossed; ++i)
    crossed = traj.states[i].e > traj.states[i].m;
  REQUIRE(crossed);
  double best_gap = 1e9;
  for (const ToyState& s : traj.states) best_gap = std::min(best_gap, std::abs(s.e - s.m));
  CHECK(best_gap <= 1e-10);  // a node landed on the kink
}

TEST_CASE("negativity guard rejects oversized steps") {
  ToyParams p = dilution_params();
  p.smoothing = 1e-2;
  CHECK_THROWS_AS(integrate({1.0, 100.0}, ControlSignal::constant(0.0, 10.0), p, 10.0, 10.0),
                  NumericsError);
}

TEST_CASE("control signals are validated") {
  ToyParams p;
  ControlSignal bad;
  bad.grid = {0.0, 1.0};
  bad.values = {1.5};
  CHECK_THROWS_AS(integrate({1, 1}, bad, p, 1.0, 0.1), ValidationError);

  ControlSignal short_grid = ControlSignal::constant(0.5, 0.5);
  CHECK_THROWS_AS(integrate({1, 1}, short_grid, p, 1.0, 0.1), ValidationError);

  ControlSignal piecewise;
  piecewise.grid = {0.0, 0.25, 1.0};
  piecewise.values = {0.2, 0.9};
  CHECK(piecewise.at(0.1) == 0.2);
  CHECK(piecewise.at(0.25) == 0.9);
  CHECK(piecewise.at(2.0) == 0.9);
}

TEST_CASE("trajectory CSV export is stable and well formed") {
  ToyParams p;
  Trajectory traj = integrate({0.2, 0.4}, ControlSignal::constant(0.5, 0.2), p, 0.2, 0.05);
  std::ostringstream a, b;
  write_trajectory_csv(traj, a);
  write_trajectory_csv(traj, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,E,M,alpha,mu,J_cum\n", 0) == 0);
}

TEST_CASE("instance and control documents load") {
  ToyInstance inst = load_toy_instance(fixtures::data_path("toy_instance.yaml"));
  CHECK(inst.params.kappa_m == 1.2);
  CHECK(inst.params.smoothing == 0.01);
  CHECK(inst.x0.e == 0.05);
  CHECK(inst.horizon == 5.0);

  ControlSignal u = load_control_file(fixtures::data_path("control_half.yaml"));
  CHECK(u.values == std::vector<double>{0.5});

  CHECK_THROWS_AS(load_toy_instance("/nonexistent/instance.yaml"), ParseError);
}
