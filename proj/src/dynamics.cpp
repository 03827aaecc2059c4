#include "rba/dynamics.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rba/errors.hpp"

namespace rba {

namespace {

constexpr double kKinkTol = 1e-12;
constexpr double kNegativityGuard = 1e-9;

void append_sample(Trajectory& traj, double t, const ToyState& s, double alpha,
                   const ToyParams& p) {
  double mu = growth_rate(s, p);
  double j = traj.cost_running.empty() ? 0.0 : traj.cost_running.back();
  if (!traj.times.empty()) {
    double dt = t - traj.times.back();
    j += 0.5 * dt * (traj.mu_values.back() + mu);
  }
  traj.times.push_back(t);
  traj.states.push_back(s);
  traj.controls.push_back(alpha);
  traj.mu_values.push_back(mu);
  traj.cost_running.push_back(j);
}

ToyState rk4_step(const ToyState& s, double alpha, const ToyParams& p, double h) {
  StateDerivative k1 = rhs(s, alpha, p);
  StateDerivative k2 = rhs({s.e + 0.5 * h * k1.de, s.m + 0.5 * h * k1.dm}, alpha, p);
  StateDerivative k3 = rhs({s.e + 0.5 * h * k2.de, s.m + 0.5 * h * k2.dm}, alpha, p);
  StateDerivative k4 = rhs({s.e + h * k3.de, s.m + h * k3.dm}, alpha, p);
  return {s.e + h / 6.0 * (k1.de + 2 * k2.de + 2 * k3.de + k4.de),
          s.m + h / 6.0 * (k1.dm + 2 * k2.dm + 2 * k3.dm + k4.dm)};
}

double kink_gap(const ToyState& s, const ToyParams& p) {
  return p.kappa_e * s.e - p.kappa_m * s.m;
}

ToyState clip_nonnegative(ToyState s) {
  if (s.e < 0) {
    if (s.e < -kNegativityGuard)
      throw NumericsError("negativity guard: E = " + std::to_string(s.e) +
                          "; decrease dt_max");
    s.e = 0;
  }
  if (s.m < 0) {
    if (s.m < -kNegativityGuard)
      throw NumericsError("negativity guard: M = " + std::to_string(s.m) +
                          "; decrease dt_max");
    s.m = 0;
  }
  return s;
}

}  // namespace

void ToyParams::validate() const {
  if (!(kappa_e > 0) || !(kappa_m > 0))
    throw ValidationError("toy params: kappa_e and kappa_m must be > 0");
  if (gamma_e < 0 || gamma_m < 0) throw ValidationError("toy params: gamma must be >= 0");
  if (nu_e_const < 0 || nu_m_const < 0)
    throw ValidationError("toy params: constant fluxes must be >= 0");
  if (flux_coupling < 0) throw ValidationError("toy params: flux_coupling must be >= 0");
  if (smoothing < 0) throw ValidationError("toy params: smoothing must be >= 0");
}

std::pair<double, double> ToyParams::fluxes(double m) const {
  if (flux_mode == FluxMode::Constant) return {nu_e_const, nu_m_const};
  double v = flux_coupling * m;
  return {v, v};
}

ControlSignal ControlSignal::constant(double alpha, double t_end) {
  ControlSignal u;
  u.grid = {0.0, t_end};
  u.values = {alpha};
  return u;
}

double ControlSignal::at(double t) const {
  if (values.empty()) return 0.0;
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t k = static_cast<std::size_t>(it - grid.begin()) - 1;
  return values[std::min(k, values.size() - 1)];
}

void ControlSignal::validate(double t_end) const {
  if (grid.size() < 2 || values.size() + 1 != grid.size())
    throw ValidationError("control signal needs k+1 grid points for k interval values");
  if (grid.front() != 0.0) throw ValidationError("control grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("control grid must be strictly increasing");
  if (grid.back() < t_end - 1e-12)
    throw ValidationError("control grid does not cover [0, t_end]");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("control values must lie in [0, 1]");
}

double growth_rate(const ToyState& s, const ToyParams& p) {
  double a = p.kappa_e * s.e;
  double b = p.kappa_m * s.m;
  if (p.smoothing == 0.0) return std::min(a, b);
  // Stable log-sum-exp; the soft-min lies below the exact min and converges
  // to it as the smoothing vanishes.
  double lo = std::min(a, b);
  double eps = p.smoothing;
  return lo - eps * std::log(std::exp(-(a - lo) / eps) + std::exp(-(b - lo) / eps));
}

GrowthGradient growth_rate_gradient(const ToyState& s, const ToyParams& p) {
  double a = p.kappa_e * s.e;
  double b = p.kappa_m * s.m;
  GrowthGradient g;
  if (p.smoothing == 0.0) {
    if (std::abs(a - b) < kKinkTol)
      throw NumericsError("growth gradient evaluated on the min-law kink; "
                          "use smoothing > 0 or regularize the state");
    g.mu = std::min(a, b);
    if (a < b) g.dmu_de = p.kappa_e;
    else g.dmu_dm = p.kappa_m;
    return g;
  }
  double lo = std::min(a, b);
  double eps = p.smoothing;
  double wa = std::exp(-(a - lo) / eps);
  double wb = std::exp(-(b - lo) / eps);
  g.mu = lo - eps * std::log(wa + wb);
  g.dmu_de = p.kappa_e * wa / (wa + wb);
  g.dmu_dm = p.kappa_m * wb / (wa + wb);
  return g;
}

StateDerivative rhs(const ToyState& s, double alpha, const ToyParams& p) {
  double mu = growth_rate(s, p);
  auto [nu_e, nu_m] = p.fluxes(s.m);
  return {alpha * nu_e - (mu + p.gamma_e) * s.e,
          (1.0 - alpha) * nu_m - (mu + p.gamma_m) * s.m};
}

Trajectory integrate(const ToyState& x0, const ControlSignal& u, const ToyParams& p,
                     double t_end, double dt_max) {
  p.validate();
  u.validate(t_end);
  if (!(t_end > 0)) throw ValidationError("integrate: t_end must be > 0");
  if (!(dt_max > 0)) throw ValidationError("integrate: dt_max must be > 0");
  if (x0.e < 0 || x0.m < 0) throw ValidationError("integrate: initial state must be >= 0");

  // Integration breakpoints: control grid nodes inside the horizon.
  std::vector<double> breaks = {0.0};
  for (double g : u.grid)
    if (g > breaks.back() + 1e-15 && g < t_end - 1e-15) breaks.push_back(g);
  breaks.push_back(t_end);

  Trajectory traj;
  ToyState s = x0;
  append_sample(traj, 0.0, s, u.at(0.0), p);

  for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
    const double seg_end = breaks[seg + 1];
    double t = breaks[seg];
    const double alpha = u.at(0.5 * (t + seg_end));
    const long steps = std::max(1L, static_cast<long>(std::ceil((seg_end - t) / dt_max - 1e-12)));
    const double h_nominal = (seg_end - t) / static_cast<double>(steps);
    while (t < seg_end - 1e-15) {
      double h = std::min(h_nominal, seg_end - t);
      ToyState next = rk4_step(s, alpha, p, h);
      if (p.smoothing == 0.0) {
        // Land a node on the min-law kink so no step straddles it.
        double g0 = kink_gap(s, p);
        double g1 = kink_gap(next, p);
        if (g0 * g1 < -kKinkTol * kKinkTol && std::abs(g0) > kKinkTol &&
            std::abs(g1) > kKinkTol) {
          double lo = 0.0, hi = h;
          for (int it = 0; it < 60 && hi - lo > 1e-16 * (1.0 + h); ++it) {
            double mid = 0.5 * (lo + hi);
            double gm = kink_gap(rk4_step(s, alpha, p, mid), p);
            if (g0 * gm >= 0) lo = mid;
            else hi = mid;
          }
          h = std::max(hi, 1e-15);
          next = rk4_step(s, alpha, p, h);
        }
      }
      s = clip_nonnegative(next);
      t += h;
      append_sample(traj, t, s, alpha, p);
    }
  }
  // Right-looking control column: controls[i] is the alpha applied on
  // [t_i, t_{i+1}); the last node repeats its interval value.
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i)
    traj.controls[i] = u.at(0.5 * (traj.times[i] + traj.times[i + 1]));
  if (traj.controls.size() >= 2)
    traj.controls.back() = traj.controls[traj.controls.size() - 2];
  return traj;
}

double cost(const Trajectory& traj) {
  if (traj.cost_running.empty()) return 0.0;
  return traj.cost_running.back();
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,E,M,alpha,mu,J_cum\n";
  char buf[160];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.times[i],
                  traj.states[i].e, traj.states[i].m, traj.controls[i], traj.mu_values[i],
                  traj.cost_running[i]);
    os << buf;
  }
}

namespace {

double node_number(const YAML::Node& node, const char* field, double fallback,
                   bool required = false) {
  if (!node) {
    if (required) throw ParseError(std::string("instance document: missing field '") + field + "'");
    return fallback;
  }
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError(std::string("instance document: field '") + field + "' is not a number");
  }
}

}  // namespace

ToyInstance load_toy_instance(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ParseError("cannot open instance file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("instance document: ") + e.what());
  }
  ToyInstance inst;
  YAML::Node params = root["params"];
  if (!params || !params.IsMap()) throw ParseError("instance document needs a params map");
  inst.params.kappa_e = node_number(params["kappa_e"], "kappa_e", 1.0);
  inst.params.kappa_m = node_number(params["kappa_m"], "kappa_m", 1.0);
  inst.params.gamma_e = node_number(params["gamma_e"], "gamma_e", 0.0);
  inst.params.gamma_m = node_number(params["gamma_m"], "gamma_m", 0.0);
  inst.params.nu_e_const = node_number(params["nu_e"], "nu_e", 1.0);
  inst.params.nu_m_const = node_number(params["nu_m"], "nu_m", 1.0);
  inst.params.flux_coupling = node_number(params["flux_coupling"], "flux_coupling", 0.0);
  inst.params.smoothing = node_number(params["smoothing"], "smoothing", 0.0);
  if (params["flux_mode"]) {
    std::string mode = params["flux_mode"].Scalar();
    if (mode == "constant") inst.params.flux_mode = FluxMode::Constant;
    else if (mode == "machine-proportional") inst.params.flux_mode = FluxMode::MachineProportional;
    else throw ParseError("flux_mode must be constant|machine-proportional, got '" + mode + "'");
  }
  YAML::Node initial = root["initial"];
  if (!initial || !initial.IsMap()) throw ParseError("instance document needs an initial map");
  inst.x0.e = node_number(initial["e"], "initial.e", 0.0, true);
  inst.x0.m = node_number(initial["m"], "initial.m", 0.0, true);
  inst.horizon = node_number(root["horizon"], "horizon", 0.0, true);
  if (!(inst.horizon > 0)) throw ParseError("instance horizon must be > 0");
  inst.params.validate();
  return inst;
}

ControlSignal load_control_file(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ParseError("cannot open control file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("control document: ") + e.what());
  }
  YAML::Node node = root["control"] ? root["control"] : root;
  ControlSignal u;
  if (!node["grid"] || !node["values"])
    throw ParseError("control document needs grid and values lists");
  for (const auto& g : node["grid"]) u.grid.push_back(g.as<double>());
  for (const auto& v : node["values"]) u.values.push_back(v.as<double>());
  if (u.grid.size() != u.values.size() + 1)
    throw ParseError("control document: grid must have one more entry than values");
  return u;
}

}  // namespace rba
