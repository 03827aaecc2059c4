#include "rba/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rba/errors.hpp"

namespace rba {

namespace {

AdjointDerivative adjoint_rhs_at(const ToyState& s, const AdjointState& a, const ToyParams& p) {
  GrowthGradient g = growth_rate_gradient(s, p);
  AdjointDerivative d;
  d.deta_e = -a.eta0 * g.dmu_de + a.eta_e * (g.mu + p.gamma_e) + a.eta_e * s.e * g.dmu_de +
             a.eta_m * s.m * g.dmu_de;
  d.deta_m = -a.eta0 * g.dmu_dm + a.eta_m * (g.mu + p.gamma_m) + a.eta_m * s.m * g.dmu_dm +
             a.eta_e * s.e * g.dmu_dm;
  return d;
}

// Cubic Hermite midpoint of the stored trajectory interval.
ToyState interval_midpoint(const ToyState& s0, const ToyState& s1, double alpha, double h,
                           const ToyParams& p) {
  StateDerivative f0 = rhs(s0, alpha, p);
  StateDerivative f1 = rhs(s1, alpha, p);
  return {0.5 * (s0.e + s1.e) + 0.125 * h * (f0.de - f1.de),
          0.5 * (s0.m + s1.m) + 0.125 * h * (f0.dm - f1.dm)};
}

}  // namespace

double hamiltonian(const ToyState& s, const AdjointState& a, double alpha, const ToyParams& p) {
  double mu = growth_rate(s, p);
  auto [nu_e, nu_m] = p.fluxes(s.m);
  return a.eta0 * mu + a.eta_e * (alpha * nu_e - (mu + p.gamma_e) * s.e) +
         a.eta_m * ((1.0 - alpha) * nu_m - (mu + p.gamma_m) * s.m);
}

double switching(const ToyState& s, const AdjointState& a, const ToyParams& p) {
  auto [nu_e, nu_m] = p.fluxes(s.m);
  return a.eta_e * nu_e - a.eta_m * nu_m;
}

AdjointDerivative adjoint_rhs(const ToyState& s, const AdjointState& a, double alpha,
                              const ToyParams& p) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("adjoint_rhs: alpha must lie in [0, 1]");
  (void)alpha;  // the costate equations do not involve the control directly
  return adjoint_rhs_at(s, a, p);
}

AdjointGrid backward_integrate(const Trajectory& traj, const ToyParams& p, double eta0) {
  if (!(p.smoothing > 0))
    throw ValidationError("backward_integrate requires smoothing > 0");
  if (traj.times.size() < 2) throw ValidationError("backward_integrate: empty trajectory");

  AdjointGrid grid;
  grid.times = traj.times;
  grid.values.assign(traj.times.size(), AdjointState{0.0, 0.0, eta0});

  AdjointState eta{0.0, 0.0, eta0};  // free terminal state, no terminal cost
  for (std::size_t i = traj.times.size() - 1; i > 0; --i) {
    const double h = traj.times[i] - traj.times[i - 1];
    const double alpha = traj.controls[i - 1];
    const ToyState& s1 = traj.states[i];
    const ToyState& s0 = traj.states[i - 1];
    ToyState sm = interval_midpoint(s0, s1, alpha, h, p);

    auto f = [&](const ToyState& s, const AdjointState& a) { return adjoint_rhs_at(s, a, p); };
    AdjointDerivative k1 = f(s1, eta);
    AdjointState e2{eta.eta_e - 0.5 * h * k1.deta_e, eta.eta_m - 0.5 * h * k1.deta_m, eta0};
    AdjointDerivative k2 = f(sm, e2);
    AdjointState e3{eta.eta_e - 0.5 * h * k2.deta_e, eta.eta_m - 0.5 * h * k2.deta_m, eta0};
    AdjointDerivative k3 = f(sm, e3);
    AdjointState e4{eta.eta_e - h * k3.deta_e, eta.eta_m - h * k3.deta_m, eta0};
    AdjointDerivative k4 = f(s0, e4);
    eta.eta_e -= h / 6.0 * (k1.deta_e + 2 * k2.deta_e + 2 * k3.deta_e + k4.deta_e);
    eta.eta_m -= h / 6.0 * (k1.deta_m + 2 * k2.deta_m + 2 * k3.deta_m + k4.deta_m);
    grid.values[i - 1] = eta;
  }
  return grid;
}

SweepResult sweep(const ToyState& x0, const ToyParams& p, double t_end, int grid_n,
                  const SweepOptions& opts) {
  p.validate();
  if (!(p.smoothing > 0)) throw ValidationError("sweep requires smoothing > 0");
  if (grid_n < 1) throw ValidationError("sweep: grid_n must be >= 1");
  if (!(opts.relax > 0 && opts.relax <= 1)) throw ValidationError("sweep: relax must be in (0, 1]");

  ControlSignal u;
  u.grid.resize(grid_n + 1);
  for (int k = 0; k <= grid_n; ++k)
    u.grid[k] = t_end * static_cast<double>(k) / static_cast<double>(grid_n);
  u.values.assign(grid_n, opts.initial_alpha);
  const double dt_max = t_end / static_cast<double>(grid_n) / std::max(1, opts.substeps);

  SweepResult result;
  Trajectory traj = integrate(x0, u, p, t_end, dt_max);
  double current_cost = cost(traj);
  double relax_used = opts.relax;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    result.iterations = iter + 1;
    AdjointGrid adj = backward_integrate(traj, p, opts.eta0);

    // Interval means of the switching function (H1 does not depend on alpha).
    std::vector<double> h1(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      h1[i] = switching(traj.states[i], adj.values[i], p);
    std::vector<double> mean(grid_n, 0.0);
    {
      std::size_t node = 0;
      for (int k = 0; k < grid_n; ++k) {
        const double t1 = u.grid[k + 1];
        double integral = 0.0;
        std::size_t start = node;
        while (node + 1 < traj.times.size() && traj.times[node + 1] <= t1 + 1e-12) {
          integral += 0.5 * (h1[node] + h1[node + 1]) * (traj.times[node + 1] - traj.times[node]);
          ++node;
        }
        double len = traj.times[node] - traj.times[start];
        mean[k] = len > 0 ? integral / len : h1[start];
      }
    }
    double mean_scale = 0.0;
    for (double m : mean) mean_scale = std::max(mean_scale, std::abs(m));
    const double band = opts.singular_band * mean_scale;

    // Saturating update: a strong switching signal clamps to the bang value
    // 1{H1 > 0}; inside the weak band the move degrades to an averaged nudge
    // so singular arcs settle at their Filippov level instead of chattering.
    std::vector<double> target(grid_n);
    for (int k = 0; k < grid_n; ++k) {
      if (std::abs(mean[k]) <= band || mean_scale == 0.0) {
        target[k] = u.values[k];
      } else {
        target[k] =
            std::clamp(u.values[k] + opts.push_gain * mean[k] / mean_scale, 0.0, 1.0);
      }
    }

    // Line-halving on the relaxation until the cost does not decrease.
    double r = opts.relax;
    bool accepted = false;
    ControlSignal u_try = u;
    Trajectory traj_try;
    double cost_try = 0.0;
    while (r > 1e-10) {
      for (int k = 0; k < grid_n; ++k)
        u_try.values[k] = (1.0 - r) * u.values[k] + r * target[k];
      traj_try = integrate(x0, u_try, p, t_end, dt_max);
      cost_try = cost(traj_try);
      if (cost_try >= current_cost - 1e-12 * (1.0 + std::abs(current_cost))) {
        accepted = true;
        break;
      }
      r *= 0.5;
    }
    if (!accepted) break;  // no non-decreasing step available

    relax_used = r;
    double update_norm = 0.0;
    for (int k = 0; k < grid_n; ++k)
      update_norm = std::max(update_norm, std::abs(u_try.values[k] - u.values[k]));
    u = u_try;
    traj = std::move(traj_try);
    current_cost = cost_try;
    result.final_update_norm = update_norm;
    if (update_norm <= opts.tol) {
      result.converged = true;
      break;
    }
  }

  result.control = u;
  result.trajectory = traj;
  result.adjoints = backward_integrate(traj, p, opts.eta0);
  result.cost = current_cost;
  result.relax_final = relax_used;
  const std::size_t n_nodes = result.trajectory.times.size();
  result.switching_values.resize(n_nodes);
  result.hamiltonian_values.resize(n_nodes);
  double h1_scale = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    result.switching_values[i] =
        switching(result.trajectory.states[i], result.adjoints.values[i], p);
    h1_scale = std::max(h1_scale, std::abs(result.switching_values[i]));
    result.hamiltonian_values[i] =
        hamiltonian(result.trajectory.states[i], result.adjoints.values[i],
                    result.trajectory.controls[i], p);
  }
  std::size_t singular = 0;
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (std::abs(result.switching_values[i]) <= opts.singular_band * h1_scale) ++singular;
  result.singular_fraction = n_nodes ? static_cast<double>(singular) / n_nodes : 0.0;
  return result;
}

double balanced_alpha(const ToyParams& p, double* mu_out) {
  p.validate();
  // On the manifold kE E = kM M = mu the stationarity conditions read
  //   alpha = A(mu), 1 - alpha = B(mu); the root of A + B = 1 is unique
  //   because both terms increase with mu.
  auto parts = [&p](double mu) -> std::pair<double, double> {
    if (p.flux_mode == FluxMode::Constant) {
      if (!(p.nu_e_const > 0) || !(p.nu_m_const > 0))
        throw NumericsError("balanced_alpha: constant fluxes must be positive");
      return {(mu + p.gamma_e) * mu / (p.kappa_e * p.nu_e_const),
              (mu + p.gamma_m) * mu / (p.kappa_m * p.nu_m_const)};
    }
    if (!(p.flux_coupling > 0))
      throw NumericsError("balanced_alpha: flux_coupling must be positive");
    return {p.kappa_m * (mu + p.gamma_e) / (p.kappa_e * p.flux_coupling),
            (mu + p.gamma_m) / p.flux_coupling};
  };
  auto excess = [&parts](double mu) {
    auto [a, b] = parts(mu);
    return a + b - 1.0;
  };
  double lo = 0.0;
  if (excess(0.0) >= 0.0) {
    // Turnover alone saturates the synthesis budget; no positive growth.
    auto [a, b] = parts(0.0);
    if (mu_out) *mu_out = 0.0;
    return a / (a + b);
  }
  double hi = 1.0;
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericsError("balanced_alpha: no balanced growth rate found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);
  if (mu_out) *mu_out = mu;
  auto [a, b] = parts(mu);
  return a / (a + b);  // normalized so the symmetric case lands on 1/2 exactly
}

EnvelopeReport envelope_check(const SweepResult& result, const ToyParams& p) {
  const Trajectory& traj = result.trajectory;
  if (traj.times.size() < 2) throw NumericsError("envelope_check: empty trajectory");
  const double t_end = traj.times.back();
  const double t_start = 0.8 * t_end;

  std::size_t first = 0;
  while (first < traj.times.size() && traj.times[first] < t_start - 1e-12) ++first;
  const std::size_t n = traj.times.size();
  EnvelopeReport rep;
  rep.window_samples = static_cast<int>(n - first);
  if (rep.window_samples < 10)
    throw NumericsError("envelope_check: degenerate window (" +
                        std::to_string(rep.window_samples) + " samples, need >= 10)");

  double residual_sum = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    double a = p.kappa_e * traj.states[i].e;
    double b = p.kappa_m * traj.states[i].m;
    residual_sum += (a + b) > 0 ? std::abs(a - b) / (a + b) : 0.0;
  }
  rep.manifold_residual = residual_sum / static_cast<double>(rep.window_samples);

  double alpha_integral = 0.0, window_len = 0.0;
  for (std::size_t i = first; i + 1 < n; ++i) {
    double dt = traj.times[i + 1] - traj.times[i];
    alpha_integral += traj.controls[i] * dt;
    window_len += dt;
  }
  rep.alpha_avg = window_len > 0 ? alpha_integral / window_len : traj.controls.back();

  if (!result.switching_values.empty() && window_len > 0) {
    int flips = 0;
    for (std::size_t i = first; i + 1 < n; ++i)
      if (result.switching_values[i] * result.switching_values[i + 1] < 0) ++flips;
    rep.switch_rate = flips / window_len;
  }

  rep.alpha_ss = balanced_alpha(p, &rep.mu_ss);
  rep.alpha_gap = std::abs(rep.alpha_avg - rep.alpha_ss);
  return rep;
}

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
  os << "t,E,M,eta_E,eta_M,alpha,H,H1\n";
  const Trajectory& traj = result.trajectory;
  char buf[220];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.times[i], traj.states[i].e, traj.states[i].m,
                  result.adjoints.values[i].eta_e, result.adjoints.values[i].eta_m,
                  traj.controls[i], result.hamiltonian_values[i], result.switching_values[i]);
    os << buf;
  }
}

}  // namespace rba
