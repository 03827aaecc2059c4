#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rba {

enum class FluxMode { Constant, MachineProportional };

// Two-pool self-replicator: enzymes E feed growth, machinery M synthesizes
// both, growth is limited by the scarcer pool.
struct ToyParams {
  double kappa_e = 1.0;
  double kappa_m = 1.0;
  double gamma_e = 0.0;
  double gamma_m = 0.0;
  FluxMode flux_mode = FluxMode::Constant;
  double nu_e_const = 1.0;
  double nu_m_const = 1.0;
  double flux_coupling = 0.0;  // machine-proportional: nu_E = nu_M = coupling * M
  double smoothing = 0.0;      // soft-min parameter; 0 = exact min

  void validate() const;
  // Effective synthesis fluxes (nu_E, nu_M) at machinery level m.
  std::pair<double, double> fluxes(double m) const;
};

struct ToyState {
  double e = 0;
  double m = 0;
};

struct StateDerivative {
  double de = 0;
  double dm = 0;
};

// Piecewise-constant allocation signal on [0, T].
struct ControlSignal {
  std::vector<double> grid;    // strictly increasing, grid.front() == 0
  std::vector<double> values;  // per interval, each in [0, 1]

  static ControlSignal constant(double alpha, double t_end);
  double at(double t) const;  // right-open intervals; clamped at the ends
  void validate(double t_end) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ToyState> states;
  std::vector<double> controls;  // alpha applied on [t_i, t_{i+1}); last repeats
  std::vector<double> mu_values;
  std::vector<double> cost_running;  // cumulative trapezoid of mu
};

/// min(kappa_e*e, kappa_m*m), or its soft-min lower approximation
/// -eps*log(exp(-kappa_e*e/eps) + exp(-kappa_m*m/eps)) when smoothing > 0.
double growth_rate(const ToyState& s, const ToyParams& p);

struct GrowthGradient {
  double mu = 0;
  double dmu_de = 0;
  double dmu_dm = 0;
};

/// Growth rate and partials. With smoothing = 0 the state must be off the
/// min-law kink (|kappa_e*e - kappa_m*m| >= 1e-12), else NumericsError.
GrowthGradient growth_rate_gradient(const ToyState& s, const ToyParams& p);

/// de/dt = alpha*nu_E - (mu+gamma_e)*e, dm/dt = (1-alpha)*nu_M - (mu+gamma_m)*m.
StateDerivative rhs(const ToyState& s, double alpha, const ToyParams& p);

/// Fixed-step RK4 with sub-stepping at control breakpoints and, when
/// smoothing = 0, at min-law kink crossings. States are clipped at zero; a
/// clip beyond 1e-9 raises NumericsError (dt_max too large).
Trajectory integrate(const ToyState& x0, const ControlSignal& u, const ToyParams& p,
                     double t_end, double dt_max);

/// Trapezoidal accumulation of mu over times (the last cost_running entry).
double cost(const Trajectory& traj);

/// CSV export: header t,E,M,alpha,mu,J_cum, full-precision decimal rows.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

// CLI instance document: params + initial state + horizon (+ optional control).
struct ToyInstance {
  ToyParams params;
  ToyState x0;
  double horizon = 1.0;
};

ToyInstance load_toy_instance(const std::string& path);
ControlSignal load_control_file(const std::string& path);

}  // namespace rba
