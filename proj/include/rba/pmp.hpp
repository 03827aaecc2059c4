#pragma once

#include <iosfwd>
#include <vector>

#include "rba/dynamics.hpp"

namespace rba {

// Costates for the two pools plus the multiplier on the payoff term.
// Sweeps run with eta0 = +1, the normal multiplier of the growth-maximizing
// extremal; the formulas below hold for any eta0.
struct AdjointState {
  double eta_e = 0;
  double eta_m = 0;
  double eta0 = 1.0;
};

struct AdjointDerivative {
  double deta_e = 0;
  double deta_m = 0;
};

struct AdjointGrid {
  std::vector<double> times;
  std::vector<AdjointState> values;
};

/// H = eta0*mu + eta_e*(alpha*nu_E - (mu+gamma_e)E) + eta_m*((1-alpha)*nu_M -
/// (mu+gamma_m)M); affine in alpha with slope switching().
double hamiltonian(const ToyState& s, const AdjointState& a, double alpha, const ToyParams& p);

/// Switching function H1 = eta_e*nu_E - eta_m*nu_M.
double switching(const ToyState& s, const AdjointState& a, const ToyParams& p);

/// Costate equations with the growth-dilution coupling terms; mu partials come
/// from the soft-min (or exact min off the kink, smoothing = 0).
AdjointDerivative adjoint_rhs(const ToyState& s, const AdjointState& a, double alpha,
                              const ToyParams& p);

/// RK4 backward pass along a stored trajectory, terminal condition eta(T) = 0.
/// Requires smoothing > 0.
AdjointGrid backward_integrate(const Trajectory& traj, const ToyParams& p, double eta0 = 1.0);

struct SweepOptions {
  double relax = 0.5;  // control update relaxation; halved within an iteration on cost decrease
  double tol = 1e-8;   // sup norm of the accepted control update
  int max_iter = 200;
  int substeps = 4;            // RK4 steps per control interval
  double singular_band = 1e-6;  // relative |H1| band treated as singular
  double push_gain = 4.0;       // saturating-update slope; strong signals clamp to bang
  double eta0 = 1.0;
  double initial_alpha = 0.5;
};

struct SweepResult {
  ControlSignal control;
  Trajectory trajectory;
  AdjointGrid adjoints;
  std::vector<double> switching_values;    // H1 at trajectory nodes
  std::vector<double> hamiltonian_values;  // H at trajectory nodes
  double cost = 0;
  int iterations = 0;
  bool converged = false;
  double singular_fraction = 0;  // fraction of nodes with |H1| inside the band
  double final_update_norm = 0;
  double relax_final = 0;
};

/// Forward-backward sweep: integrate, backward-integrate, relaxed bang update
/// from the sign of the switching function. Cost never decreases across
/// accepted iterations. Non-convergence is a flag, not an error.
SweepResult sweep(const ToyState& x0, const ToyParams& p, double t_end, int grid_n,
                  const SweepOptions& opts = {});

struct EnvelopeReport {
  double manifold_residual = 0;  // |kE E - kM M|/(kE E + kM M), window average
  double alpha_avg = 0;          // time-averaged control over the window
  double alpha_ss = 0;           // steady-state balance allocation
  double alpha_gap = 0;          // |alpha_avg - alpha_ss|
  double mu_ss = 0;              // balanced-growth rate
  int window_samples = 0;
  double switch_rate = 0;  // H1 sign changes per unit time in the window
};

/// Terminal-window comparison of the sweep against the steady-state balance
/// (window = final 20% of the horizon, at least 10 samples).
EnvelopeReport envelope_check(const SweepResult& result, const ToyParams& p);

/// Allocation solving alpha*nu_E = (mu+gamma_e)E, (1-alpha)*nu_M =
/// (mu+gamma_m)M on the balanced manifold kE E = kM M, by scalar bisection.
double balanced_alpha(const ToyParams& p, double* mu_out = nullptr);

/// CSV export: header t,E,M,eta_E,eta_M,alpha,H,H1.
void write_sweep_csv(const SweepResult& result, std::ostream& os);

}  // namespace rba
