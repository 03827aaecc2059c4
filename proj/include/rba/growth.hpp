#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "rba/lp.hpp"

namespace rba {

using ProblemBuilder = std::function<LinearProgram(double)>;

struct GrowthSearchResult {
  double mu_max = 0;
  double bracket_lo = 0;  // feasible endpoint; mu_max reports this value
  double bracket_hi = 0;  // infeasible endpoint
  long iterations = 0;    // LP solves spent in doubling + bisection
  Eigen::VectorXd witness_at_mu_max;  // feasible point at bracket_lo
  bool basal_inadmissible = false;    // mu = 0 already infeasible
};

/// Bisection for the maximal feasible growth rate. Doubles mu_hi_init until
/// infeasible (cap 2^60 * mu_hi_init), then bisects to width <= tol; the
/// returned mu_max is the feasible bracket endpoint. Throws BracketCapError
/// when no infeasible growth rate is found below the cap.
GrowthSearchResult mu_max(const ProblemBuilder& build, double tol = 1e-8,
                          double mu_hi_init = 1.0);

struct FeasibilityProfile {
  std::vector<LpStatus> statuses;
  // Index of the first feasible entry after an infeasible one, if the
  // monotone pattern is violated (a solver-health diagnostic).
  std::optional<std::size_t> first_monotonicity_violation;
};

/// Statuses over an ascending list of growth rates.
FeasibilityProfile feasibility_profile(const ProblemBuilder& build,
                                       const std::vector<double>& mus);

}  // namespace rba
