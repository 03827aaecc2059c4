#include "rba/growth.hpp"

#include "rba/errors.hpp"

namespace rba {

GrowthSearchResult mu_max(const ProblemBuilder& build, double tol, double mu_hi_init) {
  if (!(tol > 0)) throw ValidationError("mu_max: tol must be > 0");
  if (!(mu_hi_init > 0)) throw ValidationError("mu_max: mu_hi_init must be > 0");

  GrowthSearchResult result;
  SolveResult at_zero = solve(build(0.0));
  result.iterations = 1;
  if (at_zero.status != LpStatus::Feasible) {
    result.basal_inadmissible = true;
    return result;
  }

  double lo = 0.0;
  Eigen::VectorXd witness = at_zero.witness;
  double hi = mu_hi_init;
  const double cap = std::ldexp(mu_hi_init, 60);
  for (;;) {
    SolveResult r = solve(build(hi));
    ++result.iterations;
    if (r.status != LpStatus::Feasible) break;
    lo = hi;
    witness = r.witness;
    if (hi >= cap)
      throw BracketCapError(
          "no finite infeasible bracket found below 2^60 * mu_hi_init; "
          "the model appears to violate boundedness assumptions "
          "(e.g. zero synthesis demands)");
    hi *= 2.0;
  }

  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // tol below double resolution
    SolveResult r = solve(build(mid));
    ++result.iterations;
    if (r.status == LpStatus::Feasible) {
      lo = mid;
      witness = r.witness;
    } else {
      hi = mid;
    }
  }

  result.mu_max = lo;
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  result.witness_at_mu_max = witness;
  return result;
}

FeasibilityProfile feasibility_profile(const ProblemBuilder& build,
                                       const std::vector<double>& mus) {
  FeasibilityProfile profile;
  profile.statuses.reserve(mus.size());
  bool seen_infeasible = false;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    LpStatus status = solve(build(mus[i])).status;
    profile.statuses.push_back(status);
    if (status != LpStatus::Feasible) {
      seen_infeasible = true;
    } else if (seen_infeasible && !profile.first_monotonicity_violation) {
      profile.first_monotonicity_violation = i;
    }
  }
  return profile;
}

}  // namespace rba
