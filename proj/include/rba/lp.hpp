#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rba {

// Sentinel for missing bounds. Never replaced by a large finite number.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

enum class LpStatus { Feasible, Infeasible, UnboundedObjective };

const char* to_string(LpStatus s);

/// Dense LP in the form
///   a_eq x = b_eq,  a_ineq x <= b_ineq,  lower <= x <= upper,
/// with an optional objective that is maximized when nonzero.
struct LinearProgram {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd objective;
  std::vector<std::string> variable_names;

  Eigen::Index num_vars() const { return lower.size(); }
  bool has_objective() const;

  // n variables, no rows, free bounds, zero objective.
  static LinearProgram with_vars(Eigen::Index n);

  void validate() const;  // shape consistency, lower <= upper
};

struct SolveOptions {
  std::optional<long> iteration_limit;  // default 50*(n + m_e + m_i)
  double feas_tol = 1e-9;               // relative feasibility tolerance
  double pivot_tol = 1e-10;
  // Dantzig pricing switches to Bland's rule after this many degenerate pivots.
  long bland_after = 1000;
};

struct SolveResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd witness;  // size n when feasible (or at the unbounded ray base)
  double max_residual_eq = 0;
  double max_residual_ineq = 0;
  long iterations = 0;
  // A nonbasic column with zero reduced cost exists at termination, so the
  // optimal point is not unique.
  bool degenerate_optimum = false;
};

/// Phase-1 revised simplex feasibility test; phase-2 maximization when the
/// objective is nonzero. Deterministic for identical input.
SolveResult solve(const LinearProgram& lp, const SolveOptions& opts = {});

struct ResidualReport {
  double max_eq = 0;
  double max_ineq = 0;
  double max_bound = 0;
  bool pass = false;
  double worst() const { return std::max(max_eq, std::max(max_ineq, max_bound)); }
};

/// Per-block maximal constraint violation of x; pass iff all blocks <= tol.
ResidualReport check_point(const LinearProgram& lp, const Eigen::VectorXd& x, double tol);

/// Text tableau dump, columns headed by variable_names.
void dump_tableau(const LinearProgram& lp, std::ostream& os);

}  // namespace rba
