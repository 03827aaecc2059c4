#include "rba/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rba/errors.hpp"

namespace rba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ColState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// LU of the current basis with solves for B z = r and B^T y = c.
struct BasisFactor {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  const Eigen::MatrixXd& basis;

  explicit BasisFactor(const Eigen::MatrixXd& b) : lu(b), basis(b) {}

  Eigen::VectorXd solve(const Eigen::VectorXd& r) const { return lu.solve(r); }

  // Two rounds of iterative refinement keep basic values accurate even on the
  // nearly singular bases that appear next to the feasibility boundary.
  Eigen::VectorXd solve_refined(const Eigen::VectorXd& r) const {
    Eigen::VectorXd x = lu.solve(r);
    for (int round = 0; round < 2; ++round) {
      Eigen::VectorXd residual = r - basis * x;
      x += lu.solve(residual);
    }
    return x;
  }

  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& c) const {
    // B = P^-1 L U  =>  B^T y = c  <=>  U^T z = c, L^T w = z, y = P^T w.
    const Eigen::MatrixXd& packed = lu.matrixLU();
    Eigen::VectorXd z = packed.triangularView<Eigen::Upper>().transpose().solve(c);
    Eigen::VectorXd w = packed.triangularView<Eigen::UnitLower>().transpose().solve(z);
    return lu.permutationP().transpose() * w;
  }
};

// Bounded-variable revised simplex over the working system
//   A z = b,  lo <= z <= hi,   z = [x, slacks, artificials].
struct Simplex {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd lo, hi;
  Eigen::Index n_real;  // structural + slack columns; artificials follow
  std::vector<Eigen::Index> basis;
  std::vector<ColState> state;
  Eigen::VectorXd x_basic;
  long iterations = 0;
  long degenerate_pivots = 0;
  long iteration_limit = 0;
  double pivot_tol = 1e-10;
  long bland_after = 1000;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }

  double nonbasic_value(Eigen::Index j) const {
    switch (state[j]) {
      case ColState::AtLower: return lo[j];
      case ColState::AtUpper: return hi[j];
      default: return 0.0;
    }
  }

  Eigen::VectorXd nonbasic_rhs() const {
    Eigen::VectorXd r = b;
    for (Eigen::Index j = 0; j < cols(); ++j) {
      if (state[j] == ColState::Basic) continue;
      double v = nonbasic_value(j);
      if (v != 0.0) r -= a.col(j) * v;
    }
    return r;
  }

  Eigen::VectorXd full_point() const {
    Eigen::VectorXd z(cols());
    for (Eigen::Index j = 0; j < cols(); ++j)
      z[j] = (state[j] == ColState::Basic) ? 0.0 : nonbasic_value(j);
    for (Eigen::Index i = 0; i < rows(); ++i) z[basis[i]] = x_basic[i];
    return z;
  }

  enum class PhaseOutcome { Optimal, Unbounded };

  // Maximizes cost over the current bounds. Bland's rule engages after
  // bland_after degenerate pivots. Stops early once the objective reaches
  // stop_at (the known bound of a phase-1 problem).
  PhaseOutcome run(const Eigen::VectorXd& cost, double stop_at = kInf) {
    const double rc_tol = 1e-9 * (1.0 + cost.cwiseAbs().maxCoeff());
    Eigen::MatrixXd basis_matrix(rows(), rows());
    for (;;) {
      if (++iterations > iteration_limit)
        throw IterationLimitError("simplex iteration limit exceeded (" +
                                  std::to_string(iteration_limit) + ")");
      for (Eigen::Index i = 0; i < rows(); ++i) basis_matrix.col(i) = a.col(basis[i]);
      BasisFactor factor(basis_matrix);
      x_basic = factor.solve_refined(nonbasic_rhs());

      if (stop_at < kInf) {
        double value = 0.0;
        for (Eigen::Index i = 0; i < rows(); ++i) value += cost[basis[i]] * x_basic[i];
        for (Eigen::Index j = 0; j < cols(); ++j)
          if (state[j] != ColState::Basic && cost[j] != 0.0) value += cost[j] * nonbasic_value(j);
        if (value >= stop_at) return PhaseOutcome::Optimal;
      }

      Eigen::VectorXd cost_basic(rows());
      for (Eigen::Index i = 0; i < rows(); ++i) cost_basic[i] = cost[basis[i]];
      Eigen::VectorXd y = factor.solve_transposed(cost_basic);

      const bool bland = degenerate_pivots > bland_after;
      Eigen::Index entering = -1;
      int direction = 0;
      double best_score = rc_tol;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (state[j] == ColState::Basic) continue;
        if (hi[j] - lo[j] <= 0.0) continue;  // fixed column cannot move
        double d = cost[j] - y.dot(a.col(j));
        int dir = 0;
        if (state[j] == ColState::AtLower && d > rc_tol) dir = +1;
        else if (state[j] == ColState::AtUpper && d < -rc_tol) dir = -1;
        else if (state[j] == ColState::FreeZero && std::abs(d) > rc_tol) dir = d > 0 ? +1 : -1;
        if (dir == 0) continue;
        if (bland) { entering = j; direction = dir; break; }
        if (std::abs(d) > best_score) { best_score = std::abs(d); entering = j; direction = dir; }
      }
      if (entering < 0) return PhaseOutcome::Optimal;

      Eigen::VectorXd w = factor.solve(a.col(entering));

      // Ratio test: entering moves by t >= 0 in `direction`; basic i moves by
      // -direction * w[i] * t.
      double t_limit = kInf;
      if (std::isfinite(lo[entering]) && std::isfinite(hi[entering]))
        t_limit = hi[entering] - lo[entering];
      Eigen::Index leaving_row = -1;
      bool leaving_at_upper = false;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        double g = -direction * w[i];
        double t_i = kInf;
        bool at_upper = false;
        if (g > pivot_tol) {
          if (std::isfinite(hi[basis[i]])) { t_i = (hi[basis[i]] - x_basic[i]) / g; at_upper = true; }
        } else if (g < -pivot_tol) {
          if (std::isfinite(lo[basis[i]])) t_i = (lo[basis[i]] - x_basic[i]) / g;
        }
        if (t_i == kInf) continue;
        if (t_i < 0.0) t_i = 0.0;  // roundoff on a degenerate vertex
        bool better = t_i < t_limit - 1e-15;
        if (!better && leaving_row >= 0 && std::abs(t_i - t_limit) <= 1e-15) {
          // Tie-break: Bland picks the smallest variable index, otherwise the
          // largest pivot magnitude for stability.
          better = bland ? basis[i] < basis[leaving_row]
                         : std::abs(w[i]) > std::abs(w[leaving_row]);
        }
        if (better) { t_limit = t_i; leaving_row = i; leaving_at_upper = at_upper; }
      }

      if (t_limit == kInf) return PhaseOutcome::Unbounded;
      if (t_limit <= 1e-12) ++degenerate_pivots;

      if (leaving_row < 0) {
        // Bound flip: the entering variable traverses its full range.
        state[entering] = direction > 0 ? ColState::AtUpper : ColState::AtLower;
        continue;
      }
      Eigen::Index leaving = basis[leaving_row];
      state[leaving] = leaving_at_upper ? ColState::AtUpper : ColState::AtLower;
      state[entering] = ColState::Basic;
      basis[leaving_row] = entering;
    }
  }

  // Reduced costs of the final basis for the degeneracy report.
  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
    Eigen::MatrixXd basis_matrix(rows(), rows());
    for (Eigen::Index i = 0; i < rows(); ++i) basis_matrix.col(i) = a.col(basis[i]);
    BasisFactor factor(basis_matrix);
    Eigen::VectorXd cost_basic(rows());
    for (Eigen::Index i = 0; i < rows(); ++i) cost_basic[i] = cost[basis[i]];
    Eigen::VectorXd y = factor.solve_transposed(cost_basic);
    Eigen::VectorXd d(cols());
    for (Eigen::Index j = 0; j < cols(); ++j) d[j] = cost[j] - y.dot(a.col(j));
    return d;
  }
};

double residual_eq(const LinearProgram& lp, const Eigen::VectorXd& x) {
  if (lp.a_eq.rows() == 0) return 0.0;
  return (lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff();
}

double residual_ineq(const LinearProgram& lp, const Eigen::VectorXd& x) {
  if (lp.a_ineq.rows() == 0) return 0.0;
  return (lp.a_ineq * x - lp.b_ineq).cwiseMax(0.0).maxCoeff();
}

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Feasible: return "feasible";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::UnboundedObjective: return "unbounded-objective";
  }
  return "?";
}

bool LinearProgram::has_objective() const {
  return objective.size() > 0 && objective.cwiseAbs().maxCoeff() > 0.0;
}

LinearProgram LinearProgram::with_vars(Eigen::Index n) {
  LinearProgram lp;
  lp.a_eq.resize(0, n);
  lp.b_eq.resize(0);
  lp.a_ineq.resize(0, n);
  lp.b_ineq.resize(0);
  lp.lower = Eigen::VectorXd::Constant(n, -kUnbounded);
  lp.upper = Eigen::VectorXd::Constant(n, kUnbounded);
  lp.objective = Eigen::VectorXd::Zero(n);
  return lp;
}

void LinearProgram::validate() const {
  const Eigen::Index n = num_vars();
  if (upper.size() != n || objective.size() != n)
    throw DimensionError("bound/objective length mismatch");
  if (a_eq.rows() != b_eq.size() || a_ineq.rows() != b_ineq.size())
    throw DimensionError("constraint matrix/rhs row mismatch");
  if ((a_eq.rows() > 0 && a_eq.cols() != n) || (a_ineq.rows() > 0 && a_ineq.cols() != n))
    throw DimensionError("constraint matrix column count != num_vars");
  if (!variable_names.empty() && static_cast<Eigen::Index>(variable_names.size()) != n)
    throw DimensionError("variable_names length mismatch");
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(lower[j] <= upper[j]))
      throw ValidationError("lower > upper for variable " + std::to_string(j));
}

SolveResult solve(const LinearProgram& lp, const SolveOptions& opts) {
  lp.validate();
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m_eq = lp.a_eq.rows();
  const Eigen::Index m_iq = lp.a_ineq.rows();
  const Eigen::Index m = m_eq + m_iq;

  SolveResult result;
  if (m == 0) {
    result.status = LpStatus::Feasible;
    result.witness = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j)
      result.witness[j] = std::min(std::max(0.0, lp.lower[j]), lp.upper[j]);
    if (lp.has_objective()) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double c = lp.objective[j];
        if (c > 0 && !std::isfinite(lp.upper[j])) { result.status = LpStatus::UnboundedObjective; break; }
        if (c < 0 && !std::isfinite(lp.lower[j])) { result.status = LpStatus::UnboundedObjective; break; }
        if (c > 0) result.witness[j] = lp.upper[j];
        if (c < 0) result.witness[j] = lp.lower[j];
      }
    }
    return result;
  }

  // Working system: x (n), one slack per inequality row, one artificial per row.
  const Eigen::Index n_real = n + m_iq;
  const Eigen::Index total = n_real + m;
  Simplex s;
  s.a = Eigen::MatrixXd::Zero(m, total);
  s.b.resize(m);
  s.b << lp.b_eq, lp.b_ineq;
  if (m_eq > 0) s.a.block(0, 0, m_eq, n) = lp.a_eq;
  if (m_iq > 0) {
    s.a.block(m_eq, 0, m_iq, n) = lp.a_ineq;
    s.a.block(m_eq, n, m_iq, m_iq).setIdentity();
  }
  // Power-of-two row equilibration: exact, deterministic, and keeps badly
  // scaled rows (mu in the doubling search can reach 2^60) workable.
  for (Eigen::Index i = 0; i < m; ++i) {
    double row_max = s.a.row(i).cwiseAbs().maxCoeff();
    if (row_max <= 0.0 || !std::isfinite(row_max)) continue;
    double scale = std::ldexp(1.0, -std::ilogb(row_max));
    if (scale != 1.0) {
      s.a.row(i) *= scale;
      s.b[i] *= scale;
    }
  }
  s.lo = Eigen::VectorXd::Constant(total, 0.0);
  s.hi = Eigen::VectorXd::Constant(total, kInf);
  s.lo.head(n) = lp.lower;
  s.hi.head(n) = lp.upper;
  s.n_real = n_real;
  s.pivot_tol = opts.pivot_tol;
  s.iteration_limit = opts.iteration_limit.value_or(50 * (n + m));
  // Bland must have room to engage before the iteration limit trips.
  s.bland_after = std::min(opts.bland_after, std::max<long>(s.iteration_limit / 2, 1));

  s.state.assign(total, ColState::AtLower);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j])) s.state[j] = ColState::AtLower;
    else if (std::isfinite(lp.upper[j])) s.state[j] = ColState::AtUpper;
    else s.state[j] = ColState::FreeZero;
  }

  s.basis.resize(m);
  {
    // Artificial columns signed so the initial basic values are >= 0.
    Eigen::VectorXd r = s.b;
    for (Eigen::Index j = 0; j < n_real; ++j) {
      double v = s.nonbasic_value(j);
      if (v != 0.0) r -= s.a.col(j) * v;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      s.a(i, n_real + i) = r[i] >= 0.0 ? 1.0 : -1.0;
      s.basis[i] = n_real + i;
      s.state[n_real + i] = ColState::Basic;
    }
  }

  const double feas_tol = opts.feas_tol * (1.0 + (m > 0 ? s.b.cwiseAbs().maxCoeff() : 0.0));

  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(total);
  phase1_cost.tail(m).setConstant(-1.0);
  // Bounded above by zero; stop as soon as the artificials vanish.
  s.run(phase1_cost, -1e-12 * (1.0 + s.b.cwiseAbs().maxCoeff()));

  double worst_artificial = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (s.basis[i] >= n_real) worst_artificial = std::max(worst_artificial, std::abs(s.x_basic[i]));
  result.iterations = s.iterations;
  if (worst_artificial > feas_tol) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Pin artificials at zero for phase 2.
  for (Eigen::Index j = n_real; j < total; ++j) s.hi[j] = 0.0;

  result.status = LpStatus::Feasible;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  cost.head(n) = lp.objective;
  if (lp.has_objective()) {
    if (s.run(cost) == Simplex::PhaseOutcome::Unbounded)
      result.status = LpStatus::UnboundedObjective;
    result.iterations = s.iterations;
  }

  Eigen::VectorXd z = s.full_point();
  result.witness = z.head(n);
  result.max_residual_eq = residual_eq(lp, result.witness);
  result.max_residual_ineq = residual_ineq(lp, result.witness);

  if (result.status == LpStatus::Feasible) {
    const double rc_tol = 1e-9 * (1.0 + cost.cwiseAbs().maxCoeff());
    Eigen::VectorXd d = s.reduced_costs(cost);
    for (Eigen::Index j = 0; j < n_real; ++j) {
      if (s.state[j] == ColState::Basic) continue;
      if (s.hi[j] - s.lo[j] <= 0.0) continue;
      if (std::abs(d[j]) <= rc_tol) { result.degenerate_optimum = true; break; }
    }
  }
  return result;
}

ResidualReport check_point(const LinearProgram& lp, const Eigen::VectorXd& x, double tol) {
  if (x.size() != lp.num_vars())
    throw DimensionError("check_point: point length " + std::to_string(x.size()) +
                         " != num_vars " + std::to_string(lp.num_vars()));
  ResidualReport rep;
  rep.max_eq = residual_eq(lp, x);
  rep.max_ineq = residual_ineq(lp, x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(lp.lower[j])) rep.max_bound = std::max(rep.max_bound, lp.lower[j] - x[j]);
    if (std::isfinite(lp.upper[j])) rep.max_bound = std::max(rep.max_bound, x[j] - lp.upper[j]);
  }
  rep.max_bound = std::max(rep.max_bound, 0.0);
  rep.pass = rep.max_eq <= tol && rep.max_ineq <= tol && rep.max_bound <= tol;
  return rep;
}

void dump_tableau(const LinearProgram& lp, std::ostream& os) {
  const Eigen::Index n = lp.num_vars();
  auto name = [&](Eigen::Index j) {
    return lp.variable_names.empty() ? "x" + std::to_string(j) : lp.variable_names[j];
  };
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%12.6g", v);
    return std::string(buf);
  };
  os << "lp: " << n << " vars, " << lp.a_eq.rows() << " eq, " << lp.a_ineq.rows() << " ineq\n";
  os << std::string(14, ' ');
  for (Eigen::Index j = 0; j < n; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%12s", name(j).substr(0, 12).c_str());
    os << buf;
  }
  os << "           rhs\n";
  if (lp.has_objective()) {
    os << "max         : ";
    for (Eigen::Index j = 0; j < n; ++j) os << cell(lp.objective[j]);
    os << '\n';
  }
  for (Eigen::Index i = 0; i < lp.a_eq.rows(); ++i) {
    os << "eq[" << i << "]";
    os << std::string(i < 10 ? 8 : 7, ' ') << ": ";
    for (Eigen::Index j = 0; j < n; ++j) os << cell(lp.a_eq(i, j));
    os << "  = " << cell(lp.b_eq[i]) << '\n';
  }
  for (Eigen::Index i = 0; i < lp.a_ineq.rows(); ++i) {
    os << "iq[" << i << "]";
    os << std::string(i < 10 ? 8 : 7, ' ') << ": ";
    for (Eigen::Index j = 0; j < n; ++j) os << cell(lp.a_ineq(i, j));
    os << " <= " << cell(lp.b_ineq[i]) << '\n';
  }
  os << "bounds      : ";
  for (Eigen::Index j = 0; j < n; ++j) {
    std::ostringstream b;
    b << '[' << lp.lower[j] << ',' << lp.upper[j] << ']';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%12s", b.str().substr(0, 12).c_str());
    os << buf;
  }
  os << '\n';
}

}  // namespace rba
