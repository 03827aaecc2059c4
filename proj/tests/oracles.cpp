#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "rba/random_model.hpp"

namespace oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Normal form: all variables z >= 0 with optional finite uppers, equality
// rows only. Free variables are split, upper-only variables negated.
struct NormalForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd upper;
};

NormalForm normalize(const rba::LinearProgram& lp) {
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m_eq = lp.a_eq.rows();
  const Eigen::Index m_iq = lp.a_ineq.rows();
  const Eigen::Index m = m_eq + m_iq;

  Eigen::MatrixXd full(m, n);
  if (m_eq > 0) full.topRows(m_eq) = lp.a_eq;
  if (m_iq > 0) full.bottomRows(m_iq) = lp.a_ineq;
  Eigen::VectorXd rhs(m);
  rhs << lp.b_eq, lp.b_ineq;

  std::vector<Eigen::VectorXd> cols;
  std::vector<double> uppers;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd col = full.col(j);
    if (std::isfinite(lp.lower[j])) {
      rhs -= col * lp.lower[j];
      cols.push_back(col);
      uppers.push_back(std::isfinite(lp.upper[j]) ? lp.upper[j] - lp.lower[j] : kInf);
    } else if (std::isfinite(lp.upper[j])) {
      rhs -= col * lp.upper[j];
      cols.push_back(-col);
      uppers.push_back(kInf);
    } else {
      cols.push_back(col);
      uppers.push_back(kInf);
      cols.push_back(-col);
      uppers.push_back(kInf);
    }
  }
  for (Eigen::Index r = 0; r < m_iq; ++r) {
    Eigen::VectorXd slack = Eigen::VectorXd::Zero(m);
    slack[m_eq + r] = 1.0;
    cols.push_back(slack);
    uppers.push_back(kInf);
  }

  NormalForm nf;
  nf.a.resize(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) nf.a.col(static_cast<Eigen::Index>(j)) = cols[j];
  nf.b = rhs;
  nf.upper = Eigen::Map<Eigen::VectorXd>(uppers.data(), static_cast<Eigen::Index>(uppers.size()));
  return nf;
}

}  // namespace

bool enumerate_feasible(const rba::LinearProgram& lp, double tol) {
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j)
    if (!(lp.lower[j] <= lp.upper[j])) return false;
  NormalForm nf = normalize(lp);
  const Eigen::Index m = nf.a.rows();
  const Eigen::Index n = nf.a.cols();
  if (m == 0) return true;

  const double scale = 1.0 + nf.b.cwiseAbs().maxCoeff();

  // Independent rows via modified Gram-Schmidt; run once on A and once on
  // [A b] to detect inconsistent equalities.
  auto pick_rows = [](const Eigen::MatrixXd& mat, double eps) {
    std::vector<Eigen::Index> picked;
    std::vector<Eigen::VectorXd> ortho;
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      Eigen::VectorXd r = mat.row(i).transpose();
      double norm0 = r.norm();
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : ortho) r -= q.dot(r) * q;
      if (r.norm() > eps * (1.0 + norm0)) {
        ortho.push_back(r.normalized());
        picked.push_back(i);
      }
    }
    return picked;
  };
  std::vector<Eigen::Index> rows = pick_rows(nf.a, 1e-10);
  {
    Eigen::MatrixXd aug(m, n + 1);
    aug.leftCols(n) = nf.a;
    aug.col(n) = nf.b;
    if (pick_rows(aug, 1e-10).size() != rows.size()) return false;  // inconsistent
  }
  const Eigen::Index rank = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd a_r(rank, n);
  Eigen::VectorXd b_r(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    a_r.row(i) = nf.a.row(rows[i]);
    b_r[i] = nf.b[rows[i]];
  }

  if (rank == 0) return nf.b.cwiseAbs().maxCoeff() <= tol * scale;
  if (n < rank) return false;
  if (n > 62) throw std::runtime_error("oracle: too many columns to enumerate");

  auto check_basis = [&](const std::vector<Eigen::Index>& cols_in_basis) -> bool {
    Eigen::MatrixXd basis_matrix(rank, rank);
    for (Eigen::Index k = 0; k < rank; ++k) basis_matrix.col(k) = a_r.col(cols_in_basis[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> blu(basis_matrix);
    blu.setThreshold(1e-10);
    if (blu.rank() < rank) return false;

    std::vector<Eigen::Index> bounded_nonbasic;
    std::vector<char> in_basis(n, 0);
    for (Eigen::Index c : cols_in_basis) in_basis[c] = 1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!in_basis[j] && std::isfinite(nf.upper[j])) bounded_nonbasic.push_back(j);
    if (bounded_nonbasic.size() > 16)
      throw std::runtime_error("oracle: too many two-sided nonbasic columns");

    const std::uint64_t assignments = 1ULL << bounded_nonbasic.size();
    for (std::uint64_t mask = 0; mask < assignments; ++mask) {
      Eigen::VectorXd rhs = b_r;
      for (std::size_t k = 0; k < bounded_nonbasic.size(); ++k)
        if (mask & (1ULL << k)) {
          Eigen::Index j = bounded_nonbasic[k];
          rhs -= a_r.col(j) * nf.upper[j];
        }
      Eigen::VectorXd zb = blu.solve(rhs);
      bool ok = true;
      for (Eigen::Index k = 0; k < rank && ok; ++k) {
        Eigen::Index j = cols_in_basis[k];
        if (zb[k] < -tol * scale) ok = false;
        if (std::isfinite(nf.upper[j]) && zb[k] > nf.upper[j] + tol * scale) ok = false;
      }
      if (!ok) continue;
      // Verify the full (possibly rank-deficient) system.
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < bounded_nonbasic.size(); ++k)
        if (mask & (1ULL << k)) z[bounded_nonbasic[k]] = nf.upper[bounded_nonbasic[k]];
      for (Eigen::Index k = 0; k < rank; ++k) z[cols_in_basis[k]] = zb[k];
      if ((nf.a * z - nf.b).cwiseAbs().maxCoeff() <= 10 * tol * scale) return true;
    }
    return false;
  };

  // Lexicographic enumeration of column subsets of size `rank`.
  std::vector<Eigen::Index> idx(rank);
  for (Eigen::Index i = 0; i < rank; ++i) idx[i] = i;
  for (;;) {
    if (check_basis(idx)) return true;
    Eigen::Index i = rank - 1;
    while (i >= 0 && idx[i] == n - rank + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (Eigen::Index k = i + 1; k < rank; ++k) idx[k] = idx[k - 1] + 1;
  }
  return false;
}

GridScan grid_scan_mu(const rba::ProblemBuilder& build, double step, double hi_init) {
  GridScan out;
  auto feasible = [&](double mu) {
    return rba::solve(build(mu)).status == rba::LpStatus::Feasible;
  };
  if (!feasible(0.0)) {
    out.zero_infeasible = true;
    return out;
  }
  double hi = hi_init;
  int guard = 0;
  while (feasible(hi)) {
    hi *= 2.0;
    if (++guard > 60) throw std::runtime_error("grid_scan_mu: no infeasible ceiling found");
  }
  double mu = 0.0;
  long k = 0;
  for (;;) {
    double next = step * static_cast<double>(k + 1);
    if (next > hi || !feasible(next)) break;
    mu = next;
    ++k;
  }
  out.mu_last_feasible = mu;
  return out;
}

rba::LinearProgram random_lp(std::uint64_t seed) {
  rba::Rng rng(seed);
  const Eigen::Index n = rng.uniform_int(2, 6);
  const Eigen::Index m_eq = rng.uniform_int(0, 2);
  const Eigen::Index m_iq = rng.uniform_int(1, 5);

  rba::LinearProgram lp = rba::LinearProgram::with_vars(n);
  lp.a_eq.resize(m_eq, n);
  lp.b_eq.resize(m_eq);
  lp.a_ineq.resize(m_iq, n);
  lp.b_ineq.resize(m_iq);
  auto coef = [&rng]() { return static_cast<double>(rng.uniform_int(-3, 3)); };
  for (Eigen::Index i = 0; i < m_eq; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.a_eq(i, j) = coef();
    lp.b_eq[i] = coef();
  }
  for (Eigen::Index i = 0; i < m_iq; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.a_ineq(i, j) = coef();
    lp.b_ineq[i] = coef();
  }
  int boxed = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double roll = rng.uniform(0.0, 1.0);
    if (roll < 0.6) {
      lp.lower[j] = 0.0;
    } else if (roll < 0.75 && boxed < 2) {
      lp.lower[j] = 0.0;
      lp.upper[j] = static_cast<double>(rng.uniform_int(1, 3));
      ++boxed;
    } else if (roll < 0.9) {
      lp.upper[j] = static_cast<double>(rng.uniform_int(0, 3));  // upper-only
    }  // else free
  }
  return lp;
}

std::vector<double> fd_cost_gradient(const rba::ToyState& x0, const rba::ControlSignal& u,
                                     const rba::ToyParams& p, double t_end, double dt_max,
                                     double h) {
  std::vector<double> grad(u.values.size());
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    rba::ControlSignal up = u, dn = u;
    up.values[k] += h;
    dn.values[k] -= h;
    double j_up = rba::cost(rba::integrate(x0, up, p, t_end, dt_max));
    double j_dn = rba::cost(rba::integrate(x0, dn, p, t_end, dt_max));
    grad[k] = (j_up - j_dn) / (2.0 * h);
  }
  return grad;
}

std::vector<double> adjoint_interval_gradients(const rba::Trajectory& traj,
                                               const rba::AdjointGrid& adj,
                                               const rba::ToyParams& p,
                                               const std::vector<double>& control_grid) {
  std::vector<double> h1(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    h1[i] = rba::switching(traj.states[i], adj.values[i], p);
  std::vector<double> grad(control_grid.size() - 1, 0.0);
  std::size_t node = 0;
  for (std::size_t k = 0; k + 1 < control_grid.size(); ++k) {
    double t1 = control_grid[k + 1];
    while (node + 1 < traj.times.size() && traj.times[node + 1] <= t1 + 1e-12) {
      grad[k] += 0.5 * (h1[node] + h1[node + 1]) * (traj.times[node + 1] - traj.times[node]);
      ++node;
    }
  }
  return grad;
}

double steady_state_alpha_scan(const rba::ToyParams& p) {
  if (p.flux_mode != rba::FluxMode::Constant)
    throw std::runtime_error("steady_state_alpha_scan supports constant fluxes only");
  // Closed-form steady state per min-law branch; imbalance kE*E - kM*M is
  // increasing in alpha, so its zero is the balanced allocation.
  auto imbalance = [&p](double alpha) {
    double e_lim_e = (-p.gamma_e + std::sqrt(p.gamma_e * p.gamma_e +
                                             4.0 * p.kappa_e * alpha * p.nu_e_const)) /
                     (2.0 * p.kappa_e);
    double mu_e = p.kappa_e * e_lim_e;
    double m_e = (1.0 - alpha) * p.nu_m_const / (mu_e + p.gamma_m);
    if (p.kappa_e * e_lim_e <= p.kappa_m * m_e)
      return p.kappa_e * e_lim_e - p.kappa_m * m_e;

    double m_lim_m = (-p.gamma_m + std::sqrt(p.gamma_m * p.gamma_m +
                                             4.0 * p.kappa_m * (1.0 - alpha) * p.nu_m_const)) /
                     (2.0 * p.kappa_m);
    double mu_m = p.kappa_m * m_lim_m;
    double e_m = alpha * p.nu_e_const / (mu_m + p.gamma_e);
    return p.kappa_e * e_m - p.kappa_m * m_lim_m;
  };
  double lo = 0.0, hi = 1.0;
  const int n_scan = 100000;
  double prev = imbalance(0.0);
  for (int i = 1; i <= n_scan; ++i) {
    double a = static_cast<double>(i) / n_scan;
    double cur = imbalance(a);
    if (prev <= 0.0 && cur >= 0.0) {
      lo = static_cast<double>(i - 1) / n_scan;
      hi = a;
      break;
    }
    prev = cur;
  }
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (imbalance(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
