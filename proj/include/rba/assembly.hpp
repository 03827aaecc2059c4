#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rba/lp.hpp"
#include "rba/model.hpp"

namespace rba {

// ---------------------------------------------------------------------------
// Macromolecular turnover

struct TurnoverSpec {
  Eigen::VectorXd gamma_s;   // n_s metabolite turnover rates (1/h)
  Eigen::VectorXd gamma_y;   // n_y machine turnover rates
  Eigen::VectorXd gamma_pg;  // n_g protein turnover rates
  Eigen::MatrixXd release;   // n_s x n_y residue release per degraded machine
  Eigen::MatrixXd atp_cost;  // n_s x n_y proteolysis demand per degraded machine

  static TurnoverSpec zeros(const Dimensions& dims);
  TurnoverSpec scaled(double factor) const;
  bool is_zero() const;
  void validate(const Dimensions& dims) const;
};

// Linear turnover-demand corrections inserted into the balance and synthesis
// constraints. gamma_m_* entries are exactly gamma * composition.
struct TurnoverMatrices {
  Eigen::MatrixXd gamma_s_y;   // n_s x n_y
  Eigen::MatrixXd gamma_s_b;   // n_s x n_b
  Eigen::MatrixXd gamma_s_pg;  // n_s x n_g
  Eigen::MatrixXd gamma_m_y;   // n_p x n_y
  Eigen::MatrixXd gamma_m_pg;  // n_p x n_g
};

TurnoverMatrices build_turnover_matrices(const MetabolicModel& model, const TurnoverSpec& t);

/// Turnover document: name-keyed rate and degradation maps resolved against a
/// compiled model.
TurnoverSpec load_turnover_file(const std::string& path, const MetabolicModel& model);

// ---------------------------------------------------------------------------
// Eukaryotic extension

struct EukaryoticExtension {
  Eigen::Index n_com = 0;  // organelle compartments, cytosol not counted
  std::vector<std::pair<Eigen::Index, Eigen::Index>> interfaces;  // compartment fraction indices
  std::vector<std::string> fraction_names;  // cytosol, compartments..., interfaces...

  Eigen::MatrixXd c_s_f;  // n_s x n_frac fixed-composition coupling columns
  Eigen::VectorXd b_hat;  // n_frac scales for the coupling columns

  Eigen::MatrixXd c_d_iq_y, c_d_iq_g, c_d_iq_f;  // non-saturated density rows
  Eigen::MatrixXd c_d_eq_y, c_d_eq_g, c_d_eq_f;  // saturated density rows

  Eigen::MatrixXd c_f_f;   // fraction normalization rows
  Eigen::VectorXd c_bar;

  Eigen::VectorXd f_lower, f_upper;  // compartment fraction bounds (n_com + 1)

  Eigen::Index n_frac() const {
    return n_com + 1 + static_cast<Eigen::Index>(interfaces.size());
  }
  Eigen::MatrixXd i_v() const;  // selector with f_V = I_V f
  void validate(const Dimensions& dims) const;
};

EukaryoticExtension compile_eukaryote(const RawModelSpec& spec, const MetabolicModel& model);

// ---------------------------------------------------------------------------
// Assemblers. Pure functions of immutable inputs; row and column ordering is
// fixed: variables (Y, nu[, f]); equalities are balance, saturated-density,
// normalization; inequalities are capacity, flux forward/backward, density,
// fraction upper/lower.

LinearProgram assemble_prokaryotic(const MetabolicModel& model, double mu);

LinearProgram assemble_turnover(const MetabolicModel& model, const TurnoverSpec& t, double mu);

LinearProgram assemble_eukaryotic(const MetabolicModel& model, const EukaryoticExtension& ext,
                                  double mu);

// Turnover composed with the compartmentalized problem (same Gamma insertion
// in constraints I and II).
LinearProgram assemble_eukaryotic(const MetabolicModel& model, const EukaryoticExtension& ext,
                                  const TurnoverSpec& t, double mu);

// Offsets of the constraint blocks in an assembled LP.
struct RowLayout {
  Eigen::Index eq_balance = 0, n_balance = 0;
  Eigen::Index eq_density = 0, n_density_eq = 0;
  Eigen::Index eq_normalization = 0, n_norm = 0;
  Eigen::Index iq_capacity = 0, n_capacity = 0;
  Eigen::Index iq_flux_fwd = 0, iq_flux_bwd = 0, n_flux = 0;
  Eigen::Index iq_density = 0, n_density_iq = 0;
  Eigen::Index iq_frac_upper = 0, n_frac_upper = 0;
  Eigen::Index iq_frac_lower = 0, n_frac_lower = 0;
  Eigen::Index var_y = 0, var_nu = 0, var_f = 0;
};

RowLayout prokaryotic_layout(const Dimensions& dims);
RowLayout eukaryotic_layout(const Dimensions& dims, const EukaryoticExtension& ext);

}  // namespace rba
