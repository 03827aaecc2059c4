#include "rba/assembly.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "rba/errors.hpp"

namespace rba {

namespace {

void require_shape(const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* name) {
  if (m.rows() != r || m.cols() != c)
    throw DimensionError(std::string(name) + " has shape " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(r) + "x" +
                         std::to_string(c));
}

Eigen::Index index_of(const std::vector<std::string>& names, const std::string& name,
                      const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw ValidationError(std::string(what) + " '" + name + "' not found in model");
  return static_cast<Eigen::Index>(it - names.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Turnover

TurnoverSpec TurnoverSpec::zeros(const Dimensions& dims) {
  TurnoverSpec t;
  t.gamma_s = Eigen::VectorXd::Zero(dims.n_s);
  t.gamma_y = Eigen::VectorXd::Zero(dims.n_y());
  t.gamma_pg = Eigen::VectorXd::Zero(dims.n_g);
  t.release = Eigen::MatrixXd::Zero(dims.n_s, dims.n_y());
  t.atp_cost = Eigen::MatrixXd::Zero(dims.n_s, dims.n_y());
  return t;
}

TurnoverSpec TurnoverSpec::scaled(double factor) const {
  TurnoverSpec t = *this;
  t.gamma_s *= factor;
  t.gamma_y *= factor;
  t.gamma_pg *= factor;
  return t;
}

bool TurnoverSpec::is_zero() const {
  auto zero = [](const Eigen::MatrixXd& m) { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0; };
  return zero(gamma_s) && zero(gamma_y) && zero(gamma_pg) && zero(release) && zero(atp_cost);
}

void TurnoverSpec::validate(const Dimensions& dims) const {
  if (gamma_s.size() != dims.n_s || gamma_y.size() != dims.n_y() || gamma_pg.size() != dims.n_g)
    throw DimensionError("turnover rate vector length inconsistent with model dims");
  require_shape(release, dims.n_s, dims.n_y(), "release");
  require_shape(atp_cost, dims.n_s, dims.n_y(), "atp_cost");
  auto nonneg = [](const Eigen::MatrixXd& m, const char* name) {
    if (m.size() > 0 && m.minCoeff() < 0)
      throw ValidationError(std::string("turnover ") + name + " must be >= 0");
  };
  nonneg(gamma_s, "gamma_s");
  nonneg(gamma_y, "gamma_y");
  nonneg(gamma_pg, "gamma_pg");
  nonneg(release, "release");
  nonneg(atp_cost, "atp_cost");
}

TurnoverMatrices build_turnover_matrices(const MetabolicModel& model, const TurnoverSpec& t) {
  t.validate(model.dims);
  const Dimensions& d = model.dims;
  TurnoverMatrices g;
  // Metabolite-space demand per machine: replacement synthesis at rate gamma
  // plus residue release (source) minus proteolysis cost (sink).
  g.gamma_s_y = (model.c_s_y + t.release - t.atp_cost) * t.gamma_y.asDiagonal();
  g.gamma_s_pg = model.c_s_g * t.gamma_pg.asDiagonal();
  g.gamma_s_b.resize(d.n_s, d.n_b);
  for (Eigen::Index j = 0; j < d.n_b; ++j)
    g.gamma_s_b.col(j) = model.c_s_b.col(j) * t.gamma_s[model.b_index[j]];
  // Synthesis-side demands scale each column by the machine's own rate.
  g.gamma_m_y = model.c_m_y * t.gamma_y.asDiagonal();
  g.gamma_m_pg = model.c_m_g * t.gamma_pg.asDiagonal();
  return g;
}

TurnoverSpec load_turnover_file(const std::string& path, const MetabolicModel& model) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ParseError("cannot open turnover file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("turnover document: ") + e.what());
  }
  YAML::Node node = root["turnover"] ? root["turnover"] : root;
  if (!node.IsMap() && !node.IsNull())
    throw ParseError("turnover document must be a map");

  TurnoverSpec t = TurnoverSpec::zeros(model.dims);
  auto fill_rates = [&](const YAML::Node& rates, const std::vector<std::string>& names,
                        Eigen::VectorXd& out, const char* what) {
    if (!rates) return;
    for (const auto& kv : rates) {
      Eigen::Index i = index_of(names, kv.first.Scalar(), what);
      out[i] = kv.second.as<double>();
    }
  };
  fill_rates(node["metabolites"], model.metabolite_names, t.gamma_s, "metabolite");
  fill_rates(node["machines"], model.machine_names, t.gamma_y, "machine");
  fill_rates(node["proteins_g"], model.protein_names, t.gamma_pg, "protein");
  auto fill_matrix = [&](const YAML::Node& block, Eigen::MatrixXd& out, const char* what) {
    if (!block) return;
    for (const auto& kv : block) {
      Eigen::Index j = index_of(model.machine_names, kv.first.Scalar(), "machine");
      for (const auto& entry : kv.second) {
        Eigen::Index i = index_of(model.metabolite_names, entry.first.Scalar(), what);
        out(i, j) = entry.second.as<double>();
      }
    }
  };
  fill_matrix(node["degradation_release"], t.release, "degradation_release metabolite");
  fill_matrix(node["degradation_atp_cost"], t.atp_cost, "degradation_atp_cost metabolite");
  t.validate(model.dims);
  return t;
}

// ---------------------------------------------------------------------------
// Row layouts

RowLayout prokaryotic_layout(const Dimensions& d) {
  RowLayout l;
  l.eq_balance = 0;
  l.n_balance = d.n_s;
  l.iq_capacity = 0;
  l.n_capacity = d.n_p;
  l.iq_flux_fwd = d.n_p;
  l.iq_flux_bwd = d.n_p + d.n_m;
  l.n_flux = d.n_m;
  l.iq_density = d.n_p + 2 * d.n_m;
  l.n_density_iq = d.n_c;
  l.var_y = 0;
  l.var_nu = d.n_y();
  l.var_f = -1;
  return l;
}

RowLayout eukaryotic_layout(const Dimensions& d, const EukaryoticExtension& ext) {
  RowLayout l;
  l.eq_balance = 0;
  l.n_balance = d.n_s;
  l.eq_density = d.n_s;
  l.n_density_eq = ext.c_d_eq_f.rows();
  l.eq_normalization = l.eq_density + l.n_density_eq;
  l.n_norm = ext.c_f_f.rows();
  l.iq_capacity = 0;
  l.n_capacity = d.n_p;
  l.iq_flux_fwd = d.n_p;
  l.iq_flux_bwd = d.n_p + d.n_m;
  l.n_flux = d.n_m;
  l.iq_density = d.n_p + 2 * d.n_m;
  l.n_density_iq = ext.c_d_iq_f.rows();
  l.iq_frac_upper = l.iq_density + l.n_density_iq;
  l.n_frac_upper = 0;
  for (Eigen::Index i = 0; i < ext.f_upper.size(); ++i)
    if (std::isfinite(ext.f_upper[i])) ++l.n_frac_upper;
  l.iq_frac_lower = l.iq_frac_upper + l.n_frac_upper;
  l.n_frac_lower = ext.f_lower.size();
  l.var_y = 0;
  l.var_nu = d.n_y();
  l.var_f = d.n_y() + d.n_m;
  return l;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

// Shared core: the balance and capacity blocks carry the turnover
// corrections; flux and density blocks are untouched by turnover. The
// compartment blocks are appended when an extension is present.
LinearProgram assemble(const MetabolicModel& model, const TurnoverSpec& t,
                       const EukaryoticExtension* ext, double mu) {
  if (!(mu >= 0)) throw ValidationError("growth rate mu must be >= 0");
  model.validate();
  t.validate(model.dims);
  const Dimensions& d = model.dims;
  const Eigen::Index n_y = d.n_y();
  const Eigen::Index n_frac = ext ? ext->n_frac() : 0;
  if (ext) ext->validate(d);

  TurnoverMatrices g = build_turnover_matrices(model, t);

  const Eigen::Index n = n_y + d.n_m + n_frac;
  LinearProgram lp = LinearProgram::with_vars(n);
  lp.lower.head(n_y).setZero();
  if (ext) lp.lower.tail(n_frac).setZero();

  lp.variable_names.reserve(n);
  for (Eigen::Index j = 0; j < n_y; ++j) lp.variable_names.push_back("Y:" + model.machine_names[j]);
  for (Eigen::Index j = 0; j < d.n_m; ++j)
    lp.variable_names.push_back("nu:" + model.reaction_names[j]);
  if (ext)
    for (Eigen::Index j = 0; j < n_frac; ++j)
      lp.variable_names.push_back("f:" + ext->fraction_names[j]);

  // Equalities: metabolite balances, then saturated-density and
  // normalization rows for the compartmentalized problem.
  const Eigen::Index m_eq = d.n_s + (ext ? ext->c_d_eq_f.rows() + ext->c_f_f.rows() : 0);
  lp.a_eq = Eigen::MatrixXd::Zero(m_eq, n);
  lp.b_eq = Eigen::VectorXd::Zero(m_eq);

  lp.a_eq.block(0, 0, d.n_s, n_y) = mu * model.c_s_y + g.gamma_s_y;
  lp.a_eq.block(0, n_y, d.n_s, d.n_m) = model.omega;
  lp.b_eq.head(d.n_s) = -((mu * model.c_s_b + g.gamma_s_b) * model.b_fixed) -
                        ((mu * model.c_s_g + g.gamma_s_pg) * model.p_g);
  if (ext) {
    lp.a_eq.block(0, n_y + d.n_m, d.n_s, n_frac) =
        mu * (ext->c_s_f * ext->b_hat.asDiagonal());
    const Eigen::Index n_deq = ext->c_d_eq_f.rows();
    if (n_deq > 0) {
      lp.a_eq.block(d.n_s, 0, n_deq, n_y) = ext->c_d_eq_y;
      lp.a_eq.block(d.n_s, n_y + d.n_m, n_deq, n_frac) = -ext->c_d_eq_f;
      lp.b_eq.segment(d.n_s, n_deq) = -(ext->c_d_eq_g * model.p_g);
    }
    const Eigen::Index n_norm = ext->c_f_f.rows();
    lp.a_eq.block(d.n_s + n_deq, n_y + d.n_m, n_norm, n_frac) = ext->c_f_f;
    lp.b_eq.tail(n_norm) = ext->c_bar;
  }

  // Inequalities: capacity, flux (both directions), density, then the
  // compartment fraction bounds.
  Eigen::Index n_density = ext ? ext->c_d_iq_f.rows() : d.n_c;
  Eigen::Index n_frac_rows = 0;
  if (ext) {
    for (Eigen::Index i = 0; i < ext->f_upper.size(); ++i)
      if (std::isfinite(ext->f_upper[i])) ++n_frac_rows;
    n_frac_rows += ext->f_lower.size();
  }
  const Eigen::Index m_iq = d.n_p + 2 * d.n_m + n_density + n_frac_rows;
  lp.a_ineq = Eigen::MatrixXd::Zero(m_iq, n);
  lp.b_ineq = Eigen::VectorXd::Zero(m_iq);

  // Process demand <= capacity of the paired machine.
  lp.a_ineq.block(0, 0, d.n_p, n_y) = mu * model.c_m_y + g.gamma_m_y;
  for (Eigen::Index i = 0; i < d.n_p; ++i) lp.a_ineq(i, d.n_m + i) -= model.k_t[i];
  lp.b_ineq.head(d.n_p) = -((mu * model.c_m_g + g.gamma_m_pg) * model.p_g);

  // Flux capacity as two one-sided rows; backward efficiencies apply when
  // declared.
  const Eigen::VectorXd& k_back = model.k_e_back.size() ? model.k_e_back : model.k_e;
  for (Eigen::Index j = 0; j < d.n_m; ++j) {
    lp.a_ineq(d.n_p + j, j) = -model.k_e[j];
    lp.a_ineq(d.n_p + j, n_y + j) = 1.0;
    lp.a_ineq(d.n_p + d.n_m + j, j) = -k_back[j];
    lp.a_ineq(d.n_p + d.n_m + j, n_y + j) = -1.0;
  }

  // Density rows.
  const Eigen::Index iq_density = d.n_p + 2 * d.n_m;
  if (ext) {
    if (n_density > 0) {
      lp.a_ineq.block(iq_density, 0, n_density, n_y) = ext->c_d_iq_y;
      lp.a_ineq.block(iq_density, n_y + d.n_m, n_density, n_frac) = -ext->c_d_iq_f;
      lp.b_ineq.segment(iq_density, n_density) = -(ext->c_d_iq_g * model.p_g);
    }
    // Finite fraction bounds as rows over the compartment selector.
    Eigen::Index row = iq_density + n_density;
    for (Eigen::Index i = 0; i < ext->f_upper.size(); ++i) {
      if (!std::isfinite(ext->f_upper[i])) continue;
      lp.a_ineq(row, n_y + d.n_m + i) = 1.0;
      lp.b_ineq[row] = ext->f_upper[i];
      ++row;
    }
    for (Eigen::Index i = 0; i < ext->f_lower.size(); ++i) {
      lp.a_ineq(row, n_y + d.n_m + i) = -1.0;
      lp.b_ineq[row] = -ext->f_lower[i];
      ++row;
    }
  } else if (d.n_c > 0) {
    lp.a_ineq.block(iq_density, 0, d.n_c, n_y) = model.c_d_y;
    lp.b_ineq.segment(iq_density, d.n_c) = model.d_bar - model.c_d_g * model.p_g;
  }

  return lp;
}

}  // namespace

LinearProgram assemble_prokaryotic(const MetabolicModel& model, double mu) {
  return assemble(model, TurnoverSpec::zeros(model.dims), nullptr, mu);
}

LinearProgram assemble_turnover(const MetabolicModel& model, const TurnoverSpec& t, double mu) {
  return assemble(model, t, nullptr, mu);
}

LinearProgram assemble_eukaryotic(const MetabolicModel& model, const EukaryoticExtension& ext,
                                  double mu) {
  return assemble(model, TurnoverSpec::zeros(model.dims), &ext, mu);
}

LinearProgram assemble_eukaryotic(const MetabolicModel& model, const EukaryoticExtension& ext,
                                  const TurnoverSpec& t, double mu) {
  return assemble(model, t, &ext, mu);
}

// ---------------------------------------------------------------------------
// Eukaryotic extension

Eigen::MatrixXd EukaryoticExtension::i_v() const {
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n_com + 1, n_frac());
  sel.leftCols(n_com + 1).setIdentity();
  return sel;
}

void EukaryoticExtension::validate(const Dimensions& dims) const {
  if (n_com < 2)
    throw ValidationError("eukaryotic extension needs n_com >= 2 organelle compartments");
  const Eigen::Index nf = n_frac();
  if (static_cast<Eigen::Index>(fraction_names.size()) != nf)
    throw DimensionError("fraction_names length != n_frac");
  for (const auto& [a, b] : interfaces) {
    if (a < 0 || a > n_com || b < 0 || b > n_com)
      throw ValidationError("interface references an out-of-range compartment index");
    if (a == b) throw ValidationError("interface must join two distinct compartments");
  }
  require_shape(c_s_f, dims.n_s, nf, "c_s_f");
  if (b_hat.size() != nf) throw DimensionError("b_hat length != n_frac");
  require_shape(c_d_iq_y, c_d_iq_f.rows(), dims.n_y(), "c_d_iq_y");
  require_shape(c_d_iq_g, c_d_iq_f.rows(), dims.n_g, "c_d_iq_g");
  if (c_d_iq_f.rows() > 0 && c_d_iq_f.cols() != nf) throw DimensionError("c_d_iq_f column mismatch");
  require_shape(c_d_eq_y, c_d_eq_f.rows(), dims.n_y(), "c_d_eq_y");
  require_shape(c_d_eq_g, c_d_eq_f.rows(), dims.n_g, "c_d_eq_g");
  if (c_d_eq_f.rows() > 0 && c_d_eq_f.cols() != nf) throw DimensionError("c_d_eq_f column mismatch");
  if (c_f_f.rows() < 1)
    throw ValidationError("eukaryotic extension needs at least one normalization row");
  if (c_f_f.cols() != nf) throw DimensionError("c_f_f column mismatch");
  if (c_bar.size() != c_f_f.rows()) throw DimensionError("c_bar length != normalization rows");
  if (f_lower.size() != n_com + 1 || f_upper.size() != n_com + 1)
    throw DimensionError("fraction bound vectors must have length n_com + 1");
  for (Eigen::Index i = 0; i <= n_com; ++i)
    if (!(f_lower[i] <= f_upper[i]))
      throw ValidationError("f_lower > f_upper for compartment fraction " + std::to_string(i));
}

EukaryoticExtension compile_eukaryote(const RawModelSpec& spec, const MetabolicModel& model) {
  if (!spec.eukaryote)
    throw ValidationError("model document has no eukaryote section");
  const RawEukaryote& ek = *spec.eukaryote;
  const Dimensions& d = model.dims;

  EukaryoticExtension ext;
  ext.n_com = static_cast<Eigen::Index>(ek.compartments.size());
  ext.fraction_names.push_back("cytosol");
  for (const auto& c : ek.compartments) ext.fraction_names.push_back(c);
  std::map<std::string, Eigen::Index> comp_index;
  for (Eigen::Index i = 0; i <= ext.n_com; ++i) comp_index[ext.fraction_names[i]] = i;
  for (const auto& [a, b] : ek.interfaces) {
    ext.interfaces.emplace_back(comp_index.at(a), comp_index.at(b));
    ext.fraction_names.push_back(a + "<->" + b);
  }
  const Eigen::Index nf = ext.n_frac();
  std::map<std::string, Eigen::Index> frac_index;
  for (Eigen::Index i = 0; i < nf; ++i) frac_index[ext.fraction_names[i]] = i;

  ext.c_s_f = Eigen::MatrixXd::Zero(d.n_s, nf);
  ext.b_hat = Eigen::VectorXd::Zero(nf);
  for (const auto& be : ek.b_hat) {
    Eigen::Index j = frac_index.at(be.fraction);
    ext.b_hat[j] = be.scale;
    for (const auto& [met, coef] : be.composition)
      ext.c_s_f(index_of(model.metabolite_names, met, "metabolite"), j) = coef;
  }

  auto build_rows = [&](const std::vector<RawEukaryote::DensityRow>& rows, Eigen::MatrixXd& cy,
                        Eigen::MatrixXd& cg, Eigen::MatrixXd& cf) {
    const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    cy = Eigen::MatrixXd::Zero(nr, d.n_y());
    cg = Eigen::MatrixXd::Zero(nr, d.n_g);
    cf = Eigen::MatrixXd::Zero(nr, nf);
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (const auto& [name, v] : rows[i].machines)
        cy(i, index_of(model.machine_names, name, "machine")) = v;
      for (const auto& [name, v] : rows[i].proteins)
        cg(i, index_of(model.protein_names, name, "protein")) = v;
      for (const auto& [name, v] : rows[i].fractions) cf(i, frac_index.at(name)) = v;
    }
  };
  build_rows(ek.density_iq, ext.c_d_iq_y, ext.c_d_iq_g, ext.c_d_iq_f);
  build_rows(ek.density_eq, ext.c_d_eq_y, ext.c_d_eq_g, ext.c_d_eq_f);

  const Eigen::Index n_norm = static_cast<Eigen::Index>(ek.normalization.size());
  ext.c_f_f = Eigen::MatrixXd::Zero(n_norm, nf);
  ext.c_bar = Eigen::VectorXd::Zero(n_norm);
  for (Eigen::Index i = 0; i < n_norm; ++i) {
    for (const auto& [name, v] : ek.normalization[i].fractions)
      ext.c_f_f(i, frac_index.at(name)) = v;
    ext.c_bar[i] = ek.normalization[i].value;
  }

  ext.f_lower = Eigen::VectorXd::Zero(ext.n_com + 1);
  ext.f_upper = Eigen::VectorXd::Constant(ext.n_com + 1, kUnbounded);
  for (const auto& fb : ek.fraction_bounds) {
    Eigen::Index i = comp_index.at(fb.compartment);
    ext.f_lower[i] = fb.lower;
    ext.f_upper[i] = fb.upper;
  }

  ext.validate(d);
  return ext;
}

}  // namespace rba
