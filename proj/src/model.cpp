#include "rba/model.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rba/errors.hpp"

namespace rba {

namespace {

std::string mark_of(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

[[noreturn]] void parse_fail(const YAML::Node& at, const std::string& what) {
  throw ParseError(what + mark_of(at));
}

double as_number(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_fail(node, "field '" + field + "' must be a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    parse_fail(node, "field '" + field + "' is not a number: '" + node.Scalar() + "'");
  }
}

std::string as_name(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar() || node.Scalar().empty())
    parse_fail(node, "field '" + field + "' must be a non-empty name");
  return node.Scalar();
}

std::map<std::string, double> as_number_map(const YAML::Node& node, const std::string& field) {
  std::map<std::string, double> out;
  if (!node) return out;
  if (!node.IsMap()) parse_fail(node, "field '" + field + "' must be a map");
  for (const auto& kv : node) {
    std::string key = as_name(kv.first, field + " key");
    if (out.count(key)) parse_fail(kv.first, "duplicate key '" + key + "' in " + field);
    out[key] = as_number(kv.second, field + "." + key);
  }
  return out;
}

void require_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& what) {
  for (const auto& kv : node) {
    std::string key = kv.first.Scalar();
    if (!allowed.count(key)) parse_fail(kv.first, what + ": unknown field '" + key + "'");
  }
}

RawEukaryote parse_eukaryote(const YAML::Node& node) {
  RawEukaryote ek;
  require_keys(node,
               {"compartments", "interfaces", "fraction_bounds", "density_eq", "density_iq",
                "normalization", "b_hat"},
               "eukaryote");
  for (const auto& c : node["compartments"]) ek.compartments.push_back(as_name(c, "compartments"));
  if (node["interfaces"]) {
    for (const auto& itf : node["interfaces"]) {
      if (!itf.IsSequence() || itf.size() != 2)
        parse_fail(itf, "interfaces entries must be pairs [compartment, compartment]");
      ek.interfaces.emplace_back(as_name(itf[0], "interface"), as_name(itf[1], "interface"));
    }
  }
  if (node["fraction_bounds"]) {
    for (const auto& kv : node["fraction_bounds"]) {
      RawEukaryote::FractionBound fb;
      fb.compartment = as_name(kv.first, "fraction_bounds key");
      if (!kv.second.IsMap()) parse_fail(kv.second, "fraction_bounds entries must be {lower, upper}");
      fb.lower = kv.second["lower"] ? as_number(kv.second["lower"], "lower") : 0.0;
      fb.upper = kv.second["upper"] ? as_number(kv.second["upper"], "upper") : 1.0;
      ek.fraction_bounds.push_back(fb);
    }
  }
  auto parse_density_rows = [](const YAML::Node& rows, const char* what) {
    std::vector<RawEukaryote::DensityRow> out;
    for (const auto& row : rows) {
      require_keys(row, {"machines", "proteins", "fractions"}, what);
      RawEukaryote::DensityRow d;
      d.machines = as_number_map(row["machines"], "machines");
      d.proteins = as_number_map(row["proteins"], "proteins");
      d.fractions = as_number_map(row["fractions"], "fractions");
      out.push_back(std::move(d));
    }
    return out;
  };
  if (node["density_eq"]) ek.density_eq = parse_density_rows(node["density_eq"], "density_eq");
  if (node["density_iq"]) ek.density_iq = parse_density_rows(node["density_iq"], "density_iq");
  if (node["normalization"]) {
    for (const auto& row : node["normalization"]) {
      require_keys(row, {"fractions", "value"}, "normalization");
      RawEukaryote::NormalizationRow nr;
      nr.fractions = as_number_map(row["fractions"], "fractions");
      nr.value = row["value"] ? as_number(row["value"], "value") : 0.0;
      ek.normalization.push_back(std::move(nr));
    }
  }
  if (node["b_hat"]) {
    for (const auto& kv : node["b_hat"]) {
      RawEukaryote::BhatEntry be;
      be.fraction = as_name(kv.first, "b_hat key");
      if (!kv.second.IsMap()) parse_fail(kv.second, "b_hat entries must be {scale, composition}");
      require_keys(kv.second, {"scale", "composition"}, "b_hat");
      be.scale = kv.second["scale"] ? as_number(kv.second["scale"], "scale") : 0.0;
      be.composition = as_number_map(kv.second["composition"], "composition");
      ek.b_hat.push_back(std::move(be));
    }
  }
  return ek;
}

// Referential integrity: every name used somewhere must be declared.
void check_references(const RawModelSpec& spec) {
  std::set<std::string> metabolites, machines, enzymes, processes, proteins, compartments;
  auto declare = [](std::set<std::string>& into, const std::string& name, const char* what) {
    if (!into.insert(name).second)
      throw ValidationError(std::string("duplicate ") + what + " name '" + name + "'");
  };
  for (const auto& m : spec.metabolites) declare(metabolites, m.name, "metabolite");
  for (const auto& p : spec.processes) declare(processes, p.name, "process");
  for (const auto& m : spec.machines) {
    declare(machines, m.name, "machine");
    if (m.kind == MachineKind::Enzyme) enzymes.insert(m.name);
  }
  for (const auto& r : spec.reactions) declare(machines, r.name, "reaction/machine");
  for (const auto& p : spec.proteins_g) declare(proteins, p.name, "protein");
  for (const auto& [c, cap] : spec.density_limits) declare(compartments, c, "compartment");

  auto check_met = [&](const std::map<std::string, double>& m, const std::string& where) {
    for (const auto& [name, v] : m)
      if (!metabolites.count(name))
        throw ValidationError(where + " references undeclared metabolite '" + name + "'");
  };
  auto check_proc = [&](const std::map<std::string, double>& m, const std::string& where) {
    for (const auto& [name, v] : m)
      if (!processes.count(name))
        throw ValidationError(where + " references undeclared process '" + name + "'");
  };
  for (const auto& m : spec.metabolites) check_met(m.synthesis_cost, "metabolite '" + m.name + "'");
  for (const auto& r : spec.reactions) {
    check_met(r.stoichiometry, "reaction '" + r.name + "'");
    if (r.catalysts.empty())
      throw ValidationError("reaction '" + r.name + "' names no catalyst");
    for (const auto& c : r.catalysts)
      if (!enzymes.count(c))
        throw ValidationError("reaction '" + r.name + "' references undeclared enzyme '" + c + "'");
  }
  for (const auto& m : spec.machines) {
    check_met(m.synthesis_cost, "machine '" + m.name + "'");
    check_proc(m.process_demand, "machine '" + m.name + "'");
  }
  for (const auto& p : spec.proteins_g) {
    check_met(p.synthesis_cost, "protein '" + p.name + "'");
    check_proc(p.process_demand, "protein '" + p.name + "'");
  }
  // Compartment references matter only when the prokaryotic density block is
  // in use; eukaryotic documents declare density rows explicitly.
  if (!spec.eukaryote) {
    auto check_comp = [&](const std::map<std::string, double>& density, const std::string& where) {
      for (const auto& [c, v] : density)
        if (v != 0.0 && !compartments.count(c))
          throw ValidationError(where + " assigned to undeclared compartment '" + c + "'");
    };
    for (const auto& m : spec.machines) check_comp(m.density, "machine '" + m.name + "'");
    for (const auto& p : spec.proteins_g) check_comp(p.density, "protein '" + p.name + "'");
  } else {
    const RawEukaryote& ek = *spec.eukaryote;
    std::set<std::string> comps = {"cytosol"};
    for (const auto& c : ek.compartments) {
      if (c == "cytosol") throw ValidationError("eukaryote compartment list re-declares cytosol");
      if (!comps.insert(c).second)
        throw ValidationError("duplicate eukaryote compartment '" + c + "'");
    }
    std::set<std::string> fractions = comps;
    for (const auto& [a, b] : ek.interfaces) {
      if (!comps.count(a) || !comps.count(b))
        throw ValidationError("interface [" + a + ", " + b + "] references undeclared compartment");
      if (a == b)
        throw ValidationError("interface [" + a + ", " + b + "] must join distinct compartments");
      std::string iname = a + "<->" + b;
      if (!fractions.insert(iname).second)
        throw ValidationError("duplicate interface '" + iname + "'");
    }
    auto check_frac = [&](const std::map<std::string, double>& m, const std::string& where) {
      for (const auto& [name, v] : m)
        if (!fractions.count(name))
          throw ValidationError(where + " references undeclared fraction '" + name + "'");
    };
    for (const auto& fb : ek.fraction_bounds)
      if (!comps.count(fb.compartment))
        throw ValidationError("fraction_bounds references undeclared compartment '" +
                              fb.compartment + "'");
    auto check_row = [&](const RawEukaryote::DensityRow& row, const std::string& where) {
      for (const auto& [name, v] : row.machines)
        if (!machines.count(name))
          throw ValidationError(where + " references undeclared machine '" + name + "'");
      for (const auto& [name, v] : row.proteins)
        if (!proteins.count(name))
          throw ValidationError(where + " references undeclared protein '" + name + "'");
      check_frac(row.fractions, where);
    };
    for (std::size_t i = 0; i < ek.density_eq.size(); ++i)
      check_row(ek.density_eq[i], "density_eq[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < ek.density_iq.size(); ++i)
      check_row(ek.density_iq[i], "density_iq[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < ek.normalization.size(); ++i)
      check_frac(ek.normalization[i].fractions, "normalization[" + std::to_string(i) + "]");
    for (const auto& be : ek.b_hat) {
      if (!fractions.count(be.fraction))
        throw ValidationError("b_hat references undeclared fraction '" + be.fraction + "'");
      check_met(be.composition, "b_hat '" + be.fraction + "'");
    }
  }
}

}  // namespace

bool RawModelSpec::is_one_to_one() const {
  std::map<std::string, int> enzyme_uses;
  for (const auto& m : machines)
    if (m.kind == MachineKind::Enzyme) enzyme_uses[m.name] = 0;
  for (const auto& r : reactions) {
    if (r.catalysts.size() != 1) return false;
    ++enzyme_uses[r.catalysts.front()];
  }
  for (const auto& [name, uses] : enzyme_uses)
    if (uses != 1) return false;
  return true;
}

RawModelSpec load_model(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("model document must be a map at top level");
  require_keys(root,
               {"metabolites", "reactions", "processes", "machines", "proteins_g",
                "density_limits", "eukaryote"},
               "model document");

  RawModelSpec spec;
  for (const auto& node : root["metabolites"]) {
    require_keys(node, {"name", "fixed_concentration", "synthesis_cost"}, "metabolite");
    RawMetabolite m;
    m.name = as_name(node["name"], "metabolite.name");
    if (node["fixed_concentration"])
      m.fixed_concentration = as_number(node["fixed_concentration"], "fixed_concentration");
    m.synthesis_cost = as_number_map(node["synthesis_cost"], "synthesis_cost");
    spec.metabolites.push_back(std::move(m));
  }
  for (const auto& node : root["reactions"]) {
    require_keys(node, {"name", "stoichiometry", "catalysts", "k_forward", "k_backward"},
                 "reaction");
    RawReaction r;
    r.name = as_name(node["name"], "reaction.name");
    r.stoichiometry = as_number_map(node["stoichiometry"], "stoichiometry");
    if (!node["catalysts"] || !node["catalysts"].IsSequence())
      parse_fail(node, "reaction '" + r.name + "' needs a catalysts list");
    for (const auto& c : node["catalysts"]) r.catalysts.push_back(as_name(c, "catalysts"));
    if (!node["k_forward"]) parse_fail(node, "reaction '" + r.name + "' needs k_forward");
    r.k_forward = as_number(node["k_forward"], "k_forward");
    if (node["k_backward"]) r.k_backward = as_number(node["k_backward"], "k_backward");
    spec.reactions.push_back(std::move(r));
  }
  for (const auto& node : root["processes"]) {
    require_keys(node, {"name", "efficiency"}, "process");
    RawProcess p;
    p.name = as_name(node["name"], "process.name");
    if (!node["efficiency"]) parse_fail(node, "process '" + p.name + "' needs efficiency");
    p.efficiency = as_number(node["efficiency"], "efficiency");
    spec.processes.push_back(std::move(p));
  }
  for (const auto& node : root["machines"]) {
    require_keys(node,
                 {"name", "kind", "synthesis_cost", "process_demand", "compartment",
                  "density_contribution"},
                 "machine");
    RawMachine m;
    m.name = as_name(node["name"], "machine.name");
    std::string kind = node["kind"] ? node["kind"].Scalar() : "enzyme";
    if (kind == "enzyme") m.kind = MachineKind::Enzyme;
    else if (kind == "process-machine") m.kind = MachineKind::ProcessMachine;
    else parse_fail(node["kind"], "machine kind must be enzyme|process-machine, got '" + kind + "'");
    m.synthesis_cost = as_number_map(node["synthesis_cost"], "synthesis_cost");
    m.process_demand = as_number_map(node["process_demand"], "process_demand");
    if (node["compartment"]) {
      double c = node["density_contribution"]
                     ? as_number(node["density_contribution"], "density_contribution")
                     : 0.0;
      m.density[as_name(node["compartment"], "compartment")] = c;
    } else if (node["density_contribution"]) {
      parse_fail(node, "machine '" + m.name + "' has density_contribution without compartment");
    }
    spec.machines.push_back(std::move(m));
  }
  for (const auto& node : root["proteins_g"]) {
    require_keys(node,
                 {"name", "concentration", "synthesis_cost", "process_demand", "compartment",
                  "density_contribution"},
                 "protein");
    RawProtein p;
    p.name = as_name(node["name"], "protein.name");
    if (!node["concentration"]) parse_fail(node, "protein '" + p.name + "' needs concentration");
    p.concentration = as_number(node["concentration"], "concentration");
    p.synthesis_cost = as_number_map(node["synthesis_cost"], "synthesis_cost");
    p.process_demand = as_number_map(node["process_demand"], "process_demand");
    if (node["compartment"]) {
      double c = node["density_contribution"]
                     ? as_number(node["density_contribution"], "density_contribution")
                     : 0.0;
      p.density[as_name(node["compartment"], "compartment")] = c;
    } else if (node["density_contribution"]) {
      parse_fail(node, "protein '" + p.name + "' has density_contribution without compartment");
    }
    spec.proteins_g.push_back(std::move(p));
  }
  if (root["density_limits"]) {
    if (!root["density_limits"].IsMap())
      parse_fail(root["density_limits"], "density_limits must be a map");
    for (const auto& kv : root["density_limits"]) {
      std::string name = as_name(kv.first, "density_limits key");
      for (const auto& [seen, cap] : spec.density_limits)
        if (seen == name) parse_fail(kv.first, "duplicate compartment '" + name + "'");
      spec.density_limits.emplace_back(name, as_number(kv.second, "density_limits." + name));
    }
  }
  if (root["eukaryote"]) spec.eukaryote = parse_eukaryote(root["eukaryote"]);

  check_references(spec);
  return spec;
}

RawModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

RawModelSpec expand_duplications(RawModelSpec spec) {
  std::set<std::string> taken;
  for (const auto& r : spec.reactions) taken.insert(r.name);
  for (const auto& m : spec.machines) taken.insert(m.name);
  auto fresh = [&taken](const std::string& base, int k) {
    std::string name = base + "_" + std::to_string(k);
    if (taken.count(name))
      throw ValidationError("duplication suffix collides with existing name '" + name + "'");
    taken.insert(name);
    return name;
  };

  // Pass 1: one catalyst per reaction (isoenzymes duplicate the reaction).
  std::vector<RawReaction> reactions;
  for (const auto& r : spec.reactions) {
    if (r.catalysts.size() <= 1) {
      reactions.push_back(r);
      continue;
    }
    for (std::size_t k = 0; k < r.catalysts.size(); ++k) {
      RawReaction copy = r;
      copy.name = fresh(r.name, static_cast<int>(k) + 1);
      copy.catalysts = {r.catalysts[k]};
      reactions.push_back(std::move(copy));
    }
  }

  // Pass 2: one reaction per enzyme (multi-reaction enzymes duplicate).
  std::map<std::string, std::vector<std::size_t>> uses;  // enzyme -> reaction indices
  for (std::size_t i = 0; i < reactions.size(); ++i)
    uses[reactions[i].catalysts.front()].push_back(i);
  for (const auto& m : spec.machines)
    if (m.kind == MachineKind::Enzyme && !uses.count(m.name))
      throw ValidationError("enzyme '" + m.name + "' catalyzes no reaction");

  std::vector<RawMachine> machines;
  for (const auto& m : spec.machines) {
    if (m.kind != MachineKind::Enzyme || uses[m.name].size() <= 1) {
      machines.push_back(m);
      continue;
    }
    const auto& indices = uses[m.name];
    for (std::size_t k = 0; k < indices.size(); ++k) {
      RawMachine copy = m;
      copy.name = fresh(m.name, static_cast<int>(k) + 1);
      reactions[indices[k]].catalysts = {copy.name};
      machines.push_back(std::move(copy));
    }
  }

  spec.reactions = std::move(reactions);
  spec.machines = std::move(machines);
  return spec;
}

void MetabolicModel::validate() const {
  const Dimensions& d = dims;
  auto shape = [](const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* name) {
    if (m.rows() != r || m.cols() != c)
      throw ValidationError(std::string("matrix ") + name + " has shape " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(r) + "x" + std::to_string(c));
  };
  if (d.n_s < 0 || d.n_m < 0 || d.n_p < 0 || d.n_g < 0 || d.n_b < 0 || d.n_c < 0)
    throw ValidationError("negative dimension");
  if (d.n_b > d.n_s) throw ValidationError("n_b exceeds n_s");
  shape(omega, d.n_s, d.n_m, "omega");
  shape(c_s_y, d.n_s, d.n_y(), "c_s_y");
  shape(c_s_b, d.n_s, d.n_b, "c_s_b");
  shape(c_s_g, d.n_s, d.n_g, "c_s_g");
  shape(c_m_y, d.n_p, d.n_y(), "c_m_y");
  shape(c_m_g, d.n_p, d.n_g, "c_m_g");
  shape(c_d_y, d.n_c, d.n_y(), "c_d_y");
  shape(c_d_g, d.n_c, d.n_g, "c_d_g");
  if (k_t.size() != d.n_p || k_e.size() != d.n_m || d_bar.size() != d.n_c ||
      b_fixed.size() != d.n_b || p_g.size() != d.n_g)
    throw ValidationError("vector length inconsistent with dims");
  if (k_e_back.size() != 0 && k_e_back.size() != d.n_m)
    throw ValidationError("k_e_back length inconsistent with dims");

  for (Eigen::Index i = 0; i < d.n_p; ++i)
    if (!(k_t[i] > 0))
      throw ValidationError("k_t must be > 0 (process " + std::to_string(i) + " '" +
                            (i < static_cast<Eigen::Index>(process_names.size())
                                 ? process_names[i] : "") + "')");
  auto nonneg_vec = [](const Eigen::VectorXd& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v[i] < 0)
        throw ValidationError(std::string(name) + " must be >= 0 (index " + std::to_string(i) + ")");
  };
  nonneg_vec(k_e, "k_e");
  if (k_e_back.size()) nonneg_vec(k_e_back, "k_e_back");
  nonneg_vec(d_bar, "d_bar");
  nonneg_vec(b_fixed, "b_fixed");
  nonneg_vec(p_g, "p_g");
  auto nonneg_mat = [](const Eigen::MatrixXd& m, const char* name) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (m(i, j) < 0)
          throw ValidationError(std::string(name) + " must be >= 0 (entry " + std::to_string(i) +
                                "," + std::to_string(j) + ")");
  };
  nonneg_mat(c_m_y, "c_m_y");
  nonneg_mat(c_m_g, "c_m_g");
  nonneg_mat(c_d_y, "c_d_y");
  nonneg_mat(c_d_g, "c_d_g");
  auto unique_compartment = [](const Eigen::MatrixXd& m, const char* name) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      int nonzero = 0;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (m(i, j) != 0.0) ++nonzero;
      if (nonzero > 1)
        throw ValidationError(std::string(name) + " column " + std::to_string(j) +
                              " assigned to more than one compartment");
    }
  };
  unique_compartment(c_d_y, "c_d_y");
  unique_compartment(c_d_g, "c_d_g");
}

MetabolicModel compile(const RawModelSpec& spec) {
  if (!spec.is_one_to_one())
    throw ValidationError("spec is not one-to-one; run expand_duplications first");
  check_references(spec);

  MetabolicModel model;
  Dimensions& d = model.dims;
  d.n_s = static_cast<Eigen::Index>(spec.metabolites.size());
  d.n_m = static_cast<Eigen::Index>(spec.reactions.size());
  d.n_p = static_cast<Eigen::Index>(spec.processes.size());
  d.n_g = static_cast<Eigen::Index>(spec.proteins_g.size());
  d.n_c = static_cast<Eigen::Index>(spec.density_limits.size());

  std::map<std::string, Eigen::Index> met_index, proc_index, comp_index;
  for (Eigen::Index i = 0; i < d.n_s; ++i) {
    met_index[spec.metabolites[i].name] = i;
    model.metabolite_names.push_back(spec.metabolites[i].name);
  }
  for (Eigen::Index i = 0; i < d.n_p; ++i) {
    proc_index[spec.processes[i].name] = i;
    model.process_names.push_back(spec.processes[i].name);
  }
  for (Eigen::Index i = 0; i < d.n_c; ++i) {
    comp_index[spec.density_limits[i].first] = i;
    model.compartment_names.push_back(spec.density_limits[i].first);
  }

  // Fixed metabolites, in metabolite declaration order.
  std::vector<const RawMetabolite*> fixed;
  for (const auto& m : spec.metabolites)
    if (m.fixed_concentration) fixed.push_back(&m);
  d.n_b = static_cast<Eigen::Index>(fixed.size());

  // Machines: enzymes in reaction order, then process machines paired with
  // processes by declaration order.
  std::map<std::string, const RawMachine*> machine_by_name;
  std::vector<const RawMachine*> process_machines;
  for (const auto& m : spec.machines) {
    machine_by_name[m.name] = &m;
    if (m.kind == MachineKind::ProcessMachine) process_machines.push_back(&m);
  }
  if (static_cast<Eigen::Index>(process_machines.size()) != d.n_p)
    throw ValidationError("expected " + std::to_string(d.n_p) + " process machines, found " +
                          std::to_string(process_machines.size()) +
                          " (processes pair with process machines by declaration order)");
  std::vector<const RawMachine*> columns;
  for (const auto& r : spec.reactions) columns.push_back(machine_by_name.at(r.catalysts.front()));
  for (const auto* pm : process_machines) columns.push_back(pm);

  const Eigen::Index n_y = d.n_y();
  model.omega = Eigen::MatrixXd::Zero(d.n_s, d.n_m);
  model.c_s_y = Eigen::MatrixXd::Zero(d.n_s, n_y);
  model.c_s_b = Eigen::MatrixXd::Zero(d.n_s, d.n_b);
  model.c_s_g = Eigen::MatrixXd::Zero(d.n_s, d.n_g);
  model.c_m_y = Eigen::MatrixXd::Zero(d.n_p, n_y);
  model.c_m_g = Eigen::MatrixXd::Zero(d.n_p, d.n_g);
  model.c_d_y = Eigen::MatrixXd::Zero(d.n_c, n_y);
  model.c_d_g = Eigen::MatrixXd::Zero(d.n_c, d.n_g);
  model.k_t.resize(d.n_p);
  model.k_e.resize(d.n_m);
  model.d_bar.resize(d.n_c);
  model.b_fixed.resize(d.n_b);
  model.p_g.resize(d.n_g);

  for (Eigen::Index j = 0; j < d.n_m; ++j) {
    const RawReaction& r = spec.reactions[j];
    model.reaction_names.push_back(r.name);
    for (const auto& [met, coef] : r.stoichiometry) model.omega(met_index.at(met), j) = coef;
    model.k_e[j] = r.k_forward;
  }
  bool any_backward = std::any_of(spec.reactions.begin(), spec.reactions.end(),
                                  [](const RawReaction& r) { return r.k_backward.has_value(); });
  if (any_backward) {
    // Reactions without a declared backward efficiency are irreversible.
    model.k_e_back = Eigen::VectorXd::Zero(d.n_m);
    for (Eigen::Index j = 0; j < d.n_m; ++j)
      model.k_e_back[j] = spec.reactions[j].k_backward.value_or(0.0);
  }

  auto fill_column = [&](const std::map<std::string, double>& cost,
                         const std::map<std::string, double>& demand,
                         const std::map<std::string, double>& density, Eigen::MatrixXd& cs,
                         Eigen::MatrixXd& cm, Eigen::MatrixXd& cd, Eigen::Index j,
                         const std::string& who) {
    for (const auto& [met, coef] : cost) cs(met_index.at(met), j) = coef;
    for (const auto& [proc, res] : demand) cm(proc_index.at(proc), j) = res;
    int placed = 0;
    for (const auto& [comp, contrib] : density) {
      if (contrib == 0.0) continue;
      if (++placed > 1)
        throw ValidationError(who + " assigned to more than one density compartment");
      cd(comp_index.at(comp), j) = contrib;
    }
  };

  for (Eigen::Index j = 0; j < n_y; ++j) {
    const RawMachine& m = *columns[j];
    model.machine_names.push_back(m.name);
    fill_column(m.synthesis_cost, m.process_demand, m.density, model.c_s_y, model.c_m_y,
                model.c_d_y, j, "machine '" + m.name + "'");
  }
  for (Eigen::Index i = 0; i < d.n_p; ++i) model.k_t[i] = spec.processes[i].efficiency;
  for (Eigen::Index j = 0; j < d.n_g; ++j) {
    const RawProtein& p = spec.proteins_g[j];
    model.protein_names.push_back(p.name);
    model.p_g[j] = p.concentration;
    fill_column(p.synthesis_cost, p.process_demand, p.density, model.c_s_g, model.c_m_g,
                model.c_d_g, j, "protein '" + p.name + "'");
  }
  for (Eigen::Index j = 0; j < d.n_b; ++j) {
    const RawMetabolite& m = *fixed[j];
    Eigen::Index row = met_index.at(m.name);
    model.b_index.push_back(row);
    model.b_fixed[j] = *m.fixed_concentration;
    // Maintaining the fixed pool withdraws the metabolite itself; declared
    // synthesis costs add precursor terms on top.
    model.c_s_b(row, j) = -1.0;
    for (const auto& [met, coef] : m.synthesis_cost) model.c_s_b(met_index.at(met), j) += coef;
  }
  for (Eigen::Index i = 0; i < d.n_c; ++i) model.d_bar[i] = spec.density_limits[i].second;

  model.validate();
  return model;
}

}  // namespace rba
