#include "rba/random_model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rba {

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

long Rng::uniform_int(long lo, long hi) {
  return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool Rng::chance(double p) { return uniform(0.0, 1.0) < p; }

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

RawModelSpec random_model_spec(std::uint64_t seed, const RandomModelOptions& opts) {
  Rng rng(seed);
  RawModelSpec spec;

  const int n_s = static_cast<int>(rng.uniform_int(opts.min_metabolites, opts.max_metabolites));
  for (int i = 0; i < n_s; ++i) {
    RawMetabolite m;
    m.name = "s" + std::to_string(i);
    spec.metabolites.push_back(std::move(m));
  }
  // The last metabolite acts as the residue donor for all synthesis costs.
  const std::string donor = spec.metabolites.back().name;
  if (rng.chance(opts.fixed_metabolite_chance)) {
    spec.metabolites.front().fixed_concentration = round3(rng.uniform(0.002, 0.01));
    if (n_s > 1 && rng.chance(0.5))
      spec.metabolites.front().synthesis_cost[donor] = -round3(rng.uniform(0.5, 2.0));
  }

  // Uptake feeds s0; a conversion chain makes every metabolite producible.
  auto add_enzyme = [&](const std::string& name, double length) {
    RawMachine e;
    e.name = name;
    e.kind = MachineKind::Enzyme;
    e.synthesis_cost[donor] = -length;
    e.process_demand["translation"] = length;
    e.density["cytosol"] = length;
    spec.machines.push_back(std::move(e));
  };
  for (int i = 0; i < n_s; ++i) {
    RawReaction r;
    r.name = i == 0 ? "uptake" : "conv" + std::to_string(i);
    if (i == 0) {
      r.stoichiometry["s0"] = 1.0;
    } else {
      r.stoichiometry["s" + std::to_string(i - 1)] = -round3(rng.uniform(0.5, 2.0));
      r.stoichiometry["s" + std::to_string(i)] = 1.0;
    }
    r.k_forward = round3(rng.uniform(5.0, 50.0));
    const bool iso = i > 0 && rng.chance(opts.isoenzyme_chance);
    const int copies = iso ? 2 : 1;
    for (int c = 0; c < copies; ++c) {
      std::string ename = "E" + std::to_string(i) + (iso ? std::string(1, 'a' + c) : "");
      double length = round3(rng.uniform(30.0, 120.0));
      add_enzyme(ename, length);
      r.catalysts.push_back(ename);
    }
    spec.reactions.push_back(std::move(r));
  }

  for (int k = 0; k < opts.processes; ++k) {
    RawProcess proc;
    proc.name = k == 0 ? "translation" : "process" + std::to_string(k);
    proc.efficiency = round3(rng.uniform(20.0, 80.0));
    spec.processes.push_back(std::move(proc));

    RawMachine rib;
    rib.name = k == 0 ? "rib" : "pm" + std::to_string(k);
    rib.kind = MachineKind::ProcessMachine;
    double length = round3(rng.uniform(150.0, 400.0));
    rib.synthesis_cost[donor] = -length;
    rib.process_demand["translation"] = length;
    rib.density["cytosol"] = length;
    spec.machines.push_back(std::move(rib));
  }

  // A fixed protein load keeps the maximal growth rate finite.
  RawProtein hk;
  hk.name = "hk";
  hk.concentration = round3(rng.uniform(0.002, 0.006));
  double hk_len = round3(rng.uniform(80.0, 250.0));
  hk.synthesis_cost[donor] = -hk_len;
  hk.process_demand["translation"] = hk_len;
  hk.density["cytosol"] = hk_len;
  spec.proteins_g.push_back(std::move(hk));

  const double basal = hk_len * spec.proteins_g.front().concentration;
  const double cap =
      round3(basal * opts.density_slack * (1.0 + rng.uniform(0.0, 2.0)) + rng.uniform(2.0, 8.0));
  spec.density_limits.emplace_back("cytosol", cap);
  return spec;
}

TurnoverSpec random_turnover(std::uint64_t seed, const MetabolicModel& model) {
  Rng rng(seed);
  TurnoverSpec t = TurnoverSpec::zeros(model.dims);
  for (Eigen::Index j = 0; j < model.dims.n_y(); ++j)
    if (rng.chance(0.7)) t.gamma_y[j] = round3(rng.uniform(0.005, 0.05));
  for (Eigen::Index j = 0; j < model.dims.n_g; ++j)
    if (rng.chance(0.7)) t.gamma_pg[j] = round3(rng.uniform(0.005, 0.05));
  for (Eigen::Index j : model.b_index)
    if (rng.chance(0.5)) t.gamma_s[j] = round3(rng.uniform(0.01, 0.1));
  // Degradation recycles part of the residue content and burns some energy.
  const Eigen::Index donor = model.dims.n_s - 1;
  for (Eigen::Index j = 0; j < model.dims.n_y(); ++j) {
    if (t.gamma_y[j] == 0.0 || !rng.chance(0.5)) continue;
    double length = -model.c_s_y(donor, j);
    if (length <= 0) continue;
    t.release(donor, j) = round3(rng.uniform(0.3, 0.9) * length);
    t.atp_cost(0, j) = round3(rng.uniform(0.05, 0.2) * length);
  }
  return t;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_map(std::ostringstream& os, const char* key,
               const std::map<std::string, double>& m, const char* indent) {
  if (m.empty()) return;
  os << indent << key << ": {";
  bool first = true;
  for (const auto& [name, v] : m) {
    if (!first) os << ", ";
    os << name << ": " << num(v);
    first = false;
  }
  os << "}\n";
}

}  // namespace

std::string to_document(const RawModelSpec& spec) {
  std::ostringstream os;
  os << "metabolites:\n";
  for (const auto& m : spec.metabolites) {
    os << "  - name: " << m.name << "\n";
    if (m.fixed_concentration)
      os << "    fixed_concentration: " << num(*m.fixed_concentration) << "\n";
    write_map(os, "synthesis_cost", m.synthesis_cost, "    ");
  }
  os << "reactions:\n";
  for (const auto& r : spec.reactions) {
    os << "  - name: " << r.name << "\n";
    write_map(os, "stoichiometry", r.stoichiometry, "    ");
    os << "    catalysts: [";
    for (std::size_t i = 0; i < r.catalysts.size(); ++i)
      os << (i ? ", " : "") << r.catalysts[i];
    os << "]\n";
    os << "    k_forward: " << num(r.k_forward) << "\n";
    if (r.k_backward) os << "    k_backward: " << num(*r.k_backward) << "\n";
  }
  os << "processes:\n";
  for (const auto& p : spec.processes)
    os << "  - {name: " << p.name << ", efficiency: " << num(p.efficiency) << "}\n";
  os << "machines:\n";
  for (const auto& m : spec.machines) {
    os << "  - name: " << m.name << "\n";
    os << "    kind: " << (m.kind == MachineKind::Enzyme ? "enzyme" : "process-machine") << "\n";
    write_map(os, "synthesis_cost", m.synthesis_cost, "    ");
    write_map(os, "process_demand", m.process_demand, "    ");
    for (const auto& [comp, v] : m.density) {
      os << "    compartment: " << comp << "\n";
      os << "    density_contribution: " << num(v) << "\n";
      break;
    }
  }
  os << "proteins_g:\n";
  for (const auto& p : spec.proteins_g) {
    os << "  - name: " << p.name << "\n";
    os << "    concentration: " << num(p.concentration) << "\n";
    write_map(os, "synthesis_cost", p.synthesis_cost, "    ");
    write_map(os, "process_demand", p.process_demand, "    ");
    for (const auto& [comp, v] : p.density) {
      os << "    compartment: " << comp << "\n";
      os << "    density_contribution: " << num(v) << "\n";
      break;
    }
  }
  if (!spec.density_limits.empty()) {
    os << "density_limits:\n";
    for (const auto& [comp, cap] : spec.density_limits)
      os << "  " << comp << ": " << num(cap) << "\n";
  }
  return os.str();
}

}  // namespace rba
