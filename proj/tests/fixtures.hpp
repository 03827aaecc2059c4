#pragma once

#include <string>

#include "rba/assembly.hpp"
#include "rba/model.hpp"

namespace fixtures {

inline std::string data_path(const char* name) {
  return std::string(RBA_DATA_DIR) + "/" + name;
}

inline rba::MetabolicModel golden_prokaryote() {
  return rba::compile(rba::expand_duplications(rba::load_model_file(data_path("toy_prokaryote.yaml"))));
}

struct GoldenEukaryote {
  rba::MetabolicModel model;
  rba::EukaryoticExtension ext;
};

inline GoldenEukaryote golden_eukaryote() {
  rba::RawModelSpec spec =
      rba::expand_duplications(rba::load_model_file(data_path("toy_eukaryote.yaml")));
  rba::MetabolicModel model = rba::compile(spec);
  return {model, rba::compile_eukaryote(spec, model)};
}

// One metabolite, one uptake reaction, one enzyme, one ribosome, one fixed
// protein; small enough for the enumeration oracle.
inline rba::MetabolicModel mini_model() {
  const char* doc = R"(
metabolites:
  - {name: aa}
reactions:
  - name: uptake
    stoichiometry: {aa: 1.0}
    catalysts: [pump]
    k_forward: 10.0
processes:
  - {name: translation, efficiency: 30.0}
machines:
  - name: pump
    kind: enzyme
    synthesis_cost: {aa: -40.0}
    process_demand: {translation: 40.0}
    compartment: cytosol
    density_contribution: 40.0
  - name: rib
    kind: process-machine
    synthesis_cost: {aa: -200.0}
    process_demand: {translation: 200.0}
    compartment: cytosol
    density_contribution: 200.0
proteins_g:
  - name: hk
    concentration: 0.004
    synthesis_cost: {aa: -150.0}
    process_demand: {translation: 150.0}
    compartment: cytosol
    density_contribution: 150.0
density_limits:
  cytosol: 12.0
)";
  return rba::compile(rba::load_model(doc));
}

// Degenerate two-compartment extension: the cytosol fraction is pinned to one
// and carries the prokaryotic density caps, everything else is inert.
inline rba::EukaryoticExtension degenerate_extension(const rba::MetabolicModel& model) {
  rba::EukaryoticExtension ext;
  const rba::Dimensions& d = model.dims;
  ext.n_com = 2;
  ext.fraction_names = {"cytosol", "org_a", "org_b"};
  ext.c_s_f = Eigen::MatrixXd::Zero(d.n_s, 3);
  ext.b_hat = Eigen::VectorXd::Zero(3);
  ext.c_d_iq_y = model.c_d_y;
  ext.c_d_iq_g = model.c_d_g;
  ext.c_d_iq_f = Eigen::MatrixXd::Zero(d.n_c, 3);
  ext.c_d_iq_f.col(0) = model.d_bar;
  ext.c_d_eq_y = Eigen::MatrixXd::Zero(0, d.n_y());
  ext.c_d_eq_g = Eigen::MatrixXd::Zero(0, d.n_g);
  ext.c_d_eq_f = Eigen::MatrixXd::Zero(0, 3);
  ext.c_f_f = Eigen::MatrixXd::Zero(1, 3);
  ext.c_f_f(0, 0) = 1.0;
  ext.c_bar = Eigen::VectorXd::Ones(1);
  ext.f_lower = Eigen::VectorXd::Zero(3);
  ext.f_upper = Eigen::VectorXd::Constant(3, rba::kUnbounded);
  return ext;
}

}  // namespace fixtures
