#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rba {

struct Dimensions {
  Eigen::Index n_s = 0;  // metabolites
  Eigen::Index n_m = 0;  // enzymatic reactions (== enzymes after expansion)
  Eigen::Index n_p = 0;  // machine processes
  Eigen::Index n_g = 0;  // unspecific proteins
  Eigen::Index n_b = 0;  // fixed-concentration metabolites
  Eigen::Index n_c = 0;  // density constraints
  Eigen::Index n_y() const { return n_m + n_p; }
};

// ---------------------------------------------------------------------------
// Name-keyed description of a model document, prior to index resolution.

struct RawMetabolite {
  std::string name;
  std::optional<double> fixed_concentration;
  // Extra precursor costs for maintaining the fixed pool; the -1 self term is
  // implicit (see compile()).
  std::map<std::string, double> synthesis_cost;
};

struct RawReaction {
  std::string name;
  std::map<std::string, double> stoichiometry;  // metabolite -> coefficient
  std::vector<std::string> catalysts;           // enzyme machine names
  double k_forward = 0;
  std::optional<double> k_backward;
};

struct RawProcess {
  std::string name;
  double efficiency = 0;
};

enum class MachineKind { Enzyme, ProcessMachine };

struct RawMachine {
  std::string name;
  MachineKind kind = MachineKind::Enzyme;
  std::map<std::string, double> synthesis_cost;  // signed: + produced, - consumed
  std::map<std::string, double> process_demand;  // process -> residues
  // compartment -> contribution; a valid machine occupies at most one.
  std::map<std::string, double> density;
};

struct RawProtein {
  std::string name;
  double concentration = 0;
  std::map<std::string, double> synthesis_cost;
  std::map<std::string, double> process_demand;
  std::map<std::string, double> density;
};

// `eukaryote:` document section, still name-keyed.
struct RawEukaryote {
  std::vector<std::string> compartments;  // organelle compartments; cytosol is implicit
  std::vector<std::pair<std::string, std::string>> interfaces;
  struct FractionBound {
    std::string compartment;
    double lower = 0;
    double upper = 0;
  };
  std::vector<FractionBound> fraction_bounds;
  struct DensityRow {
    std::map<std::string, double> machines;
    std::map<std::string, double> proteins;
    std::map<std::string, double> fractions;
  };
  std::vector<DensityRow> density_eq;
  std::vector<DensityRow> density_iq;
  struct NormalizationRow {
    std::map<std::string, double> fractions;
    double value = 0;
  };
  std::vector<NormalizationRow> normalization;
  struct BhatEntry {
    std::string fraction;
    double scale = 0;
    std::map<std::string, double> composition;  // metabolite -> coefficient
  };
  std::vector<BhatEntry> b_hat;
};

struct RawModelSpec {
  std::vector<RawMetabolite> metabolites;
  std::vector<RawReaction> reactions;
  std::vector<RawProcess> processes;
  std::vector<RawMachine> machines;
  std::vector<RawProtein> proteins_g;
  std::vector<std::pair<std::string, double>> density_limits;  // declaration order
  std::optional<RawEukaryote> eukaryote;

  bool is_one_to_one() const;
};

// ---------------------------------------------------------------------------
// Compiled dense model. Immutable after construction; safe to share read-only.

struct MetabolicModel {
  Dimensions dims;
  Eigen::MatrixXd omega;  // n_s x n_m stoichiometry
  Eigen::MatrixXd c_s_y;  // n_s x n_y machine synthesis coefficients (signed)
  Eigen::MatrixXd c_s_b;  // n_s x n_b
  Eigen::MatrixXd c_s_g;  // n_s x n_g
  Eigen::MatrixXd c_m_y;  // n_p x n_y residue demands
  Eigen::MatrixXd c_m_g;  // n_p x n_g
  Eigen::VectorXd k_t;    // n_p process efficiencies (diagonal)
  Eigen::VectorXd k_e;    // n_m forward catalytic efficiencies (diagonal)
  // Backward efficiencies; empty means |nu| <= K_E Y applies symmetrically.
  Eigen::VectorXd k_e_back;
  Eigen::MatrixXd c_d_y;    // n_c x n_y density contributions
  Eigen::MatrixXd c_d_g;    // n_c x n_g
  Eigen::VectorXd d_bar;    // n_c density caps
  Eigen::VectorXd b_fixed;  // n_b
  Eigen::VectorXd p_g;      // n_g

  std::vector<Eigen::Index> b_index;  // metabolite row of each fixed metabolite
  std::vector<std::string> metabolite_names;
  std::vector<std::string> reaction_names;
  std::vector<std::string> process_names;
  std::vector<std::string> machine_names;  // enzymes (reaction order), then process machines
  std::vector<std::string> protein_names;
  std::vector<std::string> compartment_names;

  void validate() const;  // throws ValidationError naming the first violation
};

// ---------------------------------------------------------------------------
// Operations

/// Parse a structured model document. Checks parseability and referential
/// integrity only; numeric invariants are compile()'s job.
RawModelSpec load_model(const std::string& text);
RawModelSpec load_model_file(const std::string& path);

/// Duplicate isoenzyme reactions and multi-reaction enzymes until reactions
/// and catalysts are in one-to-one correspondence. Copies are suffixed _1,
/// _2, ... in input order; specs already one-to-one are returned unchanged.
RawModelSpec expand_duplications(RawModelSpec spec);

/// Assemble the dense model from a one-to-one spec (declaration order).
MetabolicModel compile(const RawModelSpec& spec);

}  // namespace rba
