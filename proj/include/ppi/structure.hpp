#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppi/autodiff.hpp"
#include "ppi/corpus.hpp"
#include "ppi/pdb.hpp"
#include "ppi/tensor.hpp"

namespace ppi {

// Atom feature groups; d_p = 6*element + 3*coords + 21*residue (default 30).
struct AtomFeatureOptions {
  bool element = true;   // one-hot over {C, N, O, S, P, other}
  bool coords = true;    // x, y, z centered on the kept-atom centroid
  bool residue = true;   // one-hot over the 20 standard residues + other
  int d_p() const { return (element ? 6 : 0) + (coords ? 3 : 0) + (residue ? 21 : 0); }
};

// Fixed-height atom matrix: rows beyond valid_rows are all-zero padding.
struct AtomFeatureMatrix {
  num::Tensor matrix;  // [a_max, d_p]
  int valid_rows = 0;  // A, after truncation at a_max
};

AtomFeatureMatrix featurize_atoms(const PdbStructure& s, int a_max,
                                  const AtomFeatureOptions& opts = {});

// mention -> PDB id, or MISSING. Lookup is case-insensitive.
class ProteinMap {
 public:
  // TSV lines `mention<TAB>pdb_id`; the literal pdb_id `MISSING` marks an
  // explicitly unavailable structure.
  static ProteinMap load(const std::string& path);

  void set(const std::string& mention, const std::string& pdb_id);
  void set_missing(const std::string& mention);
  // nullopt for MISSING entries and for mentions absent from the map.
  std::optional<std::string> resolve(const std::string& mention) const;
  bool has_entry(const std::string& mention) const;

  // Corpus mentions with no map entry at all (the invariant violation case,
  // as opposed to explicit MISSING).
  std::vector<std::string> unmapped_mentions(const Corpus& corpus) const;

  void save(const std::string& path) const;
  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;  // lowercased mention -> pdb id or ""
};

// CNN parameter handles on a tape: two windows (3 and 4), each with d_s/2
// output channels.
struct CnnVars {
  num::Var w3, b3, w4, b4;
};

// P_k = pool(relu(CNN(N_p))): both convolutions along the atom axis, ReLU,
// then a max-pool restricted to positions whose full window lies inside the
// valid rows, concatenated to a [1, d_s] row. Structures shorter than a
// window contribute zeros for that window's channels.
num::Var encode_protein(num::Tape& tape, const AtomFeatureMatrix& features, const CnnVars& cnn);

// Per-tape memo so a protein appearing in several sentences is encoded once
// per forward pass.
using ProteinVarCache = std::map<std::string, num::Var>;

// P_{S_i} = P_1 (+) P_2 in record order; a protein that is MISSING (or whose
// structure is absent from `featurized`) contributes a zero row of length
// d_s.
num::Var sentence_structure_vector(num::Tape& tape, const SentenceRecord& record,
                                   const ProteinMap& map,
                                   const std::map<std::string, AtomFeatureMatrix>& featurized,
                                   ProteinVarCache& memo, const CnnVars& cnn, int d_s,
                                   num::Dtype dtype);

}  // namespace ppi
