#pragma once

#include <cstdint>
#include <string>

namespace ppi {

// lexical_structural plants the interaction signal redundantly: interacting
// pairs carry the marker token "binds" and both proteins map to sulfur-rich
// structures. structure_only gives every record a globally unique protein
// pair under one shared sentence template, so the text channel cannot
// generalize past the training fold; the label (both proteins sticky) is
// recoverable only from the shared PDB pool.
enum class SyntheticVariant { lexical_structural, structure_only };

struct SyntheticOptions {
  int n = 40;
  uint64_t seed = 7;
  SyntheticVariant variant = SyntheticVariant::lexical_structural;
  double missing_frac = 0.0;  // fraction of mentions mapped to MISSING
};

struct SyntheticOutput {
  std::string corpus_path;  // <out_dir>/corpus.jsonl
  std::string map_path;     // <out_dir>/pdb_map.tsv
  std::string pdb_dir;      // <out_dir>/pdb
};

// Writes corpus, protein map, and PDB files under out_dir. Labels are exactly
// balanced (n/2 rounded up interactions). Requires n >= 10.
SyntheticOutput generate_synthetic(const SyntheticOptions& opt, const std::string& out_dir);

}  // namespace ppi
