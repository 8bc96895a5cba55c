#pragma once

#include <cstdint>
#include <string>

#include "ppi/structure.hpp"
#include "ppi/tensor.hpp"

namespace ppi {

// Every knob the pipeline reads. Training defaults (lr, decay, dropouts)
// carry the reference values; desk-scale dimensions (pca_dim, d_s, a_max)
// default small, and configs/ holds the corpus-scale variants.
struct RunConfig {
  std::string corpus;
  std::string pdb_map;
  std::string pdb_cache = "cache";
  std::string out = "runs";

  uint64_t seed = 42;
  int jobs = 1;
  bool offline = false;

  int folds = 5;
  bool stratify = false;

  int max_words = 0;  // 0 keeps the whole vocabulary
  bool counts = false;
  int pca_dim = 16;

  int a_max = 64;
  int d_s = 8;
  bool feat_element = true;
  bool feat_coords = true;
  bool feat_residue = true;

  int subgraph_size = 5;
  int hidden = 32;
  int heads = 2;
  int layers = 2;
  double alpha = 0.15;
  int wl_iterations = 2;
  int distance_cap = 5;
  int direct_solve_max = 2000;

  double lr = 0.01;
  double weight_decay = 5e-4;
  double hidden_dropout = 0.5;
  double attention_dropout = 0.3;
  int epochs = 150;
  int patience = 20;  // epochs without train-loss improvement; 0 disables
  bool class_weights = false;

  bool text_only = false;
  bool normalize_blocks = false;
  std::string precision = "f32";

  // Throws listing every violated constraint, not just the first.
  void validate() const;

  AtomFeatureOptions atom_features() const;
  num::Dtype dtype() const;

  // Deterministic key-sorted TOML rendering; written into each run directory
  // and hashed for the directory name. `out` and `jobs` are excluded:
  // neither output location nor fold parallelism changes run identity.
  std::string canonical_toml() const;
  uint64_t config_hash() const;  // FNV-1a over canonical_toml()
  std::string run_dir_name() const;
};

}  // namespace ppi
