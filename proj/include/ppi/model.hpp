#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "ppi/autodiff.hpp"
#include "ppi/corpus.hpp"
#include "ppi/structure.hpp"
#include "ppi/subgraph.hpp"
#include "ppi/tensor.hpp"

namespace ppi {

struct ModelDims {
  int fused_dim = 0;     // text width + structure width of the node features
  int hidden = 32;
  int heads = 2;
  int layers = 2;        // D; 0 keeps only the embedding layer H^(0)
  int role_vocab = 1;    // rows of the role table, row 0 reserved for unseen
  int subgraph_size = 5;
  int distance_cap = 5;  // distance table has distance_cap + 1 rows
  int d_p = 30;          // atom feature width
  int d_s = 8;           // per-protein CNN channels; structure width is 2*d_s
  int classes = 2;

  void validate() const;  // throws listing every violated constraint
};

using ParamMap = std::map<std::string, num::Tensor>;

// Xavier-uniform weights, zero biases, unit layer-norm gains. Values are
// drawn in parameter-name order (std::map iteration), so the layout is a
// pure function of dims, seed and dtype.
ParamMap init_params(const ModelDims& dims, uint64_t seed, num::Dtype dtype);

struct BoundModel {
  ModelDims dims;
  std::map<std::string, num::Var> p;

  num::Var at(const std::string& name) const;
  CnnVars cnn() const;
};

BoundModel bind_params(num::Tape& tape, const ModelDims& dims, const ParamMap& params);

// Inverted-dropout settings for one forward pass; rng == nullptr (inference)
// disables both masks.
struct Dropout {
  double hidden = 0.0;
  double attention = 0.0;
  std::mt19937_64* rng = nullptr;
};

// H^(0) = proj(fused_rows) + role + position + distance embeddings, where
// fused_rows is the [subgraph_size, fused_dim] slice for batch.nodes.
num::Var embed_batch(num::Tape& tape, const BoundModel& m, num::Var fused_rows,
                     const SubgraphBatch& batch);

// Pre-norm transformer over the batch; returns z = row 0 of sum_{m=0..D} H^(m).
num::Var encode_target(num::Tape& tape, const BoundModel& m, num::Var h0,
                       const Dropout& drop = {});

num::Var target_logits(num::Tape& tape, const BoundModel& m, num::Var z);

// argmax over a [1, 2] (or length-2) logit row; ties resolve to
// non_interaction.
Label predict_label(const num::Tensor& logits_row);

// Checkpoint container:
//   magic "PPCK" | u32 version=1 | u64 meta_len | meta JSON (holds dims and
//   caller metadata) | u64 count | per tensor: u64 name_len, name, u8 dtype,
//   u8 rank, u64 dims[rank], f64 little-endian payload.
struct Checkpoint {
  ModelDims dims;
  ParamMap params;
  std::string meta_json;  // caller-provided object, "{}" if none
};

void save_checkpoint(const std::string& path, const ModelDims& dims,
                     const ParamMap& params, const std::string& meta_json = "{}");
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ppi
