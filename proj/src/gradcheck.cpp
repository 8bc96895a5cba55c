#include "ppi/gradcheck.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "ppi/graph.hpp"
#include "ppi/intimacy.hpp"
#include "ppi/model.hpp"
#include "ppi/pdb.hpp"
#include "ppi/structure.hpp"
#include "ppi/subgraph.hpp"
#include "ppi/wl.hpp"

namespace ppi {

using num::Dtype;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

std::string toy_pdb(const std::string& id, bool with_sulfur) {
  std::string text = "HEADER    TOY STRUCTURE " + id + "\n";
  char line[96];
  const char* res = with_sulfur ? "CYS" : "ALA";
  int serial = 0;
  for (int r = 0; r < 3; ++r) {
    std::snprintf(line, sizeof(line),
                  "ATOM  %5d  CA  %3s A%4d    %8.3f%8.3f%8.3f  1.00  0.00           C\n",
                  ++serial, res, r + 1, 1.3 * r, 0.4 * r, 0.9 - 0.2 * r);
    text += line;
    std::snprintf(line, sizeof(line),
                  "ATOM  %5d  %-3s %3s A%4d    %8.3f%8.3f%8.3f  1.00  0.00          %2s\n",
                  ++serial, with_sulfur ? "SG" : "CB", res, r + 1, 1.3 * r + 1.1, 0.4 * r - 0.7,
                  0.3 * r, with_sulfur ? "S" : "C");
    text += line;
  }
  text += "END\n";
  return text;
}

struct Fixture {
  ModelDims dims;
  std::vector<SentenceRecord> records;
  ProteinMap map;
  std::map<std::string, AtomFeatureMatrix> structures;
  std::vector<SubgraphBatch> batches;
  Tensor text;  // [6, text_width], f64
  std::vector<int> labels;
};

Fixture make_fixture(uint64_t seed) {
  Fixture fx;
  fx.dims.hidden = 8;
  fx.dims.heads = 2;
  fx.dims.layers = 2;
  fx.dims.subgraph_size = 3;
  fx.dims.distance_cap = 2;
  fx.dims.d_s = 4;
  const int text_w = 5;
  fx.dims.fused_dim = text_w + 2 * fx.dims.d_s;

  const AtomFeatureOptions opts;
  fx.dims.d_p = opts.d_p();
  fx.structures.emplace("TOYA", featurize_atoms(parse_pdb_text(toy_pdb("TOYA", true), "TOYA"),
                                                8, opts));
  fx.structures.emplace("TOYB", featurize_atoms(parse_pdb_text(toy_pdb("TOYB", false), "TOYB"),
                                                8, opts));
  fx.map.set("alpha", "TOYA");
  fx.map.set("beta", "TOYB");
  fx.map.set_missing("gamma");  // exercises the null-vector path

  const char* pairs[6][2] = {{"alpha", "beta"},  {"beta", "alpha"}, {"alpha", "alpha"},
                             {"gamma", "beta"},  {"beta", "gamma"}, {"gamma", "gamma"}};
  for (int i = 0; i < 6; ++i) {
    SentenceRecord r;
    r.id = "toy-" + std::to_string(i);
    r.protein1 = pairs[i][0];
    r.protein2 = pairs[i][1];
    r.label = i % 2 ? Label::interaction : Label::non_interaction;
    fx.records.push_back(r);
    fx.labels.push_back(i % 2);
  }

  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 4}};
  const Adjacency adj(6, edges);
  const IntimacyTopK intimacy =
      compute_intimacy(adj, 0.15, fx.dims.subgraph_size - 1, IntimacyMethod::direct);
  const std::vector<std::string> sigs = wl_signatures(adj, 2);
  RoleVocab rv;
  rv.fit(sigs);
  fx.dims.role_vocab = rv.size();
  std::vector<int> roles(sigs.size());
  for (size_t i = 0; i < sigs.size(); ++i) roles[i] = rv.lookup(sigs[i]);
  for (int i = 0; i < 6; ++i)
    fx.batches.push_back(
        build_batch(adj, intimacy, roles, i, fx.dims.subgraph_size, fx.dims.distance_cap));
  // Route one context slot through the reserved UNK row so its gradient is
  // covered too.
  fx.batches[0].roles[1] = RoleVocab::kUnknown;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  fx.text = Tensor({6, text_w}, Dtype::f64);
  for (int64_t i = 0; i < fx.text.size(); ++i) fx.text.at(i) = u(rng);
  return fx;
}

Var build_loss(Tape& tape, const Fixture& fx, const BoundModel& bm) {
  Var t = tape.leaf(fx.text);
  ProteinVarCache memo;
  std::vector<Var> srows;
  for (const auto& r : fx.records)
    srows.push_back(sentence_structure_vector(tape, r, fx.map, fx.structures, memo, bm.cnn(),
                                              fx.dims.d_s, Dtype::f64));
  Var x = tape.concat_cols({t, tape.concat_rows(srows)});
  std::vector<Var> logit_rows;
  for (const auto& batch : fx.batches) {
    Var h0 = embed_batch(tape, bm, tape.rows(x, batch.nodes), batch);
    logit_rows.push_back(target_logits(tape, bm, encode_target(tape, bm, h0)));
  }
  return tape.cross_entropy(tape.concat_rows(logit_rows), fx.labels);
}

double loss_value(const Fixture& fx, const ParamMap& params) {
  Tape tape;
  const BoundModel bm = bind_params(tape, fx.dims, params);
  return tape.value(build_loss(tape, fx, bm)).at(0);
}

}  // namespace

GradCheckResult run_gradcheck(uint64_t seed) {
  const Fixture fx = make_fixture(seed);
  ParamMap params = init_params(fx.dims, seed, Dtype::f64);

  std::map<std::string, Tensor> analytic;
  {
    Tape tape;
    const BoundModel bm = bind_params(tape, fx.dims, params);
    Var loss = build_loss(tape, fx, bm);
    tape.backward(loss);
    analytic = tape.param_grads();
  }

  GradCheckResult res;
  for (auto& [name, grad] : analytic) {
    Tensor& p = params.at(name);
    for (int64_t i = 0; i < p.size(); ++i) {
      const double orig = p.at(i);
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      p.at(i) = orig + h;
      const double lp = loss_value(fx, params);
      p.at(i) = orig - h;
      const double lm = loss_value(fx, params);
      p.at(i) = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = grad.at(i);
      ++res.checked;
      const double mag = std::max(std::abs(a), std::abs(numeric));
      if (mag < 1e-5) continue;  // matching zeros
      const double rel = std::abs(a - numeric) / mag;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

}  // namespace ppi
