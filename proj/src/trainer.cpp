#include "ppi/trainer.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ppi/adam.hpp"
#include "ppi/graph.hpp"
#include "ppi/intimacy.hpp"
#include "ppi/pca.hpp"
#include "ppi/pdb.hpp"
#include "ppi/subgraph.hpp"
#include "ppi/text_graph.hpp"
#include "ppi/vocab.hpp"
#include "ppi/wl.hpp"

namespace fs = std::filesystem;

namespace ppi {

using num::AdamConfig;
using num::AdamState;
using num::Dtype;
using num::Tape;
using num::Tensor;
using num::Var;
using nlohmann::json;

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t fold_seed(uint64_t master, size_t fold) {
  return splitmix64(master ^ splitmix64(fold + 1));
}

struct GraphState {
  Adjacency adj;
  IntimacyTopK intimacy;
  std::vector<std::string> signatures;
};

GraphState build_graph_state(int n, const std::vector<std::pair<int, int>>& edges,
                             const RunConfig& cfg) {
  GraphState gs;
  gs.adj = Adjacency(n, edges);
  gs.intimacy = compute_intimacy(gs.adj, cfg.alpha, cfg.subgraph_size - 1,
                                 IntimacyMethod::automatic, cfg.direct_solve_max);
  gs.signatures = wl_signatures(gs.adj, cfg.wl_iterations);
  return gs;
}

std::vector<SubgraphBatch> make_batches(const GraphState& gs, const std::vector<int>& roles,
                                        const RunConfig& cfg) {
  std::vector<SubgraphBatch> batches;
  const int n = gs.adj.node_count();
  batches.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    batches.push_back(
        build_batch(gs.adj, gs.intimacy, roles, i, cfg.subgraph_size, cfg.distance_cap));
  return batches;
}

// One graph's worth of forward-pass inputs; local indices address `records`.
struct ForwardContext {
  const RunConfig* cfg = nullptr;
  ModelDims dims;
  std::vector<const SentenceRecord*> records;
  Eigen::MatrixXd text;  // [n_local, pca_dim]
  std::vector<SubgraphBatch> batches;
  const ProteinMap* map = nullptr;
  const std::map<std::string, AtomFeatureMatrix>* structures = nullptr;
};

// Logit matrix [|locals|, 2]. The node feature matrix is assembled on the
// tape so the CNN stays inside the gradient path (the fusion concatenation
// is recomputed live, never read from a serialized artifact).
Var forward_logits(Tape& tape, const BoundModel& bm, const ForwardContext& ctx,
                   const std::vector<int>& locals, const Dropout& drop) {
  const RunConfig& cfg = *ctx.cfg;
  const int n = static_cast<int>(ctx.records.size());
  const int text_w = static_cast<int>(ctx.text.cols());
  const Dtype dt = cfg.dtype();

  Tensor tmat({n, text_w}, dt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < text_w; ++j) tmat.at(i, j) = ctx.text(i, j);
  tmat.quantize();
  Var t = tape.leaf(std::move(tmat));

  Var s;
  if (cfg.text_only) {
    s = tape.leaf(Tensor({n, 2 * cfg.d_s}, dt));  // zero structure block
  } else {
    ProteinVarCache memo;
    std::vector<Var> srows;
    srows.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      srows.push_back(sentence_structure_vector(tape, *ctx.records[static_cast<size_t>(i)],
                                                *ctx.map, *ctx.structures, memo, bm.cnn(),
                                                cfg.d_s, dt));
    s = tape.concat_rows(srows);
  }
  Var x = tape.concat_cols({t, s});

  std::vector<Var> logit_rows;
  logit_rows.reserve(locals.size());
  for (int local : locals) {
    const SubgraphBatch& batch = ctx.batches[static_cast<size_t>(local)];
    Var h0 = embed_batch(tape, bm, tape.rows(x, batch.nodes), batch);
    logit_rows.push_back(target_logits(tape, bm, encode_target(tape, bm, h0, drop)));
  }
  return tape.concat_rows(logit_rows);
}

std::vector<double> class_weight_vec(const std::vector<int>& labels, bool enabled) {
  if (!enabled) return {};
  double c0 = 0, c1 = 0;
  for (int l : labels) (l == 0 ? c0 : c1) += 1.0;
  // Balanced heuristic n/(K * count); an absent class cannot occur in the
  // loss, so its weight is irrelevant.
  std::vector<double> w(2, 0.0);
  if (c0 > 0) w[0] = (c0 + c1) / (2.0 * c0);
  if (c1 > 0) w[1] = (c0 + c1) / (2.0 * c1);
  return w;
}

TrainResult train_loop(const ForwardContext& ctx, const std::vector<int>& labels,
                       const RunConfig& cfg, uint64_t seed) {
  ParamMap params = init_params(ctx.dims, splitmix64(seed), cfg.dtype());
  AdamConfig acfg;
  acfg.learning_rate = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  AdamState adam(params, acfg);
  std::mt19937_64 drop_rng(splitmix64(seed ^ 0x5eedULL));

  std::vector<int> all(ctx.records.size());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<double> weights = class_weight_vec(labels, cfg.class_weights);

  TrainResult out;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    BoundModel bm = bind_params(tape, ctx.dims, params);
    Dropout drop{cfg.hidden_dropout, cfg.attention_dropout, &drop_rng};
    Var logits = forward_logits(tape, bm, ctx, all, drop);
    Var loss = tape.cross_entropy(logits, labels, weights);
    const double l = tape.value(loss).at(0);
    if (!std::isfinite(l))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               ": loss is not finite (lr " + std::to_string(cfg.lr) + ")");
    out.loss_curve.push_back(l);
    tape.backward(loss);
    adam.step(params, tape.param_grads());
    if (l < best - 1e-12) {
      best = l;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  out.params = std::move(params);
  return out;
}

Confusion evaluate_locals(const ForwardContext& ctx, const ParamMap& params,
                          const std::vector<int>& locals, const std::vector<int>& labels) {
  Tape tape;
  BoundModel bm = bind_params(tape, ctx.dims, params);
  Var logits = forward_logits(tape, bm, ctx, locals, Dropout{});
  const Tensor& lv = tape.value(logits);
  Confusion c;
  for (size_t r = 0; r < locals.size(); ++r) {
    const Tensor row = Tensor::from({1, 2}, {lv.at(static_cast<int64_t>(r), 0),
                                             lv.at(static_cast<int64_t>(r), 1)},
                                    lv.dtype());
    c.add(static_cast<Label>(labels[r]), predict_label(row));
  }
  return c;
}

ModelDims dims_for(const RunConfig& cfg, int role_vocab) {
  ModelDims dims;
  dims.fused_dim = cfg.pca_dim + 2 * cfg.d_s;
  dims.hidden = cfg.hidden;
  dims.heads = cfg.heads;
  dims.layers = cfg.layers;
  dims.role_vocab = role_vocab;
  dims.subgraph_size = cfg.subgraph_size;
  dims.distance_cap = cfg.distance_cap;
  dims.d_p = cfg.atom_features().d_p();
  dims.d_s = cfg.d_s;
  return dims;
}

// Keys that must agree between a checkpoint and the evaluating config for the
// features and sampling to be comparable.
json config_fingerprint(const RunConfig& cfg) {
  return json{{"a_max", cfg.a_max},
              {"alpha", cfg.alpha},
              {"counts", cfg.counts},
              {"d_s", cfg.d_s},
              {"distance_cap", cfg.distance_cap},
              {"feat_coords", cfg.feat_coords},
              {"feat_element", cfg.feat_element},
              {"feat_residue", cfg.feat_residue},
              {"precision", cfg.precision},
              {"subgraph_size", cfg.subgraph_size},
              {"text_only", cfg.text_only},
              {"wl_iterations", cfg.wl_iterations}};
}

struct FoldArtifacts {
  Vocabulary vocab;
  PcaModel pca;
  RoleVocab roles;
  ModelDims dims;
  TrainResult train;
  Confusion confusion;
};

FoldArtifacts run_fold(const Corpus& corpus, const FoldSplit& split, const GraphState& geval,
                       const std::map<std::string, AtomFeatureMatrix>& structures,
                       const ProteinMap& map, const RunConfig& cfg, uint64_t seed) {
  std::vector<SentenceRecord> train_records;
  std::vector<std::string> train_texts;
  train_records.reserve(split.train.size());
  for (int idx : split.train) {
    train_records.push_back(corpus.records[static_cast<size_t>(idx)]);
    train_texts.push_back(corpus.records[static_cast<size_t>(idx)].text);
  }

  FoldArtifacts fa;
  fa.vocab = Vocabulary::build(train_texts, cfg.max_words);
  const Eigen::MatrixXd onehot = one_hot_matrix(train_records, fa.vocab, cfg.counts);
  fa.pca = PcaModel::fit(onehot, cfg.pca_dim);

  const GraphState gtrain = build_graph_state(static_cast<int>(train_records.size()),
                                              shared_protein_edges(train_records), cfg);
  fa.roles.fit(gtrain.signatures);
  fa.dims = dims_for(cfg, fa.roles.size());

  ForwardContext tctx;
  tctx.cfg = &cfg;
  tctx.dims = fa.dims;
  for (const auto& r : train_records) tctx.records.push_back(&r);
  tctx.text = fa.pca.project_rows(onehot);
  std::vector<int> train_roles(train_records.size());
  for (size_t i = 0; i < train_records.size(); ++i)
    train_roles[i] = fa.roles.lookup(gtrain.signatures[i]);
  tctx.batches = make_batches(gtrain, train_roles, cfg);
  tctx.map = &map;
  tctx.structures = &structures;

  std::vector<int> train_labels;
  train_labels.reserve(train_records.size());
  for (const auto& r : train_records) train_labels.push_back(static_cast<int>(r.label));

  fa.train = train_loop(tctx, train_labels, cfg, seed);

  if (!split.test.empty()) {
    // Transductive evaluation: the full train∪test graph, frozen parameters,
    // test roles mapped through the training RoleVocab (unseen -> UNK).
    ForwardContext ectx;
    ectx.cfg = &cfg;
    ectx.dims = fa.dims;
    for (const auto& r : corpus.records) ectx.records.push_back(&r);
    ectx.text = fa.pca.project_rows(one_hot_matrix(corpus.records, fa.vocab, cfg.counts));
    std::vector<int> eval_roles(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i)
      eval_roles[i] = fa.roles.lookup(geval.signatures[i]);
    ectx.batches = make_batches(geval, eval_roles, cfg);
    ectx.map = &map;
    ectx.structures = &structures;

    std::vector<int> test_labels;
    test_labels.reserve(split.test.size());
    for (int idx : split.test)
      test_labels.push_back(static_cast<int>(corpus.records[static_cast<size_t>(idx)].label));
    fa.confusion = evaluate_locals(ectx, fa.train.params, split.test, test_labels);
  }
  return fa;
}

void write_loss_curve(const std::string& path, const std::vector<double>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trainer: cannot write " + path);
  out << "epoch,loss\n";
  char buf[48];
  for (size_t e = 0; e < curve.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", e, curve[e]);
    out << buf;
  }
}

void save_fold_dir(const fs::path& dir, const FoldArtifacts& fa, const RunConfig& cfg,
                   int fold) {
  fs::create_directories(dir);
  json meta{{"fold", fold}, {"features", config_fingerprint(cfg)}};
  save_checkpoint((dir / "checkpoint.ppck").string(), fa.dims, fa.train.params, meta.dump());
  fa.vocab.save((dir / "vocab.txt").string());
  fa.pca.save((dir / "pca.ppca").string());
  fa.roles.save((dir / "roles.txt").string());
  write_loss_curve((dir / "loss_curve.csv").string(), fa.train.loss_curve);
}

ProteinMap load_map_checked(const Corpus& corpus, const RunConfig& cfg) {
  if (cfg.text_only) return {};
  if (cfg.pdb_map.empty())
    throw std::runtime_error(
        "a protein map is required unless --text-only is set; pass --pdb-map <tsv>");
  ProteinMap map = ProteinMap::load(cfg.pdb_map);
  const auto missing = map.unmapped_mentions(corpus);
  if (!missing.empty()) {
    std::string msg = "pdb map has no entry for " + std::to_string(missing.size()) +
                      " mention(s):";
    for (const auto& m : missing) msg += " '" + m + "'";
    msg += "; add `<mention>\tMISSING` lines to opt out explicitly";
    throw std::runtime_error(msg);
  }
  return map;
}

void reject_normalize_blocks(const RunConfig& cfg) {
  if (cfg.normalize_blocks)
    throw std::runtime_error(
        "normalize_blocks is a fuse-stage artifact ablation; training always uses the plain "
        "block concatenation");
}

fs::path make_run_dir(const RunConfig& cfg) {
  const fs::path dir = fs::path(cfg.out) / cfg.run_dir_name();
  fs::create_directories(dir);
  std::ofstream copy(dir / "config.toml");
  if (!copy) throw std::runtime_error("trainer: cannot write config copy into " + dir.string());
  copy << cfg.canonical_toml();
  return dir;
}

}  // namespace

std::map<std::string, AtomFeatureMatrix> featurize_corpus_structures(
    const Corpus& corpus, const ProteinMap& map, const RunConfig& cfg) {
  std::set<std::string> ids;
  for (const auto& r : corpus.records) {
    for (const auto& mention : {r.protein1, r.protein2}) {
      const auto id = map.resolve(mention);
      if (id) ids.insert(*id);
    }
  }
  const AtomFeatureOptions opts = cfg.atom_features();
  std::map<std::string, AtomFeatureMatrix> out;
  for (const auto& id : ids) {
    const auto path = fetch_pdb(id, cfg.pdb_cache, cfg.offline);
    if (!path) {
      std::cerr << "warn: structure " << id
                << " unavailable; affected proteins use the null vector\n";
      continue;
    }
    try {
      out.emplace(id, featurize_atoms(parse_pdb_file(*path, id), cfg.a_max, opts));
    } catch (const std::exception& e) {
      std::cerr << "warn: structure " << id << ": " << e.what() << "; using the null vector\n";
    }
  }
  return out;
}

CvResult run_cv(const RunConfig& cfg) {
  cfg.validate();
  reject_normalize_blocks(cfg);
  if (cfg.corpus.empty()) throw std::runtime_error("run-cv: a corpus is required");
  const Corpus corpus = load_corpus(cfg.corpus);
  const ProteinMap map = load_map_checked(corpus, cfg);
  const auto structures = cfg.text_only ? std::map<std::string, AtomFeatureMatrix>{}
                                        : featurize_corpus_structures(corpus, map, cfg);
  const auto splits = fold_split(corpus, cfg.folds, cfg.seed, cfg.stratify);
  const GraphState geval = build_graph_state(static_cast<int>(corpus.size()),
                                             shared_protein_edges(corpus.records), cfg);
  const fs::path run_dir = make_run_dir(cfg);

  std::vector<FoldArtifacts> artifacts(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t f = next.fetch_add(1);
      if (f >= splits.size()) return;
      try {
        artifacts[f] = run_fold(corpus, splits[f], geval, structures, map, cfg,
                                fold_seed(cfg.seed, f));
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const int jobs = std::min(cfg.jobs, static_cast<int>(splits.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  CvResult res;
  res.run_dir = run_dir.string();
  std::vector<MetricsRow> fold_rows;
  for (size_t f = 0; f < artifacts.size(); ++f) {
    const fs::path fd = run_dir / ("fold" + std::to_string(f));
    save_fold_dir(fd, artifacts[f], cfg, static_cast<int>(f));
    write_confusion_csv((fd / "confusion.csv").string(), artifacts[f].confusion);
    fold_rows.push_back(metrics_row(std::to_string(f), artifacts[f].confusion));
  }
  res.rows = fold_rows;
  res.rows.push_back(mean_row(fold_rows));
  res.rows.push_back(micro_row(fold_rows));
  write_metrics_csv((run_dir / "metrics.csv").string(), res.rows);
  return res;
}

std::string train_full(const RunConfig& cfg) {
  cfg.validate();
  reject_normalize_blocks(cfg);
  if (cfg.corpus.empty()) throw std::runtime_error("train: a corpus is required");
  const Corpus corpus = load_corpus(cfg.corpus);
  const ProteinMap map = load_map_checked(corpus, cfg);
  const auto structures = cfg.text_only ? std::map<std::string, AtomFeatureMatrix>{}
                                        : featurize_corpus_structures(corpus, map, cfg);
  FoldSplit all;
  all.train.resize(corpus.size());
  std::iota(all.train.begin(), all.train.end(), 0);

  const fs::path run_dir = make_run_dir(cfg);
  const GraphState unused;  // no test split, the eval graph is never touched
  const FoldArtifacts fa =
      run_fold(corpus, all, unused, structures, map, cfg, fold_seed(cfg.seed, 0));
  save_fold_dir(run_dir, fa, cfg, 0);
  return run_dir.string();
}

MetricsRow evaluate_corpus(const RunConfig& cfg, const std::string& model_dir) {
  cfg.validate();
  if (cfg.corpus.empty()) throw std::runtime_error("evaluate: a corpus is required");
  const fs::path dir(model_dir);
  const Checkpoint ck = load_checkpoint((dir / "checkpoint.ppck").string());
  const Vocabulary vocab = Vocabulary::load((dir / "vocab.txt").string());
  const PcaModel pca = PcaModel::load((dir / "pca.ppca").string());
  const RoleVocab roles = RoleVocab::load((dir / "roles.txt").string());

  const json meta = json::parse(ck.meta_json);
  const json want = config_fingerprint(cfg);
  const json have = meta.value("features", json::object());
  std::string diff;
  for (const auto& [key, val] : want.items())
    if (!have.contains(key) || have.at(key) != val)
      diff += " " + key + " (checkpoint " + (have.contains(key) ? have.at(key).dump() : "?") +
              ", config " + val.dump() + ")";
  if (!diff.empty())
    throw std::runtime_error("evaluate: config does not match the checkpoint:" + diff);

  const Corpus corpus = load_corpus(cfg.corpus);
  const ProteinMap map = load_map_checked(corpus, cfg);
  const auto structures = cfg.text_only ? std::map<std::string, AtomFeatureMatrix>{}
                                        : featurize_corpus_structures(corpus, map, cfg);
  const GraphState gs = build_graph_state(static_cast<int>(corpus.size()),
                                          shared_protein_edges(corpus.records), cfg);

  ForwardContext ctx;
  ctx.cfg = &cfg;
  ctx.dims = ck.dims;
  for (const auto& r : corpus.records) ctx.records.push_back(&r);
  ctx.text = pca.project_rows(one_hot_matrix(corpus.records, vocab, cfg.counts));
  std::vector<int> eval_roles(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) eval_roles[i] = roles.lookup(gs.signatures[i]);
  ctx.batches = make_batches(gs, eval_roles, cfg);
  ctx.map = &map;
  ctx.structures = &structures;

  std::vector<int> locals(corpus.size());
  std::iota(locals.begin(), locals.end(), 0);
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& r : corpus.records) labels.push_back(static_cast<int>(r.label));

  const Confusion c = evaluate_locals(ctx, ck.params, locals, labels);
  const MetricsRow row = metrics_row("eval", c);
  write_metrics_csv((dir / "metrics_eval.csv").string(), {row});
  write_confusion_csv((dir / "confusion_eval.csv").string(), c);
  return row;
}

}  // namespace ppi
