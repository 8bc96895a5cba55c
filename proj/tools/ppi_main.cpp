#include <CLI11.hpp>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "ppi/config.hpp"
#include "ppi/corpus.hpp"
#include "ppi/fusion.hpp"
#include "ppi/gradcheck.hpp"
#include "ppi/matrix_io.hpp"
#include "ppi/metrics.hpp"
#include "ppi/model.hpp"
#include "ppi/pca.hpp"
#include "ppi/pdb.hpp"
#include "ppi/structure.hpp"
#include "ppi/synthetic.hpp"
#include "ppi/text_graph.hpp"
#include "ppi/trainer.hpp"
#include "ppi/vocab.hpp"

namespace fs = std::filesystem;
using namespace ppi;

namespace {

void require_artifact(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p))
    throw std::runtime_error("missing artifact " + p.string() + "; run `ppi " + producer +
                             "` first");
}

Corpus load_corpus_checked(const RunConfig& cfg, const char* cmd) {
  if (cfg.corpus.empty())
    throw std::runtime_error(std::string(cmd) + ": a corpus is required; pass --corpus <jsonl>");
  return load_corpus(cfg.corpus);
}

ProteinMap load_map_for_structures(const Corpus& corpus, const RunConfig& cfg) {
  if (cfg.pdb_map.empty())
    throw std::runtime_error("a protein map is required; pass --pdb-map <tsv>");
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

void cmd_build_text_graph(const RunConfig& cfg, const fs::path& artifacts) {
  const Corpus corpus = load_corpus_checked(cfg, "build-text-graph");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& r : corpus.records) texts.push_back(r.text);
  const Vocabulary vocab = Vocabulary::build(texts, cfg.max_words);
  const PcaModel pca = PcaModel::fit(one_hot_matrix(corpus.records, vocab, cfg.counts),
                                     cfg.pca_dim);
  const TextGraph tg = build_text_graph(corpus.records, vocab, pca, cfg.counts);

  const fs::path dir = artifacts / "text";
  fs::create_directories(dir);
  save_text_graph(tg, (dir / "features.ppmx").string(), (dir / "edges.txt").string());
  vocab.save((dir / "vocab.txt").string());
  pca.save((dir / "pca.ppca").string());
  std::cerr << "text graph: " << corpus.size() << " nodes, " << tg.edges.size() << " edges, |V| "
            << vocab.size() << " -> " << pca.target_dim() << " dims, in " << dir.string() << "\n";
}

void cmd_build_structure(const RunConfig& cfg, const fs::path& artifacts) {
  const Corpus corpus = load_corpus_checked(cfg, "build-structure");
  const ProteinMap map = load_map_for_structures(corpus, cfg);

  const fs::path dir = artifacts / "structure";
  const fs::path bonds_dir = dir / "bonds";
  fs::create_directories(bonds_dir);

  std::set<std::string> ids;
  for (const auto& r : corpus.records)
    for (const auto& mention : {r.protein1, r.protein2})
      if (const auto id = map.resolve(mention)) ids.insert(*id);

  const AtomFeatureOptions opts = cfg.atom_features();
  std::map<std::string, AtomFeatureMatrix> feats;
  for (const auto& id : ids) {
    const auto path = fetch_pdb(id, cfg.pdb_cache, cfg.offline);
    if (!path) {
      std::cerr << "warn: structure " << id
                << " unavailable; affected proteins use the null vector\n";
      continue;
    }
    const PdbStructure s = parse_pdb_file(*path, id);
    write_edges((bonds_dir / (id + ".txt")).string(), covalent_bonds(s));
    feats.emplace(id, featurize_atoms(s, cfg.a_max, opts));
  }

  // The serialized vectors come from the seed-initialized CNN; training
  // recomputes this stage end-to-end, so the artifact is for inspection and
  // the fuse ablation.
  ModelDims dims;
  dims.fused_dim = cfg.pca_dim + 2 * cfg.d_s;
  dims.hidden = cfg.hidden;
  dims.heads = cfg.heads;
  dims.layers = cfg.layers;
  dims.role_vocab = 1;
  dims.subgraph_size = cfg.subgraph_size;
  dims.distance_cap = cfg.distance_cap;
  dims.d_p = opts.d_p();
  dims.d_s = cfg.d_s;
  const ParamMap params = init_params(dims, cfg.seed, cfg.dtype());

  num::Tape tape;
  const BoundModel bm = bind_params(tape, dims, params);
  ProteinVarCache memo;
  std::vector<num::Var> rows;
  rows.reserve(corpus.size());
  for (const auto& r : corpus.records)
    rows.push_back(
        sentence_structure_vector(tape, r, map, feats, memo, bm.cnn(), cfg.d_s, cfg.dtype()));
  const num::Tensor& sm = tape.value(tape.concat_rows(rows));

  Eigen::MatrixXd m(sm.dim(0), sm.dim(1));
  for (int i = 0; i < sm.dim(0); ++i)
    for (int j = 0; j < sm.dim(1); ++j) m(i, j) = sm.at(i, j);
  write_matrix((dir / "features.ppmx").string(), m);
  std::cerr << "structure: " << feats.size() << " structures featurized, vectors "
            << corpus.size() << " x " << 2 * cfg.d_s << ", in " << dir.string() << "\n";
}

void cmd_fuse(const RunConfig& cfg, const fs::path& artifacts) {
  const Corpus corpus = load_corpus_checked(cfg, "fuse");
  const fs::path text_features = artifacts / "text" / "features.ppmx";
  const fs::path text_edges = artifacts / "text" / "edges.txt";
  const fs::path structure_features = artifacts / "structure" / "features.ppmx";
  require_artifact(text_features, "build-text-graph");
  require_artifact(text_edges, "build-text-graph");
  require_artifact(structure_features, "build-structure");

  std::vector<Label> labels;
  labels.reserve(corpus.size());
  for (const auto& r : corpus.records) labels.push_back(r.label);

  const FusedGraph fg = fuse(read_matrix(text_features.string()),
                             read_matrix(structure_features.string()),
                             read_edges(text_edges.string()), labels, cfg.normalize_blocks);

  const fs::path dir = artifacts / "fused";
  fs::create_directories(dir);
  write_matrix((dir / "features.ppmx").string(), fg.features);
  write_edges((dir / "edges.txt").string(), fg.edges);
  std::ofstream lout(dir / "labels.txt");
  if (!lout) throw std::runtime_error("fuse: cannot write labels under " + dir.string());
  for (Label l : fg.labels) lout << label_name(l) << "\n";
  std::cerr << "fused: " << fg.features.rows() << " nodes, width " << fg.features.cols() << " ("
            << fg.text_width << " text + " << fg.structure_width << " structure), "
            << fg.edges.size() << " edges, in " << dir.string() << "\n";
}

void print_rows(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "fold   precision  recall     f1         tp    fp    fn    tn\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-6s %-10s %-10s %-10s %-5lld %-5lld %-5lld %-5lld\n",
                  r.fold.c_str(), format_metric(r.precision).c_str(),
                  format_metric(r.recall).c_str(), format_metric(r.f1).c_str(),
                  static_cast<long long>(r.counts.tp), static_cast<long long>(r.counts.fp),
                  static_cast<long long>(r.counts.fn), static_cast<long long>(r.counts.tn));
    out << line;
  }
}

int cmd_gradcheck(const RunConfig& cfg) {
  const GradCheckResult r = run_gradcheck(cfg.seed);
  std::cerr << "gradcheck: " << r.checked << " coordinates, max rel err " << r.max_rel_err
            << (r.worst_param.empty() ? "" : " at " + r.worst_param) << "\n";
  if (!r.pass()) {
    std::cerr << "gradcheck: FAIL (tolerance 1e-4)\n";
    return 2;
  }
  std::cerr << "gradcheck: ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal protein-protein interaction sentence classifier"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; keys mirror the long option names");
  app.allow_config_extras(false);

  RunConfig cfg;
  app.add_option("--corpus", cfg.corpus, "JSONL corpus")->capture_default_str();
  app.add_option("--pdb-map,--pdb_map", cfg.pdb_map, "mention -> PDB id TSV")
      ->capture_default_str();
  app.add_option("--pdb-cache,--pdb_cache", cfg.pdb_cache, "PDB cache directory")
      ->capture_default_str();
  app.add_option("--out", cfg.out, "parent directory for run outputs")->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "parallel folds for run-cv")->capture_default_str();
  app.add_flag("--offline", cfg.offline, "never touch the network");
  app.add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
  app.add_flag("--stratify", cfg.stratify, "stratify folds by label");
  app.add_option("--max-words,--max_words", cfg.max_words,
                 "vocabulary frequency cap, 0 = unlimited")
      ->capture_default_str();
  app.add_flag("--counts", cfg.counts, "token counts instead of binary presence");
  app.add_option("--pca-dim,--pca_dim", cfg.pca_dim, "PCA target dimension")
      ->capture_default_str();
  app.add_option("--a-max,--a_max", cfg.a_max, "atom rows per structure")->capture_default_str();
  app.add_option("--d-s,--d_s", cfg.d_s, "per-protein CNN channels")->capture_default_str();
  app.add_flag("--feat-element,--feat_element,!--no-feat-element", cfg.feat_element,
               "element one-hot block");
  app.add_flag("--feat-coords,--feat_coords,!--no-feat-coords", cfg.feat_coords,
               "centered-coordinate block");
  app.add_flag("--feat-residue,--feat_residue,!--no-feat-residue", cfg.feat_residue,
               "residue one-hot block");
  app.add_option("--subgraph-size,--subgraph_size", cfg.subgraph_size,
                 "target + context nodes per batch")
      ->capture_default_str();
  app.add_option("--hidden", cfg.hidden, "transformer hidden size")->capture_default_str();
  app.add_option("--heads", cfg.heads, "attention heads")->capture_default_str();
  app.add_option("--layers", cfg.layers, "transformer layers D")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "personalized PageRank damping")->capture_default_str();
  app.add_option("--wl-iterations,--wl_iterations", cfg.wl_iterations, "WL refinement rounds")
      ->capture_default_str();
  app.add_option("--distance-cap,--distance_cap", cfg.distance_cap, "hop distance cap")
      ->capture_default_str();
  app.add_option("--direct-solve-max,--direct_solve_max", cfg.direct_solve_max,
                 "max nodes for the dense intimacy solve")
      ->capture_default_str();
  app.add_option("--lr", cfg.lr, "learning rate")->capture_default_str();
  app.add_option("--weight-decay,--weight_decay", cfg.weight_decay, "decoupled weight decay")
      ->capture_default_str();
  app.add_option("--hidden-dropout,--hidden_dropout", cfg.hidden_dropout,
                 "dropout after attention/FFN output")
      ->capture_default_str();
  app.add_option("--attention-dropout,--attention_dropout", cfg.attention_dropout,
                 "dropout on attention weights")
      ->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
  app.add_option("--patience", cfg.patience, "train-loss patience, 0 disables early stop")
      ->capture_default_str();
  app.add_flag("--class-weights,--class_weights", cfg.class_weights,
               "balanced class weights in the loss");
  app.add_flag("--text-only,--text_only", cfg.text_only, "zero the structure block (ablation)");
  app.add_flag("--normalize-blocks,--normalize_blocks", cfg.normalize_blocks,
               "L2-normalize each block in the fuse artifact (ablation)");
  app.add_option("--precision", cfg.precision, "f32 or f64 forward precision")
      ->capture_default_str();

  std::string artifacts = "artifacts";
  std::string model_dir;
  int synth_n = 40;
  std::string synth_variant = "default";
  double synth_missing = 0.0;
  std::string synth_out = "synth";

  auto* c_text = app.add_subcommand("build-text-graph",
                                    "One-hot + PCA node features and shared-protein edges");
  auto* c_struct = app.add_subcommand("build-structure",
                                      "PDB parsing, atom features, CNN structure vectors");
  auto* c_fuse = app.add_subcommand("fuse", "Concatenate text and structure blocks");
  auto* c_train = app.add_subcommand("train", "Train on the whole corpus, write a checkpoint");
  auto* c_eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on a corpus");
  auto* c_cv = app.add_subcommand("run-cv", "Cross-validated train + evaluate");
  auto* c_synth = app.add_subcommand("gen-synthetic", "Write a synthetic corpus + PDB pool");
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference audit of all gradients");
  for (auto* sub : {c_text, c_struct, c_fuse, c_train, c_eval, c_cv, c_synth, c_grad})
    sub->fallthrough();

  for (auto* sub : {c_text, c_struct, c_fuse})
    sub->add_option("--artifacts", artifacts, "stage artifact directory")->capture_default_str();
  c_eval->add_option("--model-dir", model_dir,
                     "directory holding checkpoint.ppck (a train run dir or a run-cv fold dir)")
      ->required();
  c_synth->add_option("--n", synth_n, "sentence count")->capture_default_str();
  c_synth->add_option("--variant", synth_variant, "default | structure-only")
      ->check(CLI::IsMember({"default", "structure-only"}))
      ->capture_default_str();
  c_synth->add_option("--missing-frac", synth_missing, "fraction of mentions mapped to MISSING")
      ->capture_default_str();
  c_synth->add_option("--out-dir", synth_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_text->parsed()) {
      cfg.validate();
      cmd_build_text_graph(cfg, artifacts);
    } else if (c_struct->parsed()) {
      cfg.validate();
      cmd_build_structure(cfg, artifacts);
    } else if (c_fuse->parsed()) {
      cfg.validate();
      cmd_fuse(cfg, artifacts);
    } else if (c_train->parsed()) {
      const std::string dir = train_full(cfg);
      std::cerr << "trained; artifacts in " << dir << "\n";
      std::cout << dir << "\n";
    } else if (c_eval->parsed()) {
      const MetricsRow row = evaluate_corpus(cfg, model_dir);
      print_rows(std::cerr, {row});
      std::cerr << render_confusion(row.counts);
      std::cerr << "wrote metrics_eval.csv and confusion_eval.csv in " << model_dir << "\n";
    } else if (c_cv->parsed()) {
      const CvResult res = run_cv(cfg);
      print_rows(std::cerr, res.rows);
      std::cerr << "metrics in " << res.run_dir << "/metrics.csv\n";
      std::cout << res.run_dir << "\n";
    } else if (c_synth->parsed()) {
      SyntheticOptions opt;
      opt.n = synth_n;
      opt.seed = cfg.seed;
      opt.variant = synth_variant == "structure-only" ? SyntheticVariant::structure_only
                                                      : SyntheticVariant::lexical_structural;
      opt.missing_frac = synth_missing;
      const SyntheticOutput out = generate_synthetic(opt, synth_out);
      std::cerr << "wrote " << out.corpus_path << ", " << out.map_path << ", " << out.pdb_dir
                << "\n";
    } else if (c_grad->parsed()) {
      return cmd_gradcheck(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
