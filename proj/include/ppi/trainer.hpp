#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppi/config.hpp"
#include "ppi/corpus.hpp"
#include "ppi/metrics.hpp"
#include "ppi/model.hpp"
#include "ppi/structure.hpp"

namespace ppi {

struct TrainResult {
  ParamMap params;
  std::vector<double> loss_curve;  // training loss per completed epoch
};

// Atom feature matrices for every PDB id the map resolves to, fetching
// uncached ids unless offline. Ids whose structure cannot be obtained are
// dropped with a stderr warning; the affected proteins degrade to the null
// vector downstream.
std::map<std::string, AtomFeatureMatrix> featurize_corpus_structures(
    const Corpus& corpus, const ProteinMap& map, const RunConfig& cfg);

struct CvResult {
  std::string run_dir;
  std::vector<MetricsRow> rows;  // one per fold, then "mean", then "micro"
};

// Per fold: refit vocabulary/PCA/edges/roles on the training split, train on
// the train-only graph, evaluate transductively on the train∪test graph with
// frozen parameters. Folds run on cfg.jobs threads with per-fold derived
// seeds; outputs land under <out>/<run_dir_name()>/.
CvResult run_cv(const RunConfig& cfg);

// Whole-corpus training; writes checkpoint.ppck, vocab.txt, pca.ppca,
// roles.txt, loss_curve.csv and the config copy into the run directory,
// which is returned.
std::string train_full(const RunConfig& cfg);

// Frozen checkpoint (a train_full run dir or a run-cv fold dir) against
// cfg.corpus; writes metrics_eval.csv and confusion_eval.csv next to the
// checkpoint. Feature-shaping config keys must match the checkpoint.
MetricsRow evaluate_corpus(const RunConfig& cfg, const std::string& model_dir);

}  // namespace ppi
