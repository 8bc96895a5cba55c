#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "ppi/corpus.hpp"
#include "ppi/pca.hpp"
#include "ppi/vocab.hpp"

namespace ppi {

// Sentence graph: row i of features is the PCA-reduced one-hot vector of
// sentence i; an undirected edge joins two sentences exactly when their
// protein-mention string sets intersect (case-insensitive exact match).
struct TextGraph {
  Eigen::MatrixXd features;               // |N| x pca_dim
  std::vector<std::pair<int, int>> edges;  // i < j, sorted, no self-loops
};

// Shared-protein edges over the given records, via an inverted
// mention -> record index map.
std::vector<std::pair<int, int>> shared_protein_edges(
    const std::vector<SentenceRecord>& records);

Eigen::MatrixXd one_hot_matrix(const std::vector<SentenceRecord>& records,
                               const Vocabulary& vocab, bool counts = false);

TextGraph build_text_graph(const std::vector<SentenceRecord>& records, const Vocabulary& vocab,
                           const PcaModel& pca, bool counts = false);

void save_text_graph(const TextGraph& g, const std::string& features_path,
                     const std::string& edges_path);
TextGraph load_text_graph(const std::string& features_path, const std::string& edges_path);

}  // namespace ppi
