#include "ppi/text_graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "ppi/matrix_io.hpp"

namespace ppi {

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::vector<std::pair<int, int>> shared_protein_edges(const std::vector<SentenceRecord>& records) {
  std::map<std::string, std::vector<int>> by_mention;
  for (size_t i = 0; i < records.size(); ++i) {
    const int idx = static_cast<int>(i);
    std::string a = lower(records[i].protein1);
    std::string b = lower(records[i].protein2);
    by_mention[a].push_back(idx);
    if (b != a) by_mention[b].push_back(idx);
  }

  std::vector<std::pair<int, int>> edges;
  for (const auto& [mention, members] : by_mention)
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a + 1; b < members.size(); ++b)
        edges.emplace_back(members[a], members[b]);

  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Eigen::MatrixXd one_hot_matrix(const std::vector<SentenceRecord>& records,
                               const Vocabulary& vocab, bool counts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(records.size()), vocab.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const std::vector<double> row = vocab.one_hot(records[i].text, counts);
    for (int j = 0; j < vocab.size(); ++j)
      m(static_cast<Eigen::Index>(i), j) = row[static_cast<size_t>(j)];
  }
  return m;
}

TextGraph build_text_graph(const std::vector<SentenceRecord>& records, const Vocabulary& vocab,
                           const PcaModel& pca, bool counts) {
  TextGraph g;
  g.features = pca.project_rows(one_hot_matrix(records, vocab, counts));
  g.edges = shared_protein_edges(records);
  return g;
}

void save_text_graph(const TextGraph& g, const std::string& features_path,
                     const std::string& edges_path) {
  write_matrix(features_path, g.features);
  write_edges(edges_path, g.edges);
}

TextGraph load_text_graph(const std::string& features_path, const std::string& edges_path) {
  TextGraph g;
  g.features = read_matrix(features_path);
  g.edges = read_edges(edges_path);
  return g;
}

}  // namespace ppi
