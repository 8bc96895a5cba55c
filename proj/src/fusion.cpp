#include "ppi/fusion.hpp"

#include <stdexcept>

namespace ppi {

FusedGraph fuse(const Eigen::MatrixXd& text_features, const Eigen::MatrixXd& structure_features,
                const std::vector<std::pair<int, int>>& edges, const std::vector<Label>& labels,
                bool normalize_blocks) {
  const Eigen::Index n = text_features.rows();
  if (structure_features.rows() != n)
    throw std::runtime_error("fuse: row count mismatch: text " + std::to_string(n) +
                             " vs structure " + std::to_string(structure_features.rows()));
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::runtime_error("fuse: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " nodes");
  for (const auto& [a, b] : edges)
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::runtime_error("fuse: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                               ") outside " + std::to_string(n) + " nodes");

  FusedGraph g;
  g.text_width = static_cast<int>(text_features.cols());
  g.structure_width = static_cast<int>(structure_features.cols());
  g.features.resize(n, text_features.cols() + structure_features.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd t = text_features.row(i);
    Eigen::RowVectorXd s = structure_features.row(i);
    if (normalize_blocks) {
      if (t.norm() > 0) t /= t.norm();
      if (s.norm() > 0) s /= s.norm();
    }
    g.features.row(i) << t, s;
  }
  g.edges = edges;
  g.labels = labels;
  return g;
}

}  // namespace ppi
