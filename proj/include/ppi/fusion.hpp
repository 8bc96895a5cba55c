#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ppi/corpus.hpp"

namespace ppi {

// Multi-modal graph: node i is the row-wise concatenation of its textual and
// structural features; the edge set is the textual edge set, untouched.
struct FusedGraph {
  Eigen::MatrixXd features;  // |N| x (text_width + structure_width)
  std::vector<std::pair<int, int>> edges;
  std::vector<Label> labels;
  int text_width = 0;
  int structure_width = 0;
};

// Plain concatenation per node; with normalize_blocks each block is L2
// normalized first (ablation, off by default).
FusedGraph fuse(const Eigen::MatrixXd& text_features,
                const Eigen::MatrixXd& structure_features,
                const std::vector<std::pair<int, int>>& edges, const std::vector<Label>& labels,
                bool normalize_blocks = false);

}  // namespace ppi
