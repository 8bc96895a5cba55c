#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ppi/graph.hpp"

namespace ppi {

enum class IntimacyMethod { automatic, direct, power };

// Personalized-PageRank intimacy S = alpha * (I - (1-alpha) * Abar)^-1 with
// Abar the column-normalized adjacency; isolated nodes are self-normalized
// (Abar[i][i] = 1). Rows are kept only as per-node top-k lists, sorted by
// descending score with ascending node index on ties; the node itself is
// excluded and only strictly positive scores qualify.
struct IntimacyTopK {
  std::vector<std::vector<std::pair<int, double>>> top;  // per node: (node, score)
  int k = 0;
};

// Row i of S. `automatic` picks a dense LU solve for graphs up to
// direct_max nodes and power iteration (residual 1e-9) beyond.
Eigen::VectorXd intimacy_row(const Adjacency& graph, int i, double alpha,
                             IntimacyMethod method = IntimacyMethod::automatic,
                             int direct_max = 2000);

IntimacyTopK compute_intimacy(const Adjacency& graph, double alpha, int k,
                              IntimacyMethod method = IntimacyMethod::automatic,
                              int direct_max = 2000);

}  // namespace ppi
