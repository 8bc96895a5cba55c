#pragma once

#include <vector>

#include "ppi/graph.hpp"
#include "ppi/intimacy.hpp"

namespace ppi {

// Context for one target node: the target at slot 0 followed by its
// subgraph_size - 1 most intimate neighbors. Nodes with fewer qualifying
// neighbors repeat the target itself to pad out the batch.
struct SubgraphBatch {
  int target = -1;
  std::vector<int> nodes;   // size() == subgraph_size, nodes[0] == target
  std::vector<int> roles;   // WL role id per slot
  std::vector<int> dists;   // BFS hops from target per slot, capped
};

std::vector<int> sample_subgraph(const IntimacyTopK& intimacy, int target,
                                 int subgraph_size);

SubgraphBatch build_batch(const Adjacency& graph, const IntimacyTopK& intimacy,
                          const std::vector<int>& roles, int target,
                          int subgraph_size, int distance_cap);

}  // namespace ppi
