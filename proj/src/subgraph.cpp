#include "ppi/subgraph.hpp"

#include <stdexcept>

namespace ppi {

std::vector<int> sample_subgraph(const IntimacyTopK& intimacy, int target,
                                 int subgraph_size) {
  if (subgraph_size < 1) throw std::invalid_argument("sample_subgraph: subgraph_size must be >= 1");
  if (target < 0 || target >= static_cast<int>(intimacy.top.size()))
    throw std::out_of_range("sample_subgraph: target out of range");
  std::vector<int> nodes;
  nodes.reserve(static_cast<size_t>(subgraph_size));
  nodes.push_back(target);
  const auto& cand = intimacy.top[static_cast<size_t>(target)];
  for (const auto& [node, score] : cand) {
    if (static_cast<int>(nodes.size()) == subgraph_size) break;
    nodes.push_back(node);
  }
  // Isolated or sparsely connected targets pad with themselves.
  while (static_cast<int>(nodes.size()) < subgraph_size) nodes.push_back(target);
  return nodes;
}

SubgraphBatch build_batch(const Adjacency& graph, const IntimacyTopK& intimacy,
                          const std::vector<int>& roles, int target,
                          int subgraph_size, int distance_cap) {
  if (static_cast<int>(roles.size()) != graph.node_count())
    throw std::invalid_argument("build_batch: roles size does not match graph");
  if (distance_cap < 0) throw std::invalid_argument("build_batch: distance_cap must be >= 0");

  SubgraphBatch batch;
  batch.target = target;
  batch.nodes = sample_subgraph(intimacy, target, subgraph_size);
  batch.roles.reserve(batch.nodes.size());
  batch.dists.reserve(batch.nodes.size());

  const auto hops = graph.hop_distances(target);
  for (int node : batch.nodes) {
    batch.roles.push_back(roles[static_cast<size_t>(node)]);
    int d = hops[static_cast<size_t>(node)];
    if (d < 0 || d > distance_cap) d = distance_cap;  // unreachable maps to the cap
    batch.dists.push_back(d);
  }
  return batch;
}

}  // namespace ppi
