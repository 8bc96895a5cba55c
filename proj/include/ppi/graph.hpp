#pragma once

#include <utility>
#include <vector>

namespace ppi {

// Undirected adjacency over n nodes, built once from a sorted pair list.
class Adjacency {
 public:
  Adjacency() = default;
  Adjacency(int n, const std::vector<std::pair<int, int>>& edges);

  int node_count() const { return n_; }
  size_t edge_count() const { return edge_count_; }
  const std::vector<int>& neighbors(int i) const { return adj_[static_cast<size_t>(i)]; }
  int degree(int i) const { return static_cast<int>(adj_[static_cast<size_t>(i)].size()); }

  // BFS hop distances from source; unreachable nodes get -1.
  std::vector<int> hop_distances(int source) const;

 private:
  int n_ = 0;
  size_t edge_count_ = 0;
  std::vector<std::vector<int>> adj_;
};

}  // namespace ppi
