#include "ppi/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace ppi {

Adjacency::Adjacency(int n, const std::vector<std::pair<int, int>>& edges)
    : n_(n), edge_count_(edges.size()), adj_(static_cast<size_t>(n)) {
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::runtime_error("graph: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") outside node range " + std::to_string(n));
    if (i == j) throw std::runtime_error("graph: self-loop at node " + std::to_string(i));
    adj_[static_cast<size_t>(i)].push_back(j);
    adj_[static_cast<size_t>(j)].push_back(i);
  }
  for (auto& nbrs : adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

std::vector<int> Adjacency::hop_distances(int source) const {
  std::vector<int> dist(static_cast<size_t>(n_), -1);
  std::deque<int> queue;
  dist[static_cast<size_t>(source)] = 0;
  queue.push_back(source);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : neighbors(u))
      if (dist[static_cast<size_t>(v)] < 0) {
        dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

}  // namespace ppi
