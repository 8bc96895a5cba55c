#include "ppi/wl.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace ppi {

std::vector<std::string> wl_signatures(const Adjacency& graph, int iterations) {
  if (iterations < 0) throw std::invalid_argument("wl_signatures: iterations must be >= 0");
  const int n = graph.node_count();
  std::vector<std::string> color(static_cast<size_t>(n), "0");
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::string> next(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> nbr;
      nbr.reserve(graph.neighbors(i).size());
      for (int j : graph.neighbors(i)) nbr.push_back(color[static_cast<size_t>(j)]);
      std::sort(nbr.begin(), nbr.end());
      std::string sig = "(" + color[static_cast<size_t>(i)] + "|";
      for (size_t t = 0; t < nbr.size(); ++t) {
        if (t) sig += ",";
        sig += nbr[t];
      }
      sig += ")";
      next[static_cast<size_t>(i)] = std::move(sig);
    }
    color.swap(next);
  }
  return color;
}

std::vector<int> wl_roles(const Adjacency& graph, int iterations) {
  const auto sigs = wl_signatures(graph, iterations);
  std::map<std::string, int> ids;
  std::vector<int> roles(sigs.size());
  for (size_t i = 0; i < sigs.size(); ++i) {
    auto [it, inserted] = ids.emplace(sigs[i], static_cast<int>(ids.size()));
    roles[i] = it->second;
  }
  return roles;
}

void RoleVocab::fit(const std::vector<std::string>& signatures) {
  ids_.clear();
  for (const auto& sig : signatures) {
    // ids start at 1; 0 stays reserved for unseen signatures.
    ids_.emplace(sig, static_cast<int>(ids_.size()) + 1);
  }
}

int RoleVocab::lookup(const std::string& signature) const {
  auto it = ids_.find(signature);
  return it == ids_.end() ? kUnknown : it->second;
}

void RoleVocab::save(const std::string& path) const {
  std::vector<std::string> by_id(ids_.size());
  for (const auto& [sig, id] : ids_) by_id[static_cast<size_t>(id - 1)] = sig;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("roles: cannot write " + path);
  for (const auto& sig : by_id) out << sig << "\n";
}

RoleVocab RoleVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("roles: cannot open " + path);
  std::vector<std::string> sigs;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) sigs.push_back(line);
  RoleVocab rv;
  rv.fit(sigs);
  return rv;
}

}  // namespace ppi
