#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppi/graph.hpp"

namespace ppi {

// Weisfeiler-Lehman color refinement. Signatures are structural strings that
// transfer across graphs: two nodes in different graphs with identical local
// neighborhoods (up to `iterations` hops) receive the same signature.
std::vector<std::string> wl_signatures(const Adjacency& graph, int iterations);

// Dense role ids in first-occurrence order over the signature list.
std::vector<int> wl_roles(const Adjacency& graph, int iterations);

// Maps signatures to embedding rows. Row 0 is reserved for signatures never
// seen at fit time, so size() is one larger than the number of distinct
// training signatures.
class RoleVocab {
 public:
  static constexpr int kUnknown = 0;

  void fit(const std::vector<std::string>& signatures);
  int lookup(const std::string& signature) const;
  int size() const { return static_cast<int>(ids_.size()) + 1; }

  // One signature per line, in id order; load() restores identical ids.
  void save(const std::string& path) const;
  static RoleVocab load(const std::string& path);

 private:
  std::map<std::string, int> ids_;
};

}  // namespace ppi
