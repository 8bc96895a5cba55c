#include "ppi/config.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ppi {

void RunConfig::validate() const {
  std::vector<std::string> bad;
  if (folds < 2) bad.push_back("folds must be >= 2");
  if (jobs < 1) bad.push_back("jobs must be >= 1");
  if (max_words < 0) bad.push_back("max_words must be >= 0");
  if (pca_dim < 1) bad.push_back("pca_dim must be >= 1");
  if (a_max < 4) bad.push_back("a_max must be >= 4 (largest CNN window)");
  if (d_s < 2 || d_s % 2 != 0) bad.push_back("d_s must be even and >= 2");
  if (!feat_element && !feat_coords && !feat_residue)
    bad.push_back("at least one atom feature group must be enabled");
  if (subgraph_size < 1) bad.push_back("subgraph_size must be >= 1");
  if (hidden < 1) bad.push_back("hidden must be >= 1");
  if (heads < 1) bad.push_back("heads must be >= 1");
  if (hidden >= 1 && heads >= 1 && hidden % heads != 0)
    bad.push_back("hidden must be divisible by heads");
  if (layers < 0) bad.push_back("layers must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) bad.push_back("alpha must be in (0, 1)");
  if (wl_iterations < 0) bad.push_back("wl_iterations must be >= 0");
  if (distance_cap < 0) bad.push_back("distance_cap must be >= 0");
  if (direct_solve_max < 0) bad.push_back("direct_solve_max must be >= 0");
  if (!(lr > 0.0)) bad.push_back("lr must be > 0");
  if (weight_decay < 0.0) bad.push_back("weight_decay must be >= 0");
  if (hidden_dropout < 0.0 || hidden_dropout >= 1.0)
    bad.push_back("hidden_dropout must be in [0, 1)");
  if (attention_dropout < 0.0 || attention_dropout >= 1.0)
    bad.push_back("attention_dropout must be in [0, 1)");
  if (epochs < 1) bad.push_back("epochs must be >= 1");
  if (patience < 0) bad.push_back("patience must be >= 0");
  if (precision != "f32" && precision != "f64")
    bad.push_back("precision must be \"f32\" or \"f64\"");
  if (bad.empty()) return;
  std::string msg = "config invalid:";
  for (size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : " ") + bad[i];
  throw std::runtime_error(msg);
}

AtomFeatureOptions RunConfig::atom_features() const {
  return AtomFeatureOptions{feat_element, feat_coords, feat_residue};
}

num::Dtype RunConfig::dtype() const {
  return precision == "f64" ? num::Dtype::f64 : num::Dtype::f32;
}

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string RunConfig::canonical_toml() const {
  std::ostringstream s;
  auto str = [&](const char* k, const std::string& v) { s << k << " = \"" << v << "\"\n"; };
  auto num = [&](const char* k, auto v) { s << k << " = " << v << "\n"; };
  auto flt = [&](const char* k, double v) { s << k << " = " << fmt_double(v) << "\n"; };
  auto flag = [&](const char* k, bool v) { s << k << " = " << (v ? "true" : "false") << "\n"; };

  num("a_max", a_max);
  flt("alpha", alpha);
  flt("attention_dropout", attention_dropout);
  flag("class_weights", class_weights);
  str("corpus", corpus);
  flag("counts", counts);
  num("d_s", d_s);
  num("direct_solve_max", direct_solve_max);
  num("distance_cap", distance_cap);
  num("epochs", epochs);
  flag("feat_coords", feat_coords);
  flag("feat_element", feat_element);
  flag("feat_residue", feat_residue);
  num("folds", folds);
  num("heads", heads);
  flt("hidden_dropout", hidden_dropout);
  num("hidden", hidden);
  num("layers", layers);
  flt("lr", lr);
  num("max_words", max_words);
  flag("normalize_blocks", normalize_blocks);
  flag("offline", offline);
  num("patience", patience);
  num("pca_dim", pca_dim);
  str("pdb_cache", pdb_cache);
  str("pdb_map", pdb_map);
  str("precision", precision);
  num("seed", seed);
  flag("stratify", stratify);
  num("subgraph_size", subgraph_size);
  flag("text_only", text_only);
  flt("weight_decay", weight_decay);
  num("wl_iterations", wl_iterations);
  return s.str();
}

uint64_t RunConfig::config_hash() const {
  const std::string s = canonical_toml();
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::run_dir_name() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "run-%016llx-s%llu",
                static_cast<unsigned long long>(config_hash()),
                static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace ppi
