#include "ppi/structure.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ppi {

using num::Dtype;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

const std::array<const char*, 5> kElements = {"C", "N", "O", "S", "P"};

const std::array<const char*, 20> kResidues = {"ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU",
                                               "GLY", "HIS", "ILE", "LEU", "LYS", "MET", "PHE",
                                               "PRO", "SER", "THR", "TRP", "TYR", "VAL"};

int element_class(const std::string& element) {
  for (size_t i = 0; i < kElements.size(); ++i)
    if (element == kElements[i]) return static_cast<int>(i);
  return static_cast<int>(kElements.size());  // other
}

int residue_class(const std::string& res) {
  for (size_t i = 0; i < kResidues.size(); ++i)
    if (res == kResidues[i]) return static_cast<int>(i);
  return static_cast<int>(kResidues.size());  // other
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

AtomFeatureMatrix featurize_atoms(const PdbStructure& s, int a_max,
                                  const AtomFeatureOptions& opts) {
  if (a_max < 1) throw std::runtime_error("featurize_atoms: a_max must be >= 1");
  const int d_p = opts.d_p();
  if (d_p == 0) throw std::runtime_error("featurize_atoms: all feature groups disabled");

  AtomFeatureMatrix out;
  out.valid_rows = std::min<int>(a_max, static_cast<int>(s.atoms.size()));
  out.matrix = Tensor({a_max, d_p}, Dtype::f64);

  double cx = 0, cy = 0, cz = 0;
  for (int i = 0; i < out.valid_rows; ++i) {
    cx += s.atoms[static_cast<size_t>(i)].x;
    cy += s.atoms[static_cast<size_t>(i)].y;
    cz += s.atoms[static_cast<size_t>(i)].z;
  }
  if (out.valid_rows > 0) {
    cx /= out.valid_rows;
    cy /= out.valid_rows;
    cz /= out.valid_rows;
  }

  for (int i = 0; i < out.valid_rows; ++i) {
    const Atom& a = s.atoms[static_cast<size_t>(i)];
    int col = 0;
    if (opts.element) {
      out.matrix.at(i, col + element_class(a.element)) = 1.0;
      col += 6;
    }
    if (opts.coords) {
      out.matrix.at(i, col + 0) = a.x - cx;
      out.matrix.at(i, col + 1) = a.y - cy;
      out.matrix.at(i, col + 2) = a.z - cz;
      col += 3;
    }
    if (opts.residue) {
      out.matrix.at(i, col + residue_class(a.res_name)) = 1.0;
      col += 21;
    }
  }
  return out;
}

ProteinMap ProteinMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("protein map: cannot open '" + path + "'");
  ProteinMap pm;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("protein map: " + path + ":" + std::to_string(line_no) +
                               ": expected `mention<TAB>pdb_id`");
    const std::string mention = line.substr(0, tab);
    std::string pdb_id = line.substr(tab + 1);
    if (!pdb_id.empty() && pdb_id.back() == '\r') pdb_id.pop_back();
    if (pdb_id == "MISSING")
      pm.set_missing(mention);
    else
      pm.set(mention, pdb_id);
  }
  return pm;
}

void ProteinMap::set(const std::string& mention, const std::string& pdb_id) {
  map_[lower(mention)] = pdb_id;
}

void ProteinMap::set_missing(const std::string& mention) { map_[lower(mention)] = ""; }

std::optional<std::string> ProteinMap::resolve(const std::string& mention) const {
  auto it = map_.find(lower(mention));
  if (it == map_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

bool ProteinMap::has_entry(const std::string& mention) const {
  return map_.count(lower(mention)) > 0;
}

std::vector<std::string> ProteinMap::unmapped_mentions(const Corpus& corpus) const {
  std::set<std::string> missing;
  for (const SentenceRecord& r : corpus.records) {
    if (!has_entry(r.protein1)) missing.insert(lower(r.protein1));
    if (!has_entry(r.protein2)) missing.insert(lower(r.protein2));
  }
  return {missing.begin(), missing.end()};
}

void ProteinMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("protein map: cannot write '" + path + "'");
  for (const auto& [mention, pdb_id] : map_)
    out << mention << "\t" << (pdb_id.empty() ? "MISSING" : pdb_id) << "\n";
}

Var encode_protein(Tape& tape, const AtomFeatureMatrix& features, const CnnVars& cnn) {
  const int a_max = features.matrix.dim(0);
  const int w_max = std::max(tape.value(cnn.w3).dim(0), tape.value(cnn.w4).dim(0));
  if (a_max < w_max)
    throw std::runtime_error("encode_protein: a_max " + std::to_string(a_max) +
                             " smaller than largest CNN window " + std::to_string(w_max));

  Var x = tape.leaf(features.matrix.astype(tape.value(cnn.w3).dtype()));

  auto branch = [&](Var w, Var b) {
    const int window = tape.value(w).dim(0);
    Var conv = tape.relu(tape.conv1d(x, w, b));
    // Positions whose window would overlap zero padding are masked out, so
    // the pooled value is independent of a_max for a given structure.
    const int valid = std::max(0, features.valid_rows - window + 1);
    return tape.max_pool_rows(conv, valid);
  };
  return tape.concat_cols({branch(cnn.w3, cnn.b3), branch(cnn.w4, cnn.b4)});
}

Var sentence_structure_vector(Tape& tape, const SentenceRecord& record, const ProteinMap& map,
                              const std::map<std::string, AtomFeatureMatrix>& featurized,
                              ProteinVarCache& memo, const CnnVars& cnn, int d_s, Dtype dtype) {
  auto protein_var = [&](const std::string& mention) -> Var {
    const std::optional<std::string> pdb_id = map.resolve(mention);
    if (!pdb_id) return tape.leaf(Tensor({1, d_s}, dtype));  // null-vector rule
    auto hit = memo.find(*pdb_id);
    if (hit != memo.end()) return hit->second;
    auto feat = featurized.find(*pdb_id);
    if (feat == featurized.end()) return tape.leaf(Tensor({1, d_s}, dtype));
    Var v = encode_protein(tape, feat->second, cnn);
    memo.emplace(*pdb_id, v);
    return v;
  };
  Var p1 = protein_var(record.protein1);
  Var p2 = protein_var(record.protein2);
  return tape.concat_cols({p1, p2});
}

}  // namespace ppi
