#include "ppi/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "ppi/corpus.hpp"
#include "ppi/structure.hpp"

namespace fs = std::filesystem;

namespace ppi {

namespace {

struct Template {
  std::string prefix, mid, suffix;
};

const std::vector<Template> kPositive = {
    {"", " binds ", " in the phosphorylation assay"},
    {"", " binds ", " under oxidative stress"},
    {"the pulldown shows ", " binds ", " in vivo"},
};

const std::vector<Template> kNegative = {
    {"", " and ", " were detected in the same lysate"},
    {"", " co occurred with ", " without evidence of contact"},
    {"levels of ", " did not track ", " in any replicate"},
};

const Template kShared = {"", " was assayed together with ", " in solution"};

const std::vector<std::string> kStickyNames = {"SPA1", "SPB2", "SPC3",
                                               "SPD4", "SPE5", "SPF6"};
const std::vector<std::string> kInertNames = {"NPA1", "NPB2", "NPC3",
                                              "NPD4", "NPE5", "NPF6"};
const std::vector<std::string> kStickyPdbs = {"SS01", "SS02", "SS03", "SS04"};
const std::vector<std::string> kInertPdbs = {"NN01", "NN02", "NN03", "NN04"};

SentenceRecord make_record(const Template& t, const std::string& p1,
                           const std::string& p2, Label label) {
  SentenceRecord r;
  r.text = t.prefix + p1 + t.mid + p2 + t.suffix;
  r.protein1 = p1;
  r.protein2 = p2;
  const int b1 = static_cast<int>(t.prefix.size());
  const int e1 = b1 + static_cast<int>(p1.size());
  const int b2 = e1 + static_cast<int>(t.mid.size());
  r.p1_span = {b1, e1};
  r.p2_span = {b2, b2 + static_cast<int>(p2.size())};
  r.label = label;
  return r;
}

// Ten-residue coil; sticky structures are CYS with a sulfur per residue,
// inert ones are carbon-only ALA. The jitter varies the coordinates between
// pool members without touching the class signal.
void write_pdb(const std::string& path, const std::string& id, bool sticky,
               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("synthetic: cannot write " + path);
  out << "HEADER    SYNTHETIC PROTEIN                       01-JAN-24   " << id << "\n";
  out << "TITLE     GENERATED TEST STRUCTURE " << id << "\n";
  const char* res = sticky ? "CYS" : "ALA";
  int serial = 0;
  char line[96];
  for (int r = 0; r < 10; ++r) {
    const double theta = 0.6 * r;
    const double cx = 2.3 * std::cos(theta) + jitter(rng);
    const double cy = 2.3 * std::sin(theta) + jitter(rng);
    const double cz = 1.5 * r + jitter(rng);
    std::snprintf(line, sizeof(line),
                  "ATOM  %5d  CA  %3s A%4d    %8.3f%8.3f%8.3f  1.00  0.00           C",
                  ++serial, res, r + 1, cx, cy, cz);
    out << line << "\n";
    const char* name = sticky ? "SG" : "CB";
    const char* elem = sticky ? "S" : "C";
    std::snprintf(line, sizeof(line),
                  "ATOM  %5d  %-3s %3s A%4d    %8.3f%8.3f%8.3f  1.00  0.00          %2s",
                  ++serial, name, res, r + 1, cx + 1.5, cy + 0.8, cz + 0.4, elem);
    out << line << "\n";
  }
  out << "TER\n";
  out << "END\n";
}

}  // namespace

SyntheticOutput generate_synthetic(const SyntheticOptions& opt, const std::string& out_dir) {
  if (opt.n < 10) throw std::invalid_argument("synthetic: n must be >= 10");
  if (opt.missing_frac < 0.0 || opt.missing_frac > 1.0)
    throw std::invalid_argument("synthetic: missing_frac must be in [0, 1]");

  fs::create_directories(out_dir);
  SyntheticOutput paths;
  paths.corpus_path = (fs::path(out_dir) / "corpus.jsonl").string();
  paths.map_path = (fs::path(out_dir) / "pdb_map.tsv").string();
  paths.pdb_dir = (fs::path(out_dir) / "pdb").string();
  fs::create_directories(paths.pdb_dir);

  std::mt19937_64 rng(opt.seed);
  auto pick = [&rng](size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
  };

  const int n_pos = (opt.n + 1) / 2;
  Corpus corpus;
  ProteinMap map;

  if (opt.variant == SyntheticVariant::lexical_structural) {
    for (size_t i = 0; i < kStickyNames.size(); ++i)
      map.set(kStickyNames[i], kStickyPdbs[i % kStickyPdbs.size()]);
    for (size_t i = 0; i < kInertNames.size(); ++i)
      map.set(kInertNames[i], kInertPdbs[i % kInertPdbs.size()]);

    for (int i = 0; i < opt.n; ++i) {
      const bool pos = i < n_pos;
      std::string p1, p2;
      if (pos) {
        p1 = kStickyNames[pick(kStickyNames.size())];
        do {
          p2 = kStickyNames[pick(kStickyNames.size())];
        } while (p2 == p1);
      } else {
        // At least one inert protein keeps the structural rule consistent
        // with the missing lexical marker.
        p1 = kInertNames[pick(kInertNames.size())];
        do {
          const size_t j = pick(kStickyNames.size() + kInertNames.size());
          p2 = j < kStickyNames.size() ? kStickyNames[j]
                                       : kInertNames[j - kStickyNames.size()];
        } while (p2 == p1);
      }
      const auto& pool = pos ? kPositive : kNegative;
      corpus.records.push_back(make_record(pool[pick(pool.size())], p1, p2,
                                           pos ? Label::interaction : Label::non_interaction));
    }
  } else {
    for (int i = 0; i < opt.n; ++i) {
      const bool pos = i < n_pos;
      char name1[16], name2[16];
      std::snprintf(name1, sizeof(name1), "PA%03d", i);
      std::snprintf(name2, sizeof(name2), "PB%03d", i);
      bool sticky1 = pos, sticky2 = pos;
      if (!pos) {
        // Negatives cover every pattern that is not sticky+sticky.
        const size_t pat = pick(3);
        sticky1 = pat == 1;
        sticky2 = pat == 2;
      }
      map.set(name1, (sticky1 ? kStickyPdbs : kInertPdbs)[pick(kStickyPdbs.size())]);
      map.set(name2, (sticky2 ? kStickyPdbs : kInertPdbs)[pick(kStickyPdbs.size())]);
      corpus.records.push_back(make_record(kShared, name1, name2,
                                           pos ? Label::interaction : Label::non_interaction));
    }
  }

  std::shuffle(corpus.records.begin(), corpus.records.end(), rng);
  for (size_t i = 0; i < corpus.records.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "synth-%04zu", i);
    corpus.records[i].id = id;
  }

  if (opt.missing_frac > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> mentions;
    for (const auto& [mention, pdb] : map.entries()) mentions.push_back(mention);
    for (const auto& mention : mentions)
      if (u(rng) < opt.missing_frac) map.set_missing(mention);
  }

  // One file per referenced PDB id; ids dropped by missing_frac still get
  // files, which is harmless.
  std::set<std::string> ids;
  for (const auto& [mention, pdb] : map.entries())
    if (!pdb.empty()) ids.insert(pdb);
  if (opt.missing_frac < 1.0 && ids.empty())
    ids.insert(kStickyPdbs.begin(), kStickyPdbs.end());
  for (const auto& id : ids) {
    const bool sticky = id[0] == 'S';
    write_pdb((fs::path(paths.pdb_dir) / (id + ".pdb")).string(), id, sticky, rng);
  }

  save_corpus(corpus, paths.corpus_path);
  map.save(paths.map_path);
  return paths;
}

}  // namespace ppi
