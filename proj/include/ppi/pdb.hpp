#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ppi {

struct Atom {
  int serial = 0;
  std::string name;      // atom-name field, trimmed
  std::string element;   // from columns 77-78, or atom-name fallback
  std::string res_name;  // residue name, trimmed
  char chain = ' ';
  double x = 0, y = 0, z = 0;  // Angstrom
};

struct PdbStructure {
  std::string pdb_id;
  std::vector<Atom> atoms;
};

// Extracts ATOM/HETATM records using fixed column positions; every other
// record type is ignored. Only the first MODEL is read. Throws when no atoms
// are present, a coordinate field fails to parse (line number reported), or
// serials repeat.
PdbStructure parse_pdb_text(const std::string& text, const std::string& pdb_id);
PdbStructure parse_pdb_file(const std::string& path, const std::string& pdb_id);

// Covalent-bond edges: atom pairs closer than `cutoff` Angstrom, found with a
// uniform grid. Pairs are (i, j) with i < j, sorted.
std::vector<std::pair<int, int>> covalent_bonds(const PdbStructure& s, double cutoff = 1.8);

// Offline-first archive client. A cached `<cache_dir>/<ID>.pdb` is reused
// byte-identically; otherwise (unless offline) the file is downloaded from
// files.rcsb.org, verified to parse with at least one atom, and written with
// create-then-rename. Any failure returns nullopt so the caller can record
// the protein as MISSING.
std::optional<std::string> fetch_pdb(const std::string& pdb_id, const std::string& cache_dir,
                                     bool offline = false);

}  // namespace ppi
