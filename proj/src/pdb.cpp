#include "ppi/pdb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace ppi {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string field(const std::string& line, size_t begin, size_t end) {
  if (begin >= line.size()) return {};
  return trim(line.substr(begin, std::min(end, line.size()) - begin));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

double parse_coord(const std::string& raw, int line_no, const char* which) {
  const std::string s = trim(raw);
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size() || !std::isfinite(v))
    throw std::runtime_error("pdb: line " + std::to_string(line_no) + ": unparsable " + which +
                             " coordinate '" + raw + "'");
  return v;
}

// Element fallback when columns 77-78 are blank: first alphabetic character
// of the atom-name field.
std::string element_from_name(const std::string& name) {
  for (char c : name)
    if (std::isalpha(static_cast<unsigned char>(c)))
      return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return {};
}

}  // namespace

PdbStructure parse_pdb_text(const std::string& text, const std::string& pdb_id) {
  PdbStructure s;
  s.pdb_id = pdb_id;
  std::set<int> serials;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string rec = field(line, 0, 6);
    if (rec == "ENDMDL") break;  // first MODEL only
    if (rec != "ATOM" && rec != "HETATM") continue;

    Atom a;
    const std::string serial_str = field(line, 6, 11);
    try {
      a.serial = std::stoi(serial_str);
    } catch (const std::exception&) {
      throw std::runtime_error("pdb: line " + std::to_string(line_no) + ": bad serial '" +
                               serial_str + "'");
    }
    if (!serials.insert(a.serial).second)
      throw std::runtime_error("pdb: line " + std::to_string(line_no) + ": duplicate serial " +
                               std::to_string(a.serial));
    a.name = field(line, 12, 16);
    a.res_name = field(line, 17, 20);
    a.chain = line.size() > 21 ? line[21] : ' ';
    a.x = parse_coord(line.substr(30, 8), line_no, "x");
    a.y = parse_coord(line.substr(38, 8), line_no, "y");
    a.z = parse_coord(line.substr(46, 8), line_no, "z");
    a.element = upper(field(line, 76, 78));
    if (a.element.empty()) a.element = element_from_name(a.name);
    s.atoms.push_back(std::move(a));
  }

  if (s.atoms.empty()) throw std::runtime_error("pdb: '" + pdb_id + "': no atoms");
  return s;
}

PdbStructure parse_pdb_file(const std::string& path, const std::string& pdb_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pdb: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pdb_text(buf.str(), pdb_id);
}

std::vector<std::pair<int, int>> covalent_bonds(const PdbStructure& s, double cutoff) {
  std::vector<std::pair<int, int>> bonds;
  const double cell = cutoff;
  std::map<std::tuple<long, long, long>, std::vector<int>> grid;
  auto key = [cell](const Atom& a) {
    return std::make_tuple(static_cast<long>(std::floor(a.x / cell)),
                           static_cast<long>(std::floor(a.y / cell)),
                           static_cast<long>(std::floor(a.z / cell)));
  };
  for (size_t i = 0; i < s.atoms.size(); ++i) grid[key(s.atoms[i])].push_back(static_cast<int>(i));

  const double c2 = cutoff * cutoff;
  for (const auto& [k, members] : grid) {
    auto [gx, gy, gz] = k;
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({gx + dx, gy + dy, gz + dz});
          if (it == grid.end()) continue;
          for (int i : members)
            for (int j : it->second) {
              if (j <= i) continue;
              const Atom& a = s.atoms[static_cast<size_t>(i)];
              const Atom& b = s.atoms[static_cast<size_t>(j)];
              const double d2 = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                (a.z - b.z) * (a.z - b.z);
              if (d2 < c2) bonds.emplace_back(i, j);
            }
        }
  }
  std::sort(bonds.begin(), bonds.end());
  bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
  return bonds;
}

std::optional<std::string> fetch_pdb(const std::string& pdb_id, const std::string& cache_dir,
                                     bool offline) {
  const std::string id = upper(pdb_id);
  fs::create_directories(cache_dir);
  const fs::path cached = fs::path(cache_dir) / (id + ".pdb");
  if (fs::exists(cached)) return cached.string();
  if (offline) {
    std::cerr << "warning: pdb " << id << " not cached and running offline; recording MISSING\n";
    return std::nullopt;
  }

  try {
    httplib::SSLClient client("files.rcsb.org");
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(("/download/" + id + ".pdb").c_str());
    if (!res || res->status != 200 || res->body.empty()) {
      std::cerr << "warning: pdb " << id << " download failed ("
                << (res ? std::to_string(res->status) : "no response") << "); recording MISSING\n";
      return std::nullopt;
    }
    parse_pdb_text(res->body, id);  // must contain at least one atom

    const fs::path tmp = cached.string() + ".part." + std::to_string(::getpid());
    {
      std::ofstream out(tmp, std::ios::binary);
      out << res->body;
      if (!out) throw std::runtime_error("write failed");
    }
    fs::rename(tmp, cached);
    return cached.string();
  } catch (const std::exception& e) {
    std::cerr << "warning: pdb " << id << " fetch failed: " << e.what() << "; recording MISSING\n";
    return std::nullopt;
  }
}

}  // namespace ppi
