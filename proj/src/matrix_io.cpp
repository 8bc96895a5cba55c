#include "ppi/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary artifact formats are little-endian");

namespace ppi {

namespace io {

void put_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw std::runtime_error("io: truncated file (u32)");
  return v;
}

uint64_t get_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw std::runtime_error("io: truncated file (u64)");
  return v;
}

void put_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw std::runtime_error("io: truncated file (f64)");
  return v;
}

}  // namespace io

void write_matrix(const std::string& path, const Eigen::MatrixXd& m, bool as_f32) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("matrix: cannot write '" + path + "'");
  out.write("PPMX", 4);
  io::put_u32(out, 1);
  const char dtype = as_f32 ? 1 : 0;
  out.put(dtype);
  out.write("\0\0\0", 3);
  io::put_u64(out, static_cast<uint64_t>(m.rows()));
  io::put_u64(out, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (as_f32) {
        const float f = static_cast<float>(m(i, j));
        out.write(reinterpret_cast<const char*>(&f), 4);
      } else {
        io::put_f64(out, m(i, j));
      }
    }
  if (!out) throw std::runtime_error("matrix: write failed for '" + path + "'");
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("matrix: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PPMX", 4) != 0)
    throw std::runtime_error("matrix: '" + path + "' is not a PPMX file");
  const uint32_t version = io::get_u32(in);
  if (version != 1)
    throw std::runtime_error("matrix: unsupported version " + std::to_string(version));
  char dtype = 0;
  in.get(dtype);
  char pad[3];
  in.read(pad, 3);
  const uint64_t rows = io::get_u64(in);
  const uint64_t cols = io::get_u64(in);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (uint64_t i = 0; i < rows; ++i)
    for (uint64_t j = 0; j < cols; ++j) {
      if (dtype == 1) {
        float f = 0;
        in.read(reinterpret_cast<char*>(&f), 4);
        if (!in) throw std::runtime_error("matrix: truncated payload in '" + path + "'");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f;
      } else {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = io::get_f64(in);
      }
    }
  return m;
}

void write_edges(const std::string& path, const std::vector<std::pair<int, int>>& edges) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("edges: cannot write '" + path + "'");
  for (const auto& [i, j] : edges) out << i << " " << j << "\n";
}

std::vector<std::pair<int, int>> read_edges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("edges: cannot open '" + path + "'");
  std::vector<std::pair<int, int>> edges;
  int i = 0, j = 0;
  while (in >> i >> j) edges.emplace_back(i, j);
  return edges;
}

}  // namespace ppi
