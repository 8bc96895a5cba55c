#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ppi {

// Little-endian binary matrix container:
//   magic "PPMX" | u32 version=1 | u8 dtype (0=f64, 1=f32) | u8 pad[3]
//   | u64 rows | u64 cols | row-major payload (f64 or f32).
void write_matrix(const std::string& path, const Eigen::MatrixXd& m, bool as_f32 = false);
Eigen::MatrixXd read_matrix(const std::string& path);

// Text edge list: one "i j" pair per line with i < j, sorted ascending.
void write_edges(const std::string& path, const std::vector<std::pair<int, int>>& edges);
std::vector<std::pair<int, int>> read_edges(const std::string& path);

// Raw little-endian helpers shared by the binary writers.
namespace io {
void put_u32(std::ostream& out, uint32_t v);
void put_u64(std::ostream& out, uint64_t v);
uint32_t get_u32(std::istream& in);
uint64_t get_u64(std::istream& in);
void put_f64(std::ostream& out, double v);
double get_f64(std::istream& in);
}  // namespace io

}  // namespace ppi
