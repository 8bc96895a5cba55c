#include "ppi/pca.hpp"

#include <Eigen/SVD>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ppi/matrix_io.hpp"

namespace ppi {

PcaModel PcaModel::fit(const Eigen::MatrixXd& train, int target_dim) {
  const Eigen::Index rows = train.rows(), cols = train.cols();
  if (rows < 2) throw std::runtime_error("pca: need at least 2 training rows");
  const int attainable = static_cast<int>(std::min(rows, cols));
  if (target_dim < 1 || target_dim > attainable)
    throw std::runtime_error("pca: target_dim " + std::to_string(target_dim) +
                             " not attainable; maximum is " + std::to_string(attainable) +
                             " for a " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " training matrix");

  PcaModel model;
  model.mean_ = train.colwise().mean();
  Eigen::MatrixXd centered = train.rowwise() - model.mean_.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  model.components_ = svd.matrixV().leftCols(target_dim);
  model.eigenvalues_ = svd.singularValues()
                           .head(target_dim)
                           .array()
                           .square()
                           .matrix() /
                       static_cast<double>(rows - 1);

  // Sign convention: each component's largest-magnitude entry is positive
  // (earliest index on ties), so fits are reproducible.
  for (Eigen::Index k = 0; k < model.components_.cols(); ++k) {
    Eigen::Index best = 0;
    double mag = 0.0;
    for (Eigen::Index i = 0; i < model.components_.rows(); ++i) {
      const double a = std::abs(model.components_(i, k));
      if (a > mag) {
        mag = a;
        best = i;
      }
    }
    if (model.components_(best, k) < 0.0) model.components_.col(k) *= -1.0;
  }
  return model;
}

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size())
    throw std::runtime_error("pca: input width " + std::to_string(x.size()) +
                             " does not match fitted width " + std::to_string(mean_.size()));
  return components_.transpose() * (x - mean_);
}

Eigen::MatrixXd PcaModel::project_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean_.size())
    throw std::runtime_error("pca: input width " + std::to_string(x.cols()) +
                             " does not match fitted width " + std::to_string(mean_.size()));
  return (x.rowwise() - mean_.transpose()) * components_;
}

void PcaModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pca: cannot write '" + path + "'");
  out.write("PPCA", 4);
  io::put_u32(out, 1);
  io::put_u64(out, static_cast<uint64_t>(mean_.size()));
  io::put_u64(out, static_cast<uint64_t>(components_.cols()));
  for (Eigen::Index i = 0; i < mean_.size(); ++i) io::put_f64(out, mean_(i));
  for (Eigen::Index i = 0; i < components_.rows(); ++i)
    for (Eigen::Index j = 0; j < components_.cols(); ++j) io::put_f64(out, components_(i, j));
  for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j) io::put_f64(out, eigenvalues_(j));
}

PcaModel PcaModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pca: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PPCA", 4) != 0)
    throw std::runtime_error("pca: '" + path + "' is not a PPCA file");
  const uint32_t version = io::get_u32(in);
  if (version != 1) throw std::runtime_error("pca: unsupported version " + std::to_string(version));
  const auto input_dim = static_cast<Eigen::Index>(io::get_u64(in));
  const auto target = static_cast<Eigen::Index>(io::get_u64(in));
  PcaModel model;
  model.mean_.resize(input_dim);
  model.components_.resize(input_dim, target);
  model.eigenvalues_.resize(target);
  for (Eigen::Index i = 0; i < input_dim; ++i) model.mean_(i) = io::get_f64(in);
  for (Eigen::Index i = 0; i < input_dim; ++i)
    for (Eigen::Index j = 0; j < target; ++j) model.components_(i, j) = io::get_f64(in);
  for (Eigen::Index j = 0; j < target; ++j) model.eigenvalues_(j) = io::get_f64(in);
  return model;
}

}  // namespace ppi
