#pragma once

#include <Eigen/Dense>
#include <string>

namespace ppi {

// Projection onto the top principal components of the mean-centered training
// matrix, components ordered by descending eigenvalue. Fit on the training
// split only; applied to every split.
class PcaModel {
 public:
  PcaModel() = default;

  // rows = samples, cols = input width. target_dim must not exceed
  // min(rows, cols); otherwise the attainable maximum is reported.
  static PcaModel fit(const Eigen::MatrixXd& train, int target_dim);

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& x) const;

  int input_dim() const { return static_cast<int>(mean_.size()); }
  int target_dim() const { return static_cast<int>(components_.cols()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  // input_dim x target_dim, orthonormal columns; each column's
  // largest-magnitude entry is positive.
  const Eigen::MatrixXd& components() const { return components_; }
  // Covariance eigenvalues for the kept components, descending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  void save(const std::string& path) const;
  static PcaModel load(const std::string& path);

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd eigenvalues_;
};

}  // namespace ppi
