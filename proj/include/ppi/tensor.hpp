#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppi::num {

enum class Dtype { f32, f64 };

inline const char* dtype_name(Dtype d) { return d == Dtype::f32 ? "f32" : "f64"; }

// Dense row-major tensor, rank 1..3. Storage is double; a tensor constructed
// with Dtype::f32 keeps every value rounded to the nearest float, so f32 runs
// carry single-precision forward values while gradient and optimizer
// arithmetic stays in double.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, Dtype dt = Dtype::f64)
      : shape_(std::move(shape)), dtype_(dt) {
    check_shape(shape_);
    data_.assign(static_cast<size_t>(count(shape_)), 0.0);
  }

  static Tensor from(std::vector<int> shape, std::vector<double> data,
                     Dtype dt = Dtype::f64) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    t.dtype_ = dt;
    check_shape(t.shape_);
    if (static_cast<int64_t>(t.data_.size()) != count(t.shape_))
      throw std::runtime_error("tensor: data length " + std::to_string(t.data_.size()) +
                               " does not match shape " + t.shape_str());
    t.quantize();
    return t;
  }

  static Tensor scalar(double v, Dtype dt = Dtype::f64) { return from({1}, {v}, dt); }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  Dtype dtype() const { return dtype_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& at(int64_t i) { return data_[static_cast<size_t>(i)]; }
  double at(int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& at(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  double at(int64_t i, int64_t j) const { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  double& at(int64_t i, int64_t j, int64_t k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  double at(int64_t i, int64_t j, int64_t k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }

  void fill(double v) {
    for (auto& x : data_) x = v;
    quantize();
  }

  // Rounds every value through float when the tensor is f32; no-op for f64.
  void quantize() {
    if (dtype_ == Dtype::f32)
      for (auto& v : data_) v = static_cast<double>(static_cast<float>(v));
  }

  Tensor astype(Dtype dt) const {
    Tensor t = *this;
    t.dtype_ = dt;
    t.quantize();
    return t;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool bitwise_equal(const Tensor& o) const {
    if (shape_ != o.shape_ || dtype_ != o.dtype_) return false;
    for (size_t i = 0; i < data_.size(); ++i)
      if (data_[i] != o.data_[i] && !(std::isnan(data_[i]) && std::isnan(o.data_[i])))
        return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static int64_t count(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

 private:
  static void check_shape(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 3)
      throw std::runtime_error("tensor: rank must be 1..3");
    for (int d : shape)
      if (d < 0) throw std::runtime_error("tensor: negative dimension");
  }

  std::vector<int> shape_;
  std::vector<double> data_;
  Dtype dtype_ = Dtype::f64;
};

}  // namespace ppi::num
