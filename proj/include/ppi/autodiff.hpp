#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ppi/tensor.hpp"

namespace ppi::num {

// Handle into a Tape node.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Recorded computation for one forward pass. Ops append nodes; creation order
// is a topological order, so backward() is a single reverse sweep. Tensors on
// the tape are immutable once created; a tape is used by one thread.
class Tape {
 public:
  Tape() = default;

  // Leaf holding a constant input; receives a gradient but is not named.
  Var leaf(Tensor value);
  // Named leaf for a trainable parameter; reported by param_grads().
  Var param(const std::string& name, Tensor value);

  const Tensor& value(Var v) const;
  size_t node_count() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);                 // same shape
  Var add_bias(Var a, Var bias);         // [m,n] + [n], row broadcast
  Var mul(Var a, Var b);                 // elementwise
  Var scale(Var a, double c);
  Var relu(Var a);
  Var gelu(Var a);
  Var softmax_rows(Var a);
  Var transpose(Var a);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_rows(Var a, int r0, int r1);
  Var slice_cols(Var a, int c0, int c1);
  // Gathers rows of a [r,n] table; duplicate indices accumulate gradient.
  Var rows(Var table, const std::vector<int>& idx);
  // Column-wise max over the first valid_rows rows of [m,n]; valid_rows == 0
  // yields zeros and routes no gradient. Output is [1,n].
  Var max_pool_rows(Var a, int valid_rows);
  // input [L,Cin], kernel [w,Cin,Cout], bias [Cout] -> [L-w+1, Cout].
  Var conv1d(Var input, Var kernel, Var bias);
  Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
  Var sum(Var a);       // -> [1]
  Var mean_all(Var a);  // -> [1]
  // logits [m,K], labels in [0,K); optional per-class weights (size K).
  // Weighted mean of -log softmax(logits)[label].
  Var cross_entropy(Var logits, const std::vector<int>& labels,
                    const std::vector<double>& class_weights = {});

  // Reverse sweep from a scalar. Rejects non-scalar losses. May be called
  // once per tape.
  void backward(Var loss);
  // Gradient of the last backward() w.r.t. v; zero tensor if unreached.
  Tensor grad(Var v) const;
  // name -> gradient for every param(); unreached params get zeros.
  std::map<std::string, Tensor> param_grads() const;

 private:
  struct Node {
    Tensor value;
    std::vector<int> parents;
    // Accumulates into grads_ of parents given grads_[self].
    std::function<void(Tape&, int)> back;
    std::string pname;  // non-empty for params
  };

  Var push(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> back);
  Tensor& g(int id);
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  void check_var(Var v, const char* op) const;
  static Dtype common_dtype(const Tensor& a, const Tensor& b, const char* op);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool back_done_ = false;
};

}  // namespace ppi::num
