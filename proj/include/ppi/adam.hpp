#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ppi/tensor.hpp"

namespace ppi::num {

struct AdamConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with decoupled weight decay: `p -= lr * wd * p` is applied before the
// moment-based delta, so decay never enters the moment estimates. Moments are
// kept in double regardless of the parameter dtype.
class AdamState {
 public:
  AdamState(const std::map<std::string, Tensor>& params, AdamConfig cfg);

  // One update over every parameter. Parameters missing from `grads` get a
  // zero gradient. A NaN gradient aborts with the parameter name.
  void step(std::map<std::string, Tensor>& params,
            const std::map<std::string, Tensor>& grads);

  int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
  int64_t step_ = 0;
  AdamConfig cfg_;
};

}  // namespace ppi::num
