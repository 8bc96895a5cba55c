#include "ppi/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ppi::num {

AdamState::AdamState(const std::map<std::string, Tensor>& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& [name, p] : params) {
    m_.emplace(name, Tensor(p.shape(), Dtype::f64));
    v_.emplace(name, Tensor(p.shape(), Dtype::f64));
  }
}

void AdamState::step(std::map<std::string, Tensor>& params,
                     const std::map<std::string, Tensor>& grads) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (auto& [name, p] : params) {
    auto mit = m_.find(name);
    if (mit == m_.end())
      throw std::runtime_error("adam: unknown parameter '" + name + "'");
    Tensor& m = mit->second;
    Tensor& v = v_.at(name);
    if (!p.same_shape(m))
      throw std::runtime_error("adam: state shape " + m.shape_str() + " does not match parameter '" +
                               name + "' " + p.shape_str());

    const Tensor* g = nullptr;
    auto git = grads.find(name);
    if (git != grads.end()) {
      g = &git->second;
      if (!g->same_shape(p))
        throw std::runtime_error("adam: gradient shape " + g->shape_str() +
                                 " does not match parameter '" + name + "' " + p.shape_str());
      if (!g->all_finite())
        throw std::runtime_error("adam: non-finite gradient for parameter '" + name + "'");
    }

    for (int64_t i = 0; i < p.size(); ++i) {
      const double gi = g ? g->at(i) : 0.0;
      if (cfg_.weight_decay != 0.0)
        p.at(i) -= cfg_.learning_rate * cfg_.weight_decay * p.at(i);
      m.at(i) = cfg_.beta1 * m.at(i) + (1.0 - cfg_.beta1) * gi;
      v.at(i) = cfg_.beta2 * v.at(i) + (1.0 - cfg_.beta2) * gi * gi;
      const double mhat = m.at(i) / bc1;
      const double vhat = v.at(i) / bc2;
      p.at(i) -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
    p.quantize();
  }
}

}  // namespace ppi::num
