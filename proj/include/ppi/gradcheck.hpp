#pragma once

#include <cstdint>
#include <string>

namespace ppi {

// Central finite-difference audit of every trainable tensor on a fixed
// 6-sentence toy graph covering all parameter paths: CNN encoder, feature
// projection, role/position/distance tables (including the UNK role row),
// both transformer layers, and the classifier. Runs at 64-bit with dropout
// off. Coordinates where analytic and numeric gradients are both below 1e-5
// count as matching zeros.
struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int64_t checked = 0;  // coordinates compared

  bool pass(double tol = 1e-4) const { return checked > 0 && max_rel_err < tol; }
};

GradCheckResult run_gradcheck(uint64_t seed = 7);

}  // namespace ppi
