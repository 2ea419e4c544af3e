#pragma once

#include <functional>
#include <string>
#include <vector>

#include "curvy/nn/tensor.hpp"

namespace curvy::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t tensor = 0;   // index into `wrt` of the worst entry
  std::size_t element = 0;
  std::size_t checked = 0;  // number of scalar entries probed
};

/// Compares the analytic gradient of sum(forward()) with central differences
/// of step h for every entry of every tensor in `wrt`. The relative error is
/// |analytic - numeric| / max(1, |numeric|). `forward` must rebuild its graph
/// from the current leaf values on each call. Throws DivergenceError on a
/// non-finite gradient or loss.
GradCheckReport grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& wrt,
                           double h = 1e-6);

}  // namespace curvy::nn
