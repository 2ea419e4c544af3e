#pragma once

#include <vector>

#include "curvy/nn/tensor.hpp"

namespace curvy::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  /// Applies one update from the accumulated gradients (scaled by
  /// `grad_scale`) and clears them. Throws DivergenceError when a gradient is
  /// not finite.
  void step(double grad_scale = 1.0);
  void zero_grad();
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig config_;
  long t_ = 0;
};

}  // namespace curvy::nn
