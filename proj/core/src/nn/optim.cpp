#include "curvy/nn/optim.hpp"

#include <cmath>

#include "curvy/error.hpp"

namespace curvy::nn {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Tensor& p : params_) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void Adam::step(double grad_scale) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix g = params_[i].grad();
    if (!g.all_finite()) throw DivergenceError("non-finite gradient in optimizer step");
    Matrix& value = params_[i].mutable_value();
    for (std::size_t e = 0; e < value.size(); ++e) {
      const double ge = g[e] * grad_scale;
      m_[i][e] = config_.beta1 * m_[i][e] + (1.0 - config_.beta1) * ge;
      v_[i][e] = config_.beta2 * v_[i][e] + (1.0 - config_.beta2) * ge * ge;
      value[e] -= config_.lr * (m_[i][e] / c1) / (std::sqrt(v_[i][e] / c2) + config_.eps);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace curvy::nn
