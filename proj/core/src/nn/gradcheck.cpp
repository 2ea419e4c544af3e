#include "curvy/nn/gradcheck.hpp"

#include <cmath>

#include "curvy/error.hpp"
#include "curvy/nn/ops.hpp"

namespace curvy::nn {

namespace {

double total(const Tensor& t) {
  double s = 0.0;
  for (double v : t.value().values()) s += v;
  return s;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& wrt,
                           double h) {
  std::vector<Tensor> leaves = wrt;
  for (Tensor& t : leaves) t.zero_grad();
  backward(sum(forward()));
  std::vector<Matrix> analytic;
  for (const Tensor& t : leaves) {
    analytic.push_back(t.grad());
    if (!analytic.back().all_finite()) throw DivergenceError("non-finite analytic gradient");
  }

  GradCheckReport report;
  for (std::size_t ti = 0; ti < leaves.size(); ++ti) {
    Matrix& value = leaves[ti].mutable_value();
    for (std::size_t e = 0; e < value.size(); ++e) {
      const double original = value[e];
      value[e] = original + h;
      const double up = total(forward());
      value[e] = original - h;
      const double down = total(forward());
      value[e] = original;
      if (!std::isfinite(up) || !std::isfinite(down)) throw DivergenceError("non-finite loss in grad check");
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(analytic[ti][e] - numeric) / std::max(1.0, std::abs(numeric));
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.tensor = ti;
        report.element = e;
      }
    }
  }
  for (Tensor& t : leaves) t.zero_grad();
  return report;
}

}  // namespace curvy::nn
