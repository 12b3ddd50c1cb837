#pragma once

#include <Eigen/Dense>

namespace leap {

/// First index attaining the maximum; ties resolve to the lowest index.
/// `skip` (when >= 0) marks one index that is never selected.
template <typename Derived>
Eigen::Index argmax_lowest(const Eigen::DenseBase<Derived>& v,
                           Eigen::Index skip = -1) {
  Eigen::Index best = -1;
  typename Derived::Scalar best_val{};
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i == skip) continue;
    if (best < 0 || v(i) > best_val) {
      best = i;
      best_val = v(i);
    }
  }
  return best;
}

/// In-place softmax over a vector expression, max-shifted for stability.
template <typename Derived>
void softmax_inplace(Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  v.derived() = (v.derived().array() - m).exp().matrix();
  v.derived() /= v.sum();
}

}  // namespace leap
