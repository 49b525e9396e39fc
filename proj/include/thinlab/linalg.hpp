#pragma once

#include <Eigen/Dense>

namespace thinlab {

// Small vectors and matrices (n <= 3) without heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline Vec unit(int n, int k) {
  Vec e = Vec::Zero(n);
  e(k) = 1.0;
  return e;
}

}  // namespace thinlab
