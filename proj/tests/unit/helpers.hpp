#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include "thinlab/field.hpp"
#include "thinlab/linalg.hpp"

namespace testing {

using thinlab::AnalyticField;
using thinlab::Mat;
using thinlab::Side;
using thinlab::Vec;

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

inline Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

// <c, x> + d
inline std::shared_ptr<AnalyticField> linear(const Vec& c, double d = 0.0) {
  return std::make_shared<AnalyticField>(
      static_cast<int>(c.size()), [c, d](const Vec& x) { return c.dot(x) + d; },
      [c](const Vec&, Side) { return c; });
}

inline std::shared_ptr<AnalyticField> constant(int n, double v) { return linear(Vec::Zero(n), v); }

// x_i^2 - x_j^2
inline std::shared_ptr<AnalyticField> saddle(int n, int i, int j) {
  return std::make_shared<AnalyticField>(
      n, [i, j](const Vec& x) { return x(i) * x(i) - x(j) * x(j); },
      [n, i, j](const Vec& x, Side) {
        Vec g = Vec::Zero(n);
        g(i) += 2.0 * x(i);
        g(j) -= 2.0 * x(j);
        return g;
      });
}

// Direct complex-power evaluation of Re(s + i t)^p, used as an independent
// check of the closed-form library.
inline double re_power(double s, double t, double p) {
  const double rho = std::hypot(s, t);
  if (rho == 0.0) return 0.0;
  return std::pow(rho, p) * std::cos(p * std::atan2(t, s));
}

}  // namespace testing
