#include "thinlab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "thinlab/errors.hpp"

namespace thinlab {

GaussLegendre gauss_legendre(int p, double a, double b) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "gauss_legendre: p < 1");
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(p));
  rule.weights.resize(static_cast<std::size_t>(p));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (p + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= p; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (p == 1) p0 = 1.0;
      // p1 = P_p(x), p0 = P_{p-1}(x)
      dp = p * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= p; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = (p == 1) ? 1.0 : p * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(p - 1 - i);
    rule.nodes[lo] = mid - half * x;
    rule.nodes[hi] = mid + half * x;
    rule.weights[lo] = half * w;
    rule.weights[hi] = half * w;
  }
  return rule;
}

double unit_sphere_area(int n) { return n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

double unit_ball_volume(int n) { return n == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0; }

QuadratureRule sphere_rule(int n, const QuadratureOptions& opt) {
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::Sphere;
  rule.n = n;
  if (n == 2) {
    const int half = std::max(1, opt.circle_points / 2);
    const GaussLegendre gl = gauss_legendre(half, 0.0, std::numbers::pi);
    for (int s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double th = s == 0 ? gl.nodes[i] : -gl.nodes[i];
        Vec y(2);
        y << std::cos(th), std::sin(th);
        rule.nodes.push_back(y);
        rule.weights.push_back(gl.weights[i]);
      }
    rule.order = half;
  } else if (n == 3) {
    const int half = std::max(1, opt.polar_points / 2);
    const GaussLegendre gl = gauss_legendre(half, 0.0, 1.0);
    const int q = opt.azimuth_points;
    const double dphi = 2.0 * std::numbers::pi / q;
    for (int s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double z = s == 0 ? gl.nodes[i] : -gl.nodes[i];
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int j = 0; j < q; ++j) {
          const double phi = (j + 0.5) * dphi;
          Vec y(3);
          y << rho * std::cos(phi), rho * std::sin(phi), z;
          rule.nodes.push_back(y);
          rule.weights.push_back(gl.weights[i] * dphi);
        }
      }
    rule.order = std::min(2 * half - 1, q - 1);
  } else {
    throw Error(ErrorKind::InvalidArgument, "sphere_rule: n must be 2 or 3");
  }
  return rule;
}

QuadratureRule ball_rule(int n, const QuadratureOptions& opt) {
  const QuadratureRule sphere = sphere_rule(n, opt);
  const GaussLegendre radial = gauss_legendre(opt.shells, 0.0, 1.0);
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::Ball;
  rule.n = n;
  rule.order = std::min(sphere.order, 2 * opt.shells - n);
  rule.nodes.reserve(sphere.size() * radial.nodes.size());
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double rho = radial.nodes[i];
    const double wr = radial.weights[i] * std::pow(rho, n - 1);
    for (std::size_t j = 0; j < sphere.size(); ++j) {
      rule.nodes.push_back(rho * sphere.nodes[j]);
      rule.weights.push_back(wr * sphere.weights[j]);
    }
  }
  return rule;
}

const QuadratureRule& default_sphere_rule(int n) {
  static const QuadratureRule r2 = sphere_rule(2);
  static const QuadratureRule r3 = sphere_rule(3);
  return n == 2 ? r2 : r3;
}

const QuadratureRule& default_ball_rule(int n) {
  static const QuadratureRule r2 = ball_rule(2);
  static const QuadratureRule r3 = ball_rule(3);
  return n == 2 ? r2 : r3;
}

}  // namespace thinlab
