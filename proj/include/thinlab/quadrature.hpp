#pragma once

#include <vector>

#include "thinlab/linalg.hpp"

namespace thinlab {

struct GaussLegendre {
  std::vector<double> nodes;    // on (a, b)
  std::vector<double> weights;
};

/// p-point Gauss-Legendre rule mapped to (a, b).
GaussLegendre gauss_legendre(int p, double a = -1.0, double b = 1.0);

/// Rule on the unit sphere or unit ball. Nodes never lie on the thin plane:
/// the rule is the union of an upper and a lower half rule, mirror images of
/// each other under y_n -> -y_n, so kinked integrands are never straddled.
struct QuadratureRule {
  enum class Kind { Sphere, Ball };
  Kind kind = Kind::Sphere;
  int n = 2;
  /// Highest polynomial degree integrated exactly (up to rounding).
  int order = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

struct QuadratureOptions {
  int circle_points = 256;  // n = 2: total angles, split evenly between the halves
  int polar_points = 32;    // n = 3: Gauss-Legendre in cos(polar), split between hemispheres
  int azimuth_points = 64;  // n = 3: uniform azimuth
  int shells = 24;          // ball: radial Gauss-Legendre shells
};

QuadratureRule sphere_rule(int n, const QuadratureOptions& opt = {});
QuadratureRule ball_rule(int n, const QuadratureOptions& opt = {});

/// |S^{n-1}| and |B_1|.
double unit_sphere_area(int n);
double unit_ball_volume(int n);

/// Default rules, built once per dimension.
const QuadratureRule& default_sphere_rule(int n);
const QuadratureRule& default_ball_rule(int n);

}  // namespace thinlab
