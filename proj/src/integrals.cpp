#include "thinlab/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "thinlab/errors.hpp"

namespace thinlab {

void require_ellipsoid_inside(const Field& U, const Frame& frame, double r) {
  const Box box = U.domain();
  const Vec w = frame.half_widths(r);
  for (int k = 0; k < frame.dim(); ++k) {
    if (frame.x0(k) - w(k) < box.lo(k) - 1e-12 || frame.x0(k) + w(k) > box.hi(k) + 1e-12)
      throw Error(ErrorKind::EllipsoidExceedsDomain, "E_r(x0) leaves the field's domain");
  }
}

double deskewed_value(const Field& U, const Frame& frame, const Vec& y) {
  return U.value(frame.from_deskewed(y));
}

Vec deskewed_gradient(const Field& U, const Frame& frame, const Vec& y) {
  const int n = frame.dim();
  return frame.abar.transpose() * U.gradient(frame.from_deskewed(y), side_of(y(n - 1)));
}

double ellipsoid_energy(const Field& U, const Frame& frame, double r, const QuadratureRule& ball) {
  require_ellipsoid_inside(U, frame, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const Vec y = r * ball.nodes[i];
    acc += ball.weights[i] * deskewed_gradient(U, frame, y).squaredNorm();
  }
  return frame.det_a * std::pow(r, frame.dim()) * acc;
}

double ellipsoid_energy(const Field& U, const Frame& frame, double r) {
  return ellipsoid_energy(U, frame, r, default_ball_rule(frame.dim()));
}

double ellipsoid_boundary_mass(const Field& U, const Frame& frame, double r, const QuadratureRule& sphere) {
  require_ellipsoid_inside(U, frame, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    const double u = deskewed_value(U, frame, r * sphere.nodes[i]);
    acc += sphere.weights[i] * u * u;
  }
  return frame.det_a * std::pow(r, frame.dim() - 1) * acc;
}

double ellipsoid_boundary_mass(const Field& U, const Frame& frame, double r) {
  return ellipsoid_boundary_mass(U, frame, r, default_sphere_rule(frame.dim()));
}

double ellipsoid_l2(const Field& U, const Frame& frame, double r, const QuadratureRule& ball) {
  require_ellipsoid_inside(U, frame, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const double u = deskewed_value(U, frame, r * ball.nodes[i]);
    acc += ball.weights[i] * u * u;
  }
  return frame.det_a * std::pow(r, frame.dim()) * acc;
}

double ellipsoid_l2(const Field& U, const Frame& frame, double r) {
  return ellipsoid_l2(U, frame, r, default_ball_rule(frame.dim()));
}

EllipsoidSide ellipsoid_side_integrals(const Field& U, const Frame& frame, double r, const QuadratureOptions& opt) {
  require_ellipsoid_inside(U, frame, r);
  const int n = frame.dim();
  EllipsoidSide out;
  // volume: x = x0 + r a y over the unit ball
  const QuadratureRule ball = ball_rule(n, opt);
  const double jac = frame.det_a * std::pow(r, n);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const Vec x = frame.x0 + r * (frame.a * ball.nodes[i]);
    const Side s = side_of(x(n - 1), side_of(ball.nodes[i](n - 1)));
    const double u = U.value(x);
    const Vec g = U.gradient(x, s);
    out.l2 += ball.weights[i] * jac * u * u;
    out.energy += ball.weights[i] * jac * g.dot(frame.A0 * g);
  }
  // surface: x(angles) = x0 + r a theta(angles), dS from the parametrization
  auto integrand = [&](const Vec& x) {
    const Vec z = x - frame.x0;
    const double u = U.value(x);
    return u * u * conformal_factor(frame, z);
  };
  if (n == 2) {
    const GaussLegendre gl = gauss_legendre(std::max(1, opt.circle_points / 2), 0.0, std::numbers::pi);
    for (int s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double th = s == 0 ? gl.nodes[i] : -gl.nodes[i];
        Vec t(2), dt(2);
        t << std::cos(th), std::sin(th);
        dt << -std::sin(th), std::cos(th);
        const Vec x = frame.x0 + r * (frame.a * t);
        const double ds = (r * (frame.a * dt)).norm();
        out.boundary += gl.weights[i] * ds * integrand(x);
      }
  } else {
    const GaussLegendre gl = gauss_legendre(std::max(1, opt.polar_points / 2), 0.0, std::numbers::pi / 2);
    const int q = opt.azimuth_points;
    const double dphi = 2.0 * std::numbers::pi / q;
    for (int s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double th = s == 0 ? gl.nodes[i] : std::numbers::pi - gl.nodes[i];
        for (int j = 0; j < q; ++j) {
          const double ph = (j + 0.5) * dphi;
          Vec t(3), dth(3), dph(3);
          t << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
          dth << std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th);
          dph << -std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0;
          const Eigen::Vector3d e1 = r * (frame.a * dth);
          const Eigen::Vector3d e2 = r * (frame.a * dph);
          const double ds = e1.cross(e2).norm();
          const Vec x = frame.x0 + r * (frame.a * t);
          out.boundary += gl.weights[i] * dphi * ds * integrand(x);
        }
      }
  }
  return out;
}

EllipsoidSide ellipsoid_monte_carlo(const Field& U, const Frame& frame, double r, std::size_t samples,
                                    std::uint64_t seed) {
  require_ellipsoid_inside(U, frame, r);
  const int n = frame.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Vec w = frame.half_widths(r);
  double box_volume = 1.0;
  for (int k = 0; k < n; ++k) box_volume *= 2.0 * w(k);
  EllipsoidSide out;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x(k) = frame.x0(k) + w(k) * unif(rng);
    if (frame.to_deskewed(x).norm() >= r) continue;
    const double u = U.value(x);
    const Vec g = U.gradient(x, side_of(x(n - 1)));
    out.l2 += u * u;
    out.energy += g.dot(frame.A0 * g);
  }
  out.l2 *= box_volume / static_cast<double>(samples);
  out.energy *= box_volume / static_cast<double>(samples);
  return out;
}

double ChangeOfVariablesResiduals::max() const { return std::max({l2, energy, boundary}); }

namespace {
double rel(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}
}  // namespace

ChangeOfVariablesResiduals change_of_variables_audit(const Field& U, const Frame& frame, double r) {
  const EllipsoidSide lhs = ellipsoid_side_integrals(U, frame, r);
  ChangeOfVariablesResiduals res;
  res.l2 = rel(lhs.l2, ellipsoid_l2(U, frame, r));
  res.energy = rel(lhs.energy, ellipsoid_energy(U, frame, r));
  res.boundary = rel(lhs.boundary, ellipsoid_boundary_mass(U, frame, r));
  return res;
}

}  // namespace thinlab
