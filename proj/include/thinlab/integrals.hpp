#pragma once

#include <cstdint>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/field.hpp"
#include "thinlab/quadrature.hpp"

namespace thinlab {

/// Throws EllipsoidExceedsDomain unless E_r(x0) lies in the field's domain.
void require_ellipsoid_inside(const Field& U, const Frame& frame, double r);

/// Deskewed field u_{x0}(y) = U(abar y + x0) and its gradient abar^T grad U.
double deskewed_value(const Field& U, const Frame& frame, const Vec& y);
Vec deskewed_gradient(const Field& U, const Frame& frame, const Vec& y);

/// int_{E_r} <A(x0) grad U, grad U> = det a * int_{B_r} |grad u_{x0}|^2.
double ellipsoid_energy(const Field& U, const Frame& frame, double r,
                        const QuadratureRule& ball);
double ellipsoid_energy(const Field& U, const Frame& frame, double r);

/// int_{dE_r} U^2 mu_{x0}(x - x0) = det a * int_{dB_r} u_{x0}^2.
double ellipsoid_boundary_mass(const Field& U, const Frame& frame, double r,
                               const QuadratureRule& sphere);
double ellipsoid_boundary_mass(const Field& U, const Frame& frame, double r);

/// int_{E_r} U^2 = det a * int_{B_r} u_{x0}^2.
double ellipsoid_l2(const Field& U, const Frame& frame, double r, const QuadratureRule& ball);
double ellipsoid_l2(const Field& U, const Frame& frame, double r);

/// Ellipsoid-side integrals evaluated in the original coordinates: the ball
/// rule pushed forward by x = x0 + a y (no rotation), the surface through the
/// Jacobian of an angular parametrization with mu taken from its definition.
struct EllipsoidSide {
  double l2 = 0.0;
  double energy = 0.0;
  double boundary = 0.0;
};
EllipsoidSide ellipsoid_side_integrals(const Field& U, const Frame& frame, double r,
                                       const QuadratureOptions& opt = {});

/// Seeded Monte-Carlo estimates of the volume integrals over E_r(x0).
EllipsoidSide ellipsoid_monte_carlo(const Field& U, const Frame& frame, double r,
                                    std::size_t samples, std::uint64_t seed);

struct ChangeOfVariablesResiduals {
  double l2 = 0.0;
  double energy = 0.0;
  double boundary = 0.0;
  double max() const;
};

/// Relative residuals of the three change-of-variables identities.
ChangeOfVariablesResiduals change_of_variables_audit(const Field& U, const Frame& frame, double r);

}  // namespace thinlab
