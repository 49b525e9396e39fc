#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/field.hpp"

namespace thinlab {

/// (U(x) + sign * U(P x)) / 2 with P the conormal reflection at x0.
class ReflectedPart : public Field {
 public:
  ReflectedPart(FieldPtr U, Mat P, double sign) : U_(std::move(U)), P_(std::move(P)), sign_(sign) {}
  int dim() const override { return U_->dim(); }
  Box domain() const override { return U_->domain(); }
  double resolution() const override { return U_->resolution(); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x, Side side) const override;

 private:
  FieldPtr U_;
  Mat P_;
  double sign_;
};

struct SymmetrizedPair {
  Vec x0;
  std::shared_ptr<const ReflectedPart> even;
  std::shared_ptr<const ReflectedPart> odd;
  /// Largest r with E_r(x0) inside the domain of U (P maps E_r(x0) to itself).
  double valid_radius = 0.0;
};

/// Throws CenterNotOnThinPlane.
SymmetrizedPair symmetrize(FieldPtr U, const Frame& frame);

/// Largest r with E_r(x0) inside the box.
double ellipsoid_radius_in(const Box& box, const Frame& frame);

struct DecompositionResiduals {
  double l2 = 0.0;
  double energy = 0.0;
};

/// Relative residuals of int U^2 = int (U*)^2 + int (U#)^2 and the analogous
/// <A(x0) grad, grad> identity on E_r(x0). Throws EllipsoidExceedsDomain.
DecompositionResiduals energy_decomposition_audit(FieldPtr U, const Frame& frame, double r);

struct QuasisymmetrySample {
  Vec x0;
  double r = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool zero_even_energy = false;  // skipped: U* constant on the ellipsoid
};

struct QuasisymmetryReport {
  std::vector<QuasisymmetrySample> samples;
  /// Max ratio over the accepted samples, a lower bound for the supremum.
  double Q_estimate = 0.0;
  int skipped = 0;
};

/// Ratios of the full energy to the energy of the even part on each sampled
/// E_r(x0), x0 on the thin plane.
QuasisymmetryReport quasisymmetry_constant(FieldPtr U, const CoefficientField& A,
                                           const std::vector<std::pair<Vec, double>>& samples);

/// The one-dimensional example u(x) = x + x^2/4 and its even part x^2/4 on
/// (-delta, delta): the constant competitor has zero energy while u* does not.
struct CounterexampleRow {
  double delta = 0.0;
  double competitor_energy = 0.0;
  double ustar_energy = 0.0;       // by Gauss-Legendre quadrature
  double ustar_energy_closed = 0.0;  // delta^3 / 6
  double ratio = 0.0;              // ustar / competitor, +inf sentinel
  /// u against its linear (harmonic) replacement with the same end values:
  /// 1 + delta^2 / 12.
  double original_ratio = 0.0;
};
std::vector<CounterexampleRow> counterexample_demo(const std::vector<double>& deltas = {0.1, 0.01});

}  // namespace thinlab
