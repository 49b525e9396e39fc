#include "thinlab/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include "thinlab/errors.hpp"
#include "thinlab/integrals.hpp"
#include "thinlab/quadrature.hpp"

namespace thinlab {

double ReflectedPart::value(const Vec& x) const {
  const int n = dim();
  Vec px = P_ * x;
  px(n - 1) = -x(n - 1);
  return 0.5 * (U_->value(x) + sign_ * U_->value(px));
}

Vec ReflectedPart::gradient(const Vec& x, Side side) const {
  const int n = dim();
  Vec px = P_ * x;
  px(n - 1) = -x(n - 1);
  const Side flipped = side == Side::Plus ? Side::Minus : Side::Plus;
  const Vec g = U_->gradient(x, side);
  const Vec gp = P_.transpose() * U_->gradient(px, side_of(px(n - 1), flipped));
  return 0.5 * (g + sign_ * gp);
}

double ellipsoid_radius_in(const Box& box, const Frame& frame) {
  double r = std::numeric_limits<double>::infinity();
  for (int k = 0; k < frame.dim(); ++k) {
    const double w = std::sqrt(frame.A0(k, k));
    r = std::min({r, (frame.x0(k) - box.lo(k)) / w, (box.hi(k) - frame.x0(k)) / w});
  }
  return std::max(r, 0.0);
}

SymmetrizedPair symmetrize(FieldPtr U, const Frame& frame) {
  if (!frame.on_thin_plane())
    throw Error(ErrorKind::CenterNotOnThinPlane, "symmetrize: x0 is not on the thin plane");
  // P acts on x - x0; with x0 on the plane, P x0 = x0, so P(x - x0) + x0 = P x.
  SymmetrizedPair out;
  out.x0 = frame.x0;
  out.even = std::make_shared<ReflectedPart>(U, *frame.P, 1.0);
  out.odd = std::make_shared<ReflectedPart>(U, *frame.P, -1.0);
  out.valid_radius = ellipsoid_radius_in(U->domain(), frame);
  return out;
}

namespace {
double rel(double lhs, double rhs) {
  const double s = std::max(std::abs(lhs), std::abs(rhs));
  return s > 0.0 ? std::abs(lhs - rhs) / s : 0.0;
}
}  // namespace

DecompositionResiduals energy_decomposition_audit(FieldPtr U, const Frame& frame, double r) {
  const SymmetrizedPair pair = symmetrize(U, frame);
  DecompositionResiduals res;
  res.l2 = rel(ellipsoid_l2(*U, frame, r), ellipsoid_l2(*pair.even, frame, r) + ellipsoid_l2(*pair.odd, frame, r));
  res.energy = rel(ellipsoid_energy(*U, frame, r),
                   ellipsoid_energy(*pair.even, frame, r) + ellipsoid_energy(*pair.odd, frame, r));
  return res;
}

QuasisymmetryReport quasisymmetry_constant(FieldPtr U, const CoefficientField& A,
                                           const std::vector<std::pair<Vec, double>>& samples) {
  QuasisymmetryReport rep;
  for (const auto& [x0, r] : samples) {
    const Frame frame = deskew_frame(A, x0);
    const SymmetrizedPair pair = symmetrize(U, frame);
    QuasisymmetrySample s;
    s.x0 = x0;
    s.r = r;
    const double full = ellipsoid_energy(*U, frame, r);
    const double even = ellipsoid_energy(*pair.even, frame, r);
    if (!(even > 1e-14 * std::max(full, 1e-300))) {
      s.zero_even_energy = true;
      ++rep.skipped;
    } else {
      s.ratio = full / even;
      rep.Q_estimate = std::max(rep.Q_estimate, s.ratio);
    }
    rep.samples.push_back(s);
  }
  return rep;
}

std::vector<CounterexampleRow> counterexample_demo(const std::vector<double>& deltas) {
  std::vector<CounterexampleRow> out;
  for (double d : deltas) {
    CounterexampleRow row;
    row.delta = d;
    const GaussLegendre gl = gauss_legendre(8, -d, d);
    // the competitor is the constant d^2/4: zero derivative everywhere
    double comp = 0.0, ustar = 0.0, u = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double x = gl.nodes[i];
      const double w = gl.weights[i];
      comp += w * 0.0;
      ustar += w * (x / 2.0) * (x / 2.0);
      u += w * (1.0 + x / 2.0) * (1.0 + x / 2.0);
      lin += w * 1.0;
    }
    row.competitor_energy = comp;
    row.ustar_energy = ustar;
    row.ustar_energy_closed = d * d * d / 6.0;
    row.ratio = comp > 0.0 ? ustar / comp : std::numeric_limits<double>::infinity();
    row.original_ratio = u / lin;
    out.push_back(row);
  }
  return out;
}

}  // namespace thinlab
