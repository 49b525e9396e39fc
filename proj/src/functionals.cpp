#include "thinlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "thinlab/errors.hpp"
#include "thinlab/integrals.hpp"
#include "thinlab/quadrature.hpp"

namespace thinlab {

FunctionalConstants FunctionalConstants::with_kappa(double k) const {
  FunctionalConstants c = *this;
  c.kappa = k;
  return c;
}

void FunctionalConstants::validate() const {
  if (!(kappa0 >= 2.0)) throw Error(ErrorKind::InvalidArgument, "kappa0 must be >= 2");
  if (!(kappa > 0.0 && kappa <= kappa0)) throw Error(ErrorKind::InvalidArgument, "kappa must lie in (0, kappa0]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  if (!(a() >= 0.0) || !(b() >= 0.0)) throw Error(ErrorKind::InvalidArgument, "a and b must be nonnegative");
}

double FunctionalConstants::truncation_radius() const {
  const double bb = b();
  return bb > 0.0 ? std::pow(1.0 / bb, 1.0 / alpha) : std::numeric_limits<double>::infinity();
}

double weiss_scale(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r) {
  const int n = frame.dim();
  return std::exp(c.a() * std::pow(r, c.alpha)) / std::pow(r, n + 2.0 * c.kappa - 2.0) *
         ellipsoid_energy(Ustar, frame, r);
}

double weiss(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r) {
  const int n = frame.dim();
  const double D = ellipsoid_energy(Ustar, frame, r);
  const double H = ellipsoid_boundary_mass(Ustar, frame, r);
  const double bracket = D - c.kappa * (1.0 - c.b() * std::pow(r, c.alpha)) / r * H;
  return std::exp(c.a() * std::pow(r, c.alpha)) / std::pow(r, n + 2.0 * c.kappa - 2.0) * bracket;
}

double almgren(const Field& V, const Frame& frame, double r, double field_scale) {
  const int n = frame.dim();
  const double H = ellipsoid_boundary_mass(V, frame, r);
  const double area = frame.det_a * unit_sphere_area(n) * std::pow(r, n - 1);
  const double floor = 1e-12 * field_scale;
  if (!(std::sqrt(std::max(H, 0.0) / area) > floor))
    throw Error(ErrorKind::VanishingBoundaryMass, "almgren: boundary mass vanishes");
  return r * ellipsoid_energy(V, frame, r) / H;
}

double truncated_frequency(double N, const FunctionalConstants& c, double r) {
  const double d = 1.0 - c.b() * std::pow(r, c.alpha);
  if (!(d > 0.0)) throw Error(ErrorKind::RadiusBeyondTruncationDomain, "1 - b r^alpha must be positive");
  return std::min(N / d, c.kappa0);
}

double truncated_frequency(const Field& V, const Frame& frame, const FunctionalConstants& c, double r,
                           double field_scale) {
  if (!(1.0 - c.b() * std::pow(r, c.alpha) > 0.0))
    throw Error(ErrorKind::RadiusBeyondTruncationDomain, "1 - b r^alpha must be positive");
  return truncated_frequency(almgren(V, frame, r, field_scale), c, r);
}

std::pair<double, double> trusted_window(const Field& V, const Frame& frame, const FunctionalConstants& c,
                                         double r_lo, double r_hi) {
  const Box box = V.domain();
  double inside = std::numeric_limits<double>::infinity();
  for (int k = 0; k < frame.dim(); ++k) {
    const double w = std::sqrt(frame.A0(k, k));
    inside = std::min({inside, (frame.x0(k) - box.lo(k)) / w, (box.hi(k) - frame.x0(k)) / w});
  }
  const double bb = c.b();
  const double trunc = bb > 0.0 ? std::pow(2.0 * bb, -1.0 / c.alpha) : std::numeric_limits<double>::infinity();
  return {std::max(4.0 * V.resolution(), r_lo), std::min({r_hi, inside, trunc})};
}

std::vector<double> radius_ladder(double lo, double hi, int count) {
  std::vector<double> out;
  if (!(lo > 0.0) || !(hi >= lo)) return out;
  if (count > 0) {
    if (count == 1) return {lo};
    const double q = std::pow(hi / lo, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) out.push_back(i + 1 == count ? hi : lo * std::pow(q, i));
    return out;
  }
  const double q = std::pow(2.0, 0.25);
  for (double r = lo; r <= hi * (1.0 + 1e-12); r *= q) out.push_back(r);
  return out;
}

ProfileResult profile(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r_lo,
                      double r_hi, int count, double field_scale) {
  c.validate();
  const auto [lo, hi] = trusted_window(Ustar, frame, c, r_lo, r_hi);
  ProfileResult out;
  FrequencyProfile& fp = out.frequency;
  WeissProfile& wp = out.weiss;
  fp.x0 = frame.x0;
  fp.alpha = c.alpha;
  fp.kappa0 = c.kappa0;
  fp.r_lo = lo;
  fp.r_hi = hi;
  wp.x0 = frame.x0;
  wp.kappa = c.kappa;
  wp.constants = c;
  const int n = frame.dim();
  for (double r : radius_ladder(lo, hi, count)) {
    const double D = ellipsoid_energy(Ustar, frame, r);
    const double H = ellipsoid_boundary_mass(Ustar, frame, r);
    const double area = frame.det_a * unit_sphere_area(n) * std::pow(r, n - 1);
    if (!(std::sqrt(std::max(H, 0.0) / area) > 1e-12 * field_scale))
      throw Error(ErrorKind::VanishingBoundaryMass, "profile: boundary mass vanishes");
    const double N = r * D / H;
    const double pref = std::exp(c.a() * std::pow(r, c.alpha)) / std::pow(r, n + 2.0 * c.kappa - 2.0);
    fp.radii.push_back(r);
    fp.N.push_back(N);
    fp.Nhat.push_back(truncated_frequency(N, c, r));
    wp.radii.push_back(r);
    wp.W.push_back(pref * (D - c.kappa * (1.0 - c.b() * std::pow(r, c.alpha)) / r * H));
    wp.scale.push_back(pref * D);
  }
  return out;
}

FrequencyEstimate frequency_at_point(const FrequencyProfile& p) {
  // N and Nhat share the limit r -> 0; N has no 1/(1 - b r^alpha) curvature,
  // so the affine fit runs on N over the samples below the truncation cap.
  const bool use_N = p.N.size() == p.radii.size();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < p.radii.size(); ++i)
    if (!use_N || p.Nhat[i] < p.kappa0) keep.push_back(i);
  const std::size_t k = keep.size();
  if (k < 6) throw Error(ErrorKind::InsufficientSamples, "frequency_at_point: fewer than 6 trusted samples");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(k), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto I = static_cast<Eigen::Index>(j);
    const std::size_t i = keep[j];
    X(I, 0) = 1.0;
    X(I, 1) = std::pow(p.radii[i], p.alpha);
    y(I) = use_N ? p.N[i] : p.Nhat[i];
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  FrequencyEstimate est;
  est.kappa = beta(0);
  est.slope = beta(1);
  est.confidence = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(k));
  return est;
}

MonotonicityAudit audit_monotonicity(const std::vector<double>& values, double slack) {
  MonotonicityAudit a;
  for (std::size_t i = 1; i < values.size(); ++i) {
    ++a.steps;
    const double drop = values[i - 1] - values[i];
    a.worst_drop = std::max(a.worst_drop, drop);
    if (drop > slack) ++a.violations;
  }
  return a;
}

std::string profile_csv(const ProfileResult& p) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& c = p.weiss.constants;
  os << "# x0=";
  for (int k = 0; k < p.frequency.x0.size(); ++k) os << (k ? "," : "") << p.frequency.x0(k);
  os << " kappa=" << p.weiss.kappa << " kappa0=" << c.kappa0 << " alpha=" << c.alpha << " M=" << c.M
     << " a=" << c.a() << " b=" << c.b();
  if (p.frequency.kappa_extrapolated) os << " kappa_extrapolated=" << *p.frequency.kappa_extrapolated;
  os << "\n";
  os << "r,N,Nhat,W_kappa\n";
  for (std::size_t i = 0; i < p.frequency.radii.size(); ++i)
    os << p.frequency.radii[i] << "," << p.frequency.N[i] << "," << p.frequency.Nhat[i] << "," << p.weiss.W[i]
       << "\n";
  return os.str();
}

void write_profile_csv(const std::string& path, const ProfileResult& p) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  f << profile_csv(p);
}

}  // namespace thinlab
