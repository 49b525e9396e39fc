#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/field.hpp"

namespace thinlab {

/// Constants of the Weiss and truncated-frequency functionals:
///   a = M (n + 2 kappa - 2) / alpha,  b = M (n + 2 kappa0) / alpha.
/// M is the gauge constant; a and b can be overridden (e.g. a = b = 0).
struct FunctionalConstants {
  int n = 2;
  double kappa = 1.5;
  double kappa0 = 4.0;
  double alpha = 0.5;
  double M = 1.0;
  std::optional<double> a_override;
  std::optional<double> b_override;

  double a() const { return a_override ? *a_override : M * (n + 2.0 * kappa - 2.0) / alpha; }
  double b() const { return b_override ? *b_override : M * (n + 2.0 * kappa0) / alpha; }
  /// Same constants with another kappa (b is unchanged).
  FunctionalConstants with_kappa(double k) const;
  /// Throws InvalidArgument unless 0 < kappa <= kappa0, kappa0 >= 2, alpha in (0, 1], a, b >= 0.
  void validate() const;
  /// (1/b)^{1/alpha}, the largest radius with 1 - b r^alpha > 0.
  double truncation_radius() const;
};

/// W_kappa(r) = det a e^{a r^alpha} / r^{n+2kappa-2} [int_{B_r} |grad u*|^2
///              - kappa (1 - b r^alpha) / r int_{dB_r} (u*)^2].
double weiss(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r);
/// The first (energy) term of W_kappa, used as its scale.
double weiss_scale(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r);

/// N(r) = r int <A grad V, grad V> / int V^2 mu. Throws VanishingBoundaryMass
/// when the boundary RMS is below 1e-12 * field_scale.
double almgren(const Field& V, const Frame& frame, double r, double field_scale = 1.0);

/// min{N / (1 - b r^alpha), kappa0}. Throws RadiusBeyondTruncationDomain.
double truncated_frequency(double N, const FunctionalConstants& c, double r);
double truncated_frequency(const Field& V, const Frame& frame, const FunctionalConstants& c, double r,
                           double field_scale = 1.0);

struct FrequencyProfile {
  Vec x0;
  double alpha = 0.5;
  double kappa0 = 4.0;
  std::vector<double> radii;
  std::vector<double> N;
  std::vector<double> Nhat;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::optional<double> kappa_extrapolated;
};

struct WeissProfile {
  Vec x0;
  double kappa = 1.5;
  FunctionalConstants constants;
  std::vector<double> radii;
  std::vector<double> W;
  std::vector<double> scale;  // energy term of W at each radius
};

struct ProfileResult {
  FrequencyProfile frequency;
  WeissProfile weiss;
};

/// Trusted window [max(4h, r_lo), min(r_hi, ellipsoid-in-box radius,
/// (2b)^{-1/alpha})], h the field's resolution.
std::pair<double, double> trusted_window(const Field& V, const Frame& frame, const FunctionalConstants& c,
                                         double r_lo, double r_hi);

/// Geometric ladder on [lo, hi]: ratio 2^{1/4} from lo, or `count` points
/// spanning the window when count > 0.
std::vector<double> radius_ladder(double lo, double hi, int count = 0);

/// Frequency and Weiss profiles on the ladder of the trusted window.
ProfileResult profile(const Field& Ustar, const Frame& frame, const FunctionalConstants& c, double r_lo,
                      double r_hi, int count = 0, double field_scale = 1.0);

struct FrequencyEstimate {
  double kappa = 0.0;
  double confidence = 0.0;  // RMS of the affine fit
  double slope = 0.0;
};

/// Intercept of the affine fit N ~ kappa + c r^alpha over the samples whose
/// Nhat stays below kappa0 (same limit as Nhat at r -> 0). Needs >= 6 such
/// samples (InsufficientSamples).
FrequencyEstimate frequency_at_point(const FrequencyProfile& profile);

struct MonotonicityAudit {
  int steps = 0;
  int violations = 0;
  double worst_drop = 0.0;  // largest decrease of Nhat between consecutive radii
};
MonotonicityAudit audit_monotonicity(const std::vector<double>& values, double slack = 5e-3);

/// CSV with a header comment (x0, kappa, constants) and columns r,N,Nhat,W_kappa.
std::string profile_csv(const ProfileResult& p);
void write_profile_csv(const std::string& path, const ProfileResult& p);

}  // namespace thinlab
