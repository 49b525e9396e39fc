#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/functionals.hpp"
#include "thinlab/grid.hpp"
#include "thinlab/quadrature.hpp"
#include "thinlab/vi_solver.hpp"

namespace thinlab {

/// Thin-plane nodes of a grid field with the active flag U <= eps.
struct CoincidenceSet {
  Grid grid;
  std::vector<std::size_t> nodes;   // thin nodes, storage order
  std::vector<double> values;       // U on those nodes
  std::vector<unsigned char> active;
  double eps = 0.0;
  int active_count = 0;

  /// Position of a thin node in `nodes` from its thin multi-index.
  std::size_t thin_position(const std::array<int, 3>& ijk) const;
};

/// eps = 10 * tol * max(1, max |U|).
CoincidenceSet coincidence_set(const Solution& sol, double factor = 10.0);
CoincidenceSet coincidence_set(const ScalarField& U, double eps);

struct FreeBoundaryPoint {
  Vec x;                       // on the thin plane
  std::size_t active_node = 0;
  std::size_t inactive_node = 0;
};

/// One point per thin edge joining an active and an inactive node, placed
/// where the linear extrapolation of U^{2/3} from the inactive side vanishes.
std::vector<FreeBoundaryPoint> free_boundary(const CoincidenceSet& cs);

/// Fraction of thin nodes in B'_r(x0) that are active. Throws
/// RadiusBelowResolution (r < 3h) and OutOfDomain.
double thin_density(const CoincidenceSet& cs, const Vec& x0, double r);

/// y -> U(abar y + x0).
class DeskewedField : public Field {
 public:
  DeskewedField(FieldPtr U, Frame frame) : U_(std::move(U)), frame_(std::move(frame)) {}
  int dim() const override { return frame_.dim(); }
  double resolution() const override { return U_->resolution(); }
  double value(const Vec& y) const override;
  Vec gradient(const Vec& y, Side side) const override;

 private:
  FieldPtr U_;
  Frame frame_;
};

/// x -> V(r x + x0) / norm.
class RescaledField : public Field {
 public:
  RescaledField(FieldPtr V, Vec x0, double r, double norm)
      : V_(std::move(V)), x0_(std::move(x0)), r_(r), norm_(norm) {}
  int dim() const override { return V_->dim(); }
  Box domain() const override;
  double resolution() const override { return V_->resolution() / r_; }
  double value(const Vec& x) const override { return V_->value(r_ * x + x0_) / norm_; }
  Vec gradient(const Vec& x, Side side) const override { return (r_ / norm_) * V_->gradient(r_ * x + x0_, side); }
  double norm() const { return norm_; }

 private:
  FieldPtr V_;
  Vec x0_;
  double r_;
  double norm_;
};

/// V(r x + x0) / (r^{1-n} int_{dE_r} V^2 mu)^{1/2}, checked to have unit
/// weighted norm on the boundary of E_1(0). Throws VanishingBoundaryMass.
std::shared_ptr<RescaledField> almgren_rescale(FieldPtr V, const Frame& frame, double r);

/// phi_kappa(t) = exp(-(kappa b / alpha) t^alpha) t^kappa.
double phi_kappa(const FunctionalConstants& c, double t, double kappa);

/// y -> u*(t y) / phi_kappa(t) for a deskewed field u*. Throws
/// RadiusBeyondTruncationDomain when 1 - b t^alpha <= 0.
std::shared_ptr<RescaledField> phi_rescale(FieldPtr ustar, const FunctionalConstants& c, double t, double kappa);

struct RegularFit {
  double amplitude = 0.0;
  Vec nu;               // thin unit vector
  double residual = 0.0;   // sphere L2 misfit
  double field_norm = 0.0; // sphere L2 norm of the field
};

/// Least squares of a Re(y'.nu + i|y_n|)^{3/2} against the field on the unit
/// sphere: nu on a 2-degree grid, then golden-section refinement. Throws
/// DegenerateFit when residual > 0.5 * field norm.
RegularFit fit_regular_blowup(const Field& f, const QuadratureRule& sphere);
RegularFit fit_regular_blowup(const Field& f);

struct SingularFit {
  int m = 1;
  std::vector<std::array<int, 3>> monomials;  // exponents, even in the last variable
  std::vector<double> coefficients;
  int stratum_dim = 0;
  double residual = 0.0;
  double field_norm = 0.0;
  double min_on_plane = 0.0;  // min of q over the thin unit sphere
};

/// Monomials y^beta of degree d in n variables with beta_n even.
std::vector<std::array<int, 3>> even_monomials(int n, int degree);
/// Basis of the even harmonic homogeneous polynomials of degree d, as
/// coefficient columns over even_monomials(n, d).
Eigen::MatrixXd even_harmonic_basis(int n, int degree);
double eval_monomials(const std::vector<std::array<int, 3>>& mons, const std::vector<double>& coef, const Vec& y);

/// Fits q in the even harmonic degree-2m class. Throws DegenerateFit and
/// NonnegativityViolated (q < -tol on the thin unit sphere).
SingularFit fit_singular_blowup(const Field& f, int m, const QuadratureRule& sphere, double stratum_tol = 1e-6,
                                double nonneg_tol = 2e-2);
SingularFit fit_singular_blowup(const Field& f, int m);

/// Stratum dimension from the coefficients of the thin gradient of q(y', 0).
int stratum_dimension(int n, const std::vector<std::array<int, 3>>& mons, const std::vector<double>& coef,
                      double tol = 1e-6);

enum class Verdict { Regular, Singular, Undetermined };
std::string to_string(Verdict v);

struct ClassifyConfig {
  FunctionalConstants constants;  // kappa is set per use
  double band = 0.15;
  double min_kappa = 1.35;
  double r_lo = 0.0;
  double r_hi = 1.0;
  int count = 0;
  double density_max = 0.15;
  double field_scale = 1.0;
  double stratum_tol = 1e-6;
};

struct PointClassification {
  Vec x0;
  double kappa = 0.0;
  double confidence = 0.0;
  Verdict verdict = Verdict::Undetermined;
  std::string reason;
  std::optional<ProfileResult> profile;
  double fit_t = 0.0;
  // regular
  double amplitude = 0.0;
  Vec nu;
  Vec nu_A;
  // singular
  int m = 0;
  std::vector<std::array<int, 3>> monomials;
  std::vector<double> coefficients;
  int stratum_dim = -1;
  double fit_residual = 0.0;
  std::optional<double> density;
};

/// Conormal-adjusted normal normalize((abar^{-1})^T nu) on the thin space.
Vec conormal_normal(const Frame& frame, const Vec& nu);

/// symmetrize -> profile -> frequency -> band test -> blowup fit.
PointClassification classify(FieldPtr U, const CoefficientField& A, const Vec& x0, const ClassifyConfig& config,
                             const CoincidenceSet* cs = nullptr);
PointClassification classify(FieldPtr U, const CoefficientField& A, const FreeBoundaryPoint& pt,
                             const ClassifyConfig& config, const CoincidenceSet* cs = nullptr);

struct RegularGraphReport {
  Mat rotation;                   // thin coordinates -> (tangential..., normal)
  std::vector<double> coefficients;  // g(s) = c0 + c . s
  std::vector<double> residuals;
  double max_residual = 0.0;
  std::vector<Vec> nu_A;
  double gamma = 0.5;
  double holder_max = 0.0;   // max |nu_A(x) - nu_A(y)| / |x - y|^gamma
};

/// Fits the regular points as a graph over the hyperplane orthogonal to the
/// mean conormal normal. Throws TooFewPoints (< 3 regular points).
RegularGraphReport regular_set_graph(const std::vector<PointClassification>& points, double gamma = 0.5);

/// int_{dB_1} |u^phi_t - u^phi_s| for consecutive radii of the ladder.
std::vector<double> rotation_diagnostics(FieldPtr ustar, const FunctionalConstants& c, const std::vector<double>& ts,
                                         double kappa);

}  // namespace thinlab
