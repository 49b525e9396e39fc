#pragma once

#include <memory>
#include <optional>
#include <string>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/field.hpp"
#include "thinlab/grid.hpp"

namespace thinlab {

/// Closed-form thin-obstacle solutions.
///  Regular32:  a Re(x'.nu + i|x_n|)^{3/2}
///  Polynomial: a Re(x'.nu + i x_n)^{2m}, even harmonic, >= 0 on the plane
///  Regular72:  a Re(x'.nu + i|x_n|)^{7/2}
enum class ExactKind { Regular32, Polynomial, Regular72 };

ExactKind exact_kind_from_string(const std::string& s);  // throws UnknownKind
std::string to_string(ExactKind kind);

struct ExactParams {
  Vec nu;               // unit thin vector (length n-1); empty = e_1
  double amplitude = 1.0;
  Vec center;           // on the thin plane; empty = origin
  int degree = 2;       // 2m for Polynomial
  /// When set, the field is p(abar^{-1}(x - center)) for the constant matrix
  /// skew_A, a solution of the A-Signorini problem.
  std::optional<Mat> skew_A;
};

/// Homogeneity of the kind (3/2, degree, 7/2).
double exact_homogeneity(ExactKind kind, const ExactParams& params);

/// Model profile in deskewed coordinates with unit amplitude, centered at 0.
double model_value(ExactKind kind, const Vec& nu, int degree, const Vec& y);
Vec model_gradient(ExactKind kind, const Vec& nu, int degree, const Vec& y, Side side);

/// Throws InvalidArgument for a non-unit nu, amplitude <= 0 or a center off
/// the thin plane.
std::shared_ptr<AnalyticField> exact_field(int n, ExactKind kind, const ExactParams& params);
ScalarField exact_solution_field(const Grid& grid, ExactKind kind, const ExactParams& params);

}  // namespace thinlab
