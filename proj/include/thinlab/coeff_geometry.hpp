#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thinlab/linalg.hpp"

namespace thinlab {

class Grid;

/// Symmetric uniformly elliptic matrix field A(x) with its declared
/// constants: lambda <= <A xi, xi>/|xi|^2 <= Lambda, Hoelder exponent alpha
/// and the master bound M (||A||_{C^alpha}, 1/lambda, Lambda <= M).
struct CoefficientField {
  int n = 2;
  std::function<Mat(const Vec&)> evaluator;
  double lambda = 1.0;
  double Lambda = 1.0;
  double alpha = 0.5;
  double M = 1.0;
  std::string name = "identity";

  Mat operator()(const Vec& x) const { return evaluator(x); }

  static CoefficientField identity(int n);
  static CoefficientField constant(const Mat& A, double alpha = 0.5);
  /// A(x) = (1 + x_1/2)^{-1} I, the Lipschitz coefficient of the 1-D example
  /// lifted to n dimensions (alpha = 1 reported as Lipschitz).
  static CoefficientField lipschitz_example(int n);
  /// Seeded diagonal Hoelder field, even in x_n with a_in = 0 on every
  /// hyperplane, so even data give even (quasisymmetric) solutions.
  /// diag entries 1 + eps_k |x - c_k|^alpha with c_k on the thin plane.
  static CoefficientField holder(int n, double alpha, double eps, std::uint64_t seed);
  /// Seeded field with a full (off-diagonal, including a_in) constant part
  /// and a small Hoelder perturbation on the diagonal.
  static CoefficientField full(int n, double alpha, double offdiag, double eps, std::uint64_t seed);
};

struct EllipticityReport {
  double min_quotient = 0.0;
  double max_quotient = 0.0;
  double symmetry_residual = 0.0;
  double holder_estimate = 0.0;
  bool violates_lambda = false;
  bool violates_Lambda = false;
  bool holder_exceeds_M = false;
  bool constants_inconsistent = false;  // lambda <= 1 <= Lambda, 1/lambda <= M, Lambda <= M
  bool ok() const {
    return !violates_lambda && !violates_Lambda && !holder_exceeds_M && !constants_inconsistent;
  }
};

/// Throws NonSymmetric if some sample has asymmetry > 1e-9 and
/// EllipticityViolated if some A(x) is not positive definite. Bounds that
/// merely disagree with the declared constants are flagged in the report.
EllipticityReport validate_ellipticity(const CoefficientField& A, const std::vector<Vec>& samples);

struct SymmetricEigen {
  Vec values;   // ascending
  Mat vectors;  // columns
};

/// Cyclic Jacobi rotations; intended for n <= 3.
SymmetricEigen jacobi_eigen(const Mat& S);

/// SPD square root through the symmetric eigendecomposition. Throws NotSPD.
Mat matrix_sqrt(const Mat& S);

/// Deskewing data at a point: a = A^{1/2}(x0), the Gram-Schmidt rotation O
/// whose first n-1 columns span a^{-1} Pi and whose last column is
/// a e_n / |a e_n|, abar = a O, and the conormal reflection P when x0 lies on
/// the thin plane {x_n = 0}.
struct Frame {
  Vec x0;
  Mat A0;
  Mat a;
  Mat O;
  Mat abar;
  Mat abar_inv;
  double det_a = 1.0;
  std::optional<Mat> P;

  int dim() const { return static_cast<int>(x0.size()); }
  bool on_thin_plane() const { return P.has_value(); }
  /// T-bar: x -> abar^{-1} (x - x0).
  Vec to_deskewed(const Vec& x) const { return abar_inv * (x - x0); }
  Vec from_deskewed(const Vec& y) const { return abar * y + x0; }
  /// Half-widths of the axis-aligned bounding box of E_r(x0).
  Vec half_widths(double r) const;
  /// Thin block of abar^{-1}: acts on thin vectors (abar^{-1} preserves Pi).
  Mat thin_block_inv() const;
};

Frame frame_from_matrix(const Mat& A0, const Vec& x0);
Frame deskew_frame(const CoefficientField& A, const Vec& x0);

/// mu_{x0}(z) = |a^{-1} z| / |A^{-1}(x0) z|. Throws ZeroVector.
double conformal_factor(const Frame& frame, const Vec& z);

/// E_r(x0) = a B_r + x0.
struct Ellipsoid {
  Vec x0;
  double r = 0.0;
  Frame frame;

  bool contains(const Vec& x) const { return frame.to_deskewed(x).norm() < r; }
};

/// Read-only table of frames for the thin-plane nodes of a grid, keyed by the
/// node's flat index.
class FrameCache {
 public:
  FrameCache(const CoefficientField& A, const Grid& grid);
  const Frame& at(std::size_t node_index) const;
  bool contains(std::size_t node_index) const;
  std::size_t size() const { return frames_.size(); }

 private:
  std::vector<std::size_t> keys_;  // sorted
  std::vector<Frame> frames_;
};

}  // namespace thinlab
