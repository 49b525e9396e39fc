#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "thinlab/field.hpp"
#include "thinlab/linalg.hpp"

namespace thinlab {

/// Uniform Cartesian grid on a box with m (odd) nodes per axis. The thin
/// plane x_n = 0 is the grid plane with index (m-1)/2 along the last axis.
class Grid {
 public:
  Grid() = default;
  /// Cube [lo, hi]^n.
  Grid(int n, int m, double lo = -1.0, double hi = 1.0);
  Grid(int n, int m, const std::array<double, 3>& lo, const std::array<double, 3>& hi);

  int dim() const { return n_; }
  int nodes_per_axis() const { return m_; }
  std::size_t size() const { return size_; }
  double spacing(int axis = 0) const { return h_[static_cast<std::size_t>(axis)]; }
  double lower(int axis) const { return lo_[static_cast<std::size_t>(axis)]; }
  double upper(int axis) const { return hi_[static_cast<std::size_t>(axis)]; }
  int thin_index() const { return (m_ - 1) / 2; }
  /// True when all axes share one spacing and the thin plane is a grid plane.
  bool isotropic() const;

  std::size_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }
  std::size_t index(const std::array<int, 3>& ijk) const;
  std::array<int, 3> multi_index(std::size_t idx) const;
  Vec node(std::size_t idx) const;
  double coord(int axis, int i) const { return lo_[static_cast<std::size_t>(axis)] + i * h_[static_cast<std::size_t>(axis)]; }

  bool on_boundary(std::size_t idx) const;
  bool on_thin_plane(std::size_t idx) const { return multi_index(idx)[static_cast<std::size_t>(n_ - 1)] == thin_index(); }
  bool contains(const Vec& x, double slack = 1e-12) const;
  double distance_to_boundary(const Vec& x) const;
  Box box() const;

  /// Flat indices of the thin-plane nodes, in storage order.
  std::vector<std::size_t> thin_nodes() const;

 private:
  int n_ = 2;
  int m_ = 3;
  std::array<double, 3> lo_{-1.0, -1.0, -1.0};
  std::array<double, 3> hi_{1.0, 1.0, 1.0};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> stride_{1, 1, 1};
  std::size_t size_ = 0;
};

enum class FieldTag { Solved, Exact, Rescaled };
std::string to_string(FieldTag tag);

/// Node values on a grid. Values are multilinearly interpolated; gradients
/// are node finite differences (central, or second-order one-sided at the box
/// boundary and on the thin plane from the requested side) interpolated
/// multilinearly within the cell on the correct side of the thin plane.
class ScalarField : public Field {
 public:
  ScalarField(Grid grid, std::vector<double> values, FieldTag tag = FieldTag::Solved);

  static ScalarField sample(const Grid& grid, const std::function<double(const Vec&)>& f,
                            FieldTag tag = FieldTag::Exact);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  FieldTag tag() const { return tag_; }
  double operator[](std::size_t i) const { return values_[i]; }

  int dim() const override { return grid_.dim(); }
  Box domain() const override { return grid_.box(); }
  double resolution() const override { return grid_.spacing(0); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x, Side side) const override;

  /// Finite-difference gradient at a node; `side` selects the half-space for
  /// the normal derivative on the thin plane.
  Vec node_gradient(std::size_t idx, Side side) const;
  double max_abs() const;

 private:
  struct GradientCache {
    std::once_flag once;
    std::array<std::vector<double>, 3> plus;  // components, thin nodes use + side
    std::vector<double> minus_normal;         // normal derivative from - side, thin nodes
  };
  void ensure_cache() const;

  Grid grid_;
  std::vector<double> values_;
  FieldTag tag_;
  std::shared_ptr<GradientCache> cache_;
};

/// Multilinear interpolation. Throws OutOfDomain.
double sample(const ScalarField& field, const Vec& x);
/// Throws OutOfDomain.
Vec one_sided_gradient(const ScalarField& field, const Vec& x, Side side);

// SGF1 binary format: "SGF1", u32 version=1, u32 n, u32 m, f64 box bounds
// (lo_0, hi_0, ..., lo_{n-1}, hi_{n-1}), then m^n f64 values in row-major
// order with the last axis fastest. All little-endian.
std::vector<unsigned char> encode_sgf1(const ScalarField& field);
ScalarField decode_sgf1(const std::vector<unsigned char>& bytes);
void write_sgf1(const std::string& path, const ScalarField& field);
ScalarField read_sgf1(const std::string& path);

}  // namespace thinlab
