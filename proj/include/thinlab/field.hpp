#pragma once

#include <functional>
#include <limits>
#include <memory>

#include "thinlab/linalg.hpp"

namespace thinlab {

/// Which half-space a gradient on the thin plane is taken from. Off the
/// plane the sign of x_n decides and the hint is ignored.
enum class Side { Plus, Minus };

inline Side side_of(double xn, Side on_plane = Side::Plus) {
  if (xn > 0.0) return Side::Plus;
  if (xn < 0.0) return Side::Minus;
  return on_plane;
}

struct Box {
  Vec lo;
  Vec hi;
  static Box unbounded(int n) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vec::Constant(n, -inf), Vec::Constant(n, inf)};
  }
  bool contains(const Vec& x, double slack = 1e-12) const {
    for (int k = 0; k < x.size(); ++k)
      if (x(k) < lo(k) - slack || x(k) > hi(k) + slack) return false;
    return true;
  }
};

/// A scalar field that can be evaluated with gradients anywhere in its domain.
class Field {
 public:
  virtual ~Field() = default;
  virtual int dim() const = 0;
  virtual Box domain() const { return Box::unbounded(dim()); }
  /// Sampling resolution (grid spacing); 0 for closed-form fields.
  virtual double resolution() const { return 0.0; }
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x, Side side) const = 0;
};

using FieldPtr = std::shared_ptr<const Field>;

/// Closed-form field.
class AnalyticField : public Field {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&, Side)>;

  AnalyticField(int n, ValueFn value, GradFn gradient)
      : n_(n), value_(std::move(value)), gradient_(std::move(gradient)) {}

  int dim() const override { return n_; }
  double value(const Vec& x) const override { return value_(x); }
  Vec gradient(const Vec& x, Side side) const override { return gradient_(x, side); }

 private:
  int n_;
  ValueFn value_;
  GradFn gradient_;
};

/// c * base.
class ScaledField : public Field {
 public:
  ScaledField(FieldPtr base, double c) : base_(std::move(base)), c_(c) {}
  int dim() const override { return base_->dim(); }
  Box domain() const override { return base_->domain(); }
  double resolution() const override { return base_->resolution(); }
  double value(const Vec& x) const override { return c_ * base_->value(x); }
  Vec gradient(const Vec& x, Side side) const override { return c_ * base_->gradient(x, side); }

 private:
  FieldPtr base_;
  double c_;
};

/// Non-owning adaptor so stack objects can be passed where a FieldPtr is needed.
inline FieldPtr borrow(const Field& f) { return FieldPtr(std::shared_ptr<const Field>{}, &f); }

}  // namespace thinlab
