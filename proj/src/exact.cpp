#include "thinlab/exact.hpp"

#include <cmath>
#include <complex>

#include "thinlab/errors.hpp"

namespace thinlab {

ExactKind exact_kind_from_string(const std::string& s) {
  if (s == "regular" || s == "regular32" || s == "3/2") return ExactKind::Regular32;
  if (s == "polynomial" || s == "singular" || s == "poly") return ExactKind::Polynomial;
  if (s == "regular72" || s == "7/2") return ExactKind::Regular72;
  throw Error(ErrorKind::UnknownKind, "unknown exact field kind '" + s + "'");
}

std::string to_string(ExactKind kind) {
  switch (kind) {
    case ExactKind::Regular32: return "regular";
    case ExactKind::Polynomial: return "polynomial";
    case ExactKind::Regular72: return "regular72";
  }
  return "?";
}

double exact_homogeneity(ExactKind kind, const ExactParams& params) {
  switch (kind) {
    case ExactKind::Regular32: return 1.5;
    case ExactKind::Polynomial: return params.degree;
    case ExactKind::Regular72: return 3.5;
  }
  return 0.0;
}

namespace {

double power_of(ExactKind kind, int degree) {
  return kind == ExactKind::Regular32 ? 1.5 : kind == ExactKind::Regular72 ? 3.5 : degree;
}

double thin_dot(const Vec& nu, const Vec& y) {
  double s = 0.0;
  for (int k = 0; k < nu.size(); ++k) s += nu(k) * y(k);
  return s;
}

}  // namespace

double model_value(ExactKind kind, const Vec& nu, int degree, const Vec& y) {
  const int n = static_cast<int>(y.size());
  const double s = thin_dot(nu, y);
  if (kind == ExactKind::Polynomial) {
    const std::complex<double> z(s, y(n - 1));
    std::complex<double> w(1.0, 0.0);
    for (int k = 0; k < degree; ++k) w *= z;
    return w.real();
  }
  const std::complex<double> z(s, std::abs(y(n - 1)));
  if (std::abs(z) == 0.0) return 0.0;
  return std::pow(z, power_of(kind, degree)).real();
}

Vec model_gradient(ExactKind kind, const Vec& nu, int degree, const Vec& y, Side side) {
  const int n = static_cast<int>(y.size());
  const double s = thin_dot(nu, y);
  Vec g = Vec::Zero(n);
  double ds = 0.0, dt = 0.0;
  if (kind == ExactKind::Polynomial) {
    const std::complex<double> z(s, y(n - 1));
    std::complex<double> w(1.0, 0.0);
    for (int k = 0; k < degree - 1; ++k) w *= z;
    const std::complex<double> d = static_cast<double>(degree) * w;
    ds = d.real();
    dt = (std::complex<double>(0.0, 1.0) * d).real();
  } else {
    const std::complex<double> z(s, std::abs(y(n - 1)));
    if (std::abs(z) == 0.0) return g;
    const double p = power_of(kind, degree);
    const std::complex<double> d = p * std::pow(z, p - 1.0);
    ds = d.real();
    const double sgn = side_of(y(n - 1), side) == Side::Plus ? 1.0 : -1.0;
    dt = sgn * (std::complex<double>(0.0, 1.0) * d).real();
  }
  for (int k = 0; k < n - 1; ++k) g(k) = ds * nu(k);
  g(n - 1) = dt;
  return g;
}

std::shared_ptr<AnalyticField> exact_field(int n, ExactKind kind, const ExactParams& params) {
  Vec nu = params.nu.size() == 0 ? unit(n - 1, 0) : params.nu;
  if (nu.size() != n - 1 || std::abs(nu.norm() - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "exact field: nu must be a unit thin vector");
  if (!(params.amplitude > 0.0)) throw Error(ErrorKind::InvalidArgument, "exact field: amplitude must be positive");
  const Vec c = params.center.size() == 0 ? Vec(Vec::Zero(n)) : params.center;
  if (c.size() != n || c(n - 1) != 0.0)
    throw Error(ErrorKind::InvalidArgument, "exact field: center must lie on the thin plane");
  if (kind == ExactKind::Polynomial && (params.degree < 2 || params.degree % 2 != 0))
    throw Error(ErrorKind::InvalidArgument, "exact field: polynomial degree must be even and >= 2");
  const int degree = params.degree;
  const double a = params.amplitude;
  Mat T = Mat::Identity(n, n);  // y = T (x - c)
  if (params.skew_A) T = frame_from_matrix(*params.skew_A, c).abar_inv;
  auto value = [=](const Vec& x) {
    Vec y = T * (x - c);
    if (x(n - 1) == 0.0) y(n - 1) = 0.0;
    return a * model_value(kind, nu, degree, y);
  };
  auto grad = [=](const Vec& x, Side side) {
    Vec y = T * (x - c);
    if (x(n - 1) == 0.0) y(n - 1) = 0.0;
    return Vec(a * (T.transpose() * model_gradient(kind, nu, degree, y, side)));
  };
  return std::make_shared<AnalyticField>(n, value, grad);
}

ScalarField exact_solution_field(const Grid& grid, ExactKind kind, const ExactParams& params) {
  const auto f = exact_field(grid.dim(), kind, params);
  return ScalarField::sample(grid, [&](const Vec& x) { return f->value(x); }, FieldTag::Exact);
}

}  // namespace thinlab
