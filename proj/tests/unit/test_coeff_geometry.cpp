#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "thinlab/coeff_geometry.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/grid.hpp"

using namespace thinlab;
using namespace testing;

namespace {

Mat random_spd(std::mt19937_64& rng, int n, double lam, double Lam) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ev(lam, Lam);
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = u(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Mat Q = Mat(qr.householderQ());
  Vec d(n);
  for (int k = 0; k < n; ++k) d(k) = ev(rng);
  return Q * d.asDiagonal() * Q.transpose();
}

}  // namespace

TEST_CASE("ellipticity report for the identity") {
  const auto A = CoefficientField::identity(2);
  std::vector<Vec> s{vec2(0.1, 0.2), vec2(-0.5, 0.3), vec2(0.9, -0.9)};
  const auto r = validate_ellipticity(A, s);
  CHECK(r.min_quotient == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.max_quotient == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.holder_estimate == 0.0);
  CHECK(r.ok());
}

TEST_CASE("ellipticity report for a constant diagonal matrix") {
  const auto A = CoefficientField::constant(mat2(4, 0, 0, 1));
  std::vector<Vec> s{vec2(0.1, 0.2), vec2(-0.5, 0.3)};
  const auto r = validate_ellipticity(A, s);
  CHECK(r.min_quotient == doctest::Approx(1.0));
  CHECK(r.max_quotient == doctest::Approx(4.0));
  CHECK(r.holder_estimate == 0.0);
}

TEST_CASE("Lipschitz estimate matches a brute-force pairwise maximum") {
  const auto A = CoefficientField::lipschitz_example(2);
  std::vector<Vec> s;
  const int k = 200;
  for (int i = 0; i < k; ++i) s.push_back(vec2(-0.99 + 1.98 * i / (k - 1), 0.0));
  const auto r = validate_ellipticity(A, s);
  // independent oracle: scalar coefficient f(x) = 1/(1 + x/2), pairwise slopes
  double best = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double xi = s[static_cast<std::size_t>(i)](0), xj = s[static_cast<std::size_t>(j)](0);
      best = std::max(best, std::abs(1.0 / (1.0 + xi / 2) - 1.0 / (1.0 + xj / 2)) / std::abs(xi - xj));
    }
  CHECK(r.holder_estimate == doctest::Approx(best).epsilon(1e-10));
  // sup |f'| on the sampled interval
  CHECK(r.holder_estimate == doctest::Approx(0.5 / std::pow(1.0 - 0.99 / 2, 2)).epsilon(2e-2));
}

TEST_CASE("ellipticity errors") {
  CoefficientField bad = CoefficientField::identity(2);
  bad.evaluator = [](const Vec&) { return mat2(1, 0.5, 0.2, 1); };
  CHECK_THROWS_AS(validate_ellipticity(bad, {vec2(0, 0)}), Error);
  bad.evaluator = [](const Vec&) { return mat2(1, 2, 2, 1); };
  try {
    validate_ellipticity(bad, {vec2(0, 0)});
    FAIL("expected EllipticityViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EllipticityViolated);
  }
}

TEST_CASE("matrix square root examples") {
  CHECK((matrix_sqrt(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm() < 1e-14);
  CHECK((matrix_sqrt(mat2(4, 0, 0, 1)) - mat2(2, 0, 0, 1)).norm() < 1e-14);
  const Mat S = mat2(2, 1, 1, 2);
  const Mat R = matrix_sqrt(S);
  CHECK((R * R - S).norm() < 1e-12);
  CHECK((R - R.transpose()).norm() == 0.0);
  // closed form: eigenvalues 3 and 1 on (1,1)/sqrt2 and (1,-1)/sqrt2
  CHECK(R(0, 0) == doctest::Approx((std::sqrt(3.0) + 1.0) / 2.0));
  CHECK(R(0, 1) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0));
  CHECK_THROWS_AS(matrix_sqrt(mat2(1, 2, 2, 1)), Error);
}

TEST_CASE("property: square root recomposes random SPD matrices") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    const Mat S = random_spd(rng, n, 0.2, 5.0);
    const Mat R = matrix_sqrt(S);
    CHECK((R * R - S).norm() <= 1e-10 * S.norm());
  }
}

TEST_CASE("deskew frame examples") {
  const Frame f = frame_from_matrix(mat2(4, 0, 0, 1), vec2(0, 0));
  CHECK((f.a - mat2(2, 0, 0, 1)).norm() < 1e-14);
  CHECK((f.O - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK((f.abar - mat2(2, 0, 0, 1)).norm() < 1e-14);
  CHECK(f.det_a == doctest::Approx(2.0));

  const Frame id = deskew_frame(CoefficientField::identity(3), vec3(0.1, 0.2, 0.0));
  CHECK((id.abar - Mat::Identity(3, 3)).norm() < 1e-14);
  REQUIRE(id.P);
  Vec d(3);
  d << 1, 1, -1;
  CHECK((*id.P - Mat(d.asDiagonal())).norm() < 1e-14);

  const Frame g = frame_from_matrix(mat2(1, 0.5, 0.5, 1), vec2(0, 0));
  REQUIRE(g.P);
  CHECK((*g.P - mat2(1, -1, 0, -1)).norm() < 1e-12);
  CHECK((*g.P * *g.P - Mat::Identity(2, 2)).norm() < 1e-12);

  // off the thin plane there is no reflection
  CHECK_FALSE(frame_from_matrix(Mat::Identity(2, 2), vec2(0, 0.3)).P.has_value());
}

TEST_CASE("property: deskewing maps ellipsoid boundaries to spheres") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const Mat A = random_spd(rng, n, 0.5, 3.0);
    Vec x0(n);
    for (int k = 0; k < n; ++k) x0(k) = u(rng);
    const Frame f = frame_from_matrix(A, x0);
    const double r = 0.3;
    // x on dE_r: x = x0 + a z with |z| = r, using the symmetric square root
    const Mat a = matrix_sqrt(A);
    Vec z(n);
    for (int k = 0; k < n; ++k) z(k) = u(rng);
    z *= r / z.norm();
    const Vec x = x0 + a * z;
    CHECK(std::abs(f.to_deskewed(x).norm() - r) <= 1e-10 * r);
    // abar preserves the thin plane and O is a rotation
    CHECK((f.O.transpose() * f.O - Mat::Identity(n, n)).norm() < 1e-12);
    for (int k = 0; k + 1 < n; ++k) CHECK(std::abs(f.abar_inv(n - 1, k)) < 1e-12);
    CHECK(f.det_a == doctest::Approx(std::sqrt(A.determinant())).epsilon(1e-12));
  }
}

TEST_CASE("property: reflections fix the thin plane and are involutions") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 2;
    const Mat A = random_spd(rng, n, 0.5, 3.0);
    Vec x0(n);
    for (int k = 0; k < n; ++k) x0(k) = u(rng);
    x0(n - 1) = 0.0;
    const Frame f = frame_from_matrix(A, x0);
    REQUIRE(f.P);
    const Mat& P = *f.P;
    CHECK((P * P - Mat::Identity(n, n)).norm() < 1e-10);
    Vec t(n);
    for (int k = 0; k < n; ++k) t(k) = u(rng);
    t(n - 1) = 0.0;
    CHECK((P * t - t).norm() < 1e-12);
    Vec y(n);
    for (int k = 0; k < n; ++k) y(k) = u(rng);
    CHECK((P * y)(n - 1) == doctest::Approx(-y(n - 1)).epsilon(1e-12));
  }
}

TEST_CASE("conformal factor examples") {
  const Frame id = frame_from_matrix(Mat::Identity(2, 2), vec2(0, 0));
  CHECK(conformal_factor(id, vec2(0.3, -0.7)) == doctest::Approx(1.0));
  const Frame f = frame_from_matrix(mat2(4, 0, 0, 1), vec2(0, 0));
  CHECK(conformal_factor(f, vec2(1, 0)) == doctest::Approx(2.0));
  CHECK(conformal_factor(f, vec2(0, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(conformal_factor(f, vec2(0, 0)), Error);
}

TEST_CASE("property: conformal factor lies between lambda^{1/2} and Lambda^{1/2}") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 2;
    const Mat A = random_spd(rng, n, 0.3, 4.0);
    const auto e = jacobi_eigen(A);
    const Frame f = frame_from_matrix(A, Vec::Zero(n));
    Vec z(n);
    for (int k = 0; k < n; ++k) z(k) = u(rng);
    const double mu = conformal_factor(f, z);
    CHECK(mu >= std::sqrt(e.values(0)) * (1 - 1e-12));
    CHECK(mu <= std::sqrt(e.values(n - 1)) * (1 + 1e-12));
  }
}

TEST_CASE("property: frames of a Hoelder field vary Hoelder-continuously") {
  const double alpha = 0.5;
  const auto A = CoefficientField::holder(2, alpha, 0.2, 4);
  // |a_x - a_y| against |x - y| on a shrinking sequence, log-log slope
  const Vec x = vec2(0.21, 0.0);
  std::vector<double> ls, ld;
  for (int k = 0; k < 8; ++k) {
    const double d = 0.2 * std::pow(0.5, k);
    // move toward one of the cusp centres would be ideal; a generic direction
    // still shows at least the Hoelder rate
    const Vec y = x + vec2(d, 0.0);
    const double diff = (deskew_frame(A, x).a - deskew_frame(A, y).a).norm();
    ls.push_back(std::log(d));
    ld.push_back(std::log(diff));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) mx += ls[i], my += ld[i];
  mx /= static_cast<double>(ls.size());
  my /= static_cast<double>(ls.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) sxy += (ls[i] - mx) * (ld[i] - my), sxx += (ls[i] - mx) * (ls[i] - mx);
  CHECK(sxy / sxx >= 0.9 * alpha);
}

TEST_CASE("Hoelder and full presets are elliptic and symmetric") {
  std::vector<Vec> s;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) s.push_back(vec3(u(rng), u(rng), u(rng)));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    CHECK(validate_ellipticity(CoefficientField::holder(3, 0.5, 0.05, seed), s).ok());
    CHECK(validate_ellipticity(CoefficientField::full(3, 0.5, 0.6, 0.05, seed), s).min_quotient > 0.0);
  }
  // the Hoelder preset is even in x_n with a_in = 0
  const auto H = CoefficientField::holder(3, 0.5, 0.05, 2);
  const Mat a = H(vec3(0.3, -0.2, 0.4)), b = H(vec3(0.3, -0.2, -0.4));
  CHECK((a - b).norm() < 1e-14);
  CHECK(a(0, 2) == 0.0);
  CHECK(a(1, 2) == 0.0);
}

TEST_CASE("frame cache covers exactly the thin nodes") {
  const Grid g(2, 9);
  const FrameCache cache(CoefficientField::identity(2), g);
  CHECK(cache.size() == 9);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(cache.contains(i) == g.on_thin_plane(i));
  const auto t = g.thin_nodes();
  CHECK((cache.at(t[3]).x0 - g.node(t[3])).norm() == 0.0);
}
