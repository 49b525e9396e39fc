#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/functionals.hpp"
#include "thinlab/integrals.hpp"

using namespace thinlab;
using namespace testing;

namespace {

FunctionalConstants zero_gauge(int n, double kappa) {
  FunctionalConstants c;
  c.n = n;
  c.kappa = kappa;
  c.a_override = 0.0;
  c.b_override = 0.0;
  return c;
}

Frame identity_frame(int n) { return frame_from_matrix(Mat::Identity(n, n), Vec::Zero(n)); }

ExactParams degree(int d) {
  ExactParams p;
  p.degree = d;
  return p;
}

}  // namespace

TEST_CASE("constants follow the gauge formulas") {
  FunctionalConstants c;
  c.n = 3;
  c.kappa = 1.5;
  c.kappa0 = 4.0;
  c.alpha = 0.5;
  c.M = 2.0;
  CHECK(c.a() == doctest::Approx(2.0 * (3 + 3 - 2) / 0.5));
  CHECK(c.b() == doctest::Approx(2.0 * (3 + 8) / 0.5));
  CHECK(c.truncation_radius() == doctest::Approx(std::pow(1.0 / c.b(), 2.0)));
  // b is shared across kappa
  CHECK(c.with_kappa(2.0).b() == c.b());
  CHECK(c.with_kappa(3.5).b() == c.b());
  CHECK(c.with_kappa(2.0).a() != c.a());
  FunctionalConstants bad = c;
  bad.kappa0 = 1.8;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("Weiss vanishes on homogeneous solutions with zero gauge") {
  for (int n : {2, 3})
    for (auto [kind, ep] : {std::pair{ExactKind::Regular32, ExactParams{}}, std::pair{ExactKind::Polynomial, degree(2)},
                            std::pair{ExactKind::Regular72, ExactParams{}}}) {
      const auto v = exact_field(n, kind, ep);
      const auto c = zero_gauge(n, exact_homogeneity(kind, ep));
      for (double r : {0.1, 0.3, 0.7}) {
        const double w = weiss(*v, identity_frame(n), c, r);
        CHECK(std::abs(w) <= 1e-2 * weiss_scale(*v, identity_frame(n), c, r));
      }
    }
  CHECK(weiss(*constant(2, 0.0), identity_frame(2), zero_gauge(2, 1.5), 0.3) == 0.0);
}

TEST_CASE("property: Weiss sign detects the homogeneity") {
  const auto v2 = exact_field(2, ExactKind::Polynomial, degree(2));
  const auto v32 = exact_field(2, ExactKind::Regular32, {});
  CHECK(weiss(*v2, identity_frame(2), zero_gauge(2, 1.5), 0.4) > 0.0);
  CHECK(weiss(*v32, identity_frame(2), zero_gauge(2, 2.0), 0.4) < 0.0);
  const auto v72 = exact_field(3, ExactKind::Regular72, {});
  CHECK(weiss(*v72, identity_frame(3), zero_gauge(3, 2.0), 0.4) > 0.0);
}

TEST_CASE("Weiss with a positive gauge on the regular solution") {
  FunctionalConstants c;
  c.n = 2;
  c.kappa = 1.5;
  c.M = 1.0;
  const auto v = exact_field(2, ExactKind::Regular32, {});
  // for a homogeneous solution the bracket is kappa b r^alpha H(r) / r, so
  // W ~ e^{a r^alpha} r^alpha
  const std::vector<double> rs{1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> w;
  for (double r : rs) w.push_back(weiss(*v, identity_frame(2), c, r));
  const auto model = [&](double r) { return std::exp(c.a() * std::sqrt(r)) * std::sqrt(r); };
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] > 0.0);
    if (i) CHECK(w[i] / w[i - 1] == doctest::Approx(model(rs[i]) / model(rs[i - 1])).epsilon(1e-6));
  }
}

TEST_CASE("Almgren frequency examples") {
  CHECK(almgren(*exact_field(2, ExactKind::Regular32, {}), identity_frame(2), 0.3) == doctest::Approx(1.5).epsilon(0.02 / 1.5));
  CHECK(almgren(*saddle(2, 0, 1), identity_frame(2), 0.3) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(almgren(*constant(2, 3.0), identity_frame(2), 0.3) == 0.0);
  try {
    almgren(*constant(2, 0.0), identity_frame(2), 0.3);
    FAIL("expected VanishingBoundaryMass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VanishingBoundaryMass);
  }
}

TEST_CASE("property: Almgren frequency is scale covariant and amplitude invariant") {
  for (int n : {2, 3}) {
    const auto v = exact_field(n, ExactKind::Regular32, {});
    double lo = 1e9, hi = -1e9;
    for (double r = 0.05; r <= 0.5; r *= 1.3) {
      const double N = almgren(*v, identity_frame(n), r);
      lo = std::min(lo, N);
      hi = std::max(hi, N);
    }
    CHECK(hi - lo <= 0.02);
    ExactParams ep;
    ep.amplitude = 7.25;
    CHECK(almgren(*exact_field(n, ExactKind::Regular32, ep), identity_frame(n), 0.2) ==
          doctest::Approx(almgren(*v, identity_frame(n), 0.2)).epsilon(1e-13));
  }
}

TEST_CASE("property: frequency is independent of the frame for skewed solutions") {
  Mat A(3, 3);
  A << 4, 0.3, 0.2, 0.3, 1, 0.1, 0.2, 0.1, 1;
  ExactParams ep;
  ep.skew_A = A;
  const auto v = exact_field(3, ExactKind::Regular32, ep);
  const Frame f = frame_from_matrix(A, Vec::Zero(3));
  CHECK(almgren(*v, f, 0.2) == doctest::Approx(1.5).epsilon(0.02 / 1.5));
}

TEST_CASE("truncated frequency arithmetic") {
  FunctionalConstants c;
  c.alpha = 0.5;
  c.b_override = 0.1;
  CHECK(truncated_frequency(1.5, c, 1.0) == doctest::Approx(1.5 / 0.9));
  CHECK(truncated_frequency(1e6, c, 1.0) == 4.0);
  c.b_override = 1.0;
  CHECK_THROWS_AS(truncated_frequency(1.5, c, 1.0), Error);
}

TEST_CASE("radius ladder and trusted window") {
  const auto l = radius_ladder(0.01, 0.1);
  REQUIRE(l.size() >= 2);
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(l[i] / l[i - 1] == doctest::Approx(std::pow(2.0, 0.25)));
  const auto k = radius_ladder(0.01, 0.1, 5);
  CHECK(k.size() == 5);
  CHECK(k.back() == 0.1);

  const auto v = ScalarField::sample(Grid(2, 65), [](const Vec& x) { return x(0); });
  FunctionalConstants c;
  c.M = 0.0;
  const Frame f = frame_from_matrix(mat2(4, 0, 0, 1), vec2(0.2, 0));
  const auto [lo, hi] = trusted_window(v, f, c, 0.0, 10.0);
  CHECK(lo == doctest::Approx(4.0 / 32));
  CHECK(hi == doctest::Approx(0.8 / 2.0));
  c.M = 1.0;  // b = 20: (2b)^{-2}
  CHECK(trusted_window(v, f, c, 0.0, 10.0).second == doctest::Approx(1.0 / 1600));
}

TEST_CASE("profile of the regular solution follows the closed form") {
  FunctionalConstants c;
  c.n = 2;
  c.b_override = 0.5;
  c.a_override = 0.0;
  const auto v = exact_field(2, ExactKind::Regular32, {});
  const auto p = profile(*v, identity_frame(2), c, 0.01, 0.5);
  REQUIRE(p.frequency.radii.size() >= 6);
  for (std::size_t i = 0; i < p.frequency.radii.size(); ++i) {
    const double r = p.frequency.radii[i];
    CHECK(p.frequency.Nhat[i] == doctest::Approx(1.5 / (1 - 0.5 * std::sqrt(r))).epsilon(0.02));
  }
  CHECK(audit_monotonicity(p.frequency.Nhat).violations == 0);
  CHECK(p.weiss.constants.b() == c.b());
  const auto est = frequency_at_point(p.frequency);
  CHECK(est.kappa == doctest::Approx(1.5).epsilon(0.03 / 1.5));
}

TEST_CASE("frequency estimates on the exact library") {
  FunctionalConstants c;
  c.M = 0.0;
  for (int n : {2, 3}) {
    c.n = n;
    const auto fit = [&](ExactKind kind, const ExactParams& ep) {
      const auto v = exact_field(n, kind, ep);
      return frequency_at_point(profile(*v, identity_frame(n), c, 0.05, 0.5).frequency).kappa;
    };
    CHECK(fit(ExactKind::Regular32, {}) == doctest::Approx(1.5).epsilon(0.03 / 1.5));
    CHECK(fit(ExactKind::Polynomial, degree(2)) == doctest::Approx(2.0).epsilon(0.03 / 2.0));
    CHECK(fit(ExactKind::Regular72, {}) == doctest::Approx(3.5).epsilon(0.05 / 3.5));
  }
}

TEST_CASE("too few samples") {
  FrequencyProfile p;
  p.radii = {0.1, 0.2, 0.3};
  p.Nhat = {1.5, 1.5, 1.5};
  try {
    frequency_at_point(p);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientSamples);
  }
}

TEST_CASE("monotonicity audit counts drops beyond the slack") {
  const auto a = audit_monotonicity({1.0, 1.1, 1.096, 1.2, 1.18, 1.3});
  CHECK(a.steps == 5);
  CHECK(a.violations == 1);
  CHECK(a.worst_drop == doctest::Approx(0.02));
}

TEST_CASE("profile CSV layout") {
  FunctionalConstants c;
  c.M = 0.0;
  const auto p = profile(*exact_field(2, ExactKind::Regular32, {}), identity_frame(2), c, 0.1, 0.2);
  std::istringstream in(profile_csv(p));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# x0=", 0) == 0);
  std::getline(in, line);
  CHECK(line == "r,N,Nhat,W_kappa");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // round trip of the printed radius
    CHECK(std::stod(line.substr(0, line.find(','))) == p.frequency.radii[rows - 1]);
  }
  CHECK(rows == p.frequency.radii.size());
}
