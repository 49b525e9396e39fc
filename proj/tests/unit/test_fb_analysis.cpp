#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/fb_analysis.hpp"
#include "thinlab/integrals.hpp"
#include "thinlab/vi_solver.hpp"

using namespace thinlab;
using namespace testing;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Frame identity_frame(int n, const Vec& x0) { return frame_from_matrix(Mat::Identity(n, n), x0); }

ExactParams centered(const Vec& c) {
  ExactParams p;
  p.center = c;
  return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

// gradients by central differences; the fits only sample values
std::shared_ptr<AnalyticField> value_field(int n, std::function<double(const Vec&)> f) {
  return std::make_shared<AnalyticField>(n, f, [n, f](const Vec& x, Side) {
    Vec g(n);
    for (int k = 0; k < n; ++k) {
      Vec p = x, m = x;
      p(k) += 1e-6;
      m(k) -= 1e-6;
      g(k) = (f(p) - f(m)) / 2e-6;
    }
    return g;
  });
}

double angle_between(const Vec& a, const Vec& b) { return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)); }

double coefficient(const SingularFit& f, std::array<int, 3> beta) {
  for (std::size_t i = 0; i < f.monomials.size(); ++i)
    if (f.monomials[i] == beta) return f.coefficients[i];
  return 0.0;
}

// a Re(y'.nu + i|y_n|)^{3/2} from the direct complex power
std::shared_ptr<AnalyticField> regular_model(const Vec& nu, double a, double noise = 0.0) {
  const int n = static_cast<int>(nu.size()) + 1;
  return value_field(n, [=](const Vec& y) {
    const double s = y.head(n - 1).dot(nu);
    const double t = std::abs(y(n - 1));
    return a * re_power(s, t, 1.5) + noise * std::sin(17 * y(0) + 11 * y(n - 1) + 3);
  });
}

PointClassification regular_point(const Vec& x0, const Vec& nu_A) {
  PointClassification p;
  p.x0 = x0;
  p.verdict = Verdict::Regular;
  p.nu_A = nu_A.normalized();
  return p;
}

}  // namespace

TEST_CASE("coincidence set of the regular solution is the left half line") {
  const Grid g(2, 65);
  const auto U = exact_solution_field(g, ExactKind::Regular32, {});
  const auto cs = coincidence_set(U, 1e-12);
  REQUIRE(cs.nodes.size() == 65);
  for (std::size_t i = 0; i < cs.nodes.size(); ++i) {
    const double x1 = g.node(cs.nodes[i])(0);
    CHECK(static_cast<bool>(cs.active[i]) == (x1 <= 1e-12));
  }
  CHECK(cs.active_count == 33);

  CHECK(coincidence_set(ScalarField::sample(g, [](const Vec& x) { return 1 + x(0) * x(0); }), 1e-12).active_count == 0);
}

TEST_CASE("negative obstacle data makes every thin node active") {
  SignoriniProblem p;
  p.A = CoefficientField::identity(2);
  p.grid = Grid(2, 17);
  p.boundary_data = [](const Vec&) { return -1.0; };
  SolverConfig c;
  c.tol = 1e-12;
  const auto s = solve_psor(p, c);
  const auto cs = coincidence_set(s);
  CHECK(cs.active_count == static_cast<int>(cs.nodes.size()));
  CHECK(free_boundary(cs).empty());
  CHECK(thin_density(cs, vec2(0, 0), 0.5) == 1.0);
}

TEST_CASE("free boundary crossing is recovered to a fraction of a cell") {
  const Grid g(2, 65);
  const double h = g.spacing(0);
  for (double frac : {0.3, 0.7}) {
    const Vec c = vec2(g.node(g.thin_nodes()[30])(0) + frac * h, 0.0);
    const auto U = exact_solution_field(g, ExactKind::Regular32, centered(c));
    const auto pts = free_boundary(coincidence_set(U, 1e-12));
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].x(0) - c(0)) <= 0.2 * h);
    CHECK(pts[0].x(1) == 0.0);
    CHECK(U[pts[0].active_node] <= 1e-12);
    CHECK(U[pts[0].inactive_node] > 0.0);
  }
  CHECK(free_boundary(coincidence_set(ScalarField::sample(g, [](const Vec&) { return 1.0; }), 1e-12)).empty());
}

TEST_CASE("property: free boundary points lie on the circle of a three-dimensional solution") {
  // exact field centered at the origin: the free boundary is the line x1 = 0
  const Grid g(3, 33);
  const double h = g.spacing(0);
  ExactParams ep;
  ep.nu = vec2(std::cos(30 * kDeg), std::sin(30 * kDeg));
  const auto U = exact_solution_field(g, ExactKind::Regular32, ep);
  const auto pts = free_boundary(coincidence_set(U, 1e-12));
  REQUIRE(pts.size() > 20);
  for (const auto& p : pts) CHECK(std::abs(p.x.head(2).dot(ep.nu)) <= h);
}

TEST_CASE("thin density examples") {
  const Grid g(3, 65);
  const double h = g.spacing(0);
  // free boundary between two node columns: the disc splits evenly
  const Vec c = vec3(h / 2, 0, 0);
  const auto cs = coincidence_set(exact_solution_field(g, ExactKind::Regular32, centered(c)), 1e-12);
  CHECK(thin_density(cs, c, 0.3) == doctest::Approx(0.5).epsilon(0.1));

  const Grid g2(2, 129);
  const auto q = ScalarField::sample(g2, [](const Vec& x) { return x(0) * x(0) - x(1) * x(1); });
  const auto cq = coincidence_set(q, 1e-12);
  const double d = thin_density(cq, vec2(0, 0), 0.2);
  CHECK(d > 0.0);
  CHECK(d <= 0.05);
  CHECK(kind_of([&] { thin_density(cq, vec2(0, 0), 2.0 * g2.spacing(0)); }) == ErrorKind::RadiusBelowResolution);
  CHECK(kind_of([&] { thin_density(cq, vec2(0.9, 0), 0.2); }) == ErrorKind::OutOfDomain);
}

TEST_CASE("Almgren rescaling has unit boundary mass and keeps the frequency") {
  for (int n : {2, 3}) {
    const auto V = exact_field(n, ExactKind::Regular32, {});
    const Frame f = identity_frame(n, Vec::Zero(n));
    const auto rule = default_sphere_rule(n);
    for (double r : {0.1, 0.3}) {
      const auto W = almgren_rescale(V, f, r);
      double mass = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) mass += rule.weights[q] * std::pow(W->value(rule.nodes[q]), 2);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
      CHECK(almgren(*W, f, 0.5) == doctest::Approx(almgren(*V, f, 0.5 * r)).epsilon(1e-10));
    }
    // homogeneous input: the rescaling does not depend on r
    const auto a = almgren_rescale(V, f, 0.1);
    const auto b = almgren_rescale(V, f, 0.3);
    for (std::size_t q = 0; q < rule.size(); q += 7)
      CHECK(a->value(rule.nodes[q]) == doctest::Approx(b->value(rule.nodes[q])).epsilon(1e-10));
  }
  CHECK(kind_of([] { almgren_rescale(constant(2, 0.0), identity_frame(2, Vec::Zero(2)), 0.2); }) ==
        ErrorKind::VanishingBoundaryMass);
}

TEST_CASE("phi rescaling") {
  FunctionalConstants c;
  c.alpha = 0.5;
  c.b_override = 1.0;
  CHECK(phi_kappa(c, 1.0, 1.5) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
  c.b_override = 0.5;
  const auto v = exact_field(2, ExactKind::Regular32, {});
  const double t = 0.25;
  const auto w = phi_rescale(v, c, t, 1.5);
  // v(t y) = t^{3/2} v(y)
  const double gain = std::exp(1.5 * 0.5 * std::sqrt(t) / 0.5);
  for (const Vec& y : {vec2(0.3, 0.4), vec2(-0.2, 0.6), vec2(0.8, 0)})
    CHECK(w->value(y) == doctest::Approx(gain * v->value(y)).epsilon(1e-12));
  CHECK(kind_of([&] { phi_rescale(v, c, 4.0, 1.5); }) == ErrorKind::RadiusBeyondTruncationDomain);
}

TEST_CASE("regular blowup fit recovers amplitude and direction") {
  const Vec nu = vec2(std::cos(20 * kDeg), std::sin(20 * kDeg));
  const auto fit = fit_regular_blowup(*regular_model(nu, 2.0));
  CHECK(fit.amplitude == doctest::Approx(2.0).epsilon(0.02));
  CHECK(angle_between(fit.nu, nu) <= 2 * kDeg);
  CHECK(fit.residual <= 1e-2 * fit.field_norm);

  const auto noisy = fit_regular_blowup(*regular_model(nu, 2.0, 0.02));
  CHECK(angle_between(noisy.nu, nu) <= 5 * kDeg);

  Vec nu2(1);
  nu2 << -1.0;
  const auto f2 = fit_regular_blowup(*regular_model(nu2, 0.7));
  CHECK(f2.nu(0) == doctest::Approx(-1.0));
  CHECK(f2.amplitude == doctest::Approx(0.7).epsilon(0.02));

  CHECK(kind_of([] { fit_regular_blowup(*saddle(2, 0, 1)); }) == ErrorKind::DegenerateFit);
}

TEST_CASE("even monomials and harmonic basis") {
  CHECK(even_monomials(2, 2) == std::vector<std::array<int, 3>>{{2, 0, 0}, {0, 2, 0}});
  CHECK(even_monomials(3, 2).size() == 4);  // y1^2 y1y2 y2^2 y3^2
  for (int n : {2, 3})
    for (int d : {2, 4}) {
      const auto mons = even_monomials(n, d);
      const Eigen::MatrixXd B = even_harmonic_basis(n, d);
      REQUIRE(B.rows() == static_cast<Eigen::Index>(mons.size()));
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        // second differences of the polynomial at a random point sum to zero
        std::vector<double> coef(B.rows());
        for (Eigen::Index i = 0; i < B.rows(); ++i) coef[static_cast<std::size_t>(i)] = B(i, j);
        const Vec y = n == 2 ? vec2(0.3, -0.2) : vec3(0.3, -0.2, 0.45);
        const double e = 1e-3;
        double lap = 0.0;
        for (int k = 0; k < n; ++k) {
          Vec yp = y, ym = y;
          yp(k) += e;
          ym(k) -= e;
          lap += (eval_monomials(mons, coef, yp) - 2 * eval_monomials(mons, coef, y) + eval_monomials(mons, coef, ym)) / (e * e);
        }
        CHECK(std::abs(lap) <= 1e-5);
      }
    }
}

TEST_CASE("singular blowup fit") {
  const auto f2 = fit_singular_blowup(*saddle(2, 0, 1), 1);
  CHECK(f2.m == 1);
  CHECK(coefficient(f2, {2, 0, 0}) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(coefficient(f2, {0, 2, 0}) == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(f2.stratum_dim == 0);
  CHECK(f2.residual <= 1e-6 * f2.field_norm);

  const auto f3 = fit_singular_blowup(*saddle(3, 0, 2), 1);
  CHECK(f3.stratum_dim == 1);
  CHECK(coefficient(f3, {2, 0, 0}) == doctest::Approx(1.0).epsilon(0.02));

  // x1^2 + x2^2 - 2 x3^2 vanishes only at the origin of the thin plane
  const auto bowl = value_field(3, [](const Vec& y) { return y(0) * y(0) + y(1) * y(1) - 2 * y(2) * y(2); });
  CHECK(fit_singular_blowup(*bowl, 1).stratum_dim == 0);

  CHECK(kind_of([] { fit_singular_blowup(*constant(2, 0.0), 1); }) == ErrorKind::DegenerateFit);
  // x2^2 - x1^2 is negative on the thin plane
  CHECK(kind_of([] { fit_singular_blowup(*saddle(2, 1, 0), 1); }) == ErrorKind::NonnegativityViolated);
}

TEST_CASE("stratum dimension stays in range") {
  for (int n : {2, 3})
    for (int d : {2, 4}) {
      const auto mons = even_monomials(n, d);
      const Eigen::MatrixXd B = even_harmonic_basis(n, d);
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        std::vector<double> coef(B.rows());
        for (Eigen::Index i = 0; i < B.rows(); ++i) coef[static_cast<std::size_t>(i)] = B(i, j);
        const int s = stratum_dimension(n, mons, coef);
        CHECK(s >= 0);
        CHECK(s <= n - 2);
      }
    }
}

TEST_CASE("conormal normal") {
  const Vec nu = vec2(std::cos(20 * kDeg), std::sin(20 * kDeg));
  CHECK((conormal_normal(identity_frame(3, Vec::Zero(3)), nu) - nu).norm() <= 1e-14);
  Mat A = Mat::Identity(3, 3);
  A(0, 0) = 4;
  const Frame f = frame_from_matrix(A, Vec::Zero(3));
  CHECK((conormal_normal(f, vec2(1, 0)) - vec2(1, 0)).norm() <= 1e-14);
  // thin block diag(2, 1): inverse transpose scales the first entry by 1/2
  const Vec expect = vec2(nu(0) / 2, nu(1)).normalized();
  CHECK((conormal_normal(f, nu) - expect).norm() <= 1e-12);
}

TEST_CASE("classify a solved regular problem") {
  SignoriniProblem p;
  p.A = CoefficientField::identity(2);
  p.grid = Grid(2, 129);
  const auto exact = exact_field(2, ExactKind::Regular32, {});
  p.boundary_data = [exact](const Vec& x) { return exact->value(x); };
  SolverConfig sc;
  sc.tol = 1e-11;
  sc.relax = 0.0;
  sc.nested = true;
  const auto s = solve_psor(p, sc);
  const auto cs = coincidence_set(s);
  const auto pts = free_boundary(cs);
  REQUIRE(pts.size() == 1);
  CHECK(std::abs(pts[0].x(0)) <= 2 * p.grid.spacing(0));

  ClassifyConfig cfg;
  cfg.constants.M = 0.0;
  cfg.r_lo = 0.05;
  cfg.r_hi = 0.5;
  const auto U = std::make_shared<ScalarField>(s.U);
  const auto pc = classify(U, p.A, pts[0], cfg, &cs);
  CHECK(pc.verdict == Verdict::Regular);
  CHECK(pc.kappa == doctest::Approx(1.5).epsilon(0.05 / 1.5));
  REQUIRE(pc.nu.size() == 1);
  CHECK(pc.nu(0) == doctest::Approx(1.0));
  CHECK(pc.nu_A(0) == doctest::Approx(1.0));
  CHECK(pc.amplitude > 0.0);
}

TEST_CASE("classify a skewed quadratic as singular") {
  Mat A(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  ExactParams ep;
  ep.skew_A = A;
  ep.degree = 2;
  const auto q = exact_field(2, ExactKind::Polynomial, ep);
  ClassifyConfig cfg;
  cfg.constants.M = 0.0;
  cfg.r_lo = 0.05;
  cfg.r_hi = 0.4;
  const auto pc = classify(q, CoefficientField::constant(A), vec2(0, 0), cfg);
  CHECK(pc.verdict == Verdict::Singular);
  CHECK(pc.m == 1);
  CHECK(pc.stratum_dim == 0);
  CHECK(pc.kappa == doctest::Approx(2.0).epsilon(0.03));
  // in deskewed coordinates the field is y1^2 - y2^2 exactly
  SingularFit as_fit;
  as_fit.monomials = pc.monomials;
  as_fit.coefficients = pc.coefficients;
  CHECK(coefficient(as_fit, {2, 0, 0}) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(coefficient(as_fit, {0, 2, 0}) == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("classify inside the coincidence set is undetermined") {
  const auto U = exact_field(2, ExactKind::Regular32, {});
  ClassifyConfig cfg;
  cfg.constants.M = 0.0;
  cfg.r_lo = 0.05;
  cfg.r_hi = 0.3;
  const auto pc = classify(U, CoefficientField::identity(2), vec2(-0.5, 0), cfg);
  CHECK(pc.verdict == Verdict::Undetermined);
  CHECK_FALSE(pc.reason.empty());
  CHECK(to_string(pc.verdict) == "undetermined");
}

TEST_CASE("regular set graph") {
  // points on x1 = 0.1 + 0.2 x2 with the matching normal
  const Vec nu = vec2(1, -0.2);
  std::vector<PointClassification> pts;
  for (double s : {-0.4, -0.1, 0.2, 0.5}) pts.push_back(regular_point(vec3(0.1 + 0.2 * s, s, 0), nu));
  PointClassification other;
  other.x0 = vec3(0.9, 0.9, 0);
  other.verdict = Verdict::Singular;
  pts.push_back(other);
  const auto rep = regular_set_graph(pts);
  CHECK(rep.nu_A.size() == 4);
  CHECK(rep.max_residual <= 1e-12);
  REQUIRE(rep.coefficients.size() == 2);
  CHECK(rep.coefficients[0] == doctest::Approx(0.1 / nu.norm()).epsilon(1e-12));
  CHECK(std::abs(rep.coefficients[1]) <= 1e-12);
  CHECK(rep.holder_max <= 1e-14);
  // last row of the rotation is the mean normal
  CHECK((rep.rotation.row(1).transpose() - nu.normalized()).norm() <= 1e-14);

  // a bent set leaves a residual
  std::vector<PointClassification> bent;
  for (double s : {-0.4, -0.1, 0.2, 0.5}) bent.push_back(regular_point(vec3(s * s, s, 0), vec2(1, 0)));
  CHECK(regular_set_graph(bent).max_residual > 1e-2);

  pts.resize(2);
  CHECK(kind_of([&] { regular_set_graph(pts); }) == ErrorKind::TooFewPoints);
}

TEST_CASE("rotation diagnostics vanish for homogeneous solutions without gauge") {
  FunctionalConstants c;
  c.n = 2;
  c.a_override = 0.0;
  c.b_override = 0.0;
  const auto d = rotation_diagnostics(exact_field(2, ExactKind::Regular32, {}), c, {0.05, 0.1, 0.2}, 1.5);
  REQUIRE(d.size() == 2);
  for (double x : d) CHECK(x <= 1e-12);
  const auto e = rotation_diagnostics(exact_field(2, ExactKind::Regular32, {}), c, {0.05, 0.1}, 2.0);
  CHECK(e[0] > 1e-3);
}
