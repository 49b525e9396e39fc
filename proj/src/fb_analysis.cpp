#include "thinlab/fb_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/integrals.hpp"
#include "thinlab/symmetry.hpp"

namespace thinlab {

std::size_t CoincidenceSet::thin_position(const std::array<int, 3>& ijk) const {
  const int n = grid.dim();
  const auto m = static_cast<std::size_t>(grid.nodes_per_axis());
  std::size_t pos = 0;
  for (int k = 0; k < n - 1; ++k) pos = pos * m + static_cast<std::size_t>(ijk[static_cast<std::size_t>(k)]);
  return pos;
}

CoincidenceSet coincidence_set(const ScalarField& U, double eps) {
  CoincidenceSet cs;
  cs.grid = U.grid();
  cs.eps = eps;
  cs.nodes = cs.grid.thin_nodes();
  for (std::size_t p : cs.nodes) {
    cs.values.push_back(U[p]);
    const bool a = U[p] <= eps;
    cs.active.push_back(a ? 1 : 0);
    cs.active_count += a ? 1 : 0;
  }
  return cs;
}

CoincidenceSet coincidence_set(const Solution& sol, double factor) {
  const double scale = std::max(1.0, sol.U.max_abs());
  const double tol = sol.tol > 0.0 ? sol.tol : 1e-12;
  return coincidence_set(sol.U, factor * tol * scale);
}

std::vector<FreeBoundaryPoint> free_boundary(const CoincidenceSet& cs) {
  std::vector<FreeBoundaryPoint> out;
  const Grid& g = cs.grid;
  const int n = g.dim();
  const int m = g.nodes_per_axis();
  auto w = [&](std::size_t pos) { return std::pow(std::max(cs.values[pos], 0.0), 2.0 / 3.0); };
  for (std::size_t i = 0; i < cs.nodes.size(); ++i) {
    const auto ijk = g.multi_index(cs.nodes[i]);
    for (int k = 0; k < n - 1; ++k) {
      const auto K = static_cast<std::size_t>(k);
      if (ijk[K] + 1 >= m) continue;
      auto nb = ijk;
      nb[K] += 1;
      const std::size_t j = cs.thin_position(nb);
      if (cs.active[i] == cs.active[j]) continue;
      const std::size_t a = cs.active[i] ? i : j;
      const std::size_t b = cs.active[i] ? j : i;
      // next node beyond b, away from a
      const int dir = b == j ? 1 : -1;
      auto b2 = g.multi_index(cs.nodes[b]);
      b2[K] += dir;
      double lambda = 0.0;
      if (b2[K] >= 0 && b2[K] < m) {
        const std::size_t c = cs.thin_position(b2);
        const double slope = w(c) - w(b);
        if (!cs.active[c] && slope > 0.0) lambda = std::clamp(1.0 - w(b) / slope, 0.0, 1.0);
      }
      FreeBoundaryPoint pt;
      const Vec xa = g.node(cs.nodes[a]);
      const Vec xb = g.node(cs.nodes[b]);
      pt.x = xa + lambda * (xb - xa);
      pt.x(n - 1) = 0.0;
      pt.active_node = cs.nodes[a];
      pt.inactive_node = cs.nodes[b];
      out.push_back(pt);
    }
  }
  return out;
}

double thin_density(const CoincidenceSet& cs, const Vec& x0, double r) {
  const Grid& g = cs.grid;
  const int n = g.dim();
  if (r < 3.0 * g.spacing(0)) throw Error(ErrorKind::RadiusBelowResolution, "thin_density: r < 3h");
  for (int k = 0; k < n - 1; ++k)
    if (x0(k) - r < g.lower(k) - 1e-12 || x0(k) + r > g.upper(k) + 1e-12)
      throw Error(ErrorKind::OutOfDomain, "thin_density: thin ball leaves the grid");
  int total = 0, act = 0;
  for (std::size_t i = 0; i < cs.nodes.size(); ++i) {
    const Vec x = g.node(cs.nodes[i]);
    double d2 = 0.0;
    for (int k = 0; k < n - 1; ++k) d2 += (x(k) - x0(k)) * (x(k) - x0(k));
    if (d2 >= r * r) continue;
    ++total;
    act += cs.active[i] ? 1 : 0;
  }
  return total > 0 ? static_cast<double>(act) / total : 0.0;
}

double DeskewedField::value(const Vec& y) const {
  Vec x = frame_.from_deskewed(y);
  if (y(dim() - 1) == 0.0) x(dim() - 1) = 0.0;
  return U_->value(x);
}

Vec DeskewedField::gradient(const Vec& y, Side side) const {
  Vec x = frame_.from_deskewed(y);
  if (y(dim() - 1) == 0.0) x(dim() - 1) = 0.0;
  return frame_.abar.transpose() * U_->gradient(x, side_of(y(dim() - 1), side));
}

Box RescaledField::domain() const {
  Box b = V_->domain();
  for (int k = 0; k < dim(); ++k) {
    b.lo(k) = (b.lo(k) - x0_(k)) / r_;
    b.hi(k) = (b.hi(k) - x0_(k)) / r_;
  }
  return b;
}

std::shared_ptr<RescaledField> almgren_rescale(FieldPtr V, const Frame& frame, double r) {
  const int n = frame.dim();
  const double H = ellipsoid_boundary_mass(*V, frame, r);
  if (!(H > 0.0)) throw Error(ErrorKind::VanishingBoundaryMass, "almgren_rescale: boundary mass vanishes");
  const double norm = std::sqrt(std::pow(r, 1 - n) * H);
  auto out = std::make_shared<RescaledField>(V, frame.x0, r, norm);
  Frame origin = frame;
  origin.x0 = Vec::Zero(n);
  const double check = ellipsoid_boundary_mass(*out, origin, 1.0);
  if (std::abs(check - 1.0) > 1e-3)
    throw Error(ErrorKind::VanishingBoundaryMass, "almgren_rescale: normalization check failed");
  return out;
}

double phi_kappa(const FunctionalConstants& c, double t, double kappa) {
  return std::exp(-(kappa * c.b() / c.alpha) * std::pow(t, c.alpha)) * std::pow(t, kappa);
}

std::shared_ptr<RescaledField> phi_rescale(FieldPtr ustar, const FunctionalConstants& c, double t, double kappa) {
  if (!(t > 0.0) || !(1.0 - c.b() * std::pow(t, c.alpha) > 0.0))
    throw Error(ErrorKind::RadiusBeyondTruncationDomain, "phi_rescale: t outside the truncation domain");
  const double phi = phi_kappa(c, t, kappa);
  const double dev = std::abs(phi / std::pow(t, kappa) - 1.0);
  if (dev > 1.1 * kappa * c.b() * std::pow(t, c.alpha) / c.alpha + 1e-15)
    throw Error(ErrorKind::InvalidArgument, "phi_rescale: phi(t)/t^kappa bound violated");
  const int n = ustar->dim();
  return std::make_shared<RescaledField>(std::move(ustar), Vec(Vec::Zero(n)), t, phi);
}

namespace {

struct SphereSamples {
  std::vector<double> f;
  double norm2 = 0.0;
};

SphereSamples sample_sphere(const Field& f, const QuadratureRule& rule) {
  SphereSamples s;
  s.f.resize(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    s.f[i] = f.value(rule.nodes[i]);
    s.norm2 += rule.weights[i] * s.f[i] * s.f[i];
  }
  return s;
}

struct RegularTrial {
  double amplitude = 0.0;
  double resid2 = 0.0;
};

RegularTrial regular_trial(const SphereSamples& s, const QuadratureRule& rule, const Vec& nu) {
  double fm = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double mv = model_value(ExactKind::Regular32, nu, 0, rule.nodes[i]);
    fm += rule.weights[i] * s.f[i] * mv;
    mm += rule.weights[i] * mv * mv;
  }
  RegularTrial t;
  t.amplitude = mm > 0.0 ? std::max(0.0, fm / mm) : 0.0;
  t.resid2 = std::max(0.0, s.norm2 - 2.0 * t.amplitude * fm + t.amplitude * t.amplitude * mm);
  return t;
}

Vec angle_nu(double th) {
  Vec v(2);
  v << std::cos(th), std::sin(th);
  return v;
}

}  // namespace

RegularFit fit_regular_blowup(const Field& f, const QuadratureRule& sphere) {
  const int n = f.dim();
  const SphereSamples s = sample_sphere(f, sphere);
  RegularFit fit;
  fit.field_norm = std::sqrt(s.norm2);
  if (!(fit.field_norm > 0.0)) throw Error(ErrorKind::DegenerateFit, "fit_regular_blowup: zero field");
  RegularTrial best;
  best.resid2 = std::numeric_limits<double>::infinity();
  if (n == 2) {
    for (double sgn : {1.0, -1.0}) {
      Vec nu(1);
      nu << sgn;
      const RegularTrial t = regular_trial(s, sphere, nu);
      if (t.resid2 < best.resid2) {
        best = t;
        fit.nu = nu;
      }
    }
  } else {
    const double step = 2.0 * std::numbers::pi / 180.0;
    double th_best = 0.0;
    for (int i = 0; i < 180; ++i) {
      const RegularTrial t = regular_trial(s, sphere, angle_nu(i * step));
      if (t.resid2 < best.resid2) {
        best = t;
        th_best = i * step;
      }
    }
    // golden-section refinement on [th - step, th + step]
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = th_best - step, hi = th_best + step;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = regular_trial(s, sphere, angle_nu(x1)).resid2;
    double f2 = regular_trial(s, sphere, angle_nu(x2)).resid2;
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = regular_trial(s, sphere, angle_nu(x1)).resid2;
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = regular_trial(s, sphere, angle_nu(x2)).resid2;
      }
    }
    const double th = 0.5 * (lo + hi);
    const RegularTrial t = regular_trial(s, sphere, angle_nu(th));
    if (t.resid2 <= best.resid2) {
      best = t;
      th_best = th;
    }
    fit.nu = angle_nu(th_best);
  }
  fit.amplitude = best.amplitude;
  fit.residual = std::sqrt(best.resid2);
  if (!(fit.amplitude > 0.0) || fit.residual > 0.5 * fit.field_norm)
    throw Error(ErrorKind::DegenerateFit, "fit_regular_blowup: model does not explain the field");
  return fit;
}

RegularFit fit_regular_blowup(const Field& f) { return fit_regular_blowup(f, default_sphere_rule(f.dim())); }

std::vector<std::array<int, 3>> even_monomials(int n, int degree) {
  std::vector<std::array<int, 3>> out;
  if (n == 2) {
    for (int b1 = degree; b1 >= 0; --b1)
      if ((degree - b1) % 2 == 0) out.push_back({b1, degree - b1, 0});
  } else {
    for (int b1 = degree; b1 >= 0; --b1)
      for (int b2 = degree - b1; b2 >= 0; --b2)
        if ((degree - b1 - b2) % 2 == 0) out.push_back({b1, b2, degree - b1 - b2});
  }
  return out;
}

Eigen::MatrixXd even_harmonic_basis(int n, int degree) {
  const auto src = even_monomials(n, degree);
  if (degree < 2) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(src.size()));
  const auto dst = even_monomials(n, degree - 2);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()), static_cast<Eigen::Index>(src.size()));
  for (std::size_t j = 0; j < src.size(); ++j)
    for (int k = 0; k < n; ++k) {
      const auto K = static_cast<std::size_t>(k);
      const int bk = src[j][K];
      if (bk < 2) continue;
      auto t = src[j];
      t[K] -= 2;
      const auto it = std::find(dst.begin(), dst.end(), t);
      L(it - dst.begin(), static_cast<Eigen::Index>(j)) += bk * (bk - 1);
    }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 1.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * smax) ++rank;
  return svd.matrixV().rightCols(L.cols() - rank);
}

double eval_monomials(const std::vector<std::array<int, 3>>& mons, const std::vector<double>& coef, const Vec& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < mons.size(); ++j) {
    double t = coef[j];
    for (int k = 0; k < y.size(); ++k) t *= std::pow(y(k), mons[j][static_cast<std::size_t>(k)]);
    s += t;
  }
  return s;
}

int stratum_dimension(int n, const std::vector<std::array<int, 3>>& mons, const std::vector<double>& coef, double tol) {
  // rows: thin monomials of q(y', 0) after one derivative, columns: thin directions
  std::vector<std::array<int, 3>> rows;
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(n - 1));
  auto row_of = [&](const std::array<int, 3>& e) {
    auto it = std::find(rows.begin(), rows.end(), e);
    if (it != rows.end()) return static_cast<std::size_t>(it - rows.begin());
    rows.push_back(e);
    for (auto& c : cols) c.push_back(0.0);
    return rows.size() - 1;
  };
  for (std::size_t j = 0; j < mons.size(); ++j) {
    if (mons[j][static_cast<std::size_t>(n - 1)] != 0) continue;  // vanishes on the plane
    for (int i = 0; i < n - 1; ++i) {
      const auto I = static_cast<std::size_t>(i);
      if (mons[j][I] == 0) continue;
      auto e = mons[j];
      e[I] -= 1;
      const std::size_t r = row_of(e);
      cols[I][r] += coef[j] * mons[j][I];
    }
  }
  if (rows.empty()) return n - 1;
  Eigen::MatrixXd G(static_cast<Eigen::Index>(rows.size()), n - 1);
  for (int i = 0; i < n - 1; ++i)
    for (std::size_t r = 0; r < rows.size(); ++r) G(static_cast<Eigen::Index>(r), i) = cols[static_cast<std::size_t>(i)][r];
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (!(smax > 0.0)) return n - 1;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) >= tol * smax) ++rank;
  return (n - 1) - rank;
}

SingularFit fit_singular_blowup(const Field& f, int m, const QuadratureRule& sphere, double stratum_tol,
                                double nonneg_tol) {
  const int n = f.dim();
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "fit_singular_blowup: m must be >= 1");
  SingularFit fit;
  fit.m = m;
  fit.monomials = even_monomials(n, 2 * m);
  const Eigen::MatrixXd B = even_harmonic_basis(n, 2 * m);
  const SphereSamples s = sample_sphere(f, sphere);
  fit.field_norm = std::sqrt(s.norm2);
  if (!(fit.field_norm > 0.0)) throw Error(ErrorKind::DegenerateFit, "fit_singular_blowup: zero field");
  const auto Q = static_cast<Eigen::Index>(sphere.size());
  const auto nm = static_cast<Eigen::Index>(fit.monomials.size());
  Eigen::MatrixXd Mon(Q, nm);
  Eigen::VectorXd rhs(Q), sw(Q);
  for (Eigen::Index i = 0; i < Q; ++i) {
    const Vec& y = sphere.nodes[static_cast<std::size_t>(i)];
    sw(i) = std::sqrt(sphere.weights[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < nm; ++j) {
      double t = 1.0;
      for (int k = 0; k < n; ++k) t *= std::pow(y(k), fit.monomials[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
      Mon(i, j) = t;
    }
    rhs(i) = sw(i) * s.f[static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd Phi = sw.asDiagonal() * (Mon * B);
  const Eigen::VectorXd t = Phi.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd c = B * t;
  fit.coefficients.assign(c.data(), c.data() + c.size());
  fit.residual = (Phi * t - rhs).norm();
  if (fit.residual > 0.5 * fit.field_norm)
    throw Error(ErrorKind::DegenerateFit, "fit_singular_blowup: model does not explain the field");
  // nonnegativity on the thin unit sphere
  double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
  const int samples = n == 2 ? 2 : 360;
  for (int i = 0; i < samples; ++i) {
    Vec y = Vec::Zero(n);
    if (n == 2) {
      y(0) = i == 0 ? 1.0 : -1.0;
    } else {
      const double th = 2.0 * std::numbers::pi * i / samples;
      y(0) = std::cos(th);
      y(1) = std::sin(th);
    }
    const double q = eval_monomials(fit.monomials, fit.coefficients, y);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, std::abs(q));
  }
  fit.min_on_plane = qmin;
  if (qmin < -nonneg_tol * std::max(qmax, fit.field_norm))
    throw Error(ErrorKind::NonnegativityViolated, "fit_singular_blowup: fitted q is negative on the thin plane");
  fit.stratum_dim = stratum_dimension(n, fit.monomials, fit.coefficients, stratum_tol);
  if (fit.stratum_dim < 0 || fit.stratum_dim > n - 2)
    throw Error(ErrorKind::DegenerateFit, "fit_singular_blowup: stratum dimension out of range");
  return fit;
}

SingularFit fit_singular_blowup(const Field& f, int m) { return fit_singular_blowup(f, m, default_sphere_rule(f.dim())); }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Regular: return "regular";
    case Verdict::Singular: return "singular";
    case Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

Vec conormal_normal(const Frame& frame, const Vec& nu) {
  const Vec v = frame.thin_block_inv().transpose() * nu;
  const double len = v.norm();
  if (!(len > 0.0)) throw Error(ErrorKind::ZeroVector, "conormal_normal: zero vector");
  return v / len;
}

PointClassification classify(FieldPtr U, const CoefficientField& A, const Vec& x0_in, const ClassifyConfig& cfg,
                             const CoincidenceSet* cs) {
  PointClassification out;
  Vec x0 = x0_in;
  x0(x0.size() - 1) = 0.0;
  out.x0 = x0;
  const Frame frame = deskew_frame(A, x0);
  const SymmetrizedPair pair = symmetrize(U, frame);
  const FunctionalConstants c = cfg.constants.with_kappa(1.5);
  try {
    out.profile = profile(*pair.even, frame, c, cfg.r_lo, cfg.r_hi, cfg.count, cfg.field_scale);
    const FrequencyEstimate est = frequency_at_point(out.profile->frequency);
    out.kappa = est.kappa;
    out.confidence = est.confidence;
    out.profile->frequency.kappa_extrapolated = est.kappa;
  } catch (const Error& e) {
    out.reason = e.what();
    return out;
  }
  if (out.kappa < cfg.min_kappa) {
    out.reason = "below minimal frequency (numerical artifact)";
    return out;
  }
  const double t = out.profile->frequency.radii.front();
  out.fit_t = t;
  const FieldPtr deskewed = std::make_shared<DeskewedField>(pair.even, frame);
  if (std::abs(out.kappa - 1.5) <= cfg.band) {
    try {
      const auto resc = phi_rescale(deskewed, c, t, 1.5);
      const RegularFit fit = fit_regular_blowup(*resc);
      out.verdict = Verdict::Regular;
      out.amplitude = fit.amplitude;
      out.nu = fit.nu;
      out.nu_A = conormal_normal(frame, fit.nu);
      out.fit_residual = fit.residual / fit.field_norm;
    } catch (const Error& e) {
      out.reason = e.what();
    }
    return out;
  }
  const int m = static_cast<int>(std::lround(out.kappa / 2.0));
  if (m >= 1 && std::abs(out.kappa - 2.0 * m) <= cfg.band) {
    try {
      const auto resc = phi_rescale(deskewed, c, t, 2.0 * m);
      const SingularFit fit = fit_singular_blowup(*resc, m, default_sphere_rule(frame.dim()), cfg.stratum_tol);
      out.m = m;
      out.monomials = fit.monomials;
      out.coefficients = fit.coefficients;
      out.stratum_dim = fit.stratum_dim;
      out.fit_residual = fit.residual / fit.field_norm;
      if (cs) {
        out.density = thin_density(*cs, x0, std::max(t, 3.0 * cs->grid.spacing(0)));
        if (*out.density > cfg.density_max) {
          out.reason = "coincidence set too dense for a singular point";
          return out;
        }
      }
      out.verdict = Verdict::Singular;
    } catch (const Error& e) {
      out.reason = e.what();
    }
    return out;
  }
  out.reason = "frequency outside the classification bands";
  return out;
}

PointClassification classify(FieldPtr U, const CoefficientField& A, const FreeBoundaryPoint& pt,
                             const ClassifyConfig& config, const CoincidenceSet* cs) {
  return classify(std::move(U), A, pt.x, config, cs);
}

RegularGraphReport regular_set_graph(const std::vector<PointClassification>& points, double gamma) {
  std::vector<const PointClassification*> reg;
  for (const auto& p : points)
    if (p.verdict == Verdict::Regular) reg.push_back(&p);
  if (reg.size() < 3) throw Error(ErrorKind::TooFewPoints, "regular_set_graph: fewer than 3 regular points");
  const int n = static_cast<int>(reg.front()->x0.size());
  const int d = n - 1;
  RegularGraphReport rep;
  rep.gamma = gamma;
  Vec mean = Vec::Zero(d);
  for (const auto* p : reg) {
    rep.nu_A.push_back(p->nu_A);
    mean += p->nu_A;
  }
  if (!(mean.norm() > 0.0)) throw Error(ErrorKind::DegenerateFit, "regular_set_graph: normals cancel");
  mean /= mean.norm();
  // rotation whose last row is the mean normal
  Mat R(d, d);
  if (d == 1) {
    R(0, 0) = mean(0);
  } else {
    R(0, 0) = -mean(1);
    R(0, 1) = mean(0);
    R(1, 0) = mean(0);
    R(1, 1) = mean(1);
  }
  rep.rotation = R;
  const auto k = static_cast<Eigen::Index>(reg.size());
  Eigen::MatrixXd X(k, d);
  Eigen::VectorXd w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Vec xt = reg[static_cast<std::size_t>(i)]->x0.head(d);
    const Vec z = R * xt;
    X(i, 0) = 1.0;
    for (int j = 0; j + 1 < d; ++j) X(i, j + 1) = z(j);
    w(i) = z(d - 1);
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(w);
  rep.coefficients.assign(beta.data(), beta.data() + beta.size());
  const Eigen::VectorXd res = X * beta - w;
  for (Eigen::Index i = 0; i < k; ++i) {
    rep.residuals.push_back(res(i));
    rep.max_residual = std::max(rep.max_residual, std::abs(res(i)));
  }
  for (std::size_t i = 0; i < reg.size(); ++i)
    for (std::size_t j = i + 1; j < reg.size(); ++j) {
      const double dist = (reg[i]->x0 - reg[j]->x0).norm();
      if (dist <= 0.0) continue;
      rep.holder_max = std::max(rep.holder_max, (reg[i]->nu_A - reg[j]->nu_A).norm() / std::pow(dist, gamma));
    }
  return rep;
}

std::vector<double> rotation_diagnostics(FieldPtr ustar, const FunctionalConstants& c, const std::vector<double>& ts,
                                         double kappa) {
  std::vector<double> out;
  const QuadratureRule& rule = default_sphere_rule(ustar->dim());
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const auto a = phi_rescale(ustar, c, ts[i - 1], kappa);
    const auto b = phi_rescale(ustar, c, ts[i], kappa);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * std::abs(a->value(rule.nodes[q]) - b->value(rule.nodes[q]));
    out.push_back(s);
  }
  return out;
}

}  // namespace thinlab
