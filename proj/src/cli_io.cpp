#include "thinlab/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/integrals.hpp"
#include "thinlab/symmetry.hpp"

namespace thinlab {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "problem.n", "problem.m", "problem.lo", "problem.hi",
      "coeff.preset", "coeff.matrix", "coeff.alpha", "coeff.eps", "coeff.offdiag", "coeff.seed",
      "drift.b", "drift.p",
      "bc.kind", "bc.exact", "bc.nu", "bc.amplitude", "bc.center", "bc.degree", "bc.shift", "bc.skew",
      "bc.k", "bc.phase", "bc.offset", "bc.value",
      "solver.tol", "solver.max_iter", "solver.relax", "solver.nested",
      "analysis.kappa0", "analysis.gauge_M", "analysis.a", "analysis.b", "analysis.band", "analysis.min_kappa",
      "analysis.r_lo", "analysis.r_hi", "analysis.count", "analysis.density_max", "analysis.margin",
      "analysis.max_points", "analysis.eps_factor", "analysis.stratum_tol",
      "audit.samples", "audit.seed", "audit.radii", "audit.x0", "audit.tol", "audit.ratio_slack",
      "output.dir", "seed"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, "key '" + key + "': not a number: '" + v + "'");
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Config, "cannot read config " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse(os.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  const double d = get_double(key, fallback);
  if (d != std::floor(d)) throw Error(ErrorKind::Config, "key '" + key + "': expected an integer");
  return static_cast<int>(d);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::Config, "key '" + key + "': expected a boolean");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? std::vector<double>{} : parse_list(it->second);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double("list", trim(item)));
  return out;
}

Vec parse_vec(const std::string& s, int n) {
  const auto v = parse_list(s);
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorKind::Config, "expected " + std::to_string(n) + " components in '" + s + "'");
  Vec out(n);
  for (int k = 0; k < n; ++k) out(k) = v[static_cast<std::size_t>(k)];
  return out;
}

void RunConfig::validate() const {
  const int n = get_int("problem.n", 2);
  if (n != 2 && n != 3) throw Error(ErrorKind::Config, "problem.n must be 2 or 3");
  const int m = get_int("problem.m", 65);
  if (m < 3 || m % 2 == 0) throw Error(ErrorKind::Config, "problem.m must be odd and >= 3");
  const std::string preset = get("coeff.preset", "identity");
  static const std::set<std::string> presets = {"identity", "constant", "lipschitz", "holder", "full"};
  if (!presets.count(preset)) throw Error(ErrorKind::Config, "unknown coefficient preset '" + preset + "'");
  const std::string bc = get("bc.kind", "exact");
  if (bc != "exact" && bc != "cosine" && bc != "constant")
    throw Error(ErrorKind::Config, "unknown boundary data kind '" + bc + "'");
  if (bc == "exact") {
    try {
      exact_kind_from_string(get("bc.exact", "regular"));
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, e.what());
    }
  }
  if (get_double("analysis.kappa0", 4.0) < 2.0) throw Error(ErrorKind::Config, "analysis.kappa0 must be >= 2");
  if (has("drift.b") && !(get_double("drift.p", 0.0) > n))
    throw Error(ErrorKind::Config, "drift.p must exceed n");
}

CoefficientField coefficient_from_config(const RunConfig& cfg) {
  cfg.validate();
  const int n = cfg.get_int("problem.n", 2);
  const std::string preset = cfg.get("coeff.preset", "identity");
  const double alpha = cfg.get_double("coeff.alpha", 0.5);
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("coeff.seed", cfg.get_int("seed", 1)));
  if (preset == "identity") return CoefficientField::identity(n);
  if (preset == "lipschitz") return CoefficientField::lipschitz_example(n);
  if (preset == "holder") return CoefficientField::holder(n, alpha, cfg.get_double("coeff.eps", 0.05), seed);
  if (preset == "full")
    return CoefficientField::full(n, alpha, cfg.get_double("coeff.offdiag", 0.3), cfg.get_double("coeff.eps", 0.05), seed);
  const auto v = cfg.get_list("coeff.matrix");
  if (static_cast<int>(v.size()) != n * n) throw Error(ErrorKind::Config, "coeff.matrix needs n*n entries");
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = v[static_cast<std::size_t>(i * n + j)];
  try {
    return CoefficientField::constant(A, alpha);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

namespace {

std::function<double(const Vec&)> boundary_from_config(const RunConfig& cfg, const CoefficientField& A) {
  const int n = cfg.get_int("problem.n", 2);
  const std::string kind = cfg.get("bc.kind", "exact");
  if (kind == "constant") {
    const double v = cfg.get_double("bc.value", 0.0);
    return [v](const Vec&) { return v; };
  }
  if (kind == "cosine") {
    const double k = cfg.get_double("bc.k", 2.0 * std::numbers::pi);
    const double ph = cfg.get_double("bc.phase", 0.0);
    const double amp = cfg.get_double("bc.amplitude", 1.0);
    const double off = cfg.get_double("bc.offset", 0.0);
    return [=](const Vec& x) {
      return amp * std::cos(k * x(0) + ph) * std::cosh(k * x(n - 1)) / std::cosh(k) + off;
    };
  }
  ExactParams ep;
  if (cfg.has("bc.nu")) ep.nu = parse_vec(cfg.get("bc.nu", ""), n - 1);
  ep.amplitude = cfg.get_double("bc.amplitude", 1.0);
  if (cfg.has("bc.center")) ep.center = parse_vec(cfg.get("bc.center", ""), n);
  ep.degree = cfg.get_int("bc.degree", 2);
  if (cfg.get_bool("bc.skew", false)) ep.skew_A = A(Vec::Zero(n));
  std::shared_ptr<AnalyticField> f;
  try {
    f = exact_field(n, exact_kind_from_string(cfg.get("bc.exact", "regular")), ep);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  const double shift = cfg.get_double("bc.shift", 0.0);
  return [f, shift](const Vec& x) { return f->value(x) - shift; };
}

}  // namespace

SignoriniProblem problem_from_config(const RunConfig& cfg) {
  cfg.validate();
  const int n = cfg.get_int("problem.n", 2);
  SignoriniProblem p;
  p.A = coefficient_from_config(cfg);
  p.grid = Grid(n, cfg.get_int("problem.m", 65), cfg.get_double("problem.lo", -1.0), cfg.get_double("problem.hi", 1.0));
  p.boundary_data = boundary_from_config(cfg, p.A);
  if (cfg.has("drift.b")) {
    const Vec b = parse_vec(cfg.get("drift.b", ""), n);
    p.drift = Drift{[b](const Vec&) { return b; }, cfg.get_double("drift.p", 0.0)};
  }
  return p;
}

SolverConfig solver_from_config(const RunConfig& cfg) {
  SolverConfig s;
  s.tol = cfg.get_double("solver.tol", s.tol);
  s.max_iter = cfg.get_int("solver.max_iter", s.max_iter);
  s.relax = cfg.get_double("solver.relax", s.relax);
  s.nested = cfg.get_bool("solver.nested", s.nested);
  if (!(s.tol > 0.0) || s.max_iter < 1) throw Error(ErrorKind::Config, "solver.tol and solver.max_iter must be positive");
  if (s.relax >= 2.0) throw Error(ErrorKind::Config, "solver.relax must be below 2");
  return s;
}

ClassifyConfig classify_from_config(const RunConfig& cfg, int n, double field_scale) {
  ClassifyConfig c;
  c.constants.n = n;
  c.constants.kappa0 = cfg.get_double("analysis.kappa0", 4.0);
  c.constants.alpha = cfg.get_double("coeff.alpha", 0.5);
  const CoefficientField A = coefficient_from_config(cfg);
  c.constants.M = cfg.get_double("analysis.gauge_M", A.M);
  if (cfg.has("analysis.a")) c.constants.a_override = cfg.get_double("analysis.a", 0.0);
  if (cfg.has("analysis.b")) c.constants.b_override = cfg.get_double("analysis.b", 0.0);
  c.band = cfg.get_double("analysis.band", c.band);
  c.min_kappa = cfg.get_double("analysis.min_kappa", c.min_kappa);
  c.r_lo = cfg.get_double("analysis.r_lo", c.r_lo);
  c.r_hi = cfg.get_double("analysis.r_hi", c.r_hi);
  c.count = cfg.get_int("analysis.count", c.count);
  c.density_max = cfg.get_double("analysis.density_max", c.density_max);
  c.stratum_tol = cfg.get_double("analysis.stratum_tol", c.stratum_tol);
  c.field_scale = field_scale;
  try {
    c.constants.with_kappa(1.5).validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  return c;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

Json solution_json(const Solution& sol, bool include_thin) {
  Json j;
  j["iterations"] = sol.iterations;
  j["final_update"] = sol.final_update;
  j["converged"] = sol.converged;
  j["m_matrix"] = sol.m_matrix;
  j["warnings"] = sol.warnings;
  const auto& c = sol.complementarity;
  int active = 0;
  for (const auto& e : c.thin) active += e.active ? 1 : 0;
  j["complementarity"] = {{"satisfied", c.satisfied(sol.tol)},
                          {"max_free_residual", c.max_free_residual},
                          {"min_active_residual", c.min_active_residual},
                          {"max_product", c.max_product},
                          {"thin_nodes", c.thin.size()},
                          {"active_nodes", active},
                          {"all_thin_active", !c.thin.empty() && active == static_cast<int>(c.thin.size())}};
  if (include_thin) {
    Json t = Json::array();
    for (const auto& e : c.thin)
      t.push_back({{"node", e.node}, {"U", e.value}, {"J", e.flux_jump}, {"UJ", e.value * e.flux_jump}, {"active", e.active}});
    j["complementarity"]["thin"] = t;
  }
  return j;
}

Json classification_json(const PointClassification& pc) {
  Json j;
  j["x0"] = to_json(pc.x0);
  j["kappa"] = pc.kappa;
  j["confidence"] = pc.confidence;
  j["verdict"] = to_string(pc.verdict);
  if (!pc.reason.empty()) j["reason"] = pc.reason;
  Json params = Json::object();
  if (pc.verdict == Verdict::Regular) {
    params["amplitude"] = pc.amplitude;
    params["nu"] = to_json(pc.nu);
    params["nu_A"] = to_json(pc.nu_A);
  } else if (pc.verdict == Verdict::Singular) {
    params["m"] = pc.m;
    Json mons = Json::array();
    for (const auto& e : pc.monomials) mons.push_back({e[0], e[1], e[2]});
    params["monomials"] = mons;
    params["coefficients"] = pc.coefficients;
    params["stratum_dim"] = pc.stratum_dim;
  }
  j["params"] = params;
  j["residuals"] = {{"fit", pc.fit_residual}};
  j["fit_t"] = pc.fit_t;
  if (pc.density) j["density"] = *pc.density;
  else j["density"] = nullptr;
  if (pc.profile) {
    const auto mono = audit_monotonicity(pc.profile->frequency.Nhat);
    double wmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pc.profile->weiss.W.size(); ++i)
      if (pc.profile->weiss.scale[i] > 0.0) wmin = std::min(wmin, pc.profile->weiss.W[i] / pc.profile->weiss.scale[i]);
    j["trusted_window"] = {pc.profile->frequency.r_lo, pc.profile->frequency.r_hi};
    j["monotonicity"] = {{"steps", mono.steps}, {"violations", mono.violations}, {"worst_drop", mono.worst_drop}};
    j["weiss_min_relative"] = std::isfinite(wmin) ? Json(wmin) : Json(nullptr);
  }
  return j;
}

ClassifyRun run_classify(const ScalarField& U, const RunConfig& cfg) {
  cfg.validate();
  ClassifyRun run;
  const int n = U.dim();
  const double scale = std::max(1.0, U.max_abs());
  const double eps = cfg.get_double("analysis.eps_factor", 10.0) * cfg.get_double("solver.tol", 1e-10) * scale;
  const CoincidenceSet cs = coincidence_set(U, eps);
  const auto fb = free_boundary(cs);
  const double margin = cfg.get_double("analysis.margin", 0.15);
  const Box box = U.domain();
  std::vector<FreeBoundaryPoint> pts;
  for (const auto& p : fb) {
    bool ok = true;
    for (int k = 0; k < n - 1; ++k) ok = ok && p.x(k) - box.lo(k) >= margin && box.hi(k) - p.x(k) >= margin;
    if (ok) pts.push_back(p);
  }
  const int max_points = cfg.get_int("analysis.max_points", 0);
  if (max_points > 0 && static_cast<int>(pts.size()) > max_points) {
    std::vector<FreeBoundaryPoint> picked;
    for (int i = 0; i < max_points; ++i)
      picked.push_back(pts[static_cast<std::size_t>(i) * pts.size() / static_cast<std::size_t>(max_points)]);
    pts = std::move(picked);
  }
  const CoefficientField A = coefficient_from_config(cfg);
  const ClassifyConfig cc = classify_from_config(cfg, n, U.max_abs());
  const auto field = std::make_shared<ScalarField>(U);

  Json points = Json::array();
  std::vector<PointClassification> all;
  int regular = 0, singular = 0, undetermined = 0, in_gap = 0, violations = 0;
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    PointClassification pc = classify(field, A, pts[i], cc, &cs);
    Json pj = classification_json(pc);
    if (pc.profile) {
      const std::string name = "profile_" + std::to_string(i) + ".csv";
      run.csv_files.emplace_back(name, profile_csv(*pc.profile));
      pj["profile_csv_path"] = name;
      violations += audit_monotonicity(pc.profile->frequency.Nhat).violations;
      for (std::size_t r = 0; r < pc.profile->weiss.W.size(); ++r)
        if (pc.profile->weiss.scale[r] > 0.0) wmin = std::min(wmin, pc.profile->weiss.W[r] / pc.profile->weiss.scale[r]);
    } else {
      pj["profile_csv_path"] = nullptr;
    }
    if (pc.kappa > 1.65 && pc.kappa < 1.85) ++in_gap;
    switch (pc.verdict) {
      case Verdict::Regular: ++regular; break;
      case Verdict::Singular: ++singular; break;
      case Verdict::Undetermined: ++undetermined; break;
    }
    points.push_back(pj);
    all.push_back(std::move(pc));
  }
  Json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["command"] = "classify";
  rep["coincidence"] = {{"eps", eps}, {"active_count", cs.active_count}, {"thin_nodes", cs.nodes.size()}};
  rep["free_boundary_points"] = fb.size();
  rep["sampled_points"] = pts.size();
  rep["summary"] = {{"regular", regular},
                    {"singular", singular},
                    {"undetermined", undetermined},
                    {"kappa_in_gap", in_gap},
                    {"monotonicity_violations", violations},
                    {"weiss_min_relative", std::isfinite(wmin) ? Json(wmin) : Json(nullptr)}};
  rep["points"] = points;
  if (n == 3 && regular >= 3) {
    RegularGraphReport g;
    try {
      g = regular_set_graph(all);
    } catch (const Error& e) {
      rep["regular_graph"] = {{"error", e.what()}};
      run.report = rep;
      return run;
    }
    Json nus = Json::array();
    for (const auto& v : g.nu_A) nus.push_back(to_json(v));
    rep["regular_graph"] = {{"coefficients", g.coefficients}, {"max_residual", g.max_residual}, {"nu_A", nus},
                            {"gamma", g.gamma}, {"holder_max", g.holder_max}};
  }
  return run.report = rep, run;
}

CoefficientField coefficients_for(const ScalarField& U, const RunConfig& cfg) {
  if (cfg.has("coeff.preset") || cfg.has("coeff.matrix")) {
    if (cfg.get_int("problem.n", U.dim()) != U.dim())
      throw Error(ErrorKind::Config, "problem.n does not match the field dimension");
    return coefficient_from_config(cfg);
  }
  return CoefficientField::identity(U.dim());
}

FrequencyRun run_frequency(const ScalarField& U, RunConfig cfg, const Vec& x0) {
  const int n = U.dim();
  if (!cfg.has("problem.n")) cfg.set("problem.n", std::to_string(n));
  if (!cfg.has("analysis.gauge_M")) cfg.set("analysis.gauge_M", "0");
  cfg.validate();
  if (x0.size() != n || x0(n - 1) != 0.0) throw Error(ErrorKind::Config, "frequency point must lie on the thin plane");
  const CoefficientField A = coefficients_for(U, cfg);
  const ClassifyConfig cc = classify_from_config(cfg, n, U.max_abs());
  const auto field = std::make_shared<ScalarField>(U);
  const Frame frame = deskew_frame(A, x0);
  const SymmetrizedPair pair = symmetrize(field, frame);
  const FunctionalConstants c = cc.constants.with_kappa(1.5);
  FrequencyRun run{Json(), profile(*pair.even, frame, c, cc.r_lo, cc.r_hi, cc.count, cc.field_scale)};
  const FrequencyEstimate est = frequency_at_point(run.profile.frequency);
  run.profile.frequency.kappa_extrapolated = est.kappa;
  const MonotonicityAudit mono = audit_monotonicity(run.profile.frequency.Nhat);
  Json& r = run.report;
  r["schema_version"] = kSchemaVersion;
  r["command"] = "frequency";
  r["x0"] = to_json(x0);
  r["kappa0"] = c.kappa0;
  r["kappa"] = est.kappa;
  r["confidence"] = est.confidence;
  r["slope"] = est.slope;
  r["trusted_window"] = {run.profile.frequency.r_lo, run.profile.frequency.r_hi};
  r["samples"] = run.profile.frequency.radii.size();
  r["monotonicity"] = {{"steps", mono.steps}, {"violations", mono.violations}, {"worst_drop", mono.worst_drop}};
  return run;
}

AuditRun run_audit(const ScalarField& U, const RunConfig& cfg) {
  cfg.validate();
  AuditRun run;
  const int n = U.dim();
  const CoefficientField A = coefficient_from_config(cfg);
  const auto field = std::make_shared<ScalarField>(U);
  const int samples = cfg.get_int("audit.samples", 20);
  const double tol = cfg.get_double("audit.tol", 1e-2);
  const double slack = cfg.get_double("audit.ratio_slack", 2e-2);
  std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.get_int("audit.seed", 1)));
  std::uniform_real_distribution<double> unif(-0.5, 0.5), frac(0.2, 0.8);
  const Box box = U.domain();
  bool ok = true;

  Json cov = Json::array(), dec = Json::array();
  std::vector<std::pair<Vec, double>> qs;
  double worst_cov = 0.0, worst_dec = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec x0(n);
    for (int k = 0; k < n; ++k) x0(k) = 0.5 * (box.lo(k) + box.hi(k)) + unif(rng) * (box.hi(k) - box.lo(k)) * 0.6;
    Vec xt = x0;
    xt(n - 1) = 0.0;
    const Frame f = deskew_frame(A, x0);
    const double r = frac(rng) * ellipsoid_radius_in(box, f);
    const auto res = change_of_variables_audit(*field, f, r);
    worst_cov = std::max(worst_cov, res.max());
    cov.push_back({{"x0", to_json(x0)}, {"r", r}, {"l2", res.l2}, {"energy", res.energy}, {"boundary", res.boundary}});
    const Frame ft = deskew_frame(A, xt);
    const double rt = frac(rng) * ellipsoid_radius_in(box, ft);
    const auto d = energy_decomposition_audit(field, ft, rt);
    worst_dec = std::max({worst_dec, d.l2, d.energy});
    dec.push_back({{"x0", to_json(xt)}, {"r", rt}, {"l2", d.l2}, {"energy", d.energy}});
    qs.emplace_back(xt, rt);
  }
  ok = ok && worst_cov <= tol && worst_dec <= tol;
  const QuasisymmetryReport q = quasisymmetry_constant(field, A, qs);

  Json amin = Json::array();
  Vec x0 = Vec::Zero(n);
  if (cfg.has("audit.x0")) x0 = parse_vec(cfg.get("audit.x0", ""), n);
  x0(n - 1) = 0.0;
  auto radii = cfg.get_list("audit.radii");
  if (radii.empty()) radii = {0.1, 0.2, 0.3};
  const Frame f0 = deskew_frame(A, x0);
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    try {
      const AlmostMinReport a = almost_min_audit(field, f0, r);
      min_ratio = std::min(min_ratio, a.ratio);
      amin.push_back({{"r", r}, {"ratio", a.ratio}, {"ratio_quadrature", a.ratio_quadrature}});
    } catch (const Error& e) {
      amin.push_back({{"r", r}, {"error", e.what()}});
    }
  }
  if (std::isfinite(min_ratio)) ok = ok && min_ratio >= 1.0 - slack;

  Json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["command"] = "audit";
  rep["change_of_variables"] = {{"worst", worst_cov}, {"tol", tol}, {"samples", cov}};
  rep["decomposition"] = {{"worst", worst_dec}, {"tol", tol}, {"samples", dec}};
  Json qj = Json::array();
  for (const auto& s : q.samples)
    qj.push_back({{"x0", to_json(s.x0)}, {"r", s.r}, {"ratio", s.zero_even_energy ? Json(nullptr) : Json(s.ratio)},
                  {"zero_even_energy", s.zero_even_energy}});
  rep["quasisymmetry"] = {{"Q_estimate", q.Q_estimate}, {"skipped", q.skipped}, {"samples", qj}};
  rep["almost_minimality"] = {{"x0", to_json(x0)}, {"samples", amin}};
  rep["passed"] = ok;
  run.report = rep;
  run.exit_code = ok ? 0 : 3;
  return run;
}

AuditRun run_selftest() {
  AuditRun run;
  Json checks = Json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, double value) {
    checks.push_back({{"name", name}, {"passed", pass}, {"value", value}});
    all = all && pass;
  };
  // brute-force oracle against PSOR on seeded 9x9 problems
  double worst = 0.0;
  for (int s = 0; s < 5; ++s) {
    SignoriniProblem p;
    p.grid = Grid(2, 9);
    p.A = s % 2 == 0 ? CoefficientField::holder(2, 0.5, 0.1, static_cast<std::uint64_t>(s + 1))
                     : CoefficientField::full(2, 0.5, 0.3, 0.05, static_cast<std::uint64_t>(s + 1));
    const double ph = 0.9 * s;
    p.boundary_data = [ph](const Vec& x) { return std::cos(3.0 * x(0) + ph) * 0.8 + 0.3 * x(1) - 0.1; };
    if (s == 3) p.drift = Drift{[](const Vec&) { Vec b(2); b << 1.0, 0.5; return b; }, 8.0};
    SolverConfig c;
    c.tol = 1e-14;
    c.relax = -1.0;
    const Solution a = solve_psor(p, c);
    const Solution b = brute_force_lcp(p);
    for (std::size_t i = 0; i < p.grid.size(); ++i) worst = std::max(worst, std::abs(a.U[i] - b.U[i]));
  }
  record("psor_matches_brute_force", worst <= 1e-8, worst);
  // exact-solution values
  const auto reg = exact_field(2, ExactKind::Regular32, {});
  Vec x(2);
  x << 1.0, 0.0;
  const double v1 = reg->value(x);
  x << -1.0, 0.0;
  const double v2 = reg->value(x);
  x << 0.0, 1.0;
  const double v3 = reg->value(x);
  record("regular_profile_values",
         std::abs(v1 - 1.0) < 1e-14 && std::abs(v2) < 1e-14 && std::abs(v3 + std::sqrt(0.5)) < 1e-14, v3);
  // homogeneity: frequency equals the degree
  const Frame f = frame_from_matrix(Mat::Identity(2, 2), Vec::Zero(2));
  for (auto kind : {ExactKind::Regular32, ExactKind::Polynomial, ExactKind::Regular72}) {
    ExactParams ep;
    const double N = almgren(*exact_field(2, kind, ep), f, 0.5);
    record("frequency_" + to_string(kind), std::abs(N - exact_homogeneity(kind, ep)) < 0.02, N);
  }
  // change of variables with a full constant matrix
  Mat A(2, 2);
  A << 2.0, 0.6, 0.6, 1.0;
  ExactParams ep;
  ep.skew_A = A;
  const auto skew = exact_field(2, ExactKind::Regular32, ep);
  const double cov = change_of_variables_audit(*skew, frame_from_matrix(A, Vec::Zero(2)), 0.5).max();
  record("change_of_variables", cov <= 1e-2, cov);
  // SGF1 round trip
  const ScalarField sf = exact_solution_field(Grid(2, 17), ExactKind::Regular32, {});
  const auto bytes = encode_sgf1(sf);
  record("sgf1_round_trip", encode_sgf1(decode_sgf1(bytes)) == bytes, static_cast<double>(bytes.size()));

  run.report["schema_version"] = kSchemaVersion;
  run.report["command"] = "selftest";
  run.report["checks"] = checks;
  run.report["passed"] = all;
  run.exit_code = all ? 0 : 3;
  return run;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
  f << text;
}

}  // namespace thinlab
