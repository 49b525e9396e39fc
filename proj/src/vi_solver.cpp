#include "thinlab/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "thinlab/errors.hpp"
#include "thinlab/integrals.hpp"

namespace thinlab {

void SignoriniProblem::validate() const {
  if (grid.size() == 0) throw Error(ErrorKind::InvalidArgument, "problem has no grid");
  if (A.n != grid.dim()) throw Error(ErrorKind::InvalidArgument, "coefficient dimension does not match grid");
  if (!grid.isotropic()) throw Error(ErrorKind::InvalidArgument, "solver needs equal spacing on all axes");
  if (!A.evaluator) throw Error(ErrorKind::InvalidArgument, "coefficient field has no evaluator");
  if (drift) {
    if (!drift->b) throw Error(ErrorKind::InvalidArgument, "drift has no velocity field");
    if (!(drift->p > grid.dim())) throw Error(ErrorKind::InvalidArgument, "drift exponent p must exceed n");
  }
  const bool has_pins = !pinned.empty();
  if (has_pins && (pinned.size() != grid.size() || pinned_values.size() != grid.size()))
    throw Error(ErrorKind::InvalidArgument, "pin arrays must match the grid size");
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const bool pin = has_pins && pinned[p];
    if (pin) {
      if (!std::isfinite(pinned_values[p])) throw Error(ErrorKind::InvalidArgument, "non-finite pinned value");
    } else if (grid.on_boundary(p)) {
      if (!boundary_data) throw Error(ErrorKind::InvalidArgument, "problem has no boundary data");
      if (!std::isfinite(boundary_data(grid.node(p))))
        throw Error(ErrorKind::InvalidArgument, "boundary data is not finite");
    }
  }
}

double DiscreteOperator::apply_row(std::size_t p, const std::vector<double>& U) const {
  double s = diag[p] * U[p];
  for (std::size_t k = row_start[p]; k < row_start[p + 1]; ++k) s += vals[k] * U[cols[k]];
  return s;
}

namespace {

struct Offset {
  std::array<int, 3> d{0, 0, 0};
  int k = 0;      // first axis
  int j = -1;     // second axis for diagonal edges
  int sigma = 0;  // sign of the second component relative to the first
};

// Stencil offsets, each edge direction listed with both orientations.
std::vector<Offset> stencil_offsets(int n) {
  std::vector<Offset> out;
  for (int k = 0; k < n; ++k)
    for (int s : {1, -1}) {
      Offset o;
      o.d[static_cast<std::size_t>(k)] = s;
      o.k = k;
      out.push_back(o);
    }
  for (int k = 0; k < n; ++k)
    for (int j = k + 1; j < n; ++j)
      for (int sigma : {1, -1})
        for (int s : {1, -1}) {
          Offset o;
          o.d[static_cast<std::size_t>(k)] = s;
          o.d[static_cast<std::size_t>(j)] = s * sigma;
          o.k = k;
          o.j = j;
          o.sigma = sigma;
          out.push_back(o);
        }
  return out;
}

double edge_weight(const Mat& A, const Offset& o) {
  const int n = static_cast<int>(A.rows());
  if (o.j < 0) {
    double c = A(o.k, o.k);
    for (int j = 0; j < n; ++j)
      if (j != o.k) c -= std::abs(A(o.k, j));
    return c;
  }
  return std::max(o.sigma * A(o.k, o.j), 0.0);
}

}  // namespace

DiscreteOperator assemble(const SignoriniProblem& problem) {
  problem.validate();
  const Grid& g = problem.grid;
  const int n = g.dim();
  const double h = g.spacing(0);
  const double ih2 = 1.0 / (h * h);
  DiscreteOperator op;
  op.size = g.size();
  op.h = h;
  op.diag.assign(op.size, 0.0);
  op.row_start.assign(op.size + 1, 0);
  op.fixed.assign(op.size, 0);
  op.thin.assign(op.size, 0);
  op.dirichlet.assign(op.size, 0.0);
  op.symmetric = !problem.drift.has_value();

  const bool has_pins = !problem.pinned.empty();
  for (std::size_t p = 0; p < op.size; ++p) {
    if (has_pins && problem.pinned[p]) {
      op.fixed[p] = 1;
      op.dirichlet[p] = problem.pinned_values[p];
    } else if (g.on_boundary(p)) {
      op.fixed[p] = 1;
      op.dirichlet[p] = problem.boundary_data(g.node(p));
    } else if (problem.thin_constraint && g.on_thin_plane(p)) {
      op.thin[p] = 1;
    }
  }

  const auto offsets = stencil_offsets(n);
  const bool full = [&] {
    // off-diagonal entries anywhere on the grid switch on the diagonal edges
    for (std::size_t p = 0; p < op.size; p += std::max<std::size_t>(1, op.size / 257)) {
      const Mat A = problem.A(g.node(p));
      for (int k = 0; k < n; ++k)
        for (int j = k + 1; j < n; ++j)
          if (A(k, j) != 0.0) return true;
    }
    return false;
  }();

  double worst_axis = 0.0;
  auto edges = std::make_shared<std::vector<DiscreteOperator::Edge>>();
  for (std::size_t p = 0; p < op.size; ++p) {
    op.row_start[p] = op.cols.size();
    if (op.fixed[p]) {
      op.diag[p] = 1.0;
      continue;
    }
    const auto ijk = g.multi_index(p);
    const Vec xp = g.node(p);
    for (const Offset& o : offsets) {
      if (o.j >= 0 && !full) continue;
      std::array<int, 3> qq = ijk;
      for (int k = 0; k < n; ++k) qq[static_cast<std::size_t>(k)] += o.d[static_cast<std::size_t>(k)];
      const std::size_t q = g.index(qq);
      const Vec xq = g.node(q);
      const double c = edge_weight(problem.A(0.5 * (xp + xq)), o);
      if (o.j < 0) worst_axis = std::min(worst_axis, c);
      if (c == 0.0) continue;
      op.diag[p] += c * ih2;
      op.cols.push_back(q);
      op.vals.push_back(-c * ih2);
      if (p < q || op.fixed[q]) edges->push_back({p, q, c});
    }
    if (problem.drift) {
      const Vec b = problem.drift->b(xp);
      for (int k = 0; k < n; ++k) {
        const double bk = b(k);
        if (bk == 0.0) continue;
        std::array<int, 3> qq = ijk;
        qq[static_cast<std::size_t>(k)] += bk > 0.0 ? -1 : 1;
        op.diag[p] += std::abs(bk) / h;
        op.cols.push_back(g.index(qq));
        op.vals.push_back(-std::abs(bk) / h);
      }
    }
  }
  op.row_start[op.size] = op.cols.size();
  if (worst_axis < -1e-14) {
    op.m_matrix = false;
    std::ostringstream os;
    os << "NotMMatrix: negative axis edge weight " << worst_axis
       << " (A not diagonally dominant); PSOR convergence is not guaranteed";
    op.warnings.push_back(os.str());
  }
  op.edges = std::move(edges);
  op.dim = n;
  return op;
}

double DiscreteOperator::dirichlet_energy(const std::vector<double>& U) const {
  double e = 0.0;
  if (!edges) return 0.0;
  for (const Edge& r : *edges) {
    const double d = U[r.p] - U[r.q];
    e += r.c * d * d;
  }
  return e * std::pow(h, dim - 2);
}

bool ComplementarityReport::satisfied(double tol) const {
  return max_free_residual < 10.0 * tol && min_active_residual >= -10.0 * tol &&
         max_product <= 10.0 * tol * scale;
}

ComplementarityReport complementarity_report(const DiscreteOperator& op, const Grid& grid,
                                             const std::vector<double>& U, double tol) {
  ComplementarityReport rep;
  double umax = 0.0;
  for (double v : U) umax = std::max(umax, std::abs(v));
  rep.scale = std::max(1.0, umax);
  const double eps_active = 10.0 * tol * rep.scale;
  for (std::size_t p = 0; p < op.size; ++p) {
    if (op.fixed[p]) continue;
    const double r = op.apply_row(p, U);
    const double s = r / op.diag[p];
    if (op.thin[p]) {
      ComplementarityEntry e;
      e.node = p;
      e.value = U[p];
      e.flux_jump = op.h * r;
      e.scaled_residual = s;
      e.product = U[p] * s;
      e.active = U[p] <= eps_active;
      if (e.active)
        rep.min_active_residual = std::min(rep.min_active_residual, s);
      else
        rep.max_free_residual = std::max(rep.max_free_residual, std::abs(s));
      rep.max_product = std::max(rep.max_product, std::abs(e.product));
      rep.thin.push_back(e);
    } else {
      rep.max_free_residual = std::max(rep.max_free_residual, std::abs(s));
    }
  }
  (void)grid;
  return rep;
}

namespace {

double auto_relax(int m) { return 2.0 / (1.0 + std::sin(std::numbers::pi / (m - 1))); }

std::vector<double> nested_guess(const SignoriniProblem& problem, const SolverConfig& config) {
  const Grid& g = problem.grid;
  const int mc = (g.nodes_per_axis() + 1) / 2;
  SignoriniProblem coarse = problem;
  std::array<double, 3> lo{}, hi{};
  for (int k = 0; k < g.dim(); ++k) {
    lo[static_cast<std::size_t>(k)] = g.lower(k);
    hi[static_cast<std::size_t>(k)] = g.upper(k);
  }
  coarse.grid = Grid(g.dim(), mc, lo, hi);
  SolverConfig cc = config;
  cc.record_energy = false;
  if (cc.relax > 0.0) cc.relax = -1.0;
  const Solution cs = solve_psor(coarse, cc);
  std::vector<double> out(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) out[p] = cs.U.value(g.node(p));
  return out;
}

}  // namespace

Solution solve_psor(const SignoriniProblem& problem, const SolverConfig& config) {
  const DiscreteOperator op = assemble(problem);
  std::vector<double> init;
  const int m = problem.grid.nodes_per_axis();
  if (config.nested && problem.pinned.empty() && m >= 17 && ((m + 1) / 2) % 2 == 1)
    init = nested_guess(problem, config);
  return solve_psor(problem, op, config, std::move(init));
}

Solution solve_psor(const SignoriniProblem& problem, const DiscreteOperator& op,
                    const SolverConfig& config, std::vector<double> U) {
  const Grid& g = problem.grid;
  if (U.size() != op.size) U.assign(op.size, 0.0);
  for (std::size_t p = 0; p < op.size; ++p) {
    if (op.fixed[p]) U[p] = op.dirichlet[p];
    else if (op.thin[p]) U[p] = std::max(U[p], 0.0);
  }
  const double omega = config.relax > 0.0 ? config.relax : auto_relax(g.nodes_per_axis());
  std::vector<double> history;
  int it = 0;
  double update = 0.0;
  bool converged = false;
  if (config.record_energy) history.push_back(op.dirichlet_energy(U));
  for (it = 1; it <= config.max_iter; ++it) {
    update = 0.0;
    for (std::size_t p = 0; p < op.size; ++p) {
      if (op.fixed[p]) continue;
      double s = 0.0;
      for (std::size_t k = op.row_start[p]; k < op.row_start[p + 1]; ++k) s += op.vals[k] * U[op.cols[k]];
      const double gs = -s / op.diag[p];
      double next = U[p] + omega * (gs - U[p]);
      if (op.thin[p] && next < 0.0) next = 0.0;
      update = std::max(update, std::abs(next - U[p]));
      U[p] = next;
    }
    if (config.record_energy) history.push_back(op.dirichlet_energy(U));
    if (update < config.tol) {
      converged = true;
      break;
    }
  }
  const ComplementarityReport comp = complementarity_report(op, g, U, config.tol);
  Solution sol(ScalarField(g, std::move(U), FieldTag::Solved));
  sol.energy_history = std::move(history);
  sol.iterations = std::min(it, config.max_iter);
  sol.final_update = update;
  sol.converged = converged;
  sol.m_matrix = op.m_matrix;
  sol.warnings = op.warnings;
  if (!converged) sol.warnings.push_back("MaxIterExceeded: returning the last iterate");
  sol.tol = config.tol;
  sol.complementarity = comp;
  return sol;
}

Solution brute_force_lcp(const SignoriniProblem& problem) {
  const DiscreteOperator op = assemble(problem);
  const Grid& g = problem.grid;
  std::vector<std::size_t> N, T;
  std::vector<long> pos(op.size, -1);
  for (std::size_t p = 0; p < op.size; ++p) {
    if (op.fixed[p]) continue;
    if (op.thin[p]) {
      pos[p] = static_cast<long>(T.size());
      T.push_back(p);
    } else {
      pos[p] = static_cast<long>(N.size());
      N.push_back(p);
    }
  }
  if (T.size() > 14) throw Error(ErrorKind::TooManyThinNodes, "brute_force_lcp: more than 14 free thin nodes");
  const auto nN = static_cast<Eigen::Index>(N.size());
  const auto nT = static_cast<Eigen::Index>(T.size());
  Eigen::MatrixXd KNN = Eigen::MatrixXd::Zero(nN, nN), KNT = Eigen::MatrixXd::Zero(nN, nT);
  Eigen::MatrixXd KTN = Eigen::MatrixXd::Zero(nT, nN), KTT = Eigen::MatrixXd::Zero(nT, nT);
  Eigen::VectorXd bN = Eigen::VectorXd::Zero(nN), bT = Eigen::VectorXd::Zero(nT);
  auto fill = [&](std::size_t p, Eigen::MatrixXd& toN, Eigen::MatrixXd& toT, Eigen::VectorXd& rhs, Eigen::Index row) {
    auto put = [&](std::size_t q, double v) {
      if (op.fixed[q]) rhs(row) -= v * op.dirichlet[q];
      else if (op.thin[q]) toT(row, pos[q]) += v;
      else toN(row, pos[q]) += v;
    };
    put(p, op.diag[p]);
    for (std::size_t k = op.row_start[p]; k < op.row_start[p + 1]; ++k) put(op.cols[k], op.vals[k]);
  };
  for (Eigen::Index i = 0; i < nN; ++i) fill(N[static_cast<std::size_t>(i)], KNN, KNT, bN, i);
  for (Eigen::Index i = 0; i < nT; ++i) fill(T[static_cast<std::size_t>(i)], KTN, KTT, bT, i);

  // Schur complement on the thin nodes: w = S u_T - c >= 0, u_T >= 0, u_T . w = 0
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(KNN);
  const Eigen::MatrixXd X = nN > 0 ? Eigen::MatrixXd(lu.solve(KNT)) : Eigen::MatrixXd(0, nT);
  const Eigen::VectorXd y = nN > 0 ? Eigen::VectorXd(lu.solve(bN)) : Eigen::VectorXd(0);
  const Eigen::MatrixXd S = KTT - KTN * X;
  const Eigen::VectorXd c = bT - KTN * y;
  const double scale = std::max({1.0, S.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});

  Eigen::VectorXd uT = Eigen::VectorXd::Zero(nT);
  bool found = nT == 0;
  for (unsigned mask = 0; !found && mask < (1u << nT); ++mask) {
    std::vector<Eigen::Index> I, Act;
    for (Eigen::Index i = 0; i < nT; ++i) ((mask >> i) & 1u ? Act : I).push_back(i);
    Eigen::VectorXd cand = Eigen::VectorXd::Zero(nT);
    if (!I.empty()) {
      const auto k = static_cast<Eigen::Index>(I.size());
      Eigen::MatrixXd SII(k, k);
      Eigen::VectorXd cI(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        cI(a) = c(I[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < k; ++b) SII(a, b) = S(I[static_cast<std::size_t>(a)], I[static_cast<std::size_t>(b)]);
      }
      const Eigen::VectorXd uI = SII.fullPivLu().solve(cI);
      for (Eigen::Index a = 0; a < k; ++a) cand(I[static_cast<std::size_t>(a)]) = uI(a);
    }
    bool ok = true;
    for (Eigen::Index i : I) ok = ok && cand(i) >= -1e-12 * scale;
    if (ok) {
      const Eigen::VectorXd w = S * cand - c;
      for (Eigen::Index i : Act) ok = ok && w(i) >= -1e-10 * scale;
    }
    if (ok) {
      uT = cand;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::NoFeasibleActiveSet, "brute_force_lcp: no active set satisfies complementarity");

  std::vector<double> U(op.size, 0.0);
  const Eigen::VectorXd uN = nN > 0 ? Eigen::VectorXd(y - X * uT) : Eigen::VectorXd(0);
  for (std::size_t p = 0; p < op.size; ++p) {
    if (op.fixed[p]) U[p] = op.dirichlet[p];
    else if (op.thin[p]) U[p] = std::max(0.0, uT(pos[p]));
    else U[p] = uN(pos[p]);
  }
  const ComplementarityReport comp = complementarity_report(op, g, U, 1e-12);
  Solution sol(ScalarField(g, std::move(U), FieldTag::Solved));
  sol.converged = true;
  sol.m_matrix = op.m_matrix;
  sol.warnings = op.warnings;
  sol.tol = 1e-12;
  sol.complementarity = comp;
  return sol;
}

ReplacementField::ReplacementField(FieldPtr U, Frame frame, double r, ScalarField inner,
                                   double sampled_energy, double replacement_energy)
    : U_(std::move(U)),
      frame_(std::move(frame)),
      r_(r),
      inner_(std::move(inner)),
      sampled_energy_(sampled_energy),
      replacement_energy_(replacement_energy) {}

double ReplacementField::value(const Vec& x) const {
  const Vec y = frame_.to_deskewed(x);
  if (y.norm() < r_) return inner_.value(y);
  return U_->value(x);
}

Vec ReplacementField::gradient(const Vec& x, Side side) const {
  const Vec y = frame_.to_deskewed(x);
  if (y.norm() < r_) return frame_.abar_inv.transpose() * inner_.gradient(y, side);
  return U_->gradient(x, side);
}

ReplacementField signorini_replacement(FieldPtr U, const Frame& frame, double r, double h, double tol) {
  if (!frame.on_thin_plane())
    throw Error(ErrorKind::CenterNotOnThinPlane, "signorini_replacement: x0 is not on the thin plane");
  require_ellipsoid_inside(*U, frame, r);
  const int n = frame.dim();
  if (h <= 0.0) h = U->resolution();
  if (h <= 0.0) h = r / 32.0;
  const int k = static_cast<int>(std::ceil(r / h - 1e-9)) + 1;
  const double L = k * h;
  const Grid sub(n, 2 * k + 1, -L, L);
  const Box box = U->domain();

  SignoriniProblem prob;
  prob.A = CoefficientField::identity(n);
  prob.grid = sub;
  prob.pinned.assign(sub.size(), 0);
  prob.pinned_values.assign(sub.size(), 0.0);
  std::vector<double> sampled(sub.size());
  for (std::size_t p = 0; p < sub.size(); ++p) {
    const Vec y = sub.node(p);
    Vec x = frame.from_deskewed(y);
    if (y(n - 1) == 0.0) x(n - 1) = 0.0;
    for (int a = 0; a < n; ++a) x(a) = std::clamp(x(a), box.lo(a), box.hi(a));
    sampled[p] = U->value(x);
    if (y.norm() >= r) {
      prob.pinned[p] = 1;
      prob.pinned_values[p] = sampled[p];
    }
  }
  const DiscreteOperator op = assemble(prob);
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.relax = -1.0;
  cfg.max_iter = 1000000;
  Solution sol = solve_psor(prob, op, cfg, sampled);
  const double eu = frame.det_a * op.dirichlet_energy(sampled);
  const double ev = frame.det_a * op.dirichlet_energy(sol.U.values());
  return ReplacementField(std::move(U), frame, r, ScalarField(sub, sol.U.values(), FieldTag::Solved), eu, ev);
}

AlmostMinReport almost_min_audit(FieldPtr U, const Frame& frame, double r, double h) {
  const ReplacementField V = signorini_replacement(U, frame, r, h);
  AlmostMinReport rep;
  rep.energy_u = V.sampled_energy();
  rep.energy_v = V.replacement_energy();
  if (!(rep.energy_v > 1e-300) || rep.energy_u <= 1e-14 * std::max(rep.energy_v, 0.0) || rep.energy_v <= 1e-14 * rep.energy_u)
    throw Error(ErrorKind::ZeroReplacementEnergy, "almost_min_audit: replacement has zero energy");
  rep.ratio = rep.energy_u / rep.energy_v;
  const double qu = ellipsoid_energy(*U, frame, r);
  const double qv = ellipsoid_energy(V, frame, r);
  rep.ratio_quadrature = qv > 0.0 ? qu / qv : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace thinlab
