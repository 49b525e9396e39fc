#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thinlab/coeff_geometry.hpp"
#include "thinlab/grid.hpp"

namespace thinlab {

/// Velocity field b(x) with its declared integrability exponent p > n.
struct Drift {
  std::function<Vec(const Vec&)> b;
  double p = 0.0;
};

/// -div(A grad U) + <b, grad U> = 0 off the thin plane, U >= 0 on it, U = g on
/// the box boundary. Extra Dirichlet nodes may be pinned through `pinned`
/// (same length as the grid, nonzero = pinned) with values `pinned_values`.
struct SignoriniProblem {
  CoefficientField A;
  std::optional<Drift> drift;
  Grid grid;
  std::function<double(const Vec&)> boundary_data;
  std::vector<unsigned char> pinned;
  std::vector<double> pinned_values;
  bool thin_constraint = true;

  /// Throws InvalidArgument on missing or non-finite boundary data, p <= n,
  /// or mismatched pin arrays.
  void validate() const;
};

/// Row-compressed operator over all grid nodes. Rows of Dirichlet nodes are
/// empty; `dirichlet` holds their values.
struct DiscreteOperator {
  struct Edge {
    std::size_t p, q;
    double c;
  };
  int dim = 2;
  std::size_t size = 0;
  double h = 1.0;
  std::vector<double> diag;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  std::vector<unsigned char> fixed;
  std::vector<unsigned char> thin;
  std::vector<double> dirichlet;
  bool symmetric = true;
  bool m_matrix = true;
  std::vector<std::string> warnings;
  /// Diffusion edges with at least one free endpoint, weight c (unscaled).
  std::shared_ptr<const std::vector<Edge>> edges;

  /// (K U)_p for a free node p.
  double apply_row(std::size_t p, const std::vector<double>& U) const;
  /// sum over edges of c (U_p - U_q)^2 h^{n-2}, the discrete <A grad U, grad U>
  /// integral (diffusion part only).
  double dirichlet_energy(const std::vector<double>& U) const;
};

/// Assembles the flux-form stencil. Axis edges get weight
/// a_kk - sum_{j != k} |a_kj| and the diagonal edge e_k + s e_j gets
/// max(s a_kj, 0), all at the edge midpoint: the 5/7-point Laplacian-like
/// stencil for diagonal A, extended to 9/19 points otherwise.
DiscreteOperator assemble(const SignoriniProblem& problem);

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 200000;
  /// Over-relaxation factor; <= 0 picks 2 / (1 + sin(pi / (m - 1))).
  double relax = 1.5;
  /// Coarse-to-fine initial guess.
  bool nested = false;
  bool record_energy = false;
};

struct ComplementarityEntry {
  std::size_t node = 0;
  double value = 0.0;     // U
  double flux_jump = 0.0; // h (K U)_p
  double scaled_residual = 0.0;  // (K U)_p / K_pp
  double product = 0.0;   // U * scaled residual
  bool active = false;
};

struct ComplementarityReport {
  std::vector<ComplementarityEntry> thin;
  double max_free_residual = 0.0;     // non-thin and inactive thin nodes
  double min_active_residual = 0.0;   // most negative scaled residual on active nodes
  double max_product = 0.0;
  double scale = 1.0;
  bool satisfied(double tol) const;
};

struct Solution {
  explicit Solution(ScalarField u) : U(std::move(u)) {}
  ScalarField U;
  int iterations = 0;
  double final_update = 0.0;
  bool converged = false;
  bool m_matrix = true;
  std::vector<std::string> warnings;
  std::vector<double> energy_history;
  ComplementarityReport complementarity;
  double tol = 0.0;
};

ComplementarityReport complementarity_report(const DiscreteOperator& op, const Grid& grid,
                                             const std::vector<double>& U, double tol);

/// Projected SOR. Nonconvergence returns the last iterate with converged = false.
Solution solve_psor(const SignoriniProblem& problem, const SolverConfig& config = {});
Solution solve_psor(const SignoriniProblem& problem, const DiscreteOperator& op,
                    const SolverConfig& config, std::vector<double> initial);

/// Exact discrete solution by enumerating active sets on the free thin
/// nodes. Throws TooManyThinNodes (> 14) and NoFeasibleActiveSet.
Solution brute_force_lcp(const SignoriniProblem& problem);

/// Frozen-coefficient Signorini replacement of U on E_r(x0): the deskewed
/// problem (Laplacian, constraint on the thin plane) on a Cartesian subgrid
/// of spacing `h` around B_r, nodes with |y| >= r pinned to u_{x0}.
class ReplacementField : public Field {
 public:
  ReplacementField(FieldPtr U, Frame frame, double r, ScalarField inner, double sampled_energy,
                   double replacement_energy);
  int dim() const override { return frame_.dim(); }
  Box domain() const override { return U_->domain(); }
  double resolution() const override { return inner_.resolution(); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x, Side side) const override;

  const ScalarField& deskewed() const { return inner_; }
  const Frame& frame() const { return frame_; }
  double radius() const { return r_; }
  /// Discrete Dirichlet energies on the subgrid (edges touching a free node).
  double sampled_energy() const { return sampled_energy_; }
  double replacement_energy() const { return replacement_energy_; }

 private:
  FieldPtr U_;
  Frame frame_;
  double r_;
  ScalarField inner_;
  double sampled_energy_;
  double replacement_energy_;
};

/// Throws EllipsoidExceedsDomain; x0 must lie on the thin plane
/// (CenterNotOnThinPlane). h <= 0 uses the field's resolution, or r/32 for
/// closed-form fields.
ReplacementField signorini_replacement(FieldPtr U, const Frame& frame, double r, double h = 0.0,
                                       double tol = 1e-12);

struct AlmostMinReport {
  double ratio = 1.0;              // discrete energies on the replacement subgrid
  double ratio_quadrature = 1.0;   // ellipsoid quadrature of U and of the replacement
  double energy_u = 0.0;
  double energy_v = 0.0;
};

/// Energy of U over energy of its Signorini replacement on E_r(x0).
/// Throws ZeroReplacementEnergy.
AlmostMinReport almost_min_audit(FieldPtr U, const Frame& frame, double r, double h = 0.0);

}  // namespace thinlab
