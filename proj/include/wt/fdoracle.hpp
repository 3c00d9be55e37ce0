#pragma once

#include <memory>
#include <vector>

#include "wt/matfun.hpp"
#include "wt/potential.hpp"
#include "wt/types.hpp"

namespace wt {

// Grid function: one C^n value per node of a uniform grid.
struct OracleGridFunction {
  std::vector<double> x;
  std::vector<Vector> values;
};

// Independent second-order finite-difference model of H_alpha on a truncated
// interval. Half-line variants impose sin(alpha) u'(a) + cos(alpha) u(a) = 0
// at the left end through symmetric ghost-point elimination (in the
// eigenbasis of alpha) and a hard Dirichlet cap at the right end; full-line
// variants cap both ends. Used purely as a cross-check target.
class DiscretizedOperator {
 public:
  static DiscretizedOperator half_line(const PotentialSpec& V, double a, double b,
                                       const BoundaryCondition& bc, double h);
  static DiscretizedOperator full_line(const PotentialSpec& V, double left,
                                       double right, double h);

  int hilbert_dim() const { return n_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  double spacing() const { return h_; }

  // Hermiticity defect of the assembled (symmetrized) matrix.
  double hermitian_defect() const;

  // All eigenvalues, ascending.
  const RealVector& eigenvalues() const;

  // L^2-normalized eigenfunction k as a grid function.
  OracleGridFunction eigenfunction(int k) const;

  // (D - z)^{-1} u by a direct solve; u sampled on nodes().
  OracleGridFunction resolvent(Complex z, const OracleGridFunction& u) const;

  // Spectral projection onto (l1, l2] applied to u.
  OracleGridFunction projection(double l1, double l2, const OracleGridFunction& u) const;
  int projection_rank(double l1, double l2) const;

  // Discrete operator applied to u (for F(lambda) = lambda comparisons).
  OracleGridFunction apply(const OracleGridFunction& u) const;

  // Weighted trapezoidal L^2 inner product matching the discretization.
  Complex inner_product(const OracleGridFunction& f, const OracleGridFunction& g) const;
  double norm(const OracleGridFunction& f) const;

 private:
  DiscretizedOperator() = default;
  void assemble(const PotentialSpec& V);
  void ensure_eig() const;

  Vector to_dof(const OracleGridFunction& u) const;
  OracleGridFunction from_dof(const Vector& v) const;

  int n_ = 0;
  double h_ = 0.0;
  std::vector<double> nodes_;
  Matrix basis_;                  // alpha eigenbasis (identity when capless)
  std::vector<int> node0_dof_;    // -1 for Dirichlet channels at node 0
  int num_dof_ = 0;
  RealVector sqrt_weight_;        // D^{1/2} diagonal of the half-cell weights
  std::vector<double> kappa_;     // Robin coefficients per channel (node 0)
  bool has_boundary_row_ = false;
  Matrix matrix_;                 // symmetrized Hermitian form B
  double hermitian_defect_ = 0.0;

  mutable bool eig_done_ = false;
  mutable RealVector eigenvalues_;
  mutable Matrix eigenvectors_;
};

} // namespace wt
