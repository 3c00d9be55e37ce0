#pragma once

#include <functional>
#include <utility>

#include "wt/errors.hpp"
#include "wt/types.hpp"

namespace wt {

// n x n Hermitian matrix. Construction symmetrizes (m + m*)/2 when the
// defect is within tol.herm (relative to the largest entry) and throws
// NonHermitian beyond that.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Matrix& m,
                           const Tolerances& tol = default_tol());

  static HermitianMatrix Zero(int n) { return HermitianMatrix(Matrix::Zero(n, n)); }
  static HermitianMatrix Identity(int n) { return HermitianMatrix(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& mat() const { return entries_; }

 private:
  Matrix entries_;
};

struct EigDecomposition {
  RealVector eigenvalues; // ascending
  Matrix eigenvectors;    // unitary, columns phase-fixed
};

// Backward-stable Hermitian eigendecomposition with deterministic
// eigenvector phases (largest-magnitude component made real positive).
EigDecomposition hermitian_eig(const HermitianMatrix& m);

// Functional calculus U f(lambda) U^* through the spectral theorem.
HermitianMatrix matrix_fn(const HermitianMatrix& m,
                          const std::function<double(double)>& f);

// Square root with Im w >= 0; on (0,infty) the limit from the upper half
// plane, i.e. the positive root. The branch cut sits on [0,infty).
Complex principal_sqrt(Complex z);

// True iff the smallest eigenvalue is >= -tol.
bool psd_check(const HermitianMatrix& m, double tol);

// Smallest eigenvalue of the Hermitian part of m; helper shared by the
// Herglotz-side PSD checks which receive raw (already symmetrized) data.
double min_eigenvalue(const Matrix& hermitian_part);

// alpha together with sin(alpha), cos(alpha); validates the trigonometric
// identity, commutation and the spectral inclusion in [-1,1].
class BoundaryCondition {
 public:
  explicit BoundaryCondition(const HermitianMatrix& alpha,
                             const Tolerances& tol = default_tol());

  static BoundaryCondition dirichlet(int n) {
    return BoundaryCondition(HermitianMatrix::Zero(n));
  }
  static BoundaryCondition neumann(int n);

  int dim() const { return alpha_.dim(); }
  const Matrix& alpha() const { return alpha_.mat(); }
  const Matrix& sin_alpha() const { return sin_alpha_; }
  const Matrix& cos_alpha() const { return cos_alpha_; }

 private:
  HermitianMatrix alpha_;
  Matrix sin_alpha_;
  Matrix cos_alpha_;
};

} // namespace wt
