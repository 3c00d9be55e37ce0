#include "wt/matfun.hpp"

#include <cmath>
#include <sstream>

namespace wt {

namespace {

double hermitian_defect(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

} // namespace

HermitianMatrix::HermitianMatrix(const Matrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NonHermitian("HermitianMatrix: matrix must be square and nonempty");
  }
  const double defect = hermitian_defect(m);
  if (defect > tol.herm) {
    std::ostringstream os;
    os << "HermitianMatrix: Hermiticity defect " << defect << " exceeds tolerance "
       << tol.herm;
    throw NonHermitian(os.str());
  }
  entries_ = 0.5 * (m + m.adjoint().eval());
}

EigDecomposition hermitian_eig(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw SpectralError("hermitian_eig: eigensolver failed to converge");
  }
  EigDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  // Phase fix: make the largest-magnitude component of each column real
  // positive, first such index on ties.
  const int n = m.dim();
  for (int j = 0; j < n; ++j) {
    int imax = 0;
    double amax = -1.0;
    for (int i = 0; i < n; ++i) {
      const double a = std::abs(out.eigenvectors(i, j));
      if (a > amax + 1e-15) {
        amax = a;
        imax = i;
      }
    }
    const Complex pivot = out.eigenvectors(imax, j);
    if (std::abs(pivot) > 0.0) {
      out.eigenvectors.col(j) *= std::conj(pivot) / std::abs(pivot);
    }
  }
  return out;
}

HermitianMatrix matrix_fn(const HermitianMatrix& m,
                          const std::function<double(double)>& f) {
  const EigDecomposition ed = hermitian_eig(m);
  RealVector fl(ed.eigenvalues.size());
  for (int i = 0; i < fl.size(); ++i) fl[i] = f(ed.eigenvalues[i]);
  Matrix result = ed.eigenvectors * fl.asDiagonal().toDenseMatrix().cast<Complex>() *
                  ed.eigenvectors.adjoint();
  return HermitianMatrix(result);
}

Complex principal_sqrt(Complex z) {
  Complex w = std::sqrt(z);
  if (w.imag() < 0.0) w = -w;
  return w;
}

bool psd_check(const HermitianMatrix& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

double min_eigenvalue(const Matrix& hermitian_part) {
  const Matrix sym = 0.5 * (hermitian_part + hermitian_part.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

BoundaryCondition::BoundaryCondition(const HermitianMatrix& alpha,
                                     const Tolerances& tol)
    : alpha_(alpha) {
  sin_alpha_ = matrix_fn(alpha_, [](double x) { return std::sin(x); }).mat();
  cos_alpha_ = matrix_fn(alpha_, [](double x) { return std::cos(x); }).mat();
  const int n = alpha_.dim();
  const Matrix id = Matrix::Identity(n, n);
  const double pyth =
      (sin_alpha_ * sin_alpha_ + cos_alpha_ * cos_alpha_ - id).cwiseAbs().maxCoeff();
  const double comm =
      (sin_alpha_ * cos_alpha_ - cos_alpha_ * sin_alpha_).cwiseAbs().maxCoeff();
  if (pyth > tol.identity || comm > tol.identity) {
    throw SpectralError("BoundaryCondition: trigonometric identity violated");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> sv(sin_alpha_, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> cv(cos_alpha_, Eigen::EigenvaluesOnly);
  if (sv.eigenvalues().minCoeff() < -1.0 - tol.identity ||
      sv.eigenvalues().maxCoeff() > 1.0 + tol.identity ||
      cv.eigenvalues().minCoeff() < -1.0 - tol.identity ||
      cv.eigenvalues().maxCoeff() > 1.0 + tol.identity) {
    throw SpectralError("BoundaryCondition: sin/cos spectrum outside [-1,1]");
  }
}

BoundaryCondition BoundaryCondition::neumann(int n) {
  Matrix a = (M_PI / 2.0) * Matrix::Identity(n, n);
  return BoundaryCondition(HermitianMatrix(a));
}

} // namespace wt
