#include "wt/fdoracle.hpp"

#include <cmath>
#include <complex>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "wt/errors.hpp"

namespace wt {

namespace {

// Dense Hermitian eigendecomposition via LAPACK (zheevd / dsyevd); the
// oracle matrices run to a few thousand rows, which Eigen's QR iteration
// handles too slowly for test turnaround.
void dense_hermitian_eig(const Matrix& m, RealVector& evals, Matrix& evecs) {
  const int n = static_cast<int>(m.rows());
  evals.resize(n);
  const bool is_real = (m.imag().cwiseAbs().maxCoeff() < 1e-14);
  if (is_real) {
    RealMatrix a = m.real();
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                           a.data(), n, evals.data());
    if (info != 0) throw SpectralError("fdoracle: dsyevd failed");
    evecs = a.cast<Complex>();
  } else {
    Matrix a = m;
    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', n,
        reinterpret_cast<lapack_complex_double*>(a.data()), n, evals.data());
    if (info != 0) throw SpectralError("fdoracle: zheevd failed");
    evecs = a;
  }
}

} // namespace

DiscretizedOperator DiscretizedOperator::half_line(const PotentialSpec& V, double a,
                                                   double b,
                                                   const BoundaryCondition& bc,
                                                   double h) {
  if (!(h > 0.0) || !(b > a)) throw SpectralError("fdoracle: bad discretization");
  DiscretizedOperator op;
  op.n_ = V.dim();
  const int k = static_cast<int>(std::llround((b - a) / h));
  op.h_ = (b - a) / k;
  op.nodes_.resize(k); // nodes a .. b-h; the cap node b is excluded
  for (int i = 0; i < k; ++i) op.nodes_[i] = a + i * op.h_;

  const EigDecomposition ed = hermitian_eig(HermitianMatrix(bc.alpha()));
  op.basis_ = ed.eigenvectors;
  op.kappa_.assign(op.n_, 0.0);
  op.node0_dof_.assign(op.n_, -1);
  op.has_boundary_row_ = true;

  int dof = 0;
  std::vector<double> w0(op.n_, 1.0);
  for (int j = 0; j < op.n_; ++j) {
    const double s = std::sin(ed.eigenvalues[j]);
    const double c = std::cos(ed.eigenvalues[j]);
    if (std::abs(s) < 1e-12) {
      op.node0_dof_[j] = -1; // Dirichlet channel: u(a) = 0
    } else {
      op.kappa_[j] = -c / s;
      op.node0_dof_[j] = dof++;
      w0[j] = 0.5;
    }
  }
  const int boundary_dofs = dof;
  op.num_dof_ = boundary_dofs + (k - 1) * op.n_;

  op.sqrt_weight_.resize(op.num_dof_);
  for (int j = 0; j < op.n_; ++j) {
    if (op.node0_dof_[j] >= 0) op.sqrt_weight_[op.node0_dof_[j]] = std::sqrt(w0[j]);
  }
  for (int i = boundary_dofs; i < op.num_dof_; ++i) op.sqrt_weight_[i] = 1.0;

  op.assemble(V);
  return op;
}

DiscretizedOperator DiscretizedOperator::full_line(const PotentialSpec& V, double left,
                                                   double right, double h) {
  if (!(h > 0.0) || !(right > left)) throw SpectralError("fdoracle: bad discretization");
  DiscretizedOperator op;
  op.n_ = V.dim();
  const int k = static_cast<int>(std::llround((right - left) / h));
  op.h_ = (right - left) / k;
  op.nodes_.resize(k - 1); // interior nodes only, caps at both ends
  for (int i = 1; i < k; ++i) op.nodes_[i - 1] = left + i * op.h_;
  op.basis_ = Matrix::Identity(op.n_, op.n_);
  op.node0_dof_.assign(op.n_, 0);
  for (int j = 0; j < op.n_; ++j) op.node0_dof_[j] = j;
  op.kappa_.assign(op.n_, 0.0);
  op.has_boundary_row_ = false;
  op.num_dof_ = static_cast<int>(op.nodes_.size()) * op.n_;
  op.sqrt_weight_ = RealVector::Ones(op.num_dof_);
  op.assemble(V);
  return op;
}

void DiscretizedOperator::assemble(const PotentialSpec& V) {
  const int n = n_;
  const int npts = num_nodes();
  const double inv_h2 = 1.0 / (h_ * h_);

  // DOF layout: boundary-row DOFs first (half-line Robin channels at node 0),
  // then n per interior node.
  auto dof_of = [&](int node, int ch) -> int {
    if (has_boundary_row_) {
      if (node == 0) return node0_dof_[ch];
      const int nb = num_dof_ - (npts - 1) * n;
      return nb + (node - 1) * n + ch;
    }
    return node * n + ch;
  };

  // Weighted form D*A, Hermitian by construction; then B = D^{-1/2} (DA) D^{-1/2}.
  // V is sampled as a two-point cell average so jump discontinuities that
  // land on nodes keep the scheme second order.
  const double off = h_ / (2.0 * std::sqrt(3.0));
  Matrix da = Matrix::Zero(num_dof_, num_dof_);
  for (int i = 0; i < npts; ++i) {
    const Matrix v = 0.5 * basis_.adjoint() *
                     (V.evaluate(nodes_[i] - off) + V.evaluate(nodes_[i] + off)) *
                     basis_;
    const bool boundary = has_boundary_row_ && i == 0;
    const double w = boundary ? 0.5 : 1.0;
    for (int ch = 0; ch < n; ++ch) {
      const int r = dof_of(i, ch);
      if (r < 0) continue;
      // Kinetic diagonal; the boundary row carries the Robin shift.
      double diag = 2.0 * inv_h2;
      if (boundary) diag = 2.0 * inv_h2 * (1.0 + h_ * kappa_[ch]);
      da(r, r) += w * diag;
      if (i + 1 < npts) {
        const int rn = dof_of(i + 1, ch);
        // Boundary weight 1/2 times the doubled ghost coupling gives -1/h^2,
        // matching the interior coupling back to node 0.
        da(r, rn) += -inv_h2;
      }
      if (i > 0) {
        const int rp = dof_of(i - 1, ch);
        if (rp >= 0) da(r, rp) += -inv_h2;
      }
      for (int ch2 = 0; ch2 < n; ++ch2) {
        const int c = dof_of(i, ch2);
        if (c < 0) continue;
        da(r, c) += w * v(ch, ch2);
      }
    }
  }
  hermitian_defect_ = (da - da.adjoint()).cwiseAbs().maxCoeff();
  da = 0.5 * (da + da.adjoint().eval());

  matrix_ = Matrix(num_dof_, num_dof_);
  for (int r = 0; r < num_dof_; ++r) {
    for (int c = 0; c < num_dof_; ++c) {
      matrix_(r, c) = da(r, c) / (sqrt_weight_[r] * sqrt_weight_[c]);
    }
  }
}

double DiscretizedOperator::hermitian_defect() const { return hermitian_defect_; }

void DiscretizedOperator::ensure_eig() const {
  if (eig_done_) return;
  dense_hermitian_eig(matrix_, eigenvalues_, eigenvectors_);
  eig_done_ = true;
}

const RealVector& DiscretizedOperator::eigenvalues() const {
  ensure_eig();
  return eigenvalues_;
}

Vector DiscretizedOperator::to_dof(const OracleGridFunction& u) const {
  if (u.values.size() != nodes_.size()) {
    throw GridMismatch("fdoracle: grid function does not match oracle nodes");
  }
  const int n = n_;
  Vector out = Vector::Zero(num_dof_);
  auto dof_of = [&](int node, int ch) -> int {
    if (has_boundary_row_) {
      if (node == 0) return node0_dof_[ch];
      const int nb = num_dof_ - (num_nodes() - 1) * n;
      return nb + (node - 1) * n + ch;
    }
    return node * n + ch;
  };
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Vector tilde = basis_.adjoint() * u.values[i];
    for (int ch = 0; ch < n; ++ch) {
      const int r = dof_of(static_cast<int>(i), ch);
      if (r >= 0) out[r] = tilde[ch];
    }
  }
  return out;
}

OracleGridFunction DiscretizedOperator::from_dof(const Vector& v) const {
  const int n = n_;
  OracleGridFunction out;
  out.x = nodes_;
  out.values.assign(nodes_.size(), Vector::Zero(n));
  auto dof_of = [&](int node, int ch) -> int {
    if (has_boundary_row_) {
      if (node == 0) return node0_dof_[ch];
      const int nb = num_dof_ - (num_nodes() - 1) * n;
      return nb + (node - 1) * n + ch;
    }
    return node * n + ch;
  };
  for (size_t i = 0; i < nodes_.size(); ++i) {
    Vector tilde = Vector::Zero(n);
    for (int ch = 0; ch < n; ++ch) {
      const int r = dof_of(static_cast<int>(i), ch);
      if (r >= 0) tilde[ch] = v[r];
    }
    out.values[i] = basis_ * tilde;
  }
  return out;
}

OracleGridFunction DiscretizedOperator::eigenfunction(int k) const {
  ensure_eig();
  // A-eigenvector D^{-1/2} q, L^2-normalized against the weighted trapezoid.
  Vector v = eigenvectors_.col(k);
  for (int i = 0; i < num_dof_; ++i) v[i] /= sqrt_weight_[i];
  v /= std::sqrt(h_);
  return from_dof(v);
}

OracleGridFunction DiscretizedOperator::resolvent(Complex z,
                                                  const OracleGridFunction& u) const {
  if (std::abs(z.imag()) == 0.0) {
    ensure_eig();
    for (int i = 0; i < eigenvalues_.size(); ++i) {
      if (std::abs(eigenvalues_[i] - z.real()) < 1e-12) {
        throw SingularShift("fdoracle: z hits a discrete eigenvalue");
      }
    }
  }
  Vector rhs = to_dof(u);
  for (int i = 0; i < num_dof_; ++i) rhs[i] *= sqrt_weight_[i];
  Matrix shifted = matrix_ - z * Matrix::Identity(num_dof_, num_dof_);
  Vector w = shifted.partialPivLu().solve(rhs);
  for (int i = 0; i < num_dof_; ++i) w[i] /= sqrt_weight_[i];
  return from_dof(w);
}

OracleGridFunction DiscretizedOperator::projection(double l1, double l2,
                                                   const OracleGridFunction& u) const {
  ensure_eig();
  Vector v = to_dof(u);
  for (int i = 0; i < num_dof_; ++i) v[i] *= sqrt_weight_[i];
  Vector acc = Vector::Zero(num_dof_);
  for (int k = 0; k < eigenvalues_.size(); ++k) {
    if (eigenvalues_[k] > l1 && eigenvalues_[k] <= l2) {
      acc += eigenvectors_.col(k) * eigenvectors_.col(k).dot(v);
    }
  }
  for (int i = 0; i < num_dof_; ++i) acc[i] /= sqrt_weight_[i];
  return from_dof(acc);
}

int DiscretizedOperator::projection_rank(double l1, double l2) const {
  ensure_eig();
  int count = 0;
  for (int k = 0; k < eigenvalues_.size(); ++k) {
    if (eigenvalues_[k] > l1 && eigenvalues_[k] <= l2) ++count;
  }
  return count;
}

OracleGridFunction DiscretizedOperator::apply(const OracleGridFunction& u) const {
  Vector v = to_dof(u);
  for (int i = 0; i < num_dof_; ++i) v[i] *= sqrt_weight_[i];
  Vector w = matrix_ * v;
  for (int i = 0; i < num_dof_; ++i) w[i] /= sqrt_weight_[i];
  return from_dof(w);
}

Complex DiscretizedOperator::inner_product(const OracleGridFunction& f,
                                           const OracleGridFunction& g) const {
  Vector a = to_dof(f);
  Vector b = to_dof(g);
  Complex sum = 0.0;
  for (int i = 0; i < num_dof_; ++i) {
    sum += std::conj(a[i]) * b[i] * (sqrt_weight_[i] * sqrt_weight_[i]);
  }
  return h_ * sum;
}

double DiscretizedOperator::norm(const OracleGridFunction& f) const {
  return std::sqrt(std::abs(inner_product(f, f)));
}

} // namespace wt
