#include "wt/halfline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wt/errors.hpp"

namespace wt {

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues().maxCoeff() / smin;
}

// Backward sweep of the capped/tail solution stacked as S = [U; U'], with a
// thin-QR right renormalization once per unit of x. m_b is invariant under
// right factors, so only the frame survives.
Matrix backward_weyl_frame(const PotentialSpec& V, double a, Complex z,
                           double start, const Matrix& u_start,
                           const Matrix& up_start, const Tolerances& tol) {
  const int n = V.dim();
  Matrix s(2 * n, n);
  s.topRows(n) = u_start;
  s.bottomRows(n) = up_start;

  const OdeRhs rhs = [&V, z, n](double x, const Matrix& st) {
    Matrix out(2 * n, st.cols());
    out.topRows(n) = st.bottomRows(n);
    out.bottomRows(n) = (V.evaluate(x) - z * Matrix::Identity(n, n)) * st.topRows(n);
    return out;
  };
  IntegratorOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  opt.mandatory_stops = V.breakpoints();

  double x = start;
  while (x > a) {
    const double next = std::max(a, x - 1.0);
    s = integrate_to(rhs, s, x, next, opt);
    x = next;
    Eigen::HouseholderQR<Matrix> qr(s);
    s = qr.householderQ() * Matrix::Identity(2 * n, n);
  }
  return s;
}

Matrix m_from_frame(const Matrix& s, const BoundaryCondition& bc,
                    const Tolerances& tol) {
  const int n = bc.dim();
  const Matrix u = s.topRows(n);
  const Matrix up = s.bottomRows(n);
  const Matrix num = bc.cos_alpha() * up - bc.sin_alpha() * u;
  const Matrix den = bc.sin_alpha() * up + bc.cos_alpha() * u;
  if (condition_number(den) > tol.cond_limit) {
    throw SingularNormalization(
        "m-function: normalization operator numerically singular; grow b or move z");
  }
  return num * den.partialPivLu().inverse();
}

} // namespace

Matrix m_truncated(const PotentialSpec& V, double a, const BoundaryCondition& bc,
                   Complex z, double b, CapType cap, const Tolerances& tol) {
  if (!(b > a)) throw SpectralError("m_truncated: b must exceed a");
  const int n = V.dim();
  Matrix u0, up0;
  if (cap == CapType::kDirichlet) {
    u0 = Matrix::Zero(n, n);
    up0 = Matrix::Identity(n, n);
  } else {
    u0 = Matrix::Identity(n, n);
    up0 = Matrix::Zero(n, n);
  }
  const Matrix s = backward_weyl_frame(V, a, z, b, u0, up0, tol);
  return m_from_frame(s, bc, tol);
}

Matrix m_outgoing(const PotentialSpec& V, double a, const BoundaryCondition& bc,
                  Complex z, const Tolerances& tol) {
  const int n = V.dim();
  const double x_tail = std::max(a, V.constant_from());
  const HermitianMatrix v_tail(V.evaluate(x_tail + 1.0));
  const EigDecomposition ed = hermitian_eig(v_tail);
  // U(x) = exp(K (x - x_tail)) with K = i sqrt(z - V_tail): decays toward
  // +infinity channel by channel (Im sqrt >= 0 branch).
  Vector k_diag(n);
  for (int j = 0; j < n; ++j) {
    k_diag[j] = kImagUnit * principal_sqrt(z - ed.eigenvalues[j]);
  }
  const Matrix k = ed.eigenvectors * k_diag.asDiagonal() * ed.eigenvectors.adjoint();
  Matrix s;
  if (x_tail <= a) {
    s = Matrix(2 * n, n);
    s.topRows(n) = Matrix::Identity(n, n);
    s.bottomRows(n) = k;
  } else {
    s = backward_weyl_frame(V, a, z, x_tail, Matrix::Identity(n, n), k, tol);
  }
  return m_from_frame(s, bc, tol);
}

WeylFunction::WeylFunction(PotentialSpec V, double a, BoundaryCondition bc,
                           TruncationSchedule schedule, Tolerances tol)
    : potential_(std::move(V)), a_(a), bc_(std::move(bc)), schedule_(schedule),
      tol_(tol) {}

WeylFunction::CacheEntry WeylFunction::evaluate(Complex z) const {
  if (z.imag() == 0.0) {
    throw SpectralError("m_function: Im z must be nonzero");
  }
  const double im_sqrt = principal_sqrt(z).imag();
  const double b0 = schedule_.b0_factor * std::max(1.0, 1.0 / std::abs(im_sqrt));
  double length = b0;
  Matrix prev = m_truncated(potential_, a_, bc_, z, a_ + length, CapType::kDirichlet, tol_);
  for (int k = 0; k < schedule_.max_doublings; ++k) {
    const double next_len = 2.0 * length;
    Matrix cur =
        m_truncated(potential_, a_, bc_, z, a_ + next_len, CapType::kDirichlet, tol_);
    const double gap = (cur - prev).cwiseAbs().maxCoeff();
    if (gap < schedule_.tol) {
      return CacheEntry{cur, a_ + next_len};
    }
    prev = std::move(cur);
    length = next_len;
  }
  std::ostringstream os;
  os << "m_function: truncation did not converge by b = " << a_ + length
     << " at z = (" << z.real() << "," << z.imag() << ")";
  throw TruncationNotConverged(os.str());
}

const WeylFunction::CacheEntry& WeylFunction::cached(Complex z) const {
  const std::pair<double, double> key{z.real(), z.imag()};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  CacheEntry entry = evaluate(z);
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(entry));
  return it->second;
}

Matrix WeylFunction::value(Complex z) const { return cached(z).m; }

double WeylFunction::achieved_truncation(Complex z) const { return cached(z).b; }

WeylSolutionSamples weyl_solution(const WeylFunction& wf, Complex z,
                                  const std::vector<double>& grid) {
  const Matrix m = wf.value(z);
  const FundamentalPair fp = fundamental_system(wf.potential(), z, wf.left_endpoint(),
                                                wf.boundary(), grid, wf.tolerances());
  WeylSolutionSamples out;
  out.grid = grid;
  out.psi.reserve(grid.size());
  out.psi_prime.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    out.psi.push_back(fp.theta[i] + fp.phi[i] * m);
    out.psi_prime.push_back(fp.theta_prime[i] + fp.phi_prime[i] * m);
  }
  return out;
}

Matrix GreensEvaluator::kernel(Complex z, double x, double xp) const {
  return greens_kernel(*wf_, z, x, xp);
}

Matrix greens_kernel(const WeylFunction& wf, Complex z, double x, double xp) {
  const double a = wf.left_endpoint();
  if (x < a || xp < a) throw GridOutsideDomain("greens_kernel: x below a");
  std::vector<double> grid{a, std::min(x, xp), std::max(x, xp)};
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double p, double q) { return std::abs(p - q) < 1e-14; }),
             grid.end());

  const FundamentalPair fp_z = fundamental_system(wf.potential(), z, a, wf.boundary(),
                                                  grid, wf.tolerances());
  const FundamentalPair fp_zb = fundamental_system(wf.potential(), std::conj(z), a,
                                                   wf.boundary(), grid, wf.tolerances());
  const Matrix m = wf.value(z);
  const Matrix m_zb = wf.value(std::conj(z));

  auto at = [&](const std::vector<double>& g, double v) {
    for (size_t i = 0; i < g.size(); ++i) {
      if (std::abs(g[i] - v) < 1e-14) return i;
    }
    throw SpectralError("greens_kernel: grid lookup failed");
  };
  const size_t ix = at(grid, x);
  const size_t ixp = at(grid, xp);
  if (x <= xp) {
    const Matrix psi_zb = fp_zb.theta[ixp] + fp_zb.phi[ixp] * m_zb;
    return fp_z.phi[ix] * psi_zb.adjoint();
  }
  const Matrix psi_z = fp_z.theta[ix] + fp_z.phi[ix] * m;
  return psi_z * fp_zb.phi[ixp].adjoint();
}

std::vector<Vector> resolvent_apply(const WeylFunction& wf, Complex z,
                                    const std::vector<double>& grid,
                                    const std::vector<Vector>& u) {
  const size_t npts = grid.size();
  if (u.size() != npts) throw GridMismatch("resolvent_apply: grid/sample mismatch");
  if (npts < 3 || npts % 2 == 0) {
    throw GridMismatch("resolvent_apply: need an odd number of uniform grid points");
  }
  const double h = grid[1] - grid[0];
  for (size_t i = 1; i < npts; ++i) {
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-10) {
      throw GridMismatch("resolvent_apply: grid must be uniform");
    }
  }

  const FundamentalPair fp_z = fundamental_system(wf.potential(), z, wf.left_endpoint(),
                                                  wf.boundary(), grid, wf.tolerances());
  const FundamentalPair fp_zb =
      fundamental_system(wf.potential(), std::conj(z), wf.left_endpoint(), wf.boundary(),
                         grid, wf.tolerances());
  const Matrix m = wf.value(z);
  const Matrix m_zb = wf.value(std::conj(z));

  std::vector<Matrix> phi_z(npts), psi_z(npts), phi_zb_adj(npts), psi_zb_adj(npts);
  for (size_t i = 0; i < npts; ++i) {
    phi_z[i] = fp_z.phi[i];
    psi_z[i] = fp_z.theta[i] + fp_z.phi[i] * m;
    phi_zb_adj[i] = fp_zb.phi[i].adjoint();
    psi_zb_adj[i] = (fp_zb.theta[i] + fp_zb.phi[i] * m_zb).adjoint();
  }

  // Simpson weights h/3 * {1,4,2,...,4,1}.
  std::vector<double> w(npts, 0.0);
  w.front() = w.back() = h / 3.0;
  for (size_t i = 1; i + 1 < npts; ++i) w[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;

  const int n = wf.potential().dim();
  // Prefix sums of the two kernel halves; the diagonal node belongs to the
  // left piece (both branch values of G coincide there by (2.7j)-type
  // cancellation, so the assignment is immaterial).
  std::vector<Vector> prefix(npts), suffix(npts);
  Vector acc = Vector::Zero(n);
  for (size_t j = 0; j < npts; ++j) {
    acc += w[j] * (phi_zb_adj[j] * u[j]);
    prefix[j] = acc;
  }
  acc = Vector::Zero(n);
  for (size_t j = npts; j-- > 0;) {
    acc += w[j] * (psi_zb_adj[j] * u[j]);
    suffix[j] = acc;
  }
  std::vector<Vector> v(npts, Vector::Zero(n));
  for (size_t i = 0; i < npts; ++i) {
    const Vector right = (i + 1 < npts) ? suffix[i + 1] : Vector::Zero(n).eval();
    v[i] = psi_z[i] * prefix[i] + phi_z[i] * right;
  }
  return v;
}

Matrix lft_boundary_change(const Matrix& m_alpha, const BoundaryCondition& bc_alpha,
                           const BoundaryCondition& bc_beta, const Tolerances& tol) {
  const Matrix& ca = bc_alpha.cos_alpha();
  const Matrix& sa = bc_alpha.sin_alpha();
  const Matrix& cb = bc_beta.cos_alpha();
  const Matrix& sb = bc_beta.sin_alpha();
  const Matrix a = cb * ca + sb * sa;
  const Matrix b = -cb * sa + sb * ca;
  const Matrix c = -sb * ca + cb * sa;
  const Matrix d = sb * sa + cb * ca;
  const Matrix pencil = a + b * m_alpha;
  if (condition_number(pencil) > tol.cond_limit) {
    throw SingularPencil("lft_boundary_change: A + B m singular");
  }
  return (c + d * m_alpha) * pencil.partialPivLu().inverse();
}

} // namespace wt
