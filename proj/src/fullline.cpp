#include "wt/fullline.hpp"

#include <algorithm>
#include <cmath>

#include "wt/errors.hpp"

namespace wt {

namespace {

BoundaryCondition negated(const BoundaryCondition& bc) {
  return BoundaryCondition(HermitianMatrix(Matrix(-bc.alpha())));
}

Matrix invert_checked(const Matrix& w, const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(w);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || svd.singularValues().maxCoeff() / smin > tol.cond_limit) {
    throw SingularW("full line: Wronskian m_- - m_+ numerically singular");
  }
  return w.partialPivLu().inverse();
}

} // namespace

Matrix BlockWeylMatrix::block() const {
  const int n = static_cast<int>(m00.rows());
  Matrix b(2 * n, 2 * n);
  b.topLeftCorner(n, n) = m00;
  b.topRightCorner(n, n) = m01;
  b.bottomLeftCorner(n, n) = m10;
  b.bottomRightCorner(n, n) = m11;
  return b;
}

FullLineSystem::FullLineSystem(PotentialSpec V, double x0, BoundaryCondition bc,
                               TruncationSchedule schedule, Tolerances tol)
    : potential_(std::move(V)), x0_(x0), bc_(std::move(bc)),
      bc_reflected_(negated(bc_)), reflected_(potential_.reflected(x0)),
      wf_plus_(potential_, x0, bc_, schedule, tol),
      wf_minus_reflected_(reflected_, x0, bc_reflected_, schedule, tol), tol_(tol) {}

Matrix FullLineSystem::m_plus(Complex z) const { return wf_plus_.value(z); }

Matrix FullLineSystem::m_minus(Complex z) const {
  // Reflection x -> 2 x0 - x maps the left ray onto a right half-line problem
  // with boundary operator -alpha; the derivative flip gives m_- = -m~_+.
  return -wf_minus_reflected_.value(z);
}

Matrix FullLineSystem::wronskian(Complex z) const { return m_minus(z) - m_plus(z); }

Matrix FullLineSystem::m_plus_outgoing(Complex z) const {
  return m_outgoing(potential_, x0_, bc_, z, tol_);
}

Matrix FullLineSystem::m_minus_outgoing(Complex z) const {
  return -m_outgoing(reflected_, x0_, bc_reflected_, z, tol_);
}

namespace {

BlockWeylMatrix build_block(const Matrix& mp, const Matrix& mm, const Tolerances& tol) {
  BlockWeylMatrix out;
  const Matrix w = mm - mp;
  const Matrix winv = invert_checked(w, tol);
  out.m00 = winv;
  out.m01 = 0.5 * winv * (mm + mp);
  out.m10 = 0.5 * (mm + mp) * winv;
  out.m11 = mp * winv * mm;
  const Matrix m11_alt = mm * winv * mp;
  if ((out.m11 - m11_alt).cwiseAbs().maxCoeff() >
      1e-8 * std::max(1.0, out.m11.cwiseAbs().maxCoeff())) {
    throw SpectralError("block_weyl: the two M_11 orderings disagree");
  }
  return out;
}

} // namespace

BlockWeylMatrix FullLineSystem::block_weyl(Complex z) const {
  return build_block(m_plus(z), m_minus(z), tol_);
}

Matrix FullLineSystem::block_weyl_outgoing(Complex z) const {
  return build_block(m_plus_outgoing(z), m_minus_outgoing(z), tol_).block();
}

WeylSolutionSamples FullLineSystem::weyl_solution_plus(
    Complex z, const std::vector<double>& grid) const {
  const Matrix m = m_plus(z);
  const FundamentalPair fp = fundamental_system(potential_, z, x0_, bc_, grid, tol_);
  WeylSolutionSamples out;
  out.grid = grid;
  for (size_t i = 0; i < grid.size(); ++i) {
    out.psi.push_back(fp.theta[i] + fp.phi[i] * m);
    out.psi_prime.push_back(fp.theta_prime[i] + fp.phi_prime[i] * m);
  }
  return out;
}

WeylSolutionSamples FullLineSystem::weyl_solution_minus(
    Complex z, const std::vector<double>& grid) const {
  const Matrix m = m_minus(z);
  const FundamentalPair fp = fundamental_system(potential_, z, x0_, bc_, grid, tol_);
  WeylSolutionSamples out;
  out.grid = grid;
  for (size_t i = 0; i < grid.size(); ++i) {
    out.psi.push_back(fp.theta[i] + fp.phi[i] * m);
    out.psi_prime.push_back(fp.theta_prime[i] + fp.phi_prime[i] * m);
  }
  return out;
}

Matrix FullLineSystem::greens(Complex z, double x, double xp) const {
  std::vector<double> grid{x0_, std::min(x, xp), std::max(x, xp)};
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double p, double q) { return std::abs(p - q) < 1e-14; }),
             grid.end());
  const FundamentalPair fp_z = fundamental_system(potential_, z, x0_, bc_, grid, tol_);
  const FundamentalPair fp_zb =
      fundamental_system(potential_, std::conj(z), x0_, bc_, grid, tol_);
  const Matrix winv = invert_checked(wronskian(z), tol_);
  const Matrix mp = m_plus(z), mm = m_minus(z);
  const Matrix mp_zb = m_plus(std::conj(z)), mm_zb = m_minus(std::conj(z));

  auto at = [&](double v) {
    for (size_t i = 0; i < grid.size(); ++i) {
      if (std::abs(grid[i] - v) < 1e-14) return i;
    }
    throw SpectralError("fullline greens: grid lookup failed");
  };
  const size_t ix = at(x), ixp = at(xp);
  if (x <= xp) {
    const Matrix psi_minus = fp_z.theta[ix] + fp_z.phi[ix] * mm;
    const Matrix psi_plus_zb = fp_zb.theta[ixp] + fp_zb.phi[ixp] * mp_zb;
    return psi_minus * winv * psi_plus_zb.adjoint();
  }
  const Matrix psi_plus = fp_z.theta[ix] + fp_z.phi[ix] * mp;
  const Matrix psi_minus_zb = fp_zb.theta[ixp] + fp_zb.phi[ixp] * mm_zb;
  return psi_plus * winv * psi_minus_zb.adjoint();
}

std::vector<Vector> FullLineSystem::resolvent_apply(Complex z,
                                                    const std::vector<double>& grid,
                                                    const std::vector<Vector>& u) const {
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
  std::vector<double> full = grid;
  if (x0_ < full.front()) full.insert(full.begin(), x0_);
  if (x0_ > full.back()) full.push_back(x0_);
  bool has_x0 = false;
  for (double g : full) {
    if (std::abs(g - x0_) < 1e-14) has_x0 = true;
  }
  if (!has_x0) {
    full.push_back(x0_);
    std::sort(full.begin(), full.end());
  }

  const FundamentalPair fp_z = fundamental_system(potential_, z, x0_, bc_, full, tol_);
  const FundamentalPair fp_zb =
      fundamental_system(potential_, std::conj(z), x0_, bc_, full, tol_);
  const Matrix winv = invert_checked(wronskian(z), tol_);
  const Matrix mp = m_plus(z), mm = m_minus(z);
  const Matrix mp_zb = m_plus(std::conj(z)), mm_zb = m_minus(std::conj(z));

  // Restrict the sampled solutions back to the quadrature grid.
  std::vector<size_t> idx(npts);
  {
    size_t j = 0;
    for (size_t i = 0; i < npts; ++i) {
      while (std::abs(full[j] - grid[i]) > 1e-14) ++j;
      idx[i] = j;
    }
  }
  const int n = potential_.dim();
  std::vector<Matrix> psi_m(npts), psi_p(npts), psi_p_zb_adj(npts), psi_m_zb_adj(npts);
  for (size_t i = 0; i < npts; ++i) {
    const size_t j = idx[i];
    psi_m[i] = fp_z.theta[j] + fp_z.phi[j] * mm;
    psi_p[i] = fp_z.theta[j] + fp_z.phi[j] * mp;
    psi_p_zb_adj[i] = (fp_zb.theta[j] + fp_zb.phi[j] * mp_zb).adjoint();
    psi_m_zb_adj[i] = (fp_zb.theta[j] + fp_zb.phi[j] * mm_zb).adjoint();
  }

  std::vector<double> w(npts, 0.0);
  w.front() = w.back() = h / 3.0;
  for (size_t i = 1; i + 1 < npts; ++i) w[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;

  // v(x) = psi_+(x) Winv int_{x' <= x} psi_-(zbar,x')^* u
  //      + psi_-(x) Winv int_{x' >= x} psi_+(zbar,x')^* u.
  std::vector<Vector> prefix(npts), suffix(npts);
  Vector acc = Vector::Zero(n);
  for (size_t j = 0; j < npts; ++j) {
    acc += w[j] * (psi_m_zb_adj[j] * u[j]);
    prefix[j] = acc;
  }
  acc = Vector::Zero(n);
  for (size_t j = npts; j-- > 0;) {
    acc += w[j] * (psi_p_zb_adj[j] * u[j]);
    suffix[j] = acc;
  }
  std::vector<Vector> v(npts, Vector::Zero(n));
  for (size_t i = 0; i < npts; ++i) {
    const Vector right = (i + 1 < npts) ? suffix[i + 1] : Vector::Zero(n).eval();
    v[i] = psi_p[i] * (winv * prefix[i]) + psi_m[i] * (winv * right);
  }
  return v;
}

MatrixMeasure FullLineSystem::spectral_measure(const std::vector<double>& partition,
                                               const AssemblyOptions& opts) const {
  const HerglotzEvaluator m_eval = [this](Complex z) { return block_weyl_outgoing(z); };
  return assemble_measure(m_eval, partition, opts, tol_);
}

std::vector<std::pair<Matrix, Matrix>> FullLineSystem::sample_theta_phi(
    double lambda, const std::vector<double>& x_grid) const {
  std::vector<double> grid = x_grid;
  bool has_x0 = false;
  for (double g : grid) {
    if (std::abs(g - x0_) < 1e-14) has_x0 = true;
  }
  if (!has_x0) {
    grid.push_back(x0_);
    std::sort(grid.begin(), grid.end());
  }
  const FundamentalPair fp =
      fundamental_system(potential_, Complex(lambda, 0.0), x0_, bc_, grid, tol_);
  std::vector<std::pair<Matrix, Matrix>> out;
  out.reserve(x_grid.size());
  size_t j = 0;
  for (size_t i = 0; i < x_grid.size(); ++i) {
    while (std::abs(grid[j] - x_grid[i]) > 1e-14) ++j;
    out.emplace_back(fp.theta[j], fp.phi[j]);
  }
  return out;
}

TransformResult FullLineSystem::transform(const GridFunction& h,
                                          const MatrixMeasure& omega) const {
  h.check_simpson();
  const int n = potential_.dim();
  if (omega.dim != 2 * n) throw PartitionMismatch("fullline transform: need a 2n measure");
  std::vector<double> w(h.x.size(), 0.0);
  const double hx = h.spacing();
  w.front() = w.back() = hx / 3.0;
  for (size_t i = 1; i + 1 < h.x.size(); ++i) {
    w[i] = (i % 2 == 1) ? 4.0 * hx / 3.0 : 2.0 * hx / 3.0;
  }

  TransformResult tr;
  tr.measure = omega;
  tr.source_grid = h.x;
  tr.block = 2 * n;
  tr.samples.resize(omega.num_cells());
  tr.atom_samples.resize(omega.point_masses.size());

  auto hat_at = [&](double lambda) {
    const auto tp = sample_theta_phi(lambda, h.x);
    Vector acc = Vector::Zero(2 * n);
    for (size_t i = 0; i < h.x.size(); ++i) {
      acc.head(n) += w[i] * (tp[i].first.adjoint() * h.values[i]);
      acc.tail(n) += w[i] * (tp[i].second.adjoint() * h.values[i]);
    }
    return acc;
  };
  for (size_t k = 0; k < omega.num_cells(); ++k) tr.samples[k] = hat_at(omega.cell_mid(k));
  for (size_t k = 0; k < omega.point_masses.size(); ++k) {
    tr.atom_samples[k] = hat_at(omega.point_masses[k].lambda);
  }
  return tr;
}

GridFunction FullLineSystem::inverse_transform(const TransformResult& tr,
                                               const std::vector<double>& x_grid) const {
  const int n = potential_.dim();
  GridFunction out;
  out.x = x_grid;
  out.values.assign(x_grid.size(), Vector::Zero(n));
  const MatrixMeasure& omega = tr.measure;
  auto accumulate = [&](double lambda, const Matrix& mass, const Vector& sample) {
    const Vector weighted = mass * sample;
    if (weighted.cwiseAbs().maxCoeff() == 0.0) return;
    const auto tp = sample_theta_phi(lambda, x_grid);
    for (size_t i = 0; i < x_grid.size(); ++i) {
      out.values[i] += tp[i].first * weighted.head(n) + tp[i].second * weighted.tail(n);
    }
  };
  for (size_t k = 0; k < omega.num_cells(); ++k) {
    if (tr.samples[k].cwiseAbs().maxCoeff() == 0.0) continue;
    accumulate(omega.cell_mid(k), omega.cell_mass[k], tr.samples[k]);
  }
  for (size_t k = 0; k < omega.point_masses.size(); ++k) {
    accumulate(omega.point_masses[k].lambda, omega.point_masses[k].mass,
               tr.atom_samples[k]);
  }
  return out;
}

std::vector<std::pair<double, double>> fullline_spectrum(const MatrixMeasure& omega,
                                                         double tol) {
  return support_and_spectrum(omega, tol);
}

} // namespace wt
