#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "wt/ivp.hpp"
#include "wt/matfun.hpp"
#include "wt/potential.hpp"
#include "wt/types.hpp"

namespace wt {

enum class CapType { kDirichlet, kNeumann };

struct TruncationSchedule {
  double b0_factor = 20.0;   // b0 = factor * max(1, 1/|Im sqrt(z)|)
  int max_doublings = 10;    // b_max = 2^max_doublings * b0
  double tol = 1e-8;         // ||m_{2b} - m_b|| stopping threshold
};

// Single truncated evaluation: integrate the capped solution backward from
// a + length to a with right-factor QR renormalization and form
// m_b = (cos(alpha) U'(a) - sin(alpha) U(a)) N^{-1},
// N  =  sin(alpha) U'(a) + cos(alpha) U(a).
Matrix m_truncated(const PotentialSpec& V, double a, const BoundaryCondition& bc,
                   Complex z, double b, CapType cap = CapType::kDirichlet,
                   const Tolerances& tol = default_tol());

// Exact evaluation for eventually-constant potentials: seed the decaying
// (outgoing) tail solution at the point where V becomes constant and
// integrate back to a. Valid down to Im z = 0 away from thresholds and
// eigenvalues; agrees with the truncated construction where both converge.
Matrix m_outgoing(const PotentialSpec& V, double a, const BoundaryCondition& bc,
                  Complex z, const Tolerances& tol = default_tol());

// z -> m_alpha(z) with the doubling truncation schedule and a cache of
// achieved values. Evaluations at distinct z may run concurrently.
class WeylFunction {
 public:
  WeylFunction(PotentialSpec V, double a, BoundaryCondition bc,
               TruncationSchedule schedule = {}, Tolerances tol = default_tol());

  Matrix value(Complex z) const;
  // Truncation length that met the doubling tolerance for this z.
  double achieved_truncation(Complex z) const;

  const PotentialSpec& potential() const { return potential_; }
  double left_endpoint() const { return a_; }
  const BoundaryCondition& boundary() const { return bc_; }
  const Tolerances& tolerances() const { return tol_; }
  const TruncationSchedule& schedule() const { return schedule_; }

 private:
  struct CacheEntry {
    Matrix m;
    double b = 0.0;
  };
  CacheEntry evaluate(Complex z) const;
  const CacheEntry& cached(Complex z) const;

  PotentialSpec potential_;
  double a_;
  BoundaryCondition bc_;
  TruncationSchedule schedule_;
  Tolerances tol_;

  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, CacheEntry> cache_;
};

inline Matrix m_function(const WeylFunction& wf, Complex z) { return wf.value(z); }

struct WeylSolutionSamples {
  std::vector<double> grid;
  std::vector<Matrix> psi;
  std::vector<Matrix> psi_prime;
};

// psi_alpha = theta_alpha + phi_alpha m_alpha on the grid.
WeylSolutionSamples weyl_solution(const WeylFunction& wf, Complex z,
                                  const std::vector<double>& grid);

// Green's function of H_alpha:
//   G(z,x,x') = phi(z,x,a) psi(zbar,x')^*   for x <= x',
//               psi(z,x) phi(zbar,x',a)^*   for x' <= x.
class GreensEvaluator {
 public:
  explicit GreensEvaluator(const WeylFunction& wf) : wf_(&wf) {}
  Matrix kernel(Complex z, double x, double xp) const;

 private:
  const WeylFunction* wf_;
};

Matrix greens_kernel(const WeylFunction& wf, Complex z, double x, double xp);

// v(x) = int G(z,x,x') u(x') dx' by composite Simpson on the grid (which
// must be uniform with an even number of panels).
std::vector<Vector> resolvent_apply(const WeylFunction& wf, Complex z,
                                    const std::vector<double>& grid,
                                    const std::vector<Vector>& u);

// m_beta = (C + D m_alpha)(A + B m_alpha)^{-1} with the sine/cosine block
// coefficients of the two boundary conditions.
Matrix lft_boundary_change(const Matrix& m_alpha, const BoundaryCondition& bc_alpha,
                           const BoundaryCondition& bc_beta,
                           const Tolerances& tol = default_tol());

} // namespace wt
