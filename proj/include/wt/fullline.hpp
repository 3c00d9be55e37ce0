#pragma once

#include <vector>

#include "wt/expansion.hpp"
#include "wt/halfline.hpp"
#include "wt/herglotz.hpp"
#include "wt/types.hpp"

namespace wt {

struct BlockWeylMatrix {
  Matrix m00, m01, m10, m11;

  // Stacked 2n x 2n matrix.
  Matrix block() const;
};

// Full-line problem split at x0: half-line Weyl functions on both rays, the
// Wronskian W(z) = m_-(z) - m_+(z), the 2x2 block Weyl matrix, Green's
// function, 2n-dimensional spectral measure and the two-component transform.
class FullLineSystem {
 public:
  FullLineSystem(PotentialSpec V, double x0, BoundaryCondition bc,
                 TruncationSchedule schedule = {}, Tolerances tol = default_tol());

  const PotentialSpec& potential() const { return potential_; }
  double reference_point() const { return x0_; }
  const BoundaryCondition& boundary() const { return bc_; }
  const Tolerances& tolerances() const { return tol_; }

  // m_+ from the right ray; m_- from the reflected left ray with the sign
  // fixed so that the free scalar case gives m_-(2i) = 1 - i and -m_- is
  // Herglotz.
  Matrix m_plus(Complex z) const;
  Matrix m_minus(Complex z) const;
  Matrix wronskian(Complex z) const; // m_-(z) - m_+(z)

  BlockWeylMatrix block_weyl(Complex z) const;

  // G(z,x,x') = psi_-(z,x) W^{-1} psi_+(zbar,x')^* for x <= x', and with the
  // rays swapped for x >= x'.
  Matrix greens(Complex z, double x, double xp) const;

  // psi_pm = theta + phi m_pm sampled on a grid.
  WeylSolutionSamples weyl_solution_plus(Complex z, const std::vector<double>& grid) const;
  WeylSolutionSamples weyl_solution_minus(Complex z, const std::vector<double>& grid) const;

  // v(x) = int G(z,x,x') u(x') dx' by composite Simpson.
  std::vector<Vector> resolvent_apply(Complex z, const std::vector<double>& grid,
                                      const std::vector<Vector>& u) const;

  // 2n x 2n matrix evaluator z -> M_alpha(z) using the outgoing-tail m's
  // (valid down to the real axis for the supported potentials).
  Matrix block_weyl_outgoing(Complex z) const;

  // Omega measure over the partition, assembled entrywise on the block.
  MatrixMeasure spectral_measure(const std::vector<double>& partition,
                                 const AssemblyOptions& opts = {}) const;

  // hhat = (int theta^* h, int phi^* h)^T per cell/atom of Omega.
  TransformResult transform(const GridFunction& h, const MatrixMeasure& omega) const;
  GridFunction inverse_transform(const TransformResult& tr,
                                 const std::vector<double>& x_grid) const;

 private:
  Matrix m_plus_outgoing(Complex z) const;
  Matrix m_minus_outgoing(Complex z) const;
  // theta, phi at real lambda on a grid spanning x0 both ways.
  std::vector<std::pair<Matrix, Matrix>> sample_theta_phi(
      double lambda, const std::vector<double>& x_grid) const;

  PotentialSpec potential_;
  double x0_;
  BoundaryCondition bc_;
  BoundaryCondition bc_reflected_; // boundary operator -alpha for the left ray
  PotentialSpec reflected_;
  WeylFunction wf_plus_;
  WeylFunction wf_minus_reflected_;
  Tolerances tol_;
};

// Spectrum report (same semantics as the half-line one, 2n block).
std::vector<std::pair<double, double>> fullline_spectrum(const MatrixMeasure& omega,
                                                         double tol);

} // namespace wt
