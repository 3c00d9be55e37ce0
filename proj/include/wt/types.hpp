#pragma once

#include <complex>
#include <Eigen/Dense>

namespace wt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex kImagUnit{0.0, 1.0};

// Central tolerance record; every module reads its defaults from here.
struct Tolerances {
  double herm = 1e-12;         // relative Hermiticity defect on construction
  double identity = 1e-10;     // sin^2+cos^2=I and commutator checks
  double eig_residual = 1e-10; // eigendecomposition reconstruction
  double wronskian = 1e-8;     // Wronskian identity defect
  double ode_rel = 1e-10;      // integrator relative tolerance
  double ode_abs = 1e-12;      // integrator absolute tolerance
  double ode_residual = 1e-6;  // finite-difference residual of -y'' + (V-z)y
  double green = 1e-6;         // Green/Lagrange identity defect by quadrature
  double m_symmetry = 1e-8;    // m(z) = m(conj z)^* defect
  double psd = 1e-8;           // Herglotz PSD slack
  double truncation = 1e-8;    // ||m_{2b} - m_b|| stopping threshold
  double cap_agreement = 1e-6; // Dirichlet vs Neumann cap diagnostic
  double psd_clip = 1e-9;      // measure eigenvalue clipping threshold
  double psd_hard = 1e-6;      // beyond this, input is genuinely not Herglotz
  double cond_limit = 1e12;    // condition number treated as singular
};

inline const Tolerances& default_tol() {
  static const Tolerances tol{};
  return tol;
}

} // namespace wt
