#pragma once

#include <functional>
#include <vector>

#include "wt/matfun.hpp"
#include "wt/potential.hpp"
#include "wt/types.hpp"

namespace wt {

// Right-hand side of a first-order system d/dx S = rhs(x, S) with a matrix
// (or column-vector) state.
using OdeRhs = std::function<Matrix(double, const Matrix&)>;

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  // Points the integrator must land on exactly (potential kinks).
  std::vector<double> mandatory_stops;
  double max_step = 0.0; // 0 = unlimited
};

// Adaptive Dormand-Prince 5(4) sweep from x_from through the sorted output
// points xs (monotone, all >= x_from or all <= x_from); states at the output
// points are produced by the order-4 continuous extension and handed to
// sink(index, state, state_is_node). Returns the final state.
Matrix integrate_dense(const OdeRhs& rhs, const Matrix& s0, double x_from,
                       const std::vector<double>& xs, const IntegratorOptions& opt,
                       const std::function<void(size_t, const Matrix&)>& sink);

// Single-target convenience wrapper.
Matrix integrate_to(const OdeRhs& rhs, const Matrix& s0, double x_from, double x_to,
                    const IntegratorOptions& opt);

struct VectorSolution {
  Complex z;
  double x0 = 0.0;
  std::vector<double> grid;
  std::vector<Vector> y;
  std::vector<Vector> y_prime;
};

struct OperatorSolution {
  Complex z;
  double x0 = 0.0;
  std::vector<double> grid;
  std::vector<Matrix> Y;
  std::vector<Matrix> Y_prime;
};

// theta, phi and their x-derivatives on a grid, seeded at x0 with the
// sine/cosine initial data of the boundary condition.
struct FundamentalPair {
  Complex z;
  double x0 = 0.0;
  std::vector<double> grid;
  std::vector<Matrix> theta, theta_prime, phi, phi_prime;
  Matrix sin_alpha, cos_alpha;

  // 2n x 2n block [[theta, phi], [theta', phi']] at grid index i.
  Matrix block(size_t i) const;
};

// -y'' + (V - z) y = f with y(x0) = h0, y'(x0) = h1. The grid must contain
// x0 and stay inside the potential's domain; pass f = nullptr for the
// homogeneous equation.
VectorSolution solve_vector_ivp(const PotentialSpec& V, Complex z, double x0,
                                const Vector& h0, const Vector& h1,
                                const std::function<Vector(double)>& f,
                                const std::vector<double>& grid,
                                const Tolerances& tol = default_tol());

// Columnwise analogue with operator initial data (homogeneous only).
OperatorSolution solve_operator_ivp(const PotentialSpec& V, Complex z, double x0,
                                    const Matrix& Y0, const Matrix& Y1,
                                    const std::vector<double>& grid,
                                    const Tolerances& tol = default_tol());

FundamentalPair fundamental_system(const PotentialSpec& V, Complex z, double x0,
                                   const BoundaryCondition& bc,
                                   const std::vector<double>& grid,
                                   const Tolerances& tol = default_tol());

// W_*(f1,f2)(x) = (f1, f2')_H - (f1', f2)_H per grid point.
std::vector<Complex> wronskian_vector(const VectorSolution& f1,
                                      const VectorSolution& f2);

// W(F1,F2)(x) = F1 F2' - F1' F2 per grid point.
std::vector<Matrix> wronskian_operator(const std::vector<Matrix>& F1,
                                       const std::vector<Matrix>& F1_prime,
                                       const std::vector<Matrix>& F2,
                                       const std::vector<Matrix>& F2_prime);

// Inverse block [[phi'(zbar)^*, -phi(zbar)^*], [-theta'(zbar)^*, theta(zbar)^*]]
// built from the conjugate-parameter pair; multiplying block() by it in either
// order recovers the identity.
Matrix conjugate_inverse_block(const FundamentalPair& at_zbar, size_t i);

} // namespace wt
