#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wt/errors.hpp"
#include "wt/ivp.hpp"

using namespace wt;

namespace {

Vector e(int n, int j) {
  Vector v = Vector::Zero(n);
  v[j] = 1.0;
  return v;
}

} // namespace

TEST_CASE("solve_vector_ivp: constant and linear free solutions") {
  const PotentialSpec V = PotentialSpec::free(2);
  const auto grid = testutil::uniform_grid(-3.0, 5.0, 16);

  const VectorSolution c =
      solve_vector_ivp(V, 0.0, -3.0 + 3.0, e(2, 0), Vector::Zero(2), nullptr, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK((c.y[i] - e(2, 0)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(c.y_prime[i].cwiseAbs().maxCoeff() < 1e-11);
  }

  const double x0 = 0.0;
  const VectorSolution lin =
      solve_vector_ivp(V, 0.0, x0, Vector::Zero(2), e(2, 1), nullptr, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK((lin.y[i] - (grid[i] - x0) * e(2, 1)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("solve_vector_ivp: cosh closed form at z=-1") {
  const PotentialSpec V = PotentialSpec::free(1);
  const auto grid = testutil::uniform_grid(-5.0, 5.0, 40);
  const VectorSolution s =
      solve_vector_ivp(V, Complex(-1.0, 0.0), 0.0, e(1, 0), Vector::Zero(1), nullptr, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(s.y[i][0] - std::cosh(grid[i])) < 1e-8);
    CHECK(std::abs(s.y_prime[i][0] - std::sinh(grid[i])) < 1e-8);
  }
}

TEST_CASE("solve_vector_ivp: forcing and linearity") {
  const PotentialSpec V = PotentialSpec::free(1);
  const auto grid = testutil::uniform_grid(0.0, 2.0, 8);
  // -y'' - z y = f with z = 1, f = 1: particular solution y = -1.
  const auto f = [](double) { return Vector::Ones(1); };
  const VectorSolution s =
      solve_vector_ivp(V, Complex(1.0, 0.0), 0.0, -Vector::Ones(1), Vector::Zero(1), f, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(s.y[i][0] + 1.0) < 1e-9);
  }

  std::mt19937_64 rng(3);
  const Complex z(0.7, 0.3);
  const Vector h0a = testutil::random_vector(1, rng), h1a = testutil::random_vector(1, rng);
  const Vector h0b = testutil::random_vector(1, rng), h1b = testutil::random_vector(1, rng);
  const VectorSolution sa = solve_vector_ivp(V, z, 0.0, h0a, h1a, nullptr, grid);
  const VectorSolution sb = solve_vector_ivp(V, z, 0.0, h0b, h1b, nullptr, grid);
  const VectorSolution sab = solve_vector_ivp(V, z, 0.0, h0a + h0b, h1a + h1b, nullptr, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK((sab.y[i] - sa.y[i] - sb.y[i]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("solve_vector_ivp: residual of -y'' + (V-z)y via finite differences") {
  const PotentialSpec V =
      PotentialSpec::diagonal_wells({1.5, 0.8}, {2.0, 1.0}, {1.0, 2.0}, 0.0, 50.0);
  std::mt19937_64 rng(5);
  const double res = testutil::ode_residual(V, Complex(0.4, 0.8), 0.5,
                                            testutil::random_vector(2, rng),
                                            testutil::random_vector(2, rng), nullptr,
                                            0.0, 4.0);
  CHECK(res < 1e-6);
}

TEST_CASE("solve_vector_ivp: continuity in the data (Lipschitz ratio)") {
  const PotentialSpec V = PotentialSpec::coupled_channel({0.3, -0.2}, 0.4);
  const auto grid = testutil::uniform_grid(0.0, 3.0, 12);
  std::mt19937_64 rng(9);
  const Vector h0 = testutil::random_vector(2, rng);
  const Vector h1 = testutil::random_vector(2, rng);
  const Complex z(0.5, 1.0);
  const VectorSolution base = solve_vector_ivp(V, z, 0.0, h0, h1, nullptr, grid);
  const Vector dh = testutil::random_vector(2, rng);

  std::vector<double> ratios;
  for (double delta : {1e-3, 1e-4, 1e-5}) {
    const VectorSolution pert =
        solve_vector_ivp(V, z, 0.0, h0 + delta * dh, h1, nullptr, grid);
    double change = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      change = std::max(change, (pert.y[i] - base.y[i]).cwiseAbs().maxCoeff());
    }
    ratios.push_back(change / delta);
  }
  CHECK(ratios[0] / ratios[1] < 2.0);
  CHECK(ratios[1] / ratios[0] < 2.0);
  CHECK(ratios[1] / ratios[2] < 2.0);
  CHECK(ratios[2] / ratios[1] < 2.0);
}

TEST_CASE("solve_operator_ivp: constant-potential closed form and columns") {
  std::mt19937_64 rng(33);
  const Matrix v0 = testutil::random_hermitian(2, rng);
  const PotentialSpec V = PotentialSpec::constant(HermitianMatrix(v0));
  const Complex z(1.2, 0.7);
  const auto grid = testutil::uniform_grid(-2.0, 2.0, 8);
  const OperatorSolution sol = solve_operator_ivp(V, z, 0.0, Matrix::Identity(2, 2),
                                                  Matrix::Zero(2, 2), grid);

  // Oracle: decouple in the eigenbasis of V0, Y(x) = cos(sqrt(z - v) x).
  const EigDecomposition ed = hermitian_eig(HermitianMatrix(v0));
  for (size_t i = 0; i < grid.size(); ++i) {
    Vector diag(2);
    for (int j = 0; j < 2; ++j) {
      const Complex w = principal_sqrt(z - ed.eigenvalues[j]);
      diag[j] = std::cos(w * grid[i]);
    }
    const Matrix oracle =
        ed.eigenvectors * diag.asDiagonal() * ed.eigenvectors.adjoint();
    CHECK((sol.Y[i] - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }

  // Column equivalence with the vector solver.
  const VectorSolution col =
      solve_vector_ivp(V, z, 0.0, e(2, 1), Vector::Zero(2), nullptr, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK((sol.Y[i].col(1) - col.y[i]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fundamental_system: free Dirichlet closed form") {
  const PotentialSpec V = PotentialSpec::free(1);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const Complex z(2.0, 1.5);
  const Complex w = principal_sqrt(z);
  const auto grid = testutil::uniform_grid(0.0, 6.0, 24);
  const FundamentalPair fp = fundamental_system(V, z, 0.0, bc, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    CHECK(std::abs(fp.theta[i](0, 0) - std::cos(w * x)) < 1e-8);
    CHECK(std::abs(fp.phi[i](0, 0) - std::sin(w * x) / w) < 1e-8);
  }
}

TEST_CASE("fundamental_system: initial data seeded exactly") {
  std::mt19937_64 rng(21);
  const PotentialSpec V = PotentialSpec::coupled_channel({0.1, -0.3}, 0.25);
  const BoundaryCondition bc(HermitianMatrix(testutil::random_hermitian(2, rng)));
  const auto grid = testutil::uniform_grid(-1.0, 1.0, 4);
  const FundamentalPair fp = fundamental_system(V, Complex(0.3, 0.2), 0.0, bc, grid);
  const size_t i0 = 2; // x0 = 0 sits mid-grid
  CHECK((fp.theta[i0] - bc.cos_alpha()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fp.theta_prime[i0] - bc.sin_alpha()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fp.phi[i0] + bc.sin_alpha()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((fp.phi_prime[i0] - bc.cos_alpha()).cwiseAbs().maxCoeff() == 0.0);

  // At x0 the block composed with its claimed inverse is the identity
  // exactly, by sin^2 + cos^2 = I.
  const Matrix blk = fp.block(i0);
  const Matrix inv = conjugate_inverse_block(fp, i0);
  CHECK((inv * blk - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fundamental_system: coupled-channel rotation closed form") {
  const double c = 0.6;
  const PotentialSpec V = PotentialSpec::coupled_channel({0.0, 0.0}, c);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(2);
  const Complex z(1.0, 0.9);
  const auto grid = testutil::uniform_grid(0.0, 4.0, 16);
  const FundamentalPair fp = fundamental_system(V, z, 0.0, bc, grid);
  Matrix rot(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  rot << s, s, s, -s; // eigenbasis of the off-diagonal coupling
  for (size_t i = 0; i < grid.size(); ++i) {
    Vector diag(2);
    diag[0] = std::cos(principal_sqrt(z - c) * grid[i]);
    diag[1] = std::cos(principal_sqrt(z + c) * grid[i]);
    const Matrix oracle = rot * diag.asDiagonal() * rot.transpose();
    CHECK((fp.theta[i] - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("fundamental_system: all eight Wronskian identities on the grid") {
  std::mt19937_64 rng(41);
  const PotentialSpec V =
      PotentialSpec::diagonal_wells({1.0, 2.0}, {1.5, 0.8}, {1.2, 2.5}, 0.0, 50.0);
  const BoundaryCondition bc(HermitianMatrix(testutil::random_hermitian(2, rng)));
  const Complex z(0.8, 1.1);
  const auto grid = testutil::uniform_grid(0.0, 5.0, 20);
  const FundamentalPair fp = fundamental_system(V, z, 0.0, bc, grid);
  const FundamentalPair fpc = fundamental_system(V, std::conj(z), 0.0, bc, grid);
  const Matrix id = Matrix::Identity(4, 4);
  for (size_t i = 0; i < grid.size(); ++i) {
    const Matrix blk = fp.block(i);
    const Matrix inv = conjugate_inverse_block(fpc, i);
    CHECK((inv * blk - id).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((blk * inv - id).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("wronskian_vector: conjugate symmetry and constancy") {
  const PotentialSpec V = PotentialSpec::free(1);
  const auto grid = testutil::uniform_grid(0.0, 4.0, 16);
  const VectorSolution cst =
      solve_vector_ivp(V, 0.0, 0.0, e(1, 0), Vector::Zero(1), nullptr, grid);
  const VectorSolution lin =
      solve_vector_ivp(V, 0.0, 0.0, Vector::Zero(1), e(1, 0), nullptr, grid);
  const auto w = wronskian_vector(cst, lin);
  for (const Complex& v : w) CHECK(std::abs(v - 1.0) < 1e-10);

  // Real solution against itself vanishes.
  const auto w0 = wronskian_vector(cst, cst);
  for (const Complex& v : w0) CHECK(std::abs(v) < 1e-12);

  // Two random solutions of tau y = z y at real z: constant Wronskian
  // (drift scales with the integrator tolerance, so check it tight).
  std::mt19937_64 rng(55);
  const PotentialSpec W2 =
      PotentialSpec::diagonal_wells({0.7, 1.1}, {1.0, 2.0}, {1.0, 1.5}, 0.0, 50.0);
  const double z = 0.37;
  Vector h0a(2), h1a(2), h0b(2), h1b(2);
  h0a.real() << 1, -2;
  h0a.imag() << 0, 0;
  h1a.setZero();
  h0b.setZero();
  h1b.real() << 0.4, 0.9;
  h1b.imag() << 0, 0;
  Tolerances tight;
  tight.ode_rel = 1e-12;
  tight.ode_abs = 1e-13;
  const auto ga = solve_vector_ivp(W2, z, 0.0, h0a, h1a, nullptr, grid, tight);
  const auto gb = solve_vector_ivp(W2, z, 0.0, h0b, h1b, nullptr, grid, tight);
  const auto wab = wronskian_vector(ga, gb);
  for (const Complex& v : wab) CHECK(std::abs(v - wab.front()) < 1e-9);
}

TEST_CASE("wronskian_operator: paper identities as predicates") {
  std::mt19937_64 rng(57);
  const PotentialSpec V = PotentialSpec::coupled_channel({0.2, -0.1}, 0.35);
  const BoundaryCondition bc(HermitianMatrix(testutil::random_hermitian(2, rng)));
  const Complex z(0.9, 0.8);
  const auto grid = testutil::uniform_grid(0.0, 3.0, 12);
  const FundamentalPair fp = fundamental_system(V, z, 0.0, bc, grid);
  const FundamentalPair fpc = fundamental_system(V, std::conj(z), 0.0, bc, grid);

  // W(theta(zbar)^*, phi(z)) = I.
  std::vector<Matrix> t_adj, t_adj_prime;
  for (size_t i = 0; i < grid.size(); ++i) {
    t_adj.push_back(fpc.theta[i].adjoint());
    t_adj_prime.push_back(fpc.theta_prime[i].adjoint());
  }
  const auto w_tp = wronskian_operator(t_adj, t_adj_prime, fp.phi, fp.phi_prime);
  for (const auto& w : w_tp) {
    CHECK((w - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  }
  // W(theta(zbar)^*, theta(z)) = 0.
  const auto w_tt = wronskian_operator(t_adj, t_adj_prime, fp.theta, fp.theta_prime);
  for (const auto& w : w_tt) CHECK(w.cwiseAbs().maxCoeff() < 1e-8);

  // Scalar sanity: W(cos, sin) = 1 at z = 1, V = 0.
  const PotentialSpec F = PotentialSpec::free(1);
  const FundamentalPair ff =
      fundamental_system(F, Complex(1.0, 0.0), 0.0, BoundaryCondition::dirichlet(1), grid);
  const FundamentalPair ffc = ff; // real z: zbar = z
  std::vector<Matrix> c_adj, c_adj_prime;
  for (size_t i = 0; i < grid.size(); ++i) {
    c_adj.push_back(ffc.theta[i].adjoint());
    c_adj_prime.push_back(ffc.theta_prime[i].adjoint());
  }
  const auto w_free = wronskian_operator(c_adj, c_adj_prime, ff.phi, ff.phi_prime);
  for (const auto& w : w_free) CHECK(std::abs(w(0, 0) - 1.0) < 1e-9);
}

TEST_CASE("Green's formula (Lagrange identity) by quadrature") {
  const PotentialSpec V =
      PotentialSpec::diagonal_wells({0.9, 0.5}, {1.2, 1.7}, {1.0, 2.0}, 0.0, 50.0);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(2);
  const Complex z(0.6, 0.5);
  const int panels = 400;
  const auto grid = testutil::uniform_grid(0.25, 3.75, panels);
  const FundamentalPair fp = fundamental_system(V, z, 0.25, bc, grid);
  const FundamentalPair fpc = fundamental_system(V, std::conj(z), 0.25, bc, grid);

  // F = theta(zbar)^*, G = phi(z): tau F^* = zbar F^* so (tau F^*)^* G = z F G,
  // and F (tau G) = z F G; the volume term vanishes and the boundary
  // Wronskian difference must be zero. Checked against direct quadrature of
  // the integrand.
  Matrix integral = Matrix::Zero(2, 2);
  const double h = grid[1] - grid[0];
  for (size_t i = 0; i < grid.size(); ++i) {
    const double w = (i == 0 || i + 1 == grid.size()) ? h / 3.0
                     : (i % 2 == 1)                   ? 4.0 * h / 3.0
                                                      : 2.0 * h / 3.0;
    const Matrix f_adj = fpc.theta[i].adjoint();
    const Matrix g = fp.phi[i];
    integral += w * (std::conj(z) * f_adj.adjoint()).adjoint() * g;
    integral -= w * f_adj * (z * g);
  }
  auto boundary = [&](size_t i) {
    return fpc.theta[i].adjoint() * fp.phi_prime[i] -
           fpc.theta_prime[i].adjoint() * fp.phi[i];
  };
  const Matrix diff = boundary(grid.size() - 1) - boundary(0);
  CHECK((integral - diff).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("entirety surrogate: Cauchy-Riemann finite differences in z") {
  const PotentialSpec V = PotentialSpec::coupled_channel({0.15, -0.05}, 0.3);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(2);
  const std::vector<double> grid{0.0, 2.0};
  const Complex z0(0.7, 0.6);
  const double h = 1e-4;
  auto theta_at = [&](Complex z) {
    return fundamental_system(V, z, 0.0, bc, grid).theta.back();
  };
  const Matrix ddx = (theta_at(z0 + h) - theta_at(z0 - h)) / (2.0 * h);
  const Matrix ddy =
      (theta_at(z0 + Complex(0, h)) - theta_at(z0 - Complex(0, h))) / (Complex(0, 2.0 * h));
  CHECK((ddx - ddy).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("grid validation errors") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, 10.0);
  const auto grid = testutil::uniform_grid(-1.0, 1.0, 4);
  CHECK_THROWS_AS(
      solve_vector_ivp(V, 0.0, 0.0, e(1, 0), Vector::Zero(1), nullptr, grid),
      GridOutsideDomain);
  const auto grid2 = testutil::uniform_grid(0.0, 1.0, 4);
  CHECK_THROWS_AS(
      solve_vector_ivp(V, 0.0, 5.0, e(1, 0), Vector::Zero(1), nullptr, grid2),
      GridOutsideDomain);
}

TEST_CASE("wronskian_vector rejects mismatched grids") {
  const PotentialSpec V = PotentialSpec::free(1);
  const auto g1 = testutil::uniform_grid(0.0, 2.0, 4);
  const auto g2 = testutil::uniform_grid(0.0, 2.0, 8);
  const auto a = solve_vector_ivp(V, 0.0, 0.0, Vector::Ones(1), Vector::Zero(1), nullptr, g1);
  const auto b = solve_vector_ivp(V, 0.0, 0.0, Vector::Ones(1), Vector::Zero(1), nullptr, g2);
  CHECK_THROWS_AS(wronskian_vector(a, b), GridMismatch);
}
