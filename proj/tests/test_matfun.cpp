#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wt/errors.hpp"
#include "wt/matfun.hpp"

using namespace wt;

TEST_CASE("hermitian_eig: identity and symmetry-forced cases") {
  const EigDecomposition id = hermitian_eig(HermitianMatrix::Identity(2));
  CHECK(id.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(id.eigenvalues[1] == doctest::Approx(1.0));

  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const EigDecomposition ed = hermitian_eig(HermitianMatrix(swap));
  CHECK(ed.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(ed.eigenvalues[1] == doctest::Approx(1.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(ed.eigenvectors(0, 0)) == doctest::Approx(inv_sqrt2));
  CHECK(std::abs(ed.eigenvectors(1, 1)) == doctest::Approx(inv_sqrt2));
}

TEST_CASE("hermitian_eig: reconstruction residual on random 4x4") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = testutil::random_hermitian(4, rng);
    const HermitianMatrix hm(m);
    const EigDecomposition ed = hermitian_eig(hm);
    const Matrix rec = ed.eigenvectors *
                       ed.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>() *
                       ed.eigenvectors.adjoint();
    const double scale = std::max(1.0, hm.mat().cwiseAbs().maxCoeff());
    CHECK((rec - hm.mat()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    CHECK((ed.eigenvectors.adjoint() * ed.eigenvectors - Matrix::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
    for (int i = 1; i < 4; ++i) CHECK(ed.eigenvalues[i] >= ed.eigenvalues[i - 1]);
  }
}

TEST_CASE("hermitian_eig: deterministic output for fixed input") {
  std::mt19937_64 rng(11);
  const Matrix m = testutil::random_hermitian(3, rng);
  const EigDecomposition e1 = hermitian_eig(HermitianMatrix(m));
  const EigDecomposition e2 = hermitian_eig(HermitianMatrix(m));
  CHECK((e1.eigenvectors - e2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("HermitianMatrix rejects non-Hermitian input") {
  Matrix bad(2, 2);
  bad << 1, 2, 3, 4;
  CHECK_THROWS_AS(HermitianMatrix{bad}, NonHermitian);
}

TEST_CASE("matrix_fn: sin/cos of zero and scalar multiples") {
  const HermitianMatrix zero = HermitianMatrix::Zero(2);
  CHECK(matrix_fn(zero, [](double x) { return std::sin(x); }).mat().cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  CHECK((matrix_fn(zero, [](double x) { return std::cos(x); }).mat() -
         Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() == doctest::Approx(0.0));

  const HermitianMatrix half_pi(Matrix((M_PI / 2.0) * Matrix::Identity(3, 3)));
  CHECK((matrix_fn(half_pi, [](double x) { return std::sin(x); }).mat() -
         Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("matrix_fn: cos against the Taylor-series oracle") {
  Matrix m(2, 2);
  m << 0, M_PI / 2.0, M_PI / 2.0, 0;
  const Matrix via_eig = matrix_fn(HermitianMatrix(m), [](double x) { return std::cos(x); }).mat();
  // Eigenvalues are +-pi/2, so cos vanishes.
  CHECK(via_eig.cwiseAbs().maxCoeff() < 1e-14);
  const Matrix via_taylor = testutil::taylor_matrix_cos(m);
  CHECK((via_eig - via_taylor).cwiseAbs().maxCoeff() < 1e-10);

  std::mt19937_64 rng(13);
  const Matrix r = testutil::random_hermitian(3, rng);
  const Matrix c1 = matrix_fn(HermitianMatrix(r), [](double x) { return std::cos(x); }).mat();
  const Matrix c2 = testutil::taylor_matrix_cos(r, 12);
  CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matrix_fn: sin^2 + cos^2 = I for random Hermitian") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const HermitianMatrix m(testutil::random_hermitian(n, rng, 2.0));
    const Matrix s = matrix_fn(m, [](double x) { return std::sin(x); }).mat();
    const Matrix c = matrix_fn(m, [](double x) { return std::cos(x); }).mat();
    CHECK((s * s + c * c - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("principal_sqrt: branch and special values") {
  CHECK(std::abs(principal_sqrt(Complex(0, 2)) - Complex(1, 1)) < 1e-15);
  CHECK(std::abs(principal_sqrt(Complex(4, 0)) - Complex(2, 0)) < 1e-15);
  CHECK(std::abs(principal_sqrt(Complex(-1, 0)) - Complex(0, 1)) < 1e-15);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Complex z(u(rng), std::abs(u(rng)) + 1e-3);
    const Complex w = principal_sqrt(z);
    CHECK(std::abs(w * w - z) < 1e-12);
    // Upper half plane maps into the open first quadrant.
    CHECK(w.real() > 0.0);
    CHECK(w.imag() > 0.0);
    // The Im >= 0 branch flips sign under conjugation (cut on [0, inf)).
    const Complex wc = principal_sqrt(std::conj(z));
    CHECK(std::abs(wc + std::conj(w)) < 1e-12);
    CHECK(wc.imag() >= 0.0);
  }
}

TEST_CASE("psd_check tolerance semantics") {
  CHECK(psd_check(HermitianMatrix::Identity(3), 1e-12));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1e-3;
  CHECK_FALSE(psd_check(HermitianMatrix(d), 1e-6));
  d(1, 1) = -1e-9;
  CHECK(psd_check(HermitianMatrix(d), 1e-6));
}

TEST_CASE("BoundaryCondition invariants") {
  std::mt19937_64 rng(23);
  const BoundaryCondition bc(HermitianMatrix(testutil::random_hermitian(3, rng, 2.0)));
  const int n = 3;
  CHECK((bc.sin_alpha() * bc.sin_alpha() + bc.cos_alpha() * bc.cos_alpha() -
         Matrix::Identity(n, n))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK((bc.sin_alpha() * bc.cos_alpha() - bc.cos_alpha() * bc.sin_alpha())
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  const BoundaryCondition dir = BoundaryCondition::dirichlet(2);
  CHECK(dir.sin_alpha().cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const BoundaryCondition neu = BoundaryCondition::neumann(2);
  CHECK((neu.sin_alpha() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(neu.cos_alpha().cwiseAbs().maxCoeff() < 1e-14);
}
