#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "wt/errors.hpp"
#include "wt/expansion.hpp"
#include "wt/fdoracle.hpp"
#include "wt/halfline.hpp"

using namespace wt;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// sin^8 bump on [lo, hi], zero outside: C^7 at the edges, so its transform
// decays like k^{-8}. Its top Fourier component sits at k = 8 pi / (hi-lo);
// the support must be wide enough that this stays inside the spectral
// window (width 2 puts it at lambda ~ 158, well below 400).
double bump(double x, double lo, double hi) {
  if (x <= lo || x >= hi) return 0.0;
  const double s = std::sin(M_PI * (x - lo) / (hi - lo));
  return std::pow(s, 8);
}

GridFunction bump_function(double lo, double hi, double grid_lo, double grid_hi,
                           int panels) {
  GridFunction h;
  h.x = testutil::uniform_grid(grid_lo, grid_hi, panels);
  h.values.reserve(h.x.size());
  for (double x : h.x) {
    Vector v(1);
    v[0] = bump(x, lo, hi);
    h.values.push_back(v);
  }
  return h;
}

MatrixMeasure free_dirichlet_measure(double lo, double hi, int cells,
                                     int quad_points = 8) {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const HerglotzEvaluator m = [V, bc](Complex z) { return m_outgoing(V, 0.0, bc, z); };
  AssemblyOptions opts;
  opts.quad_points = quad_points;
  opts.detect_atoms = false;
  return assemble_measure(m, uniform_partition(lo, hi, cells), opts);
}

} // namespace

TEST_CASE("forward_transform: zero input and linearity") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 30.0, 30);

  GridFunction zero;
  zero.x = testutil::uniform_grid(0.0, 2.0, 64);
  zero.values.assign(zero.x.size(), Vector::Zero(1));
  const TransformResult t0 = forward_transform(V, 0.0, bc, zero, rho);
  for (const auto& s : t0.samples) CHECK(s.cwiseAbs().maxCoeff() == 0.0);

  GridFunction f = bump_function(0.3, 1.2, 0.0, 2.0, 64);
  GridFunction g = bump_function(0.8, 1.9, 0.0, 2.0, 64);
  GridFunction fg = f;
  for (size_t i = 0; i < fg.x.size(); ++i) {
    fg.values[i] = Complex(2.0, 0.0) * f.values[i] + Complex(0.0, 1.0) * g.values[i];
  }
  const TransformResult tf = forward_transform(V, 0.0, bc, f, rho);
  const TransformResult tg = forward_transform(V, 0.0, bc, g, rho);
  const TransformResult tfg = forward_transform(V, 0.0, bc, fg, rho);
  for (size_t k = 0; k < rho.num_cells(); ++k) {
    const Vector lin = Complex(2.0, 0.0) * tf.samples[k] + Complex(0.0, 1.0) * tg.samples[k];
    CHECK((tfg.samples[k] - lin).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("forward_transform: free Dirichlet indicator closed form") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.5, 120.0, 40);

  // h = chi_[0,1] sampled on exactly [0,1]: the integrand has no interior
  // kink there and Simpson converges at full order.
  GridFunction h;
  h.x = testutil::uniform_grid(0.0, 1.0, 512);
  h.values.assign(h.x.size(), Vector::Ones(1));
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);
  for (size_t k = 0; k < rho.num_cells(); ++k) {
    const double lam = rho.cell_mid(k);
    const double expect = (1.0 - std::cos(std::sqrt(lam))) / lam;
    CHECK(std::abs(tr.samples[k][0] - expect) < 1e-8);
  }
}

TEST_CASE("model_inner_product: indicator element meets (e, rho(B) e)") {
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 10.0, 20);
  ModelSpaceElement u;
  u.cell_values.assign(rho.num_cells(), Vector::Zero(1));
  for (size_t k = 0; k < rho.num_cells(); ++k) {
    if (rho.cell_lo(k) >= 2.0 - 1e-12 && rho.cell_hi(k) <= 6.0 + 1e-12) {
      u.cell_values[k] = Vector::Ones(1);
    }
  }
  const Complex got = model_inner_product(u, u, rho);
  const Matrix expect = rho.mass_on(2.0, 6.0);
  CHECK(std::abs(got - expect(0, 0)) < 1e-12);

  // Zero measure gives zero.
  MatrixMeasure zero = rho;
  for (auto& c : zero.cell_mass) c.setZero();
  ModelSpaceElement v = u;
  CHECK(std::abs(model_inner_product(u, v, zero)) == 0.0);
}

TEST_CASE("Parseval for the indicator with an explicit tail bound") {
  // || h ||^2 = 1 for h = chi_[0,1]; the window [0,200] misses the slowly
  // decaying tail whose size we compute independently:
  //   tail = (2/pi) int_{sqrt(200)}^inf (1-cos k)^2 / k^2 dk.
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 200.0, 2000);

  GridFunction h;
  h.x = testutil::uniform_grid(0.0, 1.0, 512);
  h.values.assign(h.x.size(), Vector::Ones(1));
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);
  const double parseval = std::real(model_inner_product(tr, tr));

  double tail = 0.0;
  const double k0 = std::sqrt(200.0);
  const int nq = 2000000;
  const double kmax = 4000.0;
  const double dk = (kmax - k0) / nq;
  for (int i = 0; i < nq; ++i) {
    const double k = k0 + (i + 0.5) * dk;
    const double s = (1.0 - std::cos(k)) / k;
    tail += (2.0 / M_PI) * s * s * dk;
  }
  tail += (2.0 / M_PI) * 1.5 / kmax; // mean of (1-cos)^2 over the far tail
  CHECK(std::abs(parseval + tail - 1.0) < 2e-3);
}

TEST_CASE("Parseval and polarization for a smooth bump") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 400.0, 4000);

  const GridFunction h = bump_function(0.8, 2.8, 0.0, 3.2, 800);
  const double norm2 = std::norm(l2_norm(h));
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);
  const double parseval = std::real(model_inner_product(tr, tr));
  CHECK(std::abs(parseval - norm2) <= 5e-3 * norm2);

  // Polarization: (f,g) from the four norms matches the direct pairing.
  const GridFunction g = bump_function(1.0, 3.0, 0.0, 3.2, 800);
  const TransformResult tg = forward_transform(V, 0.0, bc, g, rho);
  const Complex direct = model_inner_product(tr, tg);
  auto norm_of = [&](Complex a) {
    TransformResult mixed = tr;
    for (size_t k = 0; k < mixed.samples.size(); ++k) {
      mixed.samples[k] = tr.samples[k] + a * tg.samples[k];
    }
    return std::real(model_inner_product(mixed, mixed));
  };
  const double n0 = norm_of(1.0), n1 = norm_of(-1.0), n2 = norm_of(kImagUnit),
               n3 = norm_of(-kImagUnit);
  const Complex polarized =
      0.25 * (Complex(n0 - n1, 0.0) + kImagUnit * (n2 - n3));
  CHECK(std::abs(polarized - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("inverse_transform round trip for a smooth bump") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 400.0, 4000);
  const GridFunction h = bump_function(0.8, 2.8, 0.0, 3.2, 800);
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);

  const GridFunction rec = inverse_transform(tr, V, 0.0, bc, h.x);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < h.x.size(); ++i) {
    num += std::norm(rec.values[i][0] - h.values[i][0]);
    den += std::norm(h.values[i][0]);
  }
  CHECK(std::sqrt(num / den) <= 5e-3);

  // Zero transform inverts to zero.
  TransformResult zero = tr;
  for (auto& s : zero.samples) s.setZero();
  const GridFunction z = inverse_transform(zero, V, 0.0, bc, h.x);
  for (const auto& v : z.values) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral projection through the transform matches the oracle") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  // Only cells inside the projection window enter the reconstruction, so a
  // short fine window beats a long coarse one.
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 5.0, 500);
  const GridFunction h = bump_function(0.8, 2.8, 0.0, 3.2, 800);
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);

  const PotentialSpec Vo = PotentialSpec::free(1, 0.0, 30.0);
  const DiscretizedOperator op = DiscretizedOperator::half_line(Vo, 0.0, 30.0, bc, 0.0075);

  // Window edges sit midway between the oracle's discrete eigenvalues, so
  // both sides agree on which modes belong to the window.
  auto midgap = [&](double target) {
    const RealVector& ev = op.eigenvalues();
    for (int k = 0; k + 1 < ev.size(); ++k) {
      if (ev[k] <= target && ev[k + 1] > target) {
        return 0.5 * (ev[k] + ev[k + 1]);
      }
    }
    return target;
  };
  const double l1 = midgap(1.0), l2 = midgap(4.0);
  const TransformResult restricted = restrict_window(tr, l1, l2);
  const GridFunction proj = inverse_transform(restricted, V, 0.0, bc, h.x);

  OracleGridFunction uo;
  uo.x = op.nodes();
  uo.values.assign(uo.x.size(), Vector::Zero(1));
  for (size_t i = 0; i < uo.x.size(); ++i) uo.values[i][0] = bump(uo.x[i], 0.8, 2.8);
  const OracleGridFunction po = op.projection(l1, l2, uo);

  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < h.x.size(); ++i) {
    const double x = h.x[i];
    const size_t j = static_cast<size_t>(std::llround(x / op.spacing()));
    if (j >= po.values.size()) continue;
    num += std::norm(proj.values[i][0] - po.values[j][0]);
    den += std::norm(po.values[j][0]);
  }
  CHECK(std::sqrt(num / den) < 5e-3);
}

TEST_CASE("apply_function_of_h: identity, multiplication, H action") {
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 400.0, 4000);
  const GridFunction h = bump_function(0.8, 2.8, 0.0, 3.2, 800);
  const TransformResult tr = forward_transform(V, 0.0, bc, h, rho);

  const TransformResult same = apply_function_of_h(tr, [](double) { return 1.0; });
  for (size_t k = 0; k < tr.samples.size(); ++k) {
    CHECK((same.samples[k] - tr.samples[k]).cwiseAbs().maxCoeff() == 0.0);
  }

  // F(lambda) = lambda: U F(H) U^{-1} is multiplication, so the inverse
  // transform of lambda * hhat equals H h = -h'' (free potential); the
  // oracle is a 5-point finite-difference second derivative of the exact
  // bump samples.
  const TransformResult lam_tr = apply_function_of_h(tr, [](double l) { return l; });
  const GridFunction hh = inverse_transform(lam_tr, V, 0.0, bc, h.x);

  const double fd = 1e-3;
  auto minus_h_pp = [&](double x) {
    return -(-bump(x + 2 * fd, 0.8, 2.8) + 16.0 * bump(x + fd, 0.8, 2.8) -
             30.0 * bump(x, 0.8, 2.8) + 16.0 * bump(x - fd, 0.8, 2.8) -
             bump(x - 2 * fd, 0.8, 2.8)) /
           (12.0 * fd * fd);
  };
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < h.x.size(); ++i) {
    const double oracle = minus_h_pp(h.x[i]);
    num += std::norm(hh.values[i][0] - oracle);
    den += oracle * oracle;
  }
  CHECK(std::sqrt(num / den) < 5e-3);
}

TEST_CASE("support_and_spectrum: free case and well atom") {
  const MatrixMeasure rho = free_dirichlet_measure(-10.0, 50.0, 120);
  const auto sup = support_and_spectrum(rho, 1e-3);
  REQUIRE(sup.size() == 1);
  CHECK(sup.front().first >= -0.55); // first massive cell touches 0
  CHECK(sup.front().first <= 0.05);
  CHECK(sup.front().second == doctest::Approx(50.0));

  // Single well: an atom below zero plus the half-line continuum.
  const PotentialSpec V = PotentialSpec::diagonal_wells({2.0}, {2.0}, {1.0}, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const HerglotzEvaluator m = [V, bc](Complex z) { return m_outgoing(V, 0.0, bc, z); };
  AssemblyOptions opts;
  opts.quad_points = 16;
  const MatrixMeasure rho_well =
      assemble_measure(m, uniform_partition(-2.0, 10.0, 48), opts);
  REQUIRE(rho_well.point_masses.size() == 1);
  const auto sup_well = support_and_spectrum(rho_well, 1e-3);
  REQUIRE(sup_well.size() >= 2);
  CHECK(sup_well.front().first == sup_well.front().second); // the atom
  const PotentialSpec Vo = PotentialSpec::diagonal_wells({2.0}, {2.0}, {1.0}, 0.0, 40.0);
  const DiscretizedOperator op = DiscretizedOperator::half_line(Vo, 0.0, 20.0, bc, 0.01);
  CHECK(std::abs(sup_well.front().first - op.eigenvalues()[0]) < 1e-3);

  // Multiplicity bound: rank of every cell mass is at most n.
  for (const auto& c : rho_well.cell_mass) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    int rank = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()[i] > 1e-9) ++rank;
    }
    CHECK(rank <= rho_well.dim);
  }
}

TEST_CASE("Stone's formula cross-check: measure side vs resolvent side") {
  // (f, F(H) E((1,4]) g) for F(lambda) = lambda^2, free scalar Dirichlet.
  const PotentialSpec V = PotentialSpec::free(1, 0.0, kInf);
  const BoundaryCondition bc = BoundaryCondition::dirichlet(1);
  const WeylFunction wf(V, 0.0, bc);
  const double l1 = 1.0, l2 = 4.0;
  auto F = [](double l) { return l * l; };

  const GridFunction f = bump_function(0.5, 2.0, 0.0, 3.0, 768);
  const GridFunction g = bump_function(0.8, 2.6, 0.0, 3.0, 768);

  // Measure side through the transform.
  const MatrixMeasure rho = free_dirichlet_measure(0.0, 400.0, 4000);
  const TransformResult tf = forward_transform(V, 0.0, bc, f, rho);
  const TransformResult tg = forward_transform(V, 0.0, bc, g, rho);
  Complex measure_side = 0.0;
  for (size_t k = 0; k < rho.num_cells(); ++k) {
    const double lam = rho.cell_mid(k);
    if (!(lam > l1 && lam <= l2)) continue;
    measure_side += F(lam) * tf.samples[k].dot(rho.cell_mass[k] * tg.samples[k]);
  }

  // Resolvent side: (1/2 pi i) int F(lam) [ (f, R(lam + i eps) g)
  // - (f, R(lam - i eps) g) ] d lam, Richardson in eps.
  std::vector<double> nodes, weights;
  gauss_legendre(24, nodes, weights);
  const std::vector<double> eps_sched{0.1, 0.05, 0.025};
  std::vector<Complex> vals;
  for (double eps : eps_sched) {
    Complex acc = 0.0;
    for (size_t q = 0; q < nodes.size(); ++q) {
      const double lam = 0.5 * (l1 + l2) + 0.5 * (l2 - l1) * nodes[q];
      const double w = 0.5 * (l2 - l1) * weights[q];
      for (double sign : {1.0, -1.0}) {
        const Complex z(lam, sign * eps);
        const auto rg = resolvent_apply(wf, z, g.x, g.values);
        GridFunction rgf;
        rgf.x = g.x;
        rgf.values = rg;
        acc += sign * w * F(lam) * l2_inner(f, rgf) / (2.0 * M_PI * kImagUnit);
      }
    }
    vals.push_back(acc);
  }
  // Eliminate the O(eps) and O(eps^2) smoothing errors.
  Complex r01 = (eps_sched[0] * vals[1] - eps_sched[1] * vals[0]) /
                (eps_sched[0] - eps_sched[1]);
  Complex r12 = (eps_sched[1] * vals[2] - eps_sched[2] * vals[1]) /
                (eps_sched[1] - eps_sched[2]);
  const double p0 = eps_sched[0] * eps_sched[0], p2 = eps_sched[2] * eps_sched[2];
  const Complex resolvent_side = (p0 * r12 - p2 * r01) / (p0 - p2);

  const double scale = std::max(std::abs(measure_side), 1e-30);
  CHECK(std::abs(measure_side - resolvent_side) / scale < 5e-3);
}
