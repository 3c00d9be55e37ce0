#include "wt/expansion.hpp"

#include <algorithm>
#include <cmath>

#include "wt/errors.hpp"

namespace wt {

void GridFunction::check_simpson() const {
  if (x.size() < 3 || x.size() % 2 == 0) {
    throw GridMismatch("GridFunction: need an odd number of uniform grid points");
  }
  const double h = x[1] - x[0];
  for (size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i] - x[i - 1] - h) > 1e-10) {
      throw GridMismatch("GridFunction: grid must be uniform");
    }
  }
  if (values.size() != x.size()) {
    throw GridMismatch("GridFunction: value/grid size mismatch");
  }
}

namespace {

std::vector<double> simpson_weights(size_t npts, double h) {
  std::vector<double> w(npts, 0.0);
  w.front() = w.back() = h / 3.0;
  for (size_t i = 1; i + 1 < npts; ++i) {
    w[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
  }
  return w;
}

} // namespace

Complex l2_inner(const GridFunction& f, const GridFunction& g) {
  f.check_simpson();
  if (g.x.size() != f.x.size()) throw GridMismatch("l2_inner: grids differ");
  const auto w = simpson_weights(f.x.size(), f.spacing());
  Complex acc = 0.0;
  for (size_t i = 0; i < f.x.size(); ++i) acc += w[i] * f.values[i].dot(g.values[i]);
  return acc;
}

double l2_norm(const GridFunction& f) { return std::sqrt(std::abs(l2_inner(f, f))); }

std::vector<Matrix> sample_phi(const PotentialSpec& V, double a,
                               const BoundaryCondition& bc, double lambda,
                               const std::vector<double>& x_grid,
                               const Tolerances& tol) {
  std::vector<double> grid = x_grid;
  if (grid.empty() || grid.front() > a) grid.insert(grid.begin(), a);
  const FundamentalPair fp = fundamental_system(V, Complex(lambda, 0.0), a, bc, grid, tol);
  std::vector<Matrix> phi;
  phi.reserve(x_grid.size());
  const size_t offset = grid.size() - x_grid.size();
  for (size_t i = 0; i < x_grid.size(); ++i) phi.push_back(fp.phi[i + offset]);
  return phi;
}

TransformResult forward_transform(const PotentialSpec& V, double a,
                                  const BoundaryCondition& bc, const GridFunction& h,
                                  const MatrixMeasure& rho, const Tolerances& tol) {
  h.check_simpson();
  const auto w = simpson_weights(h.x.size(), h.spacing());
  TransformResult tr;
  tr.measure = rho;
  tr.source_grid = h.x;
  tr.samples.resize(rho.num_cells());
  tr.atom_samples.resize(rho.point_masses.size());

  auto hat_at = [&](double lambda) {
    const std::vector<Matrix> phi = sample_phi(V, a, bc, lambda, h.x, tol);
    Vector acc = Vector::Zero(V.dim());
    for (size_t i = 0; i < h.x.size(); ++i) {
      acc += w[i] * (phi[i].adjoint() * h.values[i]);
    }
    return acc;
  };
  for (size_t k = 0; k < rho.num_cells(); ++k) tr.samples[k] = hat_at(rho.cell_mid(k));
  for (size_t k = 0; k < rho.point_masses.size(); ++k) {
    tr.atom_samples[k] = hat_at(rho.point_masses[k].lambda);
  }
  return tr;
}

TransformResult forward_transform(const PotentialSpec& V, double a,
                                  const BoundaryCondition& bc, const GridFunction& h,
                                  const std::vector<double>& lambda_partition,
                                  const AssemblyOptions& opts, const Tolerances& tol) {
  const HerglotzEvaluator m = [&V, a, &bc, &tol](Complex z) {
    return m_outgoing(V, a, bc, z, tol);
  };
  const MatrixMeasure rho = assemble_measure(m, lambda_partition, opts, tol);
  return forward_transform(V, a, bc, h, rho, tol);
}

namespace {

// Replicate coarse step values onto a finer partition when breakpoints nest;
// throws PartitionMismatch otherwise.
std::vector<Vector> refine_to(const std::vector<double>& coarse,
                              const std::vector<Vector>& values,
                              const std::vector<double>& fine) {
  std::vector<Vector> out(fine.size() - 1);
  size_t kc = 0;
  for (size_t kf = 0; kf + 1 < fine.size(); ++kf) {
    while (kc + 1 < coarse.size() && coarse[kc + 1] <= fine[kf] + 1e-12) ++kc;
    if (kc + 1 >= coarse.size() || coarse[kc] > fine[kf] + 1e-12 ||
        coarse[kc + 1] < fine[kf + 1] - 1e-12) {
      throw PartitionMismatch("model_inner_product: partitions do not nest");
    }
    out[kf] = values[kc];
  }
  return out;
}

} // namespace

Complex model_inner_product(const ModelSpaceElement& u, const ModelSpaceElement& v,
                            const MatrixMeasure& measure) {
  const size_t ncells = measure.num_cells();
  if (u.cell_values.size() != ncells || v.cell_values.size() != ncells) {
    throw PartitionMismatch("model_inner_product: cell count mismatch");
  }
  Complex acc = 0.0;
  for (size_t k = 0; k < ncells; ++k) {
    acc += u.cell_values[k].dot(measure.cell_mass[k] * v.cell_values[k]);
  }
  for (size_t k = 0; k < measure.point_masses.size(); ++k) {
    if (k >= u.atom_values.size() || k >= v.atom_values.size()) {
      throw PartitionMismatch("model_inner_product: atom sample missing");
    }
    acc += u.atom_values[k].dot(measure.point_masses[k].mass * v.atom_values[k]);
  }
  return acc;
}

Complex model_inner_product(const TransformResult& u, const TransformResult& v) {
  if (u.measure.partition.size() == v.measure.partition.size()) {
    bool same = true;
    for (size_t i = 0; i < u.measure.partition.size(); ++i) {
      if (std::abs(u.measure.partition[i] - v.measure.partition[i]) > 1e-12) {
        same = false;
        break;
      }
    }
    if (same) return model_inner_product(u.as_element(), v.as_element(), u.measure);
  }
  // Refine the coarser step data onto the finer measure.
  const bool u_coarse = u.measure.num_cells() < v.measure.num_cells();
  const TransformResult& coarse = u_coarse ? u : v;
  const TransformResult& fine = u_coarse ? v : u;
  ModelSpaceElement refined;
  refined.cell_values =
      refine_to(coarse.measure.partition, coarse.samples, fine.measure.partition);
  refined.atom_values = coarse.atom_samples;
  if (u_coarse) {
    return model_inner_product(refined, fine.as_element(), fine.measure);
  }
  return model_inner_product(fine.as_element(), refined, fine.measure);
}

GridFunction inverse_transform(const TransformResult& tr, const PotentialSpec& V,
                               double a, const BoundaryCondition& bc,
                               const std::vector<double>& x_grid,
                               const Tolerances& tol) {
  GridFunction out;
  out.x = x_grid;
  out.values.assign(x_grid.size(), Vector::Zero(V.dim()));
  const MatrixMeasure& rho = tr.measure;
  for (size_t k = 0; k < rho.num_cells(); ++k) {
    if (tr.samples[k].cwiseAbs().maxCoeff() == 0.0) continue;
    const Vector weighted = rho.cell_mass[k] * tr.samples[k];
    if (weighted.cwiseAbs().maxCoeff() == 0.0) continue;
    const std::vector<Matrix> phi = sample_phi(V, a, bc, rho.cell_mid(k), x_grid, tol);
    for (size_t i = 0; i < x_grid.size(); ++i) out.values[i] += phi[i] * weighted;
  }
  for (size_t k = 0; k < rho.point_masses.size(); ++k) {
    const Vector weighted = rho.point_masses[k].mass * tr.atom_samples[k];
    if (weighted.cwiseAbs().maxCoeff() == 0.0) continue;
    const std::vector<Matrix> phi =
        sample_phi(V, a, bc, rho.point_masses[k].lambda, x_grid, tol);
    for (size_t i = 0; i < x_grid.size(); ++i) out.values[i] += phi[i] * weighted;
  }
  return out;
}

TransformResult apply_function_of_h(const TransformResult& tr,
                                    const std::function<double(double)>& f) {
  TransformResult out = tr;
  for (size_t k = 0; k < out.samples.size(); ++k) {
    out.samples[k] *= f(out.measure.cell_mid(k));
  }
  for (size_t k = 0; k < out.atom_samples.size(); ++k) {
    out.atom_samples[k] *= f(out.measure.point_masses[k].lambda);
  }
  return out;
}

TransformResult restrict_window(const TransformResult& tr, double l1, double l2) {
  TransformResult out = tr;
  for (size_t k = 0; k < out.samples.size(); ++k) {
    const double mid = out.measure.cell_mid(k);
    if (!(mid > l1 && mid <= l2)) out.samples[k].setZero();
  }
  for (size_t k = 0; k < out.atom_samples.size(); ++k) {
    const double lam = out.measure.point_masses[k].lambda;
    if (!(lam > l1 && lam <= l2)) out.atom_samples[k].setZero();
  }
  return out;
}

std::vector<std::pair<double, double>> support_and_spectrum(
    const MatrixMeasure& measure, double tol) {
  std::vector<std::pair<double, double>> intervals;
  for (size_t k = 0; k < measure.num_cells(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(measure.cell_mass[k],
                                             Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (norm > tol) intervals.emplace_back(measure.cell_lo(k), measure.cell_hi(k));
  }
  for (const auto& pm : measure.point_masses) {
    intervals.emplace_back(pm.lambda, pm.lambda);
  }
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.first <= merged.back().second + 1e-12) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

} // namespace wt
