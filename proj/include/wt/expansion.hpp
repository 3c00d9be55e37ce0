#pragma once

#include <functional>
#include <vector>

#include "wt/halfline.hpp"
#include "wt/herglotz.hpp"
#include "wt/ivp.hpp"
#include "wt/types.hpp"

namespace wt {

// Compactly supported C^n-valued function sampled on a uniform grid with an
// even number of panels (Simpson-ready).
struct GridFunction {
  std::vector<double> x;
  std::vector<Vector> values;

  double spacing() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  void check_simpson() const;
};

Complex l2_inner(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);

// Step function over a measure partition: one C^n value per cell plus one
// per atom (the model space of step functions).
struct ModelSpaceElement {
  std::vector<Vector> cell_values;
  std::vector<Vector> atom_values;
};

// h-hat over a partition: the measure rho, per-cell representative sample
// values, and the source-grid metadata.
struct TransformResult {
  MatrixMeasure measure;
  std::vector<Vector> samples;      // h-hat at cell midpoints
  std::vector<Vector> atom_samples; // h-hat at atoms
  std::vector<double> source_grid;
  int block = 0; // 0 = half-line (dim n); 2n marker for full-line data

  ModelSpaceElement as_element() const { return {samples, atom_samples}; }
};

// hhat(lambda) = int phi_alpha(lambda,x,a)^* h(x) dx for the representative
// lambda of every cell and atom of rho.
TransformResult forward_transform(const PotentialSpec& V, double a,
                                  const BoundaryCondition& bc, const GridFunction& h,
                                  const MatrixMeasure& rho,
                                  const Tolerances& tol = default_tol());

// Convenience overload: assemble rho over the partition first (outgoing-tail
// evaluator), then transform.
TransformResult forward_transform(const PotentialSpec& V, double a,
                                  const BoundaryCondition& bc, const GridFunction& h,
                                  const std::vector<double>& lambda_partition,
                                  const AssemblyOptions& opts = {},
                                  const Tolerances& tol = default_tol());

// (u, v)_rho = sum_cells (u_k, mass_k v_k) + atoms; conjugate-linear in u.
Complex model_inner_product(const ModelSpaceElement& u, const ModelSpaceElement& v,
                            const MatrixMeasure& measure);
Complex model_inner_product(const TransformResult& u, const TransformResult& v);

// h(x) = sum_cells phi(lambda_k, x, a) mass_k hhat_k + atom terms.
GridFunction inverse_transform(const TransformResult& tr, const PotentialSpec& V,
                               double a, const BoundaryCondition& bc,
                               const std::vector<double>& x_grid,
                               const Tolerances& tol = default_tol());

// Multiplication operator M_F on the transform side.
TransformResult apply_function_of_h(const TransformResult& tr,
                                    const std::function<double(double)>& f);

// Restriction of the samples to (l1, l2] (spectral projection on the
// transform side).
TransformResult restrict_window(const TransformResult& tr, double l1, double l2);

// Union of cells with ||mass|| > tol and atom locations, merged into
// maximal intervals.
std::vector<std::pair<double, double>> support_and_spectrum(
    const MatrixMeasure& measure, double tol);

// phi_alpha(lambda, x, a) for one real lambda on a grid (entire in the
// spectral parameter, so real-axis evaluation needs no regularization).
std::vector<Matrix> sample_phi(const PotentialSpec& V, double a,
                               const BoundaryCondition& bc, double lambda,
                               const std::vector<double>& x_grid,
                               const Tolerances& tol = default_tol());

} // namespace wt
