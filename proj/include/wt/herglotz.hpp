#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "wt/types.hpp"

namespace wt {

using HerglotzEvaluator = std::function<Matrix(Complex)>;

// Nonnegative-matrix-valued measure on a real partition: PSD increments on
// half-open cells (lambda_k, lambda_{k+1}] plus detected point masses.
struct MatrixMeasure {
  struct PointMass {
    double lambda = 0.0;
    Matrix mass;
  };
  struct Metadata {
    std::vector<double> eps_schedule;
    int extrapolation_order = 0;
  };

  int dim = 0;
  std::vector<double> partition; // K+1 strictly increasing breakpoints
  std::vector<Matrix> cell_mass; // K cells
  std::vector<PointMass> point_masses;
  Metadata metadata;

  size_t num_cells() const { return cell_mass.size(); }
  double cell_lo(size_t k) const { return partition[k]; }
  double cell_hi(size_t k) const { return partition[k + 1]; }
  double cell_mid(size_t k) const { return 0.5 * (partition[k] + partition[k + 1]); }

  Matrix total_mass() const;
  // Sum of cell masses and atoms inside (l1, l2]; cells must nest.
  Matrix mass_on(double l1, double l2) const;
  // Merge adjacent cells pairwise (masses add exactly).
  MatrixMeasure coarsened() const;
  void validate(double psd_tol = 1e-9) const;
};

// Scalar control measure with the same null cells: sum_j 2^{-(j+1)} (e_j, . e_j).
struct ControlMeasure {
  const MatrixMeasure* measure = nullptr;
  double cell_value(size_t k) const;
  double atom_value(size_t k) const;
  bool same_null_cells(double tol = 1e-12) const;
};

// (1/pi) int_{l1}^{l2} Im M(lambda + i eps) dlambda, Richardson-extrapolated
// in eps down the schedule, PSD-projected. Throws NotHerglotz when a sampled
// Im M has an eigenvalue below -psd_hard.
Matrix stieltjes_invert(const HerglotzEvaluator& m, double l1, double l2,
                        const std::vector<double>& eps_schedule, int quad_points,
                        const Tolerances& tol = default_tol(),
                        double quad_rel_tol = 1e-8);

// Atom weight eps * Im M(lambda + i eps) extrapolated to eps -> 0; the
// companion limit eps * Re M -> 0 is recorded in re_defect when given.
Matrix point_mass(const HerglotzEvaluator& m, double lambda,
                  const std::vector<double>& eps_schedule,
                  const Tolerances& tol = default_tol(), double* re_defect = nullptr);

// Linear coefficient D = lim M(i eta)/(i eta) up the imaginary axis.
Matrix asymptotic_linear_term(const HerglotzEvaluator& m,
                              const std::vector<double>& eta_schedule,
                              const Tolerances& tol = default_tol());

// max_z || M(z) - [C + D z + sum_cells mass ((mid - z)^{-1} - mid/(1+mid^2))
//                  + atoms] || over the test points.
double nevanlinna_residual(const HerglotzEvaluator& m, const MatrixMeasure& measure,
                           const Matrix& c, const Matrix& d,
                           const std::vector<Complex>& test_points);

struct KernelDecomposition {
  int kernel_dim = 0;
  Matrix projector; // onto ker(Im M)
  bool constant_function_warning = false;
};

// Numerical kernel of Im M(z), checked for z-independence across samples.
KernelDecomposition herglotz_kernel_decomposition(const HerglotzEvaluator& m,
                                                  const std::vector<Complex>& samples,
                                                  const Tolerances& tol = default_tol());

struct AssemblyOptions {
  std::vector<double> eps_schedule{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  int quad_points = 8;        // per cell; cells are narrow in assemblies
  bool detect_atoms = true;
  double atom_trace_floor = 1e-6; // below this a cell cannot hide an atom
  double quad_rel_tol = 1e-7;     // adaptive-panel agreement target per cell
  int threads = 1;
};

// Cell-by-cell Stieltjes inversion over the partition plus point-mass
// detection (bisection concentration scan, peak refinement, A.46 weight).
MatrixMeasure assemble_measure(const HerglotzEvaluator& m,
                               const std::vector<double>& partition,
                               const AssemblyOptions& opts = {},
                               const Tolerances& tol = default_tol());

// Uniform partition helper.
std::vector<double> uniform_partition(double lo, double hi, int cells);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int npoints, std::vector<double>& nodes,
                    std::vector<double>& weights);

} // namespace wt
