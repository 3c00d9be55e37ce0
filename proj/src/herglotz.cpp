#include "wt/herglotz.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "wt/errors.hpp"
#include "wt/matfun.hpp"

namespace wt {

namespace {

Matrix imag_part(const Matrix& m) {
  return (m - m.adjoint()) / Complex(0.0, 2.0);
}

Matrix real_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Clip tiny negative eigenvalues to zero; genuinely negative spectrum means
// the input was not Herglotz. noise_floor widens the clipping band up to the
// spread of the extrapolation samples, below which the sign of the output
// carries no information.
Matrix psd_project(const Matrix& m, const Tolerances& tol, const char* what,
                   double noise_floor = 0.0) {
  const double clip = std::max(tol.psd_hard, noise_floor);
  Eigen::SelfAdjointEigenSolver<Matrix> es(real_part(m));
  RealVector ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -clip) {
      std::ostringstream os;
      os << what << ": eigenvalue " << ev[i] << " below -" << clip;
      throw NotHerglotz(os.str());
    }
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
         es.eigenvectors().adjoint();
}

// Extrapolation uncertainty proxy: total variation of the sample sequence.
double sample_spread(const std::vector<Matrix>& values) {
  double spread = 0.0;
  for (size_t i = 1; i < values.size(); ++i) {
    spread += (values[i] - values[i - 1]).cwiseAbs().maxCoeff();
  }
  return spread;
}

// Neville-style elimination of the eps^1, eps^2, ... terms from samples
// f(eps_i); at most `levels` rounds.
Matrix richardson(const std::vector<double>& eps, std::vector<Matrix> vals,
                  int levels) {
  const int nlev = std::min<int>(levels, static_cast<int>(vals.size()) - 1);
  std::vector<double> e = eps;
  for (int lvl = 1; lvl <= nlev; ++lvl) {
    for (size_t i = 0; i + lvl < vals.size(); ++i) {
      const double p1 = std::pow(e[i], lvl);
      const double p2 = std::pow(e[i + lvl], lvl);
      vals[i] = (p1 * vals[i + 1] - p2 * vals[i]) / (p1 - p2);
    }
  }
  return vals.front();
}

void check_sample_herglotz(const Matrix& im_m, const Tolerances& tol, Complex z) {
  // Roundoff in Im M scales with the magnitude of M (huge near poles), so
  // the hard threshold is relative.
  const double scale = std::max(1.0, im_m.cwiseAbs().maxCoeff());
  if (min_eigenvalue(im_m) < -tol.psd_hard * scale) {
    std::ostringstream os;
    os << "evaluator not Herglotz: Im M has negative spectrum at z = ("
       << z.real() << "," << z.imag() << ")";
    throw NotHerglotz(os.str());
  }
}

} // namespace

void gauss_legendre(int npoints, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(npoints);
    if (it != cache.end()) {
      nodes = it->second.first;
      weights = it->second.second;
      return;
    }
  }
  nodes.assign(npoints, 0.0);
  weights.assign(npoints, 0.0);
  const int m = (npoints + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (npoints + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < npoints; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = npoints * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[npoints - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[npoints - 1 - i] = weights[i];
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[npoints] = {nodes, weights};
}

std::vector<double> uniform_partition(double lo, double hi, int cells) {
  std::vector<double> p(cells + 1);
  for (int i = 0; i <= cells; ++i) p[i] = lo + (hi - lo) * i / cells;
  return p;
}

namespace {

Matrix gl_panel(const HerglotzEvaluator& m, double lo, double hi, double eps,
                const std::vector<double>& nodes, const std::vector<double>& weights,
                const Tolerances& tol) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  Matrix acc;
  for (size_t q = 0; q < nodes.size(); ++q) {
    const Complex z(mid + half * nodes[q], eps);
    const Matrix im_m = imag_part(m(z));
    check_sample_herglotz(im_m, tol, z);
    if (acc.size() == 0) {
      acc = (weights[q] * half / M_PI) * im_m;
    } else {
      acc += (weights[q] * half / M_PI) * im_m;
    }
  }
  return acc;
}

// Adaptive bisection around the base rule: a single panel cannot resolve a
// Lorentzian of width eps inside a wide cell, so halve until the whole-panel
// value agrees with the two-half sum.
Matrix adaptive_gl(const HerglotzEvaluator& m, double lo, double hi, double eps,
                   const std::vector<double>& nodes, const std::vector<double>& weights,
                   const Tolerances& tol, const Matrix& whole, double abs_floor,
                   double rel_tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const Matrix left = gl_panel(m, lo, mid, eps, nodes, weights, tol);
  const Matrix right = gl_panel(m, mid, hi, eps, nodes, weights, tol);
  const Matrix sum = left + right;
  const double gap = (whole - sum).cwiseAbs().maxCoeff();
  if (gap <= rel_tol * std::max(sum.cwiseAbs().maxCoeff(), abs_floor) || depth >= 24 ||
      (hi - lo) < 0.01 * eps) {
    return sum;
  }
  return adaptive_gl(m, lo, mid, eps, nodes, weights, tol, left, abs_floor, rel_tol,
                     depth + 1) +
         adaptive_gl(m, mid, hi, eps, nodes, weights, tol, right, abs_floor, rel_tol,
                     depth + 1);
}

} // namespace

Matrix stieltjes_invert(const HerglotzEvaluator& m, double l1, double l2,
                        const std::vector<double>& eps_schedule, int quad_points,
                        const Tolerances& tol, double quad_rel_tol) {
  if (!(l2 > l1)) throw SpectralError("stieltjes_invert: need l1 < l2");
  if (eps_schedule.empty()) throw SpectralError("stieltjes_invert: empty schedule");
  std::vector<double> nodes, weights;
  gauss_legendre(std::clamp(quad_points, 2, 256), nodes, weights);

  std::vector<Matrix> values;
  values.reserve(eps_schedule.size());
  for (double eps : eps_schedule) {
    const Matrix whole = gl_panel(m, l1, l2, eps, nodes, weights, tol);
    const double floor = std::max(1e-12, whole.cwiseAbs().maxCoeff());
    values.push_back(
        adaptive_gl(m, l1, l2, eps, nodes, weights, tol, whole, floor, quad_rel_tol, 0));
  }
  const Matrix extrapolated = richardson(eps_schedule, values, 2);
  return psd_project(extrapolated, tol, "stieltjes_invert", sample_spread(values));
}

Matrix point_mass(const HerglotzEvaluator& m, double lambda,
                  const std::vector<double>& eps_schedule, const Tolerances& tol,
                  double* re_defect) {
  if (eps_schedule.empty()) throw SpectralError("point_mass: empty schedule");
  std::vector<Matrix> values;
  double re_last = 0.0;
  for (double eps : eps_schedule) {
    const Complex z(lambda, eps);
    const Matrix mz = m(z);
    const Matrix im_m = imag_part(mz);
    check_sample_herglotz(im_m, tol, z);
    values.push_back(eps * im_m);
    re_last = eps * real_part(mz).cwiseAbs().maxCoeff();
  }
  if (re_defect) *re_defect = re_last;
  const Matrix extrapolated = richardson(eps_schedule, values, 2);
  return psd_project(extrapolated, tol, "point_mass", sample_spread(values));
}

Matrix asymptotic_linear_term(const HerglotzEvaluator& m,
                              const std::vector<double>& eta_schedule,
                              const Tolerances& tol) {
  if (eta_schedule.empty()) throw SpectralError("asymptotic_linear_term: empty schedule");
  std::vector<double> etas = eta_schedule;
  std::sort(etas.begin(), etas.end()); // samples ordered by decreasing 1/eta
  std::vector<Matrix> values;
  std::vector<double> inv_eta;
  for (double eta : etas) {
    const Complex z(0.0, eta);
    const Matrix mz = m(z);
    check_sample_herglotz(imag_part(mz), tol, z);
    values.push_back(real_part(mz / (kImagUnit * eta)));
    inv_eta.push_back(1.0 / eta);
  }
  const Matrix extrapolated = richardson(inv_eta, values, 1);
  return psd_project(extrapolated, tol, "asymptotic_linear_term");
}

double nevanlinna_residual(const HerglotzEvaluator& m, const MatrixMeasure& measure,
                           const Matrix& c, const Matrix& d,
                           const std::vector<Complex>& test_points) {
  double worst = 0.0;
  for (Complex z : test_points) {
    Matrix rec = c + d * z;
    for (size_t k = 0; k < measure.num_cells(); ++k) {
      const double lam = measure.cell_mid(k);
      const Complex kern = 1.0 / (lam - z) - lam / (1.0 + lam * lam);
      rec += kern * measure.cell_mass[k];
    }
    for (const auto& pm : measure.point_masses) {
      const Complex kern = 1.0 / (pm.lambda - z) - pm.lambda / (1.0 + pm.lambda * pm.lambda);
      rec += kern * pm.mass;
    }
    worst = std::max(worst, (m(z) - rec).cwiseAbs().maxCoeff());
  }
  return worst;
}

KernelDecomposition herglotz_kernel_decomposition(const HerglotzEvaluator& m,
                                                  const std::vector<Complex>& samples,
                                                  const Tolerances& tol) {
  if (samples.size() < 2) {
    throw SpectralError("herglotz_kernel_decomposition: need >= 2 samples");
  }
  KernelDecomposition out;
  bool first = true;
  for (Complex z : samples) {
    const Matrix im_m = imag_part(m(z));
    check_sample_herglotz(im_m, tol, z);
    Eigen::SelfAdjointEigenSolver<Matrix> es(im_m);
    const int n = static_cast<int>(im_m.rows());
    int kdim = 0;
    Matrix proj = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (std::abs(es.eigenvalues()[i]) < 1e-8) {
        ++kdim;
        proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      }
    }
    if (first) {
      out.kernel_dim = kdim;
      out.projector = proj;
      out.constant_function_warning = (kdim == n);
      first = false;
    } else {
      if (kdim != out.kernel_dim ||
          (proj - out.projector).cwiseAbs().maxCoeff() > 1e-6) {
        throw KernelMismatch(
            "herglotz_kernel_decomposition: kernel varies across samples");
      }
    }
  }
  return out;
}

Matrix MatrixMeasure::total_mass() const {
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& c : cell_mass) total += c;
  for (const auto& p : point_masses) total += p.mass;
  return total;
}

Matrix MatrixMeasure::mass_on(double l1, double l2) const {
  Matrix total = Matrix::Zero(dim, dim);
  for (size_t k = 0; k < num_cells(); ++k) {
    if (cell_lo(k) >= l1 - 1e-12 && cell_hi(k) <= l2 + 1e-12) total += cell_mass[k];
  }
  for (const auto& p : point_masses) {
    if (p.lambda > l1 && p.lambda <= l2) total += p.mass;
  }
  return total;
}

MatrixMeasure MatrixMeasure::coarsened() const {
  MatrixMeasure out;
  out.dim = dim;
  out.metadata = metadata;
  out.point_masses = point_masses;
  for (size_t k = 0; k + 1 < num_cells(); k += 2) {
    out.partition.push_back(partition[k]);
    out.cell_mass.push_back(cell_mass[k] + cell_mass[k + 1]);
  }
  if (num_cells() % 2 == 1) {
    out.partition.push_back(partition[num_cells() - 1]);
    out.cell_mass.push_back(cell_mass.back());
  }
  out.partition.push_back(partition.back());
  return out;
}

void MatrixMeasure::validate(double psd_tol) const {
  if (partition.size() != cell_mass.size() + 1) {
    throw SpectralError("MatrixMeasure: partition/cell size mismatch");
  }
  for (size_t i = 1; i < partition.size(); ++i) {
    if (!(partition[i] > partition[i - 1])) {
      throw SpectralError("MatrixMeasure: breakpoints not increasing");
    }
  }
  for (const auto& c : cell_mass) {
    if (min_eigenvalue(c) < -psd_tol) {
      throw SpectralError("MatrixMeasure: cell mass not PSD");
    }
  }
  for (const auto& p : point_masses) {
    if (min_eigenvalue(p.mass) < -psd_tol) {
      throw SpectralError("MatrixMeasure: point mass not PSD");
    }
  }
}

double ControlMeasure::cell_value(size_t k) const {
  const Matrix& m = measure->cell_mass[k];
  double v = 0.0;
  for (int j = 0; j < measure->dim; ++j) {
    v += std::pow(2.0, -(j + 1)) * m(j, j).real();
  }
  return v;
}

double ControlMeasure::atom_value(size_t k) const {
  const Matrix& m = measure->point_masses[k].mass;
  double v = 0.0;
  for (int j = 0; j < measure->dim; ++j) {
    v += std::pow(2.0, -(j + 1)) * m(j, j).real();
  }
  return v;
}

bool ControlMeasure::same_null_cells(double tol) const {
  for (size_t k = 0; k < measure->num_cells(); ++k) {
    const bool null_control = cell_value(k) <= tol;
    const bool null_matrix = measure->cell_mass[k].cwiseAbs().maxCoeff() <= tol;
    if (null_control != null_matrix) return false;
  }
  return true;
}

namespace {

// Run fn(k) for k in [0, count) on up to `threads` workers; results land in
// preallocated slots so the outcome is independent of scheduling.
void parallel_for(int threads, size_t count, const std::function<void(size_t)>& fn) {
  const int nw = std::max(1, threads);
  if (nw == 1 || count < 2) {
    for (size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int t = 0; t < nw; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t k = next.fetch_add(1);
        if (k >= count) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double trace_norm(const Matrix& m) { return m.trace().real(); }

// Multi-scale peak tracking for lambda -> Im M(lambda + i eps) trace: start
// with a smearing comparable to the window (any atom shows up as a broad
// Lorentzian), take the argmax of a uniform scan, then shrink eps and
// re-bracket. A fixed-eps line search would walk straight past a peak
// narrower than its probe spacing.
double locate_peak(const HerglotzEvaluator& m, double lo, double hi, double eps_floor) {
  auto value = [&](double lam, double eps) {
    const Matrix mz = m(Complex(lam, eps));
    return (((mz - mz.adjoint()) / Complex(0.0, 2.0)).trace()).real();
  };
  const int nscan = 33;
  double eps = (hi - lo) / 8.0;
  double lam = 0.5 * (lo + hi);
  for (;;) {
    double best = -1.0;
    for (int i = 0; i < nscan; ++i) {
      const double cand = lo + (hi - lo) * i / (nscan - 1);
      const double v = value(cand, eps);
      if (v > best) {
        best = v;
        lam = cand;
      }
    }
    if (eps <= eps_floor) break;
    eps = std::max(eps_floor, eps / 5.0);
    lo = std::max(lo, lam - 4.0 * eps);
    hi = std::min(hi, lam + 4.0 * eps);
  }
  return lam;
}

} // namespace

namespace {

Matrix psd_clip_matrix(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  RealVector ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev[i] = std::max(0.0, ev[i]);
  return es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
         es.eigenvectors().adjoint();
}

// Atom confirmation inside [lo, hi]: shrink through overlapping sub-windows
// (an atom near a split point never escapes all three candidates) as long as
// the mass stays concentrated. The loop stops well above the smearing scale
// of the eps schedule -- below that the extrapolated window mass no longer
// captures the Lorentzian and concentration ratios become meaningless; the
// golden-section peak search then pins the location.
bool concentrate_window(const HerglotzEvaluator& m, double lo, double hi,
                        double stop_len, const AssemblyOptions& opts,
                        const Tolerances& tol, double* found) {
  const double scan_tol = 1e-3;
  Matrix total_m = stieltjes_invert(m, lo, hi, opts.eps_schedule, opts.quad_points, tol,
                                    scan_tol);
  double total = trace_norm(total_m);
  if (total < opts.atom_trace_floor) return false;
  while (hi - lo > stop_len) {
    const double len = hi - lo;
    const double w = 0.6 * len;
    double best_lo = lo, best_tr = -1.0;
    for (double off : {0.0, 0.2 * len, 0.4 * len}) {
      const Matrix cand = stieltjes_invert(m, lo + off, lo + off + w, opts.eps_schedule,
                                           opts.quad_points, tol, scan_tol);
      const double tr = trace_norm(cand);
      if (tr > best_tr) {
        best_tr = tr;
        best_lo = lo + off;
      }
    }
    if (best_tr < 0.9 * total) return false;
    lo = best_lo;
    hi = best_lo + w;
    total = best_tr;
  }
  *found = locate_peak(m, lo, hi, 1e-5);
  return true;
}

} // namespace

MatrixMeasure assemble_measure(const HerglotzEvaluator& m,
                               const std::vector<double>& partition,
                               const AssemblyOptions& opts, const Tolerances& tol) {
  if (partition.size() < 2) throw SpectralError("assemble_measure: empty partition");
  MatrixMeasure out;
  out.partition = partition;
  out.metadata.eps_schedule = opts.eps_schedule;
  out.metadata.extrapolation_order =
      std::min<int>(2, static_cast<int>(opts.eps_schedule.size()) - 1);
  size_t ncells = partition.size() - 1;
  out.cell_mass.assign(ncells, Matrix());

  auto fill_cells = [&](std::vector<size_t> which) {
    parallel_for(opts.threads, which.size(), [&](size_t i) {
      const size_t k = which[i];
      out.cell_mass[k] = stieltjes_invert(m, out.partition[k], out.partition[k + 1],
                                          opts.eps_schedule, opts.quad_points, tol,
                                          opts.quad_rel_tol);
    });
  };
  std::vector<size_t> all(ncells);
  for (size_t k = 0; k < ncells; ++k) all[k] = k;
  fill_cells(all);
  out.dim = static_cast<int>(out.cell_mass.front().rows());

  if (!opts.detect_atoms) return out;

  const double eps_min =
      *std::min_element(opts.eps_schedule.begin(), opts.eps_schedule.end());
  const double guard = std::max(0.05, 4.0 * eps_min);
  const double stop_len = std::max(0.1, 12.0 * eps_min);

  const std::vector<Matrix> original_mass = out.cell_mass;
  auto cell_trace = [&](size_t k) { return trace_norm(original_mass[k]); };

  for (size_t k = 0; k < ncells; ++k) {
    if (cell_trace(k) < opts.atom_trace_floor) continue;
    // Plateau filter: a smooth density gives comparable mass to at least one
    // neighbor on each side; an atom (even one straddling a breakpoint)
    // dominates its quieter side.
    if (k > 0 && k + 1 < ncells) {
      const double quiet = std::min(cell_trace(k - 1), cell_trace(k + 1));
      if (cell_trace(k) < 3.0 * quiet) continue;
    }
    const double cw = out.partition[k + 1] - out.partition[k];
    // Expand by half a cell each side so boundary-straddling atoms stay
    // interior to the scan window.
    const double lo = out.partition[k] - 0.5 * cw;
    const double hi = out.partition[k + 1] + 0.5 * cw;
    double lam = 0.0;
    if (!concentrate_window(m, lo, hi, stop_len, opts, tol, &lam)) {
      continue;
    }
    bool already = false;
    for (const auto& pm : out.point_masses) {
      if (std::abs(pm.lambda - lam) < guard) already = true;
    }
    if (already) continue;
    const std::vector<double> atom_eps{1e-3, 5e-4, 2.5e-4};
    const Matrix w = point_mass(m, lam, atom_eps, tol);
    if (trace_norm(w) < opts.atom_trace_floor) continue;
    out.point_masses.push_back({lam, w});

    // Breakpoints must stay away from atoms or the smeared Lorentzian
    // spreads mass across the split. Shift any breakpoint inside the guard
    // zone, then recompute the cells the adjustment touched and remove the
    // atom from its containing cell.
    std::vector<size_t> dirty;
    for (size_t b = 1; b + 1 < out.partition.size(); ++b) {
      if (std::abs(out.partition[b] - lam) < guard) {
        const double shifted =
            (out.partition[b] <= lam) ? lam - guard : lam + guard;
        if (shifted > out.partition[b - 1] + 1e-9 &&
            shifted < out.partition[b + 1] - 1e-9) {
          out.partition[b] = shifted;
          dirty.push_back(b - 1);
          dirty.push_back(b);
        }
      }
    }
    for (size_t c = 0; c < ncells; ++c) {
      if (lam > out.partition[c] && lam <= out.partition[c + 1]) {
        dirty.push_back(c);
      }
    }
    std::sort(dirty.begin(), dirty.end());
    dirty.erase(std::unique(dirty.begin(), dirty.end()), dirty.end());
    fill_cells(dirty);
    for (size_t c = 0; c < ncells; ++c) {
      if (lam > out.partition[c] && lam <= out.partition[c + 1]) {
        out.cell_mass[c] = psd_clip_matrix(out.cell_mass[c] - w);
      }
    }
  }
  return out;
}

} // namespace wt
