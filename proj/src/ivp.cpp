#include "wt/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wt/errors.hpp"

namespace wt {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
// Embedded 4th-order weights, expressed through the error coefficients.
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
// Continuous-extension weights (Hairer/Norsett/Wanner).
constexpr double kD1 = -12715105075.0 / 11282082432.0;
constexpr double kD3 = 87487479700.0 / 32700410799.0;
constexpr double kD4 = -10690763975.0 / 1880347072.0;
constexpr double kD5 = 701980252875.0 / 199316789632.0;
constexpr double kD6 = -1453857185.0 / 822651844.0;
constexpr double kD7 = 69997945.0 / 29380423.0;

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1,
                  double atol, double rtol) {
  double sum = 0.0;
  const auto n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double e = std::abs(err(i)) / scale;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

struct DenseCoeffs {
  Matrix r1, r2, r3, r4, r5;
  Matrix eval(double theta) const {
    return r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)));
  }
};

} // namespace

Matrix integrate_dense(const OdeRhs& rhs, const Matrix& s0, double x_from,
                       const std::vector<double>& xs, const IntegratorOptions& opt,
                       const std::function<void(size_t, const Matrix&)>& sink) {
  if (xs.empty()) return s0;
  const double dir = (xs.back() >= x_from) ? 1.0 : -1.0;
  const double x_end = xs.back();

  // Mandatory stops inside the sweep, ordered along the direction of travel.
  std::vector<double> stops;
  for (double s : opt.mandatory_stops) {
    if (dir * (s - x_from) > 1e-14 && dir * (x_end - s) > 1e-14) stops.push_back(s);
  }
  stops.push_back(x_end);
  std::sort(stops.begin(), stops.end());
  if (dir < 0) std::reverse(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  double x = x_from;
  Matrix y = s0;
  Matrix k1 = rhs(x, y);

  size_t next_out = 0;
  // Emit queries that coincide with the start point.
  while (next_out < xs.size() && std::abs(xs[next_out] - x) <= 1e-14 * std::max(1.0, std::abs(x))) {
    sink(next_out, y);
    ++next_out;
  }

  size_t next_stop = 0;
  double h = dir * std::min(0.1, std::abs(x_end - x_from));
  if (opt.max_step > 0.0) h = dir * std::min(std::abs(h), opt.max_step);
  const double hmin_floor = 1e-14;
  int consecutive_rejects = 0;

  while (dir * (x_end - x) > 1e-14 * std::max(1.0, std::abs(x_end))) {
    // Never straddle the next mandatory stop.
    while (next_stop < stops.size() && dir * (stops[next_stop] - x) <= 1e-14) ++next_stop;
    if (next_stop < stops.size()) {
      const double room = stops[next_stop] - x;
      if (std::abs(h) > std::abs(room)) h = room;
    }
    if (std::abs(h) < hmin_floor * std::max(1.0, std::abs(x))) {
      std::ostringstream os;
      os << "integrate_dense: step size underflow at x = " << x;
      throw StepSizeUnderflow(os.str());
    }

    const Matrix k2 = rhs(x + kA21 * h, y + h * (kA21 * k1));
    const Matrix k3 = rhs(x + 0.3 * h, y + h * (kA31 * k1 + kA32 * k2));
    const Matrix k4 = rhs(x + 0.8 * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    const Matrix k5 =
        rhs(x + (8.0 / 9.0) * h, y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    const Matrix k6 =
        rhs(x + h, y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
    const Matrix y1 = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    const Matrix k7 = rhs(x + h, y1);

    const Matrix err_m =
        h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
    const double err = error_norm(err_m, y, y1, opt.atol, opt.rtol);

    if (err <= 1.0) {
      consecutive_rejects = 0;
      // Dense output over [x, x+h] for all queries inside.
      if (next_out < xs.size() && dir * (xs[next_out] - (x + h)) <= 1e-12) {
        DenseCoeffs dc;
        dc.r1 = y;
        dc.r2 = y1 - y;
        dc.r3 = h * k1 - dc.r2;
        dc.r4 = dc.r2 - h * k7 - dc.r3;
        dc.r5 = h * (kD1 * k1 + kD3 * k3 + kD4 * k4 + kD5 * k5 + kD6 * k6 + kD7 * k7);
        while (next_out < xs.size() && dir * (xs[next_out] - (x + h)) <= 1e-12) {
          const double theta = (xs[next_out] - x) / h;
          if (std::abs(theta - 1.0) < 1e-12) {
            sink(next_out, y1);
          } else {
            sink(next_out, dc.eval(theta));
          }
          ++next_out;
        }
      }
      x += h;
      y = y1;
      k1 = k7; // FSAL
      double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
      factor = std::clamp(factor, 0.2, 5.0);
      h *= factor;
      if (opt.max_step > 0.0 && std::abs(h) > opt.max_step) h = dir * opt.max_step;
    } else {
      if (++consecutive_rejects > 60) {
        throw StepSizeUnderflow("integrate_dense: repeated step rejections");
      }
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
    }
  }
  // Flush queries that coincide with the end point.
  while (next_out < xs.size()) {
    sink(next_out, y);
    ++next_out;
  }
  return y;
}

Matrix integrate_to(const OdeRhs& rhs, const Matrix& s0, double x_from, double x_to,
                    const IntegratorOptions& opt) {
  if (x_to == x_from) return s0;
  std::vector<double> xs{x_to};
  return integrate_dense(rhs, s0, x_from, xs, opt, [](size_t, const Matrix&) {});
}

namespace {

OdeRhs schroedinger_rhs(const PotentialSpec& V, Complex z, int n,
                        const std::function<Matrix(double)>& forcing) {
  return [&V, z, n, forcing](double x, const Matrix& s) {
    Matrix out(s.rows(), s.cols());
    out.topRows(n) = s.bottomRows(n);
    out.bottomRows(n) = (V.evaluate(x) - z * Matrix::Identity(n, n)) * s.topRows(n);
    if (forcing) out.bottomRows(n) -= forcing(x);
    return out;
  };
}

void check_grid(const PotentialSpec& V, double x0, const std::vector<double>& grid) {
  if (grid.empty()) throw GridOutsideDomain("empty grid");
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw GridOutsideDomain("grid must be increasing");
  }
  if (grid.front() < V.domain_a() - 1e-12 || grid.back() > V.domain_b() + 1e-12) {
    throw GridOutsideDomain("grid leaves the potential's domain");
  }
  if (x0 < grid.front() - 1e-12 || x0 > grid.back() + 1e-12) {
    throw GridOutsideDomain("x0 outside the grid span");
  }
}

// Two sweeps away from x0 with dense output; seeds the entry at x0 (if the
// grid carries one) exactly with the initial data.
void sweep_from_x0(const PotentialSpec& V, Complex z, double x0, const Matrix& s0,
                   const std::function<Matrix(double)>& forcing,
                   const std::vector<double>& grid, const Tolerances& tol,
                   std::vector<Matrix>& states) {
  const int n = V.dim();
  states.assign(grid.size(), Matrix());
  const OdeRhs rhs = schroedinger_rhs(V, z, n, forcing);
  IntegratorOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  opt.mandatory_stops = V.breakpoints();

  std::vector<double> fwd, bwd;
  std::vector<size_t> fwd_idx, bwd_idx;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    if (std::abs(x - x0) <= 1e-14 * std::max(1.0, std::abs(x0))) {
      states[i] = s0;
    } else if (x > x0) {
      fwd.push_back(x);
      fwd_idx.push_back(i);
    } else {
      bwd.push_back(x);
      bwd_idx.push_back(i);
    }
  }
  std::reverse(bwd.begin(), bwd.end());
  std::reverse(bwd_idx.begin(), bwd_idx.end());
  if (!fwd.empty()) {
    integrate_dense(rhs, s0, x0, fwd, opt,
                    [&](size_t k, const Matrix& s) { states[fwd_idx[k]] = s; });
  }
  if (!bwd.empty()) {
    integrate_dense(rhs, s0, x0, bwd, opt,
                    [&](size_t k, const Matrix& s) { states[bwd_idx[k]] = s; });
  }
}

} // namespace

VectorSolution solve_vector_ivp(const PotentialSpec& V, Complex z, double x0,
                                const Vector& h0, const Vector& h1,
                                const std::function<Vector(double)>& f,
                                const std::vector<double>& grid,
                                const Tolerances& tol) {
  check_grid(V, x0, grid);
  const int n = V.dim();
  Matrix s0(2 * n, 1);
  s0.topRows(n) = h0;
  s0.bottomRows(n) = h1;
  std::function<Matrix(double)> forcing;
  if (f) forcing = [f](double x) { return Matrix(f(x)); };

  std::vector<Matrix> states;
  sweep_from_x0(V, z, x0, s0, forcing, grid, tol, states);

  VectorSolution sol;
  sol.z = z;
  sol.x0 = x0;
  sol.grid = grid;
  sol.y.reserve(grid.size());
  sol.y_prime.reserve(grid.size());
  for (const auto& s : states) {
    sol.y.push_back(s.topRows(n).col(0));
    sol.y_prime.push_back(s.bottomRows(n).col(0));
  }
  return sol;
}

OperatorSolution solve_operator_ivp(const PotentialSpec& V, Complex z, double x0,
                                    const Matrix& Y0, const Matrix& Y1,
                                    const std::vector<double>& grid,
                                    const Tolerances& tol) {
  check_grid(V, x0, grid);
  const int n = V.dim();
  Matrix s0(2 * n, n);
  s0.topRows(n) = Y0;
  s0.bottomRows(n) = Y1;
  std::vector<Matrix> states;
  sweep_from_x0(V, z, x0, s0, nullptr, grid, tol, states);

  OperatorSolution sol;
  sol.z = z;
  sol.x0 = x0;
  sol.grid = grid;
  for (const auto& s : states) {
    sol.Y.push_back(s.topRows(n));
    sol.Y_prime.push_back(s.bottomRows(n));
  }
  return sol;
}

FundamentalPair fundamental_system(const PotentialSpec& V, Complex z, double x0,
                                   const BoundaryCondition& bc,
                                   const std::vector<double>& grid,
                                   const Tolerances& tol) {
  check_grid(V, x0, grid);
  const int n = V.dim();
  Matrix s0(2 * n, 2 * n);
  // One sweep carries both solutions: columns [theta | phi].
  s0.topLeftCorner(n, n) = bc.cos_alpha();
  s0.bottomLeftCorner(n, n) = bc.sin_alpha();
  s0.topRightCorner(n, n) = -bc.sin_alpha();
  s0.bottomRightCorner(n, n) = bc.cos_alpha();

  const OdeRhs rhs = [&V, z, n](double x, const Matrix& s) {
    Matrix out(2 * n, s.cols());
    out.topRows(n) = s.bottomRows(n);
    out.bottomRows(n) = (V.evaluate(x) - z * Matrix::Identity(n, n)) * s.topRows(n);
    return out;
  };

  std::vector<Matrix> states(grid.size());
  IntegratorOptions opt;
  opt.rtol = tol.ode_rel;
  opt.atol = tol.ode_abs;
  opt.mandatory_stops = V.breakpoints();
  std::vector<double> fwd, bwd;
  std::vector<size_t> fwd_idx, bwd_idx;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    if (std::abs(x - x0) <= 1e-14 * std::max(1.0, std::abs(x0))) {
      states[i] = s0;
    } else if (x > x0) {
      fwd.push_back(x);
      fwd_idx.push_back(i);
    } else {
      bwd.push_back(x);
      bwd_idx.push_back(i);
    }
  }
  std::reverse(bwd.begin(), bwd.end());
  std::reverse(bwd_idx.begin(), bwd_idx.end());
  if (!fwd.empty()) {
    integrate_dense(rhs, s0, x0, fwd, opt,
                    [&](size_t k, const Matrix& s) { states[fwd_idx[k]] = s; });
  }
  if (!bwd.empty()) {
    integrate_dense(rhs, s0, x0, bwd, opt,
                    [&](size_t k, const Matrix& s) { states[bwd_idx[k]] = s; });
  }

  FundamentalPair fp;
  fp.z = z;
  fp.x0 = x0;
  fp.grid = grid;
  fp.sin_alpha = bc.sin_alpha();
  fp.cos_alpha = bc.cos_alpha();
  for (const auto& s : states) {
    fp.theta.push_back(s.topLeftCorner(n, n));
    fp.theta_prime.push_back(s.bottomLeftCorner(n, n));
    fp.phi.push_back(s.topRightCorner(n, n));
    fp.phi_prime.push_back(s.bottomRightCorner(n, n));
  }
  return fp;
}

Matrix FundamentalPair::block(size_t i) const {
  const int n = static_cast<int>(theta[i].rows());
  Matrix b(2 * n, 2 * n);
  b.topLeftCorner(n, n) = theta[i];
  b.topRightCorner(n, n) = phi[i];
  b.bottomLeftCorner(n, n) = theta_prime[i];
  b.bottomRightCorner(n, n) = phi_prime[i];
  return b;
}

Matrix conjugate_inverse_block(const FundamentalPair& at_zbar, size_t i) {
  const int n = static_cast<int>(at_zbar.theta[i].rows());
  Matrix b(2 * n, 2 * n);
  b.topLeftCorner(n, n) = at_zbar.phi_prime[i].adjoint();
  b.topRightCorner(n, n) = -at_zbar.phi[i].adjoint();
  b.bottomLeftCorner(n, n) = -at_zbar.theta_prime[i].adjoint();
  b.bottomRightCorner(n, n) = at_zbar.theta[i].adjoint();
  return b;
}

std::vector<Complex> wronskian_vector(const VectorSolution& f1,
                                      const VectorSolution& f2) {
  if (f1.grid.size() != f2.grid.size()) {
    throw GridMismatch("wronskian_vector: grids differ in size");
  }
  for (size_t i = 0; i < f1.grid.size(); ++i) {
    if (std::abs(f1.grid[i] - f2.grid[i]) > 1e-12) {
      throw GridMismatch("wronskian_vector: grids differ");
    }
  }
  std::vector<Complex> w(f1.grid.size());
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = f1.y[i].dot(f2.y_prime[i]) - f1.y_prime[i].dot(f2.y[i]);
  }
  return w;
}

std::vector<Matrix> wronskian_operator(const std::vector<Matrix>& F1,
                                       const std::vector<Matrix>& F1_prime,
                                       const std::vector<Matrix>& F2,
                                       const std::vector<Matrix>& F2_prime) {
  if (F1.size() != F2.size() || F1.size() != F1_prime.size() ||
      F2.size() != F2_prime.size()) {
    throw GridMismatch("wronskian_operator: sample counts differ");
  }
  std::vector<Matrix> w(F1.size());
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = F1[i] * F2_prime[i] - F1_prime[i] * F2[i];
  }
  return w;
}

} // namespace wt
