// wtspec: configure a Schroedinger problem with a matrix-valued potential,
// run Weyl-Titchmarsh computations, and emit machine-readable results.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wt/errors.hpp"
#include "wt/expansion.hpp"
#include "wt/fdoracle.hpp"
#include "wt/fullline.hpp"
#include "wt/halfline.hpp"
#include "wt/herglotz.hpp"
#include "wt/serialize.hpp"

using namespace wt;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0; // 0 = take the config value
};

ProblemConfig load(const CommonArgs& args) {
  ProblemConfig cfg = load_config(args.config_path);
  if (args.threads > 0) cfg.threads = args.threads;
  return cfg;
}

Complex parse_z(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("expected z as re,im");
  try {
    return Complex(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
  } catch (const std::exception&) {
    throw ConfigError("cannot parse complex value \"" + s + "\"");
  }
}

std::ofstream open_out(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  const auto path = std::filesystem::path(args.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  return out;
}

AssemblyOptions assembly_options(const ProblemConfig& cfg) {
  AssemblyOptions opts;
  opts.eps_schedule = cfg.eps_schedule;
  opts.quad_points = cfg.quad_points;
  opts.threads = cfg.threads;
  return opts;
}

HerglotzEvaluator measure_evaluator(const ProblemConfig& cfg) {
  if (cfg.full_line) {
    auto sys = std::make_shared<FullLineSystem>(cfg.potential, cfg.x0, cfg.boundary,
                                                cfg.truncation, cfg.tolerances);
    return [sys](Complex z) { return sys->block_weyl_outgoing(z); };
  }
  const ProblemConfig c = cfg;
  return [c](Complex z) { return m_outgoing(c.potential, c.a, c.boundary, z, c.tolerances); };
}

int cmd_m_function(const CommonArgs& args, const std::vector<std::string>& z_args) {
  const ProblemConfig cfg = load(args);
  std::vector<Complex> zs;
  for (const auto& s : z_args) {
    const Complex z = parse_z(s);
    if (z.imag() == 0.0) throw ConfigError("Im z must be nonzero");
    zs.push_back(z);
  }
  if (zs.empty()) throw ConfigError("need at least one --z");

  std::ofstream out = open_out(args, "m_function.csv");
  const int n = cfg.dim;
  if (!cfg.full_line) {
    const WeylFunction wf(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                          cfg.tolerances);
    out << "z_re,z_im,b";
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) out << ",m_" << r << c << "_re,m_" << r << c << "_im";
    }
    out << "\n";
    for (Complex z : zs) {
      const Matrix m = wf.value(z);
      out << format_double(z.real()) << "," << format_double(z.imag()) << ","
          << format_double(wf.achieved_truncation(z));
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) out << "," << format_complex(m(r, c));
      }
      out << "\n";
    }
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    out << "z_re,z_im";
    for (const char* side : {"mplus", "mminus"}) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          out << "," << side << "_" << r << c << "_re," << side << "_" << r << c << "_im";
        }
      }
    }
    out << "\n";
    for (Complex z : zs) {
      const Matrix mp = sys.m_plus(z);
      const Matrix mm = sys.m_minus(z);
      out << format_double(z.real()) << "," << format_double(z.imag());
      for (const Matrix* m : {&mp, &mm}) {
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) out << "," << format_complex((*m)(r, c));
        }
      }
      out << "\n";
    }
  }
  return 0;
}

void write_measure_outputs(const CommonArgs& args, const ProblemConfig& cfg,
                           const MatrixMeasure& measure, int block) {
  {
    std::ofstream out = open_out(args, "measure.json");
    Json j = measure_to_json(measure);
    if (block > 0) j["block"] = block;
    out << j.dump(2) << "\n";
  }
  std::ofstream csv = open_out(args, "density.csv");
  csv << "kind,lambda,width";
  for (int i = 0; i < measure.dim; ++i) csv << ",eig" << i;
  csv << "\n";
  for (size_t k = 0; k < measure.num_cells(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(measure.cell_mass[k], Eigen::EigenvaluesOnly);
    const double width = measure.cell_hi(k) - measure.cell_lo(k);
    csv << "cell," << format_double(measure.cell_mid(k)) << "," << format_double(width);
    for (int i = 0; i < measure.dim; ++i) {
      csv << "," << format_double(es.eigenvalues()[i] / width);
    }
    csv << "\n";
  }
  for (const auto& pm : measure.point_masses) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(pm.mass, Eigen::EigenvaluesOnly);
    csv << "atom," << format_double(pm.lambda) << ",0";
    for (int i = 0; i < measure.dim; ++i) csv << "," << format_double(es.eigenvalues()[i]);
    csv << "\n";
  }
  (void)cfg;
}

int cmd_spectral_measure(const CommonArgs& args, bool force_fullline) {
  const ProblemConfig cfg = load(args);
  if (force_fullline && !cfg.full_line) {
    throw ConfigError("fullline-measure requires geometry.kind = full_line");
  }
  const auto partition = uniform_partition(cfg.lambda_lo, cfg.lambda_hi, cfg.cells);
  const MatrixMeasure measure =
      assemble_measure(measure_evaluator(cfg), partition, assembly_options(cfg),
                       cfg.tolerances);
  write_measure_outputs(args, cfg, measure, cfg.full_line ? 2 * cfg.dim : 0);
  return 0;
}

int cmd_greens(const CommonArgs& args, const std::string& z_arg,
               const std::vector<double>& xs, const std::vector<double>& xps) {
  const ProblemConfig cfg = load(args);
  const Complex z = parse_z(z_arg);
  if (z.imag() == 0.0) throw ConfigError("Im z must be nonzero");
  if (xs.empty() || xps.empty()) throw ConfigError("need --x and --xp lists");

  std::ofstream out = open_out(args, "greens.csv");
  const int n = cfg.dim;
  out << "x,xp";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out << ",g_" << r << c << "_re,g_" << r << c << "_im";
  }
  out << "\n";
  if (!cfg.full_line) {
    const WeylFunction wf(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                          cfg.tolerances);
    for (double x : xs) {
      for (double xp : xps) {
        const Matrix g = greens_kernel(wf, z, x, xp);
        out << format_double(x) << "," << format_double(xp);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) out << "," << format_complex(g(r, c));
        }
        out << "\n";
      }
    }
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    for (double x : xs) {
      for (double xp : xps) {
        const Matrix g = sys.greens(z, x, xp);
        out << format_double(x) << "," << format_double(xp);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) out << "," << format_complex(g(r, c));
        }
        out << "\n";
      }
    }
  }
  return 0;
}

int cmd_expand(const CommonArgs& args, const std::string& signal_path, bool roundtrip) {
  const ProblemConfig cfg = load(args);
  std::ifstream in(signal_path);
  if (!in) throw ConfigError("cannot open signal file " + signal_path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("signal parse error: ") + e.what());
  }
  const GridFunction h = grid_function_from_json(j);
  h.check_simpson();
  for (const auto& v : h.values) {
    if (v.size() != cfg.dim) throw ConfigError("signal dimension disagrees with dim");
  }

  const auto partition = uniform_partition(cfg.lambda_lo, cfg.lambda_hi, cfg.cells);
  const MatrixMeasure measure = assemble_measure(
      measure_evaluator(cfg), partition, assembly_options(cfg), cfg.tolerances);

  TransformResult tr;
  GridFunction rec;
  if (!cfg.full_line) {
    tr = forward_transform(cfg.potential, cfg.a, cfg.boundary, h, measure,
                           cfg.tolerances);
    if (roundtrip) rec = inverse_transform(tr, cfg.potential, cfg.a, cfg.boundary, h.x,
                                           cfg.tolerances);
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    tr = sys.transform(h, measure);
    if (roundtrip) rec = sys.inverse_transform(tr, h.x);
  }
  {
    std::ofstream out = open_out(args, "transform.json");
    out << transform_to_json(tr).dump(2) << "\n";
  }
  if (roundtrip) {
    {
      std::ofstream out = open_out(args, "reconstruction.json");
      out << grid_function_to_json(rec).dump(2) << "\n";
    }
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < h.x.size(); ++i) {
      num += (rec.values[i] - h.values[i]).squaredNorm();
      den += h.values[i].squaredNorm();
    }
    const double rel = den > 0.0 ? std::sqrt(num / den) : 0.0;
    std::cout << "roundtrip_relative_l2 " << format_double(rel) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify: invariant suites with one pass/fail line per check.

struct VerifyReport {
  bool all_pass = true;
  void line(const std::string& name, double residual, double tol) {
    const bool pass = residual < tol;
    all_pass = all_pass && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": residual "
              << format_double(residual) << " (tol " << format_double(tol) << ")\n";
  }
};

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void suite_wronskian(const ProblemConfig& cfg, VerifyReport& rep) {
  const double x0 = cfg.full_line ? cfg.x0 : cfg.a;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Complex z(u(rng), (trial % 2 ? -1.0 : 1.0) * (0.5 + std::abs(u(rng))));
    std::vector<double> grid(50);
    for (int i = 0; i < 50; ++i) grid[i] = x0 + 5.0 * i / 49.0;
    const FundamentalPair fp =
        fundamental_system(cfg.potential, z, x0, cfg.boundary, grid, cfg.tolerances);
    const FundamentalPair fpc = fundamental_system(cfg.potential, std::conj(z), x0,
                                                   cfg.boundary, grid, cfg.tolerances);
    const Matrix id = Matrix::Identity(2 * cfg.dim, 2 * cfg.dim);
    for (size_t i = 0; i < grid.size(); ++i) {
      const Matrix blk = fp.block(i);
      const Matrix inv = conjugate_inverse_block(fpc, i);
      worst = std::max(worst, max_abs(inv * blk - id));
      worst = std::max(worst, max_abs(blk * inv - id));
    }
  }
  rep.line("wronskian identity block (both orders)", worst, 1e-7);
}

void suite_herglotz(const ProblemConfig& cfg, VerifyReport& rep) {
  double worst_psd = 0.0, worst_sym = 0.0;
  auto probe = [&](const std::function<Matrix(Complex)>& m, Complex z) {
    const Matrix v = m(z);
    const Matrix vc = m(std::conj(z));
    worst_sym = std::max(worst_sym, max_abs(vc - v.adjoint()));
    const double mineig = min_eigenvalue((v - v.adjoint()) / Complex(0, 2));
    worst_psd = std::max(worst_psd, std::max(0.0, -mineig));
  };
  if (!cfg.full_line) {
    const WeylFunction wf(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                          cfg.tolerances);
    for (double re : {-1.0, 0.7, 2.0}) {
      for (double im : {0.5, 1.0, 2.0}) {
        probe([&](Complex z) { return wf.value(z); }, Complex(re, im));
      }
    }
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    for (double re : {-1.0, 0.7, 2.0}) {
      for (double im : {0.5, 1.0, 2.0}) {
        probe([&](Complex z) { return sys.block_weyl(z).block(); }, Complex(re, im));
      }
    }
  }
  rep.line("herglotz Im m >= 0 on the z-grid", worst_psd, 1e-8);
  rep.line("herglotz m(conj z) = m(z)^*", worst_sym, 1e-8);
}

void suite_lft(const ProblemConfig& cfg, VerifyReport& rep) {
  if (cfg.full_line) {
    std::cout << "[SKIP] lft: defined for half-line boundary data\n";
    return;
  }
  const Complex z(1.0, 1.0);
  const WeylFunction wf_alpha(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                              cfg.tolerances);
  const Matrix m_alpha = wf_alpha.value(z);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix b(cfg.dim, cfg.dim);
  for (int r = 0; r < cfg.dim; ++r) {
    for (int c = 0; c < cfg.dim; ++c) b(r, c) = Complex(u(rng), u(rng));
  }
  double worst = 0.0;
  for (const BoundaryCondition& beta :
       {BoundaryCondition::neumann(cfg.dim),
        BoundaryCondition(HermitianMatrix(Matrix(0.5 * (b + b.adjoint()))))}) {
    const Matrix direct =
        WeylFunction(cfg.potential, cfg.a, beta, cfg.truncation, cfg.tolerances).value(z);
    const Matrix via = lft_boundary_change(m_alpha, cfg.boundary, beta, cfg.tolerances);
    worst = std::max(worst, max_abs(direct - via));
    const Matrix back = lft_boundary_change(via, beta, cfg.boundary, cfg.tolerances);
    worst = std::max(worst, max_abs(back - m_alpha));
  }
  rep.line("lft boundary transformation vs direct computation", worst, 1e-6);
}

GridFunction verify_bump(const ProblemConfig& cfg) {
  const double x0 = cfg.full_line ? cfg.x0 : cfg.a;
  const double lo = cfg.full_line ? x0 - 1.0 : x0 + 0.8;
  const double hi = lo + 2.0;
  const double glo = cfg.full_line ? lo - 0.6 : x0;
  const double ghi = hi + 0.6;
  GridFunction h;
  const int panels = 800;
  h.x.resize(panels + 1);
  h.values.assign(panels + 1, Vector::Zero(cfg.dim));
  for (int i = 0; i <= panels; ++i) {
    h.x[i] = glo + (ghi - glo) * i / panels;
    const double x = h.x[i];
    if (x > lo && x < hi) {
      const double s = std::sin(M_PI * (x - lo) / (hi - lo));
      h.values[i][0] = std::pow(s, 8);
    }
  }
  return h;
}

void suite_parseval(const ProblemConfig& cfg, VerifyReport& rep) {
  AssemblyOptions opts = assembly_options(cfg);
  opts.detect_atoms = false;
  if (cfg.full_line) {
    // Resolve the inverse-sqrt edge of the block measure.
    opts.eps_schedule = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
  }
  std::vector<double> partition(cfg.cells + 1);
  const double k0 = std::sqrt(std::max(0.0, cfg.lambda_lo));
  const double k1 = std::sqrt(std::max(1.0, cfg.lambda_hi));
  for (int i = 0; i <= cfg.cells; ++i) {
    const double k = k0 + (k1 - k0) * i / cfg.cells;
    partition[i] = k * k;
  }
  const MatrixMeasure measure = assemble_measure(measure_evaluator(cfg), partition,
                                                 opts, cfg.tolerances);
  const GridFunction h = verify_bump(cfg);
  const double norm2 = std::norm(l2_norm(h));

  TransformResult tr;
  GridFunction rec;
  if (!cfg.full_line) {
    tr = forward_transform(cfg.potential, cfg.a, cfg.boundary, h, measure, cfg.tolerances);
    rec = inverse_transform(tr, cfg.potential, cfg.a, cfg.boundary, h.x, cfg.tolerances);
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    tr = sys.transform(h, measure);
    rec = sys.inverse_transform(tr, h.x);
  }
  const double parseval = std::abs(std::real(model_inner_product(tr, tr)) - norm2) / norm2;
  rep.line("parseval |(hhat,hhat) - ||h||^2| / ||h||^2", parseval, 5e-3);

  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < h.x.size(); ++i) {
    num += (rec.values[i] - h.values[i]).squaredNorm();
    den += h.values[i].squaredNorm();
  }
  rep.line("roundtrip relative L2 error", std::sqrt(num / den), 5e-3);
}

void suite_stone(const ProblemConfig& cfg, VerifyReport& rep) {
  // (f, F(H) E((1,4]) g) with F(lambda) = lambda^2: measure side via the
  // transform, resolvent side via Stone's formula with Richardson in eps.
  AssemblyOptions opts = assembly_options(cfg);
  opts.detect_atoms = false;
  if (cfg.full_line) opts.eps_schedule = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
  std::vector<double> partition(cfg.cells + 1);
  const double kmax = std::sqrt(std::max(9.0, cfg.lambda_hi));
  for (int i = 0; i <= cfg.cells; ++i) {
    const double k = kmax * i / cfg.cells;
    partition[i] = k * k;
  }
  const MatrixMeasure measure = assemble_measure(measure_evaluator(cfg), partition,
                                                 opts, cfg.tolerances);

  const GridFunction f = verify_bump(cfg);
  GridFunction g = f;
  for (size_t i = 0; i < g.x.size(); ++i) {
    g.values[i] *= std::cos(2.0 * (g.x[i] - g.x.front()));
  }
  const double l1 = 1.0, l2 = 4.0;
  auto F = [](double lam) { return lam * lam; };

  TransformResult tf, tg;
  if (!cfg.full_line) {
    tf = forward_transform(cfg.potential, cfg.a, cfg.boundary, f, measure, cfg.tolerances);
    tg = forward_transform(cfg.potential, cfg.a, cfg.boundary, g, measure, cfg.tolerances);
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    tf = sys.transform(f, measure);
    tg = sys.transform(g, measure);
  }
  Complex measure_side = 0.0;
  for (size_t k = 0; k < measure.num_cells(); ++k) {
    const double lam = measure.cell_mid(k);
    if (!(lam > l1 && lam <= l2)) continue;
    measure_side += F(lam) * tf.samples[k].dot(measure.cell_mass[k] * tg.samples[k]);
  }

  std::vector<double> nodes, weights;
  gauss_legendre(24, nodes, weights);
  const std::vector<double> eps_sched{0.1, 0.05, 0.025};
  std::vector<Complex> vals;
  const WeylFunction wf(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                        cfg.tolerances);
  const FullLineSystem* sys_ptr = nullptr;
  std::unique_ptr<FullLineSystem> sys_holder;
  if (cfg.full_line) {
    sys_holder = std::make_unique<FullLineSystem>(cfg.potential, cfg.x0, cfg.boundary,
                                                  cfg.truncation, cfg.tolerances);
    sys_ptr = sys_holder.get();
  }
  for (double eps : eps_sched) {
    Complex acc = 0.0;
    for (size_t q = 0; q < nodes.size(); ++q) {
      const double lam = 0.5 * (l1 + l2) + 0.5 * (l2 - l1) * nodes[q];
      const double w = 0.5 * (l2 - l1) * weights[q];
      for (double sign : {1.0, -1.0}) {
        const Complex z(lam, sign * eps);
        std::vector<Vector> rg;
        if (!cfg.full_line) {
          rg = resolvent_apply(wf, z, g.x, g.values);
        } else {
          rg = sys_ptr->resolvent_apply(z, g.x, g.values);
        }
        GridFunction rgf;
        rgf.x = g.x;
        rgf.values = rg;
        acc += sign * w * F(lam) * l2_inner(f, rgf) / (2.0 * M_PI * kImagUnit);
      }
    }
    vals.push_back(acc);
  }
  const Complex r01 = (eps_sched[0] * vals[1] - eps_sched[1] * vals[0]) /
                      (eps_sched[0] - eps_sched[1]);
  const Complex r12 = (eps_sched[1] * vals[2] - eps_sched[2] * vals[1]) /
                      (eps_sched[1] - eps_sched[2]);
  const double p0 = eps_sched[0] * eps_sched[0], p2 = eps_sched[2] * eps_sched[2];
  const Complex resolvent_side = (p0 * r12 - p2 * r01) / (p0 - p2);
  const double rel = std::abs(measure_side - resolvent_side) /
                     std::max(1e-30, std::abs(measure_side));
  rep.line("stone formula measure side vs resolvent side", rel, 5e-3);
}

void suite_greens_symmetry(const ProblemConfig& cfg, VerifyReport& rep) {
  const Complex z(0.8, 1.1);
  double worst_sym = 0.0, worst_jump = 0.0;
  auto jump_at = [&](const std::function<Matrix(Complex, double, double)>& g, double xp) {
    const double eps = 1e-3;
    const Matrix g0 = g(z, xp, xp);
    const Matrix right = (4.0 * g(z, xp + eps, xp) - 3.0 * g0 - g(z, xp + 2 * eps, xp)) /
                         (2 * eps);
    const Matrix left = (3.0 * g0 - 4.0 * g(z, xp - eps, xp) + g(z, xp - 2 * eps, xp)) /
                        (2 * eps);
    return max_abs((right - left) + Matrix::Identity(cfg.dim, cfg.dim));
  };
  if (!cfg.full_line) {
    const WeylFunction wf(cfg.potential, cfg.a, cfg.boundary, cfg.truncation,
                          cfg.tolerances);
    auto g = [&](Complex zz, double x, double xp) { return greens_kernel(wf, zz, x, xp); };
    for (auto [x, xp] : {std::pair{cfg.a + 0.5, cfg.a + 1.7}, {cfg.a + 2.3, cfg.a + 0.9}}) {
      worst_sym = std::max(
          worst_sym, max_abs(g(z, x, xp).adjoint() - g(std::conj(z), xp, x)));
    }
    worst_jump = jump_at(g, cfg.a + 1.3);
  } else {
    const FullLineSystem sys(cfg.potential, cfg.x0, cfg.boundary, cfg.truncation,
                             cfg.tolerances);
    auto g = [&](Complex zz, double x, double xp) { return sys.greens(zz, x, xp); };
    for (auto [x, xp] : {std::pair{cfg.x0 - 1.2, cfg.x0 + 0.8}, {cfg.x0 + 1.4, cfg.x0 - 0.3}}) {
      worst_sym = std::max(
          worst_sym, max_abs(g(z, x, xp).adjoint() - g(std::conj(z), xp, x)));
    }
    worst_jump = jump_at(g, cfg.x0 + 0.4);
  }
  rep.line("greens conjugate symmetry G(z,x,x')^* = G(zbar,x',x)", worst_sym, 1e-7);
  rep.line("greens derivative jump equals -I", worst_jump, 1e-5);
}

int cmd_verify(const CommonArgs& args, const std::string& suite) {
  const ProblemConfig cfg = load(args);
  VerifyReport rep;
  bool known = false;
  if (suite == "wronskian" || suite == "all") {
    suite_wronskian(cfg, rep);
    known = true;
  }
  if (suite == "herglotz" || suite == "all") {
    suite_herglotz(cfg, rep);
    known = true;
  }
  if (suite == "lft" || suite == "all") {
    suite_lft(cfg, rep);
    known = true;
  }
  if (suite == "parseval" || suite == "all") {
    suite_parseval(cfg, rep);
    known = true;
  }
  if (suite == "stone" || suite == "all") {
    suite_stone(cfg, rep);
    known = true;
  }
  if (suite == "greens-symmetry" || suite == "all") {
    suite_greens_symmetry(cfg, rep);
    known = true;
  }
  if (!known) throw ConfigError("unknown suite \"" + suite + "\"");
  return rep.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl-Titchmarsh spectral computations for matrix Schroedinger operators"};
  app.require_subcommand(1);

  CommonArgs common;
  std::vector<std::string> z_args;
  std::string z_single;
  std::vector<double> xs, xps;
  std::string signal_path;
  bool roundtrip = false;
  std::string suite = "all";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "problem configuration (JSON)")
        ->required();
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--threads", common.threads, "worker thread cap");
  };

  CLI::App* sub_m = app.add_subcommand("m-function", "evaluate the Weyl m-function");
  add_common(sub_m);
  sub_m->add_option("--z", z_args, "evaluation points re,im")->required();

  CLI::App* sub_meas = app.add_subcommand("spectral-measure", "assemble the spectral measure");
  add_common(sub_meas);

  CLI::App* sub_flm =
      app.add_subcommand("fullline-measure", "assemble the 2n block spectral measure");
  add_common(sub_flm);

  CLI::App* sub_g = app.add_subcommand("greens", "evaluate the Green's function kernel");
  add_common(sub_g);
  sub_g->add_option("--z", z_single, "spectral parameter re,im")->required();
  sub_g->add_option("--x", xs, "first coordinates")->required();
  sub_g->add_option("--xp", xps, "second coordinates")->required();

  CLI::App* sub_e = app.add_subcommand("expand", "eigenfunction-expansion transform");
  add_common(sub_e);
  sub_e->add_option("--signal", signal_path, "input grid function (JSON)")->required();
  sub_e->add_flag("--roundtrip", roundtrip, "also reconstruct and report the L2 error");

  CLI::App* sub_v = app.add_subcommand("verify", "run invariant suites");
  add_common(sub_v);
  sub_v->add_option("--suite", suite,
                    "wronskian|herglotz|lft|parseval|stone|greens-symmetry|all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sub_m->parsed()) return cmd_m_function(common, z_args);
    if (sub_meas->parsed()) return cmd_spectral_measure(common, false);
    if (sub_flm->parsed()) return cmd_spectral_measure(common, true);
    if (sub_g->parsed()) return cmd_greens(common, z_single, xs, xps);
    if (sub_e->parsed()) return cmd_expand(common, signal_path, roundtrip);
    if (sub_v->parsed()) return cmd_verify(common, suite);
  } catch (const TruncationNotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonHermitian& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SpectralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
