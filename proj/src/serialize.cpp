#include "wt/serialize.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "wt/errors.hpp"

namespace wt {

namespace {

Json complex_to_json(Complex v) { return Json::array({v.real(), v.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

void require_keys(const Json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

} // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected matrix rows");
  const size_t nr = j.size();
  const size_t nc = j[0].size();
  Matrix m(nr, nc);
  for (size_t r = 0; r < nr; ++r) {
    if (j[r].size() != nc) throw ConfigError("ragged matrix rows");
    for (size_t c = 0; c < nc; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v[i]));
  return arr;
}

Vector vector_from_json(const Json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = complex_from_json(j[i]);
  return v;
}

Json measure_to_json(const MatrixMeasure& m) {
  Json j;
  j["dim"] = m.dim;
  j["partition"] = m.partition;
  Json cells = Json::array();
  for (const auto& c : m.cell_mass) cells.push_back(matrix_to_json(c));
  j["cell_mass"] = cells;
  Json atoms = Json::array();
  for (const auto& p : m.point_masses) {
    Json a;
    a["lambda"] = p.lambda;
    a["mass"] = matrix_to_json(p.mass);
    atoms.push_back(a);
  }
  j["point_masses"] = atoms;
  j["metadata"] = {{"eps_schedule", m.metadata.eps_schedule},
                   {"extrapolation_order", m.metadata.extrapolation_order}};
  return j;
}

MatrixMeasure measure_from_json(const Json& j) {
  MatrixMeasure m;
  m.dim = j.at("dim").get<int>();
  m.partition = j.at("partition").get<std::vector<double>>();
  for (const auto& c : j.at("cell_mass")) m.cell_mass.push_back(matrix_from_json(c));
  for (const auto& a : j.at("point_masses")) {
    MatrixMeasure::PointMass pm;
    pm.lambda = a.at("lambda").get<double>();
    pm.mass = matrix_from_json(a.at("mass"));
    m.point_masses.push_back(pm);
  }
  if (j.contains("metadata")) {
    m.metadata.eps_schedule =
        j["metadata"].at("eps_schedule").get<std::vector<double>>();
    m.metadata.extrapolation_order = j["metadata"].at("extrapolation_order").get<int>();
  }
  return m;
}

Json transform_to_json(const TransformResult& tr) {
  Json j;
  j["measure"] = measure_to_json(tr.measure);
  Json samples = Json::array();
  for (const auto& s : tr.samples) samples.push_back(vector_to_json(s));
  j["samples"] = samples;
  Json atom_samples = Json::array();
  for (const auto& s : tr.atom_samples) atom_samples.push_back(vector_to_json(s));
  j["atom_samples"] = atom_samples;
  j["source_grid"] = tr.source_grid;
  if (tr.block > 0) j["block"] = tr.block;
  return j;
}

TransformResult transform_from_json(const Json& j) {
  TransformResult tr;
  tr.measure = measure_from_json(j.at("measure"));
  for (const auto& s : j.at("samples")) tr.samples.push_back(vector_from_json(s));
  for (const auto& s : j.at("atom_samples")) {
    tr.atom_samples.push_back(vector_from_json(s));
  }
  tr.source_grid = j.at("source_grid").get<std::vector<double>>();
  tr.block = j.value("block", 0);
  return tr;
}

Json grid_function_to_json(const GridFunction& f) {
  Json j;
  j["x"] = f.x;
  Json vals = Json::array();
  for (const auto& v : f.values) vals.push_back(vector_to_json(v));
  j["values"] = vals;
  return j;
}

GridFunction grid_function_from_json(const Json& j) {
  GridFunction f;
  f.x = j.at("x").get<std::vector<double>>();
  for (const auto& v : j.at("values")) f.values.push_back(vector_from_json(v));
  return f;
}

namespace {

PotentialSpec potential_from_json(const Json& j, int dim, double lo, double hi) {
  require_keys(j, {"family", "v0", "depths", "widths", "centers", "diagonal",
                   "coupling", "x", "samples"},
               "potential");
  const std::string family = j.at("family").get<std::string>();
  if (family == "free") {
    return PotentialSpec::free(dim, lo, hi);
  }
  if (family == "constant") {
    return PotentialSpec::constant(HermitianMatrix(matrix_from_json(j.at("v0"))), lo, hi);
  }
  if (family == "diagonal_wells") {
    return PotentialSpec::diagonal_wells(j.at("depths").get<std::vector<double>>(),
                                         j.at("widths").get<std::vector<double>>(),
                                         j.at("centers").get<std::vector<double>>(), lo,
                                         hi);
  }
  if (family == "coupled_channel") {
    return PotentialSpec::coupled_channel(j.at("diagonal").get<std::vector<double>>(),
                                          j.at("coupling").get<double>(), lo, hi);
  }
  if (family == "sampled") {
    std::vector<HermitianMatrix> samples;
    for (const auto& s : j.at("samples")) {
      samples.push_back(HermitianMatrix(matrix_from_json(s)));
    }
    return PotentialSpec::sampled_table(j.at("x").get<std::vector<double>>(), samples,
                                        lo, hi);
  }
  throw ConfigError("unknown potential family \"" + family + "\"");
}

BoundaryCondition boundary_from_json(const Json& j, int dim) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "dirichlet") return BoundaryCondition::dirichlet(dim);
    if (name == "neumann") return BoundaryCondition::neumann(dim);
    throw ConfigError("unknown boundary \"" + name + "\"");
  }
  require_keys(j, {"alpha"}, "boundary");
  return BoundaryCondition(HermitianMatrix(matrix_from_json(j.at("alpha"))));
}

} // namespace

ProblemConfig parse_config(const Json& j) {
  require_keys(j, {"dim", "potential", "boundary", "geometry", "numerics"}, "config");
  ProblemConfig cfg;
  cfg.dim = j.at("dim").get<int>();
  if (cfg.dim < 1 || cfg.dim > 64) throw ConfigError("dim must be in [1, 64]");

  const Json& geo = j.at("geometry");
  require_keys(geo, {"kind", "a", "x0"}, "geometry");
  const std::string kind = geo.at("kind").get<std::string>();
  if (kind == "half_line") {
    cfg.full_line = false;
    cfg.a = geo.value("a", 0.0);
  } else if (kind == "full_line") {
    cfg.full_line = true;
    cfg.x0 = geo.value("x0", 0.0);
  } else {
    throw ConfigError("geometry.kind must be half_line or full_line");
  }

  const double lo = cfg.full_line ? -std::numeric_limits<double>::infinity() : cfg.a;
  cfg.potential = potential_from_json(j.at("potential"), cfg.dim, lo,
                                      std::numeric_limits<double>::infinity());
  if (cfg.potential.dim() != cfg.dim) {
    throw ConfigError("potential dimension disagrees with dim");
  }
  cfg.boundary = boundary_from_json(j.at("boundary"), cfg.dim);
  if (cfg.boundary.dim() != cfg.dim) {
    throw ConfigError("boundary dimension disagrees with dim");
  }

  if (j.contains("numerics")) {
    const Json& num = j.at("numerics");
    require_keys(num,
                 {"lambda_window", "cells", "eps_schedule", "quad_points", "threads",
                  "truncation_tol", "truncation_b0_factor", "truncation_max_doublings",
                  "ode_rel", "ode_abs"},
                 "numerics");
    if (num.contains("lambda_window")) {
      const auto window = num["lambda_window"].get<std::vector<double>>();
      if (window.size() != 2 || !(window[0] < window[1])) {
        throw ConfigError("lambda_window must be [lo, hi]");
      }
      cfg.lambda_lo = window[0];
      cfg.lambda_hi = window[1];
    }
    cfg.cells = num.value("cells", cfg.cells);
    if (cfg.cells < 1) throw ConfigError("cells must be positive");
    if (num.contains("eps_schedule")) {
      cfg.eps_schedule = num["eps_schedule"].get<std::vector<double>>();
      if (cfg.eps_schedule.empty()) throw ConfigError("eps_schedule empty");
    }
    cfg.quad_points = num.value("quad_points", cfg.quad_points);
    cfg.threads = num.value("threads", 1);
    cfg.truncation.tol = num.value("truncation_tol", cfg.truncation.tol);
    cfg.truncation.b0_factor = num.value("truncation_b0_factor", cfg.truncation.b0_factor);
    cfg.truncation.max_doublings =
        num.value("truncation_max_doublings", cfg.truncation.max_doublings);
    cfg.tolerances.ode_rel = num.value("ode_rel", cfg.tolerances.ode_rel);
    cfg.tolerances.ode_abs = num.value("ode_abs", cfg.tolerances.ode_abs);
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_complex(Complex v) {
  return format_double(v.real()) + "," + format_double(v.imag());
}

} // namespace wt
