#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wt/expansion.hpp"
#include "wt/fullline.hpp"
#include "wt/halfline.hpp"
#include "wt/herglotz.hpp"
#include "wt/types.hpp"

namespace wt {

using Json = nlohmann::json;

// Complex scalars serialize as [re, im]; matrices as row-major nested arrays
// of such pairs. Doubles rely on the shortest round-trip representation, so
// write/read/write is bit-exact.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json measure_to_json(const MatrixMeasure& m);
MatrixMeasure measure_from_json(const Json& j);

Json transform_to_json(const TransformResult& tr);
TransformResult transform_from_json(const Json& j);

Json grid_function_to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

// Parsed problem configuration; unknown keys are rejected.
struct ProblemConfig {
  int dim = 1;
  PotentialSpec potential = PotentialSpec::free(1);
  BoundaryCondition boundary = BoundaryCondition::dirichlet(1);
  bool full_line = false;
  double a = 0.0;  // half-line left endpoint
  double x0 = 0.0; // full-line reference point

  Tolerances tolerances;
  TruncationSchedule truncation;
  double lambda_lo = -10.0;
  double lambda_hi = 400.0;
  int cells = 4000;
  std::vector<double> eps_schedule{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  int quad_points = 8;
  int threads = 1;
};

ProblemConfig parse_config(const Json& j);
ProblemConfig load_config(const std::string& path);

// Locale-independent shortest round-trip float formatting (std::to_chars).
std::string format_double(double v);
std::string format_complex(Complex v); // "re,im" pair for CSV columns

} // namespace wt
