#pragma once

#include <limits>
#include <string>
#include <vector>

#include "wt/matfun.hpp"
#include "wt/types.hpp"

namespace wt {

// Description of x -> V(x): a builtin family or a sampled table with
// piecewise-linear interpolation. Every evaluation returns a Hermitian
// matrix; table queries outside the grid clamp to the nearest sample, so
// all supported potentials are constant near the ends of their domain.
class PotentialSpec {
 public:
  enum class Kind { kFree, kConstant, kDiagonalWells, kCoupledChannel, kSampledTable };

  static PotentialSpec free(int dim, double a = -kInf, double b = kInf);
  static PotentialSpec constant(const HermitianMatrix& v0, double a = -kInf,
                                double b = kInf);
  // Square wells per channel: V_jj(x) = -depth[j] on
  // [center[j]-width[j]/2, center[j]+width[j]/2], zero otherwise.
  static PotentialSpec diagonal_wells(const std::vector<double>& depths,
                                      const std::vector<double>& widths,
                                      const std::vector<double>& centers,
                                      double a = -kInf, double b = kInf);
  // Constant diagonal part plus coupling c*(E_12 + E_21).
  static PotentialSpec coupled_channel(const std::vector<double>& diagonal,
                                       double coupling, double a = -kInf,
                                       double b = kInf);
  static PotentialSpec sampled_table(const std::vector<double>& xs,
                                     const std::vector<HermitianMatrix>& samples,
                                     double a = -kInf, double b = kInf);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  double domain_a() const { return a_; }
  double domain_b() const { return b_; }
  bool contains(double x) const { return x >= a_ && x <= b_; }

  Matrix evaluate(double x) const;

  // Locations where V has kinks or jumps; integration steps never straddle
  // these.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  // V is constant on [x, domain_b) for x >= constant_from(), and constant on
  // (domain_a, x] for x <= constant_until(). tail_right/tail_left return the
  // constant values.
  double constant_from() const { return constant_from_; }
  double constant_until() const { return constant_until_; }
  Matrix tail_right() const { return evaluate(constant_from_ + 1.0); }
  Matrix tail_left() const { return evaluate(constant_until_ - 1.0); }

  // Potential x -> V(2*x0 - x) on the reflected domain; turns a left
  // half-line problem into a right half-line one.
  PotentialSpec reflected(double x0) const;

 private:
  PotentialSpec() = default;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  int dim_ = 0;
  Kind kind_ = Kind::kFree;
  double a_ = -kInf;
  double b_ = kInf;
  std::vector<double> breakpoints_;
  double constant_from_ = -kInf;
  double constant_until_ = kInf;

  Matrix v0_;                   // kConstant / kCoupledChannel
  std::vector<double> depths_, widths_, centers_;
  std::vector<double> table_x_;
  std::vector<Matrix> table_v_;
};

} // namespace wt
