#include "wt/potential.hpp"

#include <algorithm>
#include <cmath>

#include "wt/errors.hpp"

namespace wt {

PotentialSpec PotentialSpec::free(int dim, double a, double b) {
  PotentialSpec p;
  p.dim_ = dim;
  p.kind_ = Kind::kFree;
  p.a_ = a;
  p.b_ = b;
  p.v0_ = Matrix::Zero(dim, dim);
  return p;
}

PotentialSpec PotentialSpec::constant(const HermitianMatrix& v0, double a, double b) {
  PotentialSpec p;
  p.dim_ = v0.dim();
  p.kind_ = Kind::kConstant;
  p.a_ = a;
  p.b_ = b;
  p.v0_ = v0.mat();
  return p;
}

PotentialSpec PotentialSpec::diagonal_wells(const std::vector<double>& depths,
                                            const std::vector<double>& widths,
                                            const std::vector<double>& centers,
                                            double a, double b) {
  if (depths.size() != widths.size() || depths.size() != centers.size() ||
      depths.empty()) {
    throw SpectralError("diagonal_wells: depths/widths/centers size mismatch");
  }
  PotentialSpec p;
  p.dim_ = static_cast<int>(depths.size());
  p.kind_ = Kind::kDiagonalWells;
  p.a_ = a;
  p.b_ = b;
  p.depths_ = depths;
  p.widths_ = widths;
  p.centers_ = centers;
  double lo = kInf, hi = -kInf;
  for (size_t j = 0; j < depths.size(); ++j) {
    const double l = centers[j] - 0.5 * widths[j];
    const double r = centers[j] + 0.5 * widths[j];
    p.breakpoints_.push_back(l);
    p.breakpoints_.push_back(r);
    lo = std::min(lo, l);
    hi = std::max(hi, r);
  }
  std::sort(p.breakpoints_.begin(), p.breakpoints_.end());
  p.constant_from_ = hi;
  p.constant_until_ = lo;
  return p;
}

PotentialSpec PotentialSpec::coupled_channel(const std::vector<double>& diagonal,
                                             double coupling, double a, double b) {
  const int n = static_cast<int>(diagonal.size());
  if (n < 2) throw SpectralError("coupled_channel: needs dimension >= 2");
  Matrix v = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) v(j, j) = diagonal[j];
  v(0, 1) += coupling;
  v(1, 0) += coupling;
  PotentialSpec p;
  p.dim_ = n;
  p.kind_ = Kind::kCoupledChannel;
  p.a_ = a;
  p.b_ = b;
  p.v0_ = v;
  return p;
}

PotentialSpec PotentialSpec::sampled_table(const std::vector<double>& xs,
                                           const std::vector<HermitianMatrix>& samples,
                                           double a, double b) {
  if (xs.size() != samples.size() || xs.size() < 2) {
    throw SpectralError("sampled_table: need >= 2 aligned samples");
  }
  for (size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw SpectralError("sampled_table: x-grid must be strictly increasing");
    }
  }
  PotentialSpec p;
  p.dim_ = samples.front().dim();
  p.kind_ = Kind::kSampledTable;
  p.a_ = a;
  p.b_ = b;
  p.table_x_ = xs;
  for (const auto& s : samples) {
    if (s.dim() != p.dim_) throw SpectralError("sampled_table: dimension mismatch");
    p.table_v_.push_back(s.mat());
  }
  p.breakpoints_ = xs;
  p.constant_from_ = xs.back();
  p.constant_until_ = xs.front();
  return p;
}

Matrix PotentialSpec::evaluate(double x) const {
  switch (kind_) {
    case Kind::kFree:
    case Kind::kConstant:
    case Kind::kCoupledChannel:
      return v0_;
    case Kind::kDiagonalWells: {
      Matrix v = Matrix::Zero(dim_, dim_);
      for (int j = 0; j < dim_; ++j) {
        if (x >= centers_[j] - 0.5 * widths_[j] && x <= centers_[j] + 0.5 * widths_[j]) {
          v(j, j) = -depths_[j];
        }
      }
      return v;
    }
    case Kind::kSampledTable: {
      if (x <= table_x_.front()) return table_v_.front();
      if (x >= table_x_.back()) return table_v_.back();
      const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
      const size_t i = static_cast<size_t>(it - table_x_.begin());
      const double t = (x - table_x_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
      return (1.0 - t) * table_v_[i - 1] + t * table_v_[i];
    }
  }
  throw SpectralError("PotentialSpec: unknown kind");
}

PotentialSpec PotentialSpec::reflected(double x0) const {
  PotentialSpec p = *this;
  p.a_ = std::isinf(b_) ? -kInf : 2.0 * x0 - b_;
  p.b_ = std::isinf(a_) ? kInf : 2.0 * x0 - a_;
  p.constant_from_ = 2.0 * x0 - constant_until_;
  p.constant_until_ = 2.0 * x0 - constant_from_;
  for (auto& bp : p.breakpoints_) bp = 2.0 * x0 - bp;
  std::sort(p.breakpoints_.begin(), p.breakpoints_.end());
  switch (kind_) {
    case Kind::kDiagonalWells:
      for (auto& c : p.centers_) c = 2.0 * x0 - c;
      break;
    case Kind::kSampledTable: {
      std::reverse(p.table_x_.begin(), p.table_x_.end());
      for (auto& x : p.table_x_) x = 2.0 * x0 - x;
      std::reverse(p.table_v_.begin(), p.table_v_.end());
      break;
    }
    default:
      break;
  }
  return p;
}

} // namespace wt
