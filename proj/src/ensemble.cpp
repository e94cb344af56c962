#include "conewalk/ensemble.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>

#include "conewalk/error.hpp"

namespace conewalk {

namespace {

void check_cone_coords(const std::vector<double>& coords) {
  if (coords.empty()) throw Error(ErrorCode::InvalidArgument, "cone vector has no coordinates");
  bool any_positive = false;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i]) || coords[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "cone vector coordinate " + std::to_string(i) + " is negative or not finite");
    }
    any_positive = any_positive || coords[i] > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::InvalidArgument, "cone vector is zero");
}

double norm2(std::span<const double> v) {
  // Scaled to avoid overflow for large coordinates.
  double scale = 0.0;
  for (double c : v) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double c : v) {
    const double t = c / scale;
    sum += t * t;
  }
  return scale * std::sqrt(sum);
}

}  // namespace

ConeVector ConeVector::unit(std::vector<double> coords) {
  check_cone_coords(coords);
  const double n = norm2(coords);
  for (double& c : coords) c /= n;
  return ConeVector(std::move(coords));
}

ConeVector ConeVector::raw(std::vector<double> coords) {
  check_cone_coords(coords);
  return ConeVector(std::move(coords));
}

double ConeVector::norm() const { return norm2(coords_); }

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

NonNegMatrix NonNegMatrix::validate(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.size();
  if (d < 2) throw Error(ErrorCode::NonSquare, "matrix dimension must be at least 2");
  std::vector<double> entries;
  entries.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) {
      throw Error(ErrorCode::NonSquare, "row " + std::to_string(i) + " has " +
                                            std::to_string(rows[i].size()) + " entries, expected " +
                                            std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double v = rows[i][j];
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::NegativeEntry,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is negative or not finite");
      }
      entries.push_back(v);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    bool positive = false;
    for (std::size_t i = 0; i < d; ++i) positive = positive || entries[i * d + j] > 0.0;
    if (!positive) throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is zero");
  }
  return NonNegMatrix(d, std::move(entries));
}

NonNegMatrix NonNegMatrix::identity(std::size_t dim) {
  std::vector<double> entries(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) entries[i * dim + i] = 1.0;
  return NonNegMatrix(dim, std::move(entries));
}

NonNegMatrix NonNegMatrix::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  std::vector<double> e = entries_;
  for (double& v : e) v *= c;
  return NonNegMatrix(dim_, std::move(e));
}

NonNegMatrix NonNegMatrix::operator*(const NonNegMatrix& rhs) const {
  if (rhs.dim_ != dim_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch in product");
  std::vector<double> out(dim_ * dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t k = 0; k < dim_; ++k) {
      const double a = entries_[i * dim_ + k];
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < dim_; ++j) out[i * dim_ + j] += a * rhs.entries_[k * dim_ + j];
    }
  return NonNegMatrix(dim_, std::move(out));
}

std::vector<double> NonNegMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) acc += entries_[i * dim_ + j] * x[j];
    y[i] = acc;
  }
  return y;
}

double NonNegMatrix::max_entry() const { return *std::max_element(entries_.begin(), entries_.end()); }

MatrixEnsemble::MatrixEnsemble(std::vector<NonNegMatrix> matrices, std::vector<double> probs)
    : matrices_(std::move(matrices)), probs_(std::move(probs)) {
  if (matrices_.empty()) throw Error(ErrorCode::InvalidEnsemble, "ensemble has no matrices");
  if (matrices_.size() != probs_.size()) {
    throw Error(ErrorCode::InvalidEnsemble, "number of probabilities does not match number of matrices");
  }
  const std::size_t d = matrices_.front().dim();
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    if (matrices_[i].dim() != d) {
      throw Error(ErrorCode::InvalidEnsemble, "matrix " + std::to_string(i) + " has a different dimension");
    }
    if (!(probs_[i] > 0.0) || !std::isfinite(probs_[i])) {
      throw Error(ErrorCode::InvalidEnsemble, "probability " + std::to_string(i) + " is not positive");
    }
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidEnsemble, "probabilities do not sum to 1");
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

std::size_t MatrixEnsemble::sample_index(RngStream& rng) const {
  const double u = rng.uniform();
  if (matrices_.size() == 1) return 0;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), matrices_.size() - 1);
}

SampledMatrix sample_matrix(const MatrixEnsemble& e, RngStream& rng) {
  const std::size_t i = e.sample_index(rng);
  return {i, e.matrix(i)};
}

ProjectiveStep act_projective(const NonNegMatrix& m, const ConeVector& x) {
  std::vector<double> y = m.apply(x.coords());
  const double n = norm2(y);
  if (!(n >= DBL_MIN) || !std::isfinite(n)) {
    throw Error(ErrorCode::NumericalUnderflow, "|m x| is not a representable positive number");
  }
  for (double& c : y) c /= n;
  return {ConeVector::raw(std::move(y)), std::log(n)};
}

}  // namespace conewalk
