#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conewalk/rng.hpp"

namespace conewalk {

/// Unit (or unnormalized) vector in the closed nonnegative cone.
class ConeVector {
 public:
  ConeVector() = default;

  /// Validates coordinates (finite, >= 0, not all zero) and normalizes to |x| = 1.
  static ConeVector unit(std::vector<double> coords);
  /// Validates coordinates without normalizing.
  static ConeVector raw(std::vector<double> coords);

  [[nodiscard]] std::size_t dim() const noexcept { return coords_.size(); }
  [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
  [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }
  [[nodiscard]] double norm() const;

 private:
  explicit ConeVector(std::vector<double> coords) : coords_(std::move(coords)) {}
  std::vector<double> coords_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Square matrix with nonnegative entries and no zero column, row-major.
class NonNegMatrix {
 public:
  /// Rejects with NonSquare, NegativeEntry(i,j) or ZeroColumn(j).
  static NonNegMatrix validate(const std::vector<std::vector<double>>& rows);
  static NonNegMatrix identity(std::size_t dim);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }

  [[nodiscard]] NonNegMatrix scaled(double c) const;
  /// this * rhs
  [[nodiscard]] NonNegMatrix operator*(const NonNegMatrix& rhs) const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  [[nodiscard]] double max_entry() const;

 private:
  NonNegMatrix(std::size_t dim, std::vector<double> entries)
      : dim_(dim), entries_(std::move(entries)) {}
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

/// Finitely supported distribution on nonnegative matrices.
class MatrixEnsemble {
 public:
  /// Probabilities must be > 0 and sum to 1 within 1e-12; all matrices share one dimension.
  MatrixEnsemble(std::vector<NonNegMatrix> matrices, std::vector<double> probs);

  [[nodiscard]] std::size_t dim() const noexcept { return matrices_.front().dim(); }
  [[nodiscard]] std::size_t size() const noexcept { return matrices_.size(); }
  [[nodiscard]] const NonNegMatrix& matrix(std::size_t i) const { return matrices_.at(i); }
  [[nodiscard]] double prob(std::size_t i) const { return probs_.at(i); }
  [[nodiscard]] const std::vector<NonNegMatrix>& matrices() const noexcept { return matrices_; }
  [[nodiscard]] const std::vector<double>& probs() const noexcept { return probs_; }

  /// Index drawn with the ensemble probabilities; consumes exactly one uniform.
  [[nodiscard]] std::size_t sample_index(RngStream& rng) const;

 private:
  std::vector<NonNegMatrix> matrices_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

struct SampledMatrix {
  std::size_t index;
  const NonNegMatrix& matrix;
};

SampledMatrix sample_matrix(const MatrixEnsemble& e, RngStream& rng);

struct ProjectiveStep {
  ConeVector x;
  double increment;
};

/// x' = m x / |m x|, increment = log |m x|. Throws NumericalUnderflow when |m x|
/// is not a normal positive double.
ProjectiveStep act_projective(const NonNegMatrix& m, const ConeVector& x);

}  // namespace conewalk
