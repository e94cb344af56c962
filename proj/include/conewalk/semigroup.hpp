#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "conewalk/ensemble.hpp"
#include "conewalk/rng.hpp"

namespace conewalk {

/// Ensemble indices (i_1, ..., i_m), standing for the product a_{i_m} ... a_{i_1}:
/// the first index is applied first.
using Word = std::vector<std::size_t>;

inline constexpr std::size_t kDefaultClosureCap = 1'000'000;

/// Positivity skeleton of a nonnegative matrix. Row i is a bitmask over columns.
class ZeroPattern {
 public:
  ZeroPattern() = default;
  explicit ZeroPattern(std::size_t dim);

  [[nodiscard]] std::size_t dim() const noexcept { return rows_.size(); }
  [[nodiscard]] bool get(std::size_t i, std::size_t j) const { return (rows_[i] >> j) & 1u; }
  void set(std::size_t i, std::size_t j, bool value);
  [[nodiscard]] bool all_true() const noexcept;
  [[nodiscard]] const std::vector<std::uint64_t>& rows() const noexcept { return rows_; }

  /// Boolean product (this * rhs).
  [[nodiscard]] ZeroPattern operator*(const ZeroPattern& rhs) const;

  friend bool operator==(const ZeroPattern&, const ZeroPattern&) = default;

 private:
  std::vector<std::uint64_t> rows_;
};

struct ZeroPatternHash {
  std::size_t operator()(const ZeroPattern& p) const noexcept;
};

ZeroPattern pattern_of(const NonNegMatrix& m);

/// Closure of the generator patterns under Boolean multiplication. Patterns are
/// stored in breadth-first discovery order, each with a shortest generating word.
struct PatternClosure {
  std::vector<ZeroPattern> patterns;
  std::vector<Word> witnesses;

  [[nodiscard]] std::optional<std::size_t> find(const ZeroPattern& p) const;

  std::unordered_map<ZeroPattern, std::size_t, ZeroPatternHash> index;
};

/// Throws ClosureTooLarge when more than `cap` patterns are discovered.
PatternClosure pattern_closure(const MatrixEnsemble& e, std::size_t cap = kDefaultClosureCap);

/// Shortest word with an all-true pattern. Exact: the pattern monoid is finite.
std::optional<Word> find_positive_product(const MatrixEnsemble& e, std::size_t cap = kDefaultClosureCap);

/// Product of a word, kept at unit max-entry with the scale tracked in log form.
struct ScaledProduct {
  NonNegMatrix matrix;
  double log_scale;
};

ScaledProduct word_product(const MatrixEnsemble& e, const Word& word);

struct PerronData {
  double lambda;
  double log_lambda;
  ConeVector w;
  double residual;
  std::size_t iterations;
};

/// Power iteration from (1,...,1)/sqrt(d); stops when successive normalized
/// iterates differ by < 1e-14, or throws NoConvergence after 1e5 iterations.
/// Throws NotPositive unless every entry is strictly positive.
PerronData perron(const NonNegMatrix& m);

/// Perron data of a word product; log_lambda includes the product's scale.
PerronData perron_of_word(const MatrixEnsemble& e, const Word& word);

struct LambdaSample {
  Word word;
  double log_lambda;
};

/// Random words (length uniform in [1, max_len], letters drawn from the ensemble
/// probabilities). Keeps distinct words with an all-true pattern, in draw order,
/// until n_words are collected or 20 * n_words draws are spent.
std::vector<LambdaSample> sample_lambda_set(const MatrixEnsemble& e, std::size_t n_words, std::size_t max_len,
                                            const RngStream& rng);

/// All positive words of length <= max_len in shortlex order, at most `limit` of them.
std::vector<LambdaSample> enumerate_lambda_set(const MatrixEnsemble& e, std::size_t max_len, std::size_t limit);

enum class DensityVerdict { DenseCompatible, ArithmeticSuspect };
std::string_view to_string(DensityVerdict v);

struct RationalFit {
  std::size_t i;
  std::size_t j;
  double ratio;
  std::int64_t p;
  std::int64_t q;
  double error;  // |q * ratio - p|
};

struct CommensurabilityReport {
  std::vector<RationalFit> pairs;
  DensityVerdict verdict;
};

/// Best rational approximation p/q (q <= q_max) of x in the sense of minimal
/// |q x - p|: the last continued-fraction convergent with q <= q_max.
RationalFit best_rational(double x, std::int64_t q_max);

/// Pairs of distinct nonzero values are tested for an integer relation
/// q * v_i = p * v_j (ratio taken larger/smaller in magnitude). Verdict is
/// ArithmeticSuspect when every pair fits within tol, or when fewer than two
/// distinct nonzero values exist.
CommensurabilityReport density_report(const std::vector<double>& values, double tol = 1e-9,
                                      std::int64_t q_max = 1'000'000);

enum class ConditionCVerdict { Holds, FailsII, Unknown };
std::string_view to_string(ConditionCVerdict v);

struct ConditionCReport {
  std::optional<Word> positive_word;
  std::size_t orbit_rank = 0;
  ConditionCVerdict verdict = ConditionCVerdict::Unknown;
  std::vector<LambdaSample> lambda_samples;
  CommensurabilityReport commensurability;
};

struct ConditionCOptions {
  std::size_t max_len = 4;
  std::size_t closure_cap = kDefaultClosureCap;
  std::size_t max_lambda_words = 64;
  double tol = 1e-9;
  std::int64_t q_max = 1'000'000;
};

/// Numerical rank of the span of the given vectors (singular values above
/// rel_tol times the largest).
std::size_t numerical_rank(const std::vector<std::vector<double>>& vectors, double rel_tol = 1e-8);

/// (ii) is decided exactly. (i) uses a sufficient criterion: the Gamma-orbit of
/// the Perron vector w_a of the positive witness, under all words of length
/// <= max_len, must span R^d. Any closed invariant subspace meeting the cone
/// contains w_a (the limit direction of a^n x) and hence the whole orbit span,
/// so full rank excludes it. Lower rank gives verdict Unknown.
ConditionCReport check_condition_C(const MatrixEnsemble& e, const ConditionCOptions& options = {});

}  // namespace conewalk
