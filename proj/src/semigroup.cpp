#include "conewalk/semigroup.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "conewalk/error.hpp"
#include "conewalk/parallel.hpp"

namespace conewalk {

ZeroPattern::ZeroPattern(std::size_t dim) : rows_(dim, 0) {
  if (dim > 64) throw Error(ErrorCode::InvalidArgument, "zero patterns support dimension <= 64");
}

void ZeroPattern::set(std::size_t i, std::size_t j, bool value) {
  const std::uint64_t bit = std::uint64_t{1} << j;
  rows_[i] = value ? (rows_[i] | bit) : (rows_[i] & ~bit);
}

bool ZeroPattern::all_true() const noexcept {
  const std::size_t d = rows_.size();
  const std::uint64_t full = d == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1;
  return std::all_of(rows_.begin(), rows_.end(), [full](std::uint64_t r) { return r == full; });
}

ZeroPattern ZeroPattern::operator*(const ZeroPattern& rhs) const {
  ZeroPattern out(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    std::uint64_t acc = 0;
    std::uint64_t row = rows_[i];
    while (row != 0) {
      const int k = std::countr_zero(row);
      acc |= rhs.rows_[static_cast<std::size_t>(k)];
      row &= row - 1;
    }
    out.rows_[i] = acc;
  }
  return out;
}

std::size_t ZeroPatternHash::operator()(const ZeroPattern& p) const noexcept {
  std::uint64_t h = p.dim();
  for (std::uint64_t r : p.rows()) h = splitmix64(h ^ r);
  return static_cast<std::size_t>(h);
}

ZeroPattern pattern_of(const NonNegMatrix& m) {
  ZeroPattern p(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) p.set(i, j, m(i, j) > 0.0);
  return p;
}

std::optional<std::size_t> PatternClosure::find(const ZeroPattern& p) const {
  const auto it = index.find(p);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

PatternClosure pattern_closure(const MatrixEnsemble& e, std::size_t cap) {
  PatternClosure closure;
  std::vector<ZeroPattern> generators;
  for (const auto& m : e.matrices()) generators.push_back(pattern_of(m));

  auto insert = [&](ZeroPattern p, Word w) -> bool {
    if (closure.index.contains(p)) return false;
    if (closure.patterns.size() >= cap) {
      throw Error(ErrorCode::ClosureTooLarge, "pattern closure exceeds " + std::to_string(cap) + " patterns");
    }
    closure.index.emplace(p, closure.patterns.size());
    closure.patterns.push_back(std::move(p));
    closure.witnesses.push_back(std::move(w));
    return true;
  };

  std::deque<std::size_t> frontier;
  for (std::size_t g = 0; g < generators.size(); ++g) {
    if (insert(generators[g], Word{g})) frontier.push_back(closure.patterns.size() - 1);
  }
  while (!frontier.empty()) {
    const std::size_t current = frontier.front();
    frontier.pop_front();
    for (std::size_t g = 0; g < generators.size(); ++g) {
      // Appending g to the word applies a_g last: pattern(g) * pattern(word).
      ZeroPattern next = generators[g] * closure.patterns[current];
      Word w = closure.witnesses[current];
      w.push_back(g);
      if (insert(std::move(next), std::move(w))) frontier.push_back(closure.patterns.size() - 1);
    }
  }
  return closure;
}

std::optional<Word> find_positive_product(const MatrixEnsemble& e, std::size_t cap) {
  const PatternClosure closure = pattern_closure(e, cap);
  // BFS order means the first all-true pattern has a shortest witness.
  for (std::size_t i = 0; i < closure.patterns.size(); ++i) {
    if (closure.patterns[i].all_true()) return closure.witnesses[i];
  }
  return std::nullopt;
}

ScaledProduct word_product(const MatrixEnsemble& e, const Word& word) {
  if (word.empty()) throw Error(ErrorCode::InvalidArgument, "empty word");
  NonNegMatrix acc = e.matrix(word.front());
  double log_scale = 0.0;
  auto renormalize = [&] {
    const double s = acc.max_entry();
    acc = acc.scaled(1.0 / s);
    log_scale += std::log(s);
  };
  renormalize();
  for (std::size_t k = 1; k < word.size(); ++k) {
    acc = e.matrix(word[k]) * acc;
    renormalize();
  }
  return {std::move(acc), log_scale};
}

PerronData perron(const NonNegMatrix& m) {
  if (!pattern_of(m).all_true()) throw Error(ErrorCode::NotPositive, "matrix is not strictly positive");
  const std::size_t d = m.dim();
  constexpr std::size_t kMaxIterations = 100'000;
  constexpr double kStepTol = 1e-14;

  std::vector<double> w(d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (std::size_t it = 1; it <= kMaxIterations; ++it) {
    const ProjectiveStep next = act_projective(m, ConeVector::raw(w));
    const std::vector<double> nw(next.x.coords().begin(), next.x.coords().end());
    const double change = euclidean_distance(nw, w);
    w = nw;
    if (change < kStepTol) {
      const std::vector<double> mw = m.apply(w);
      double lambda_sq = 0.0;
      for (double v : mw) lambda_sq += v * v;
      const double lambda = std::sqrt(lambda_sq);
      double res_sq = 0.0;
      for (std::size_t i = 0; i < d; ++i) res_sq += (mw[i] - lambda * w[i]) * (mw[i] - lambda * w[i]);
      return {lambda, std::log(lambda), ConeVector::raw(w), std::sqrt(res_sq), it};
    }
  }
  throw Error(ErrorCode::NoConvergence, "power iteration did not converge in 1e5 iterations");
}

PerronData perron_of_word(const MatrixEnsemble& e, const Word& word) {
  const ScaledProduct prod = word_product(e, word);
  PerronData data = perron(prod.matrix);
  data.log_lambda += prod.log_scale;
  data.lambda = std::exp(data.log_lambda);
  data.residual *= std::exp(prod.log_scale);
  return data;
}

std::vector<LambdaSample> sample_lambda_set(const MatrixEnsemble& e, std::size_t n_words, std::size_t max_len,
                                            const RngStream& rng) {
  if (n_words == 0) return {};
  if (max_len == 0) throw Error(ErrorCode::InvalidArgument, "max_len must be positive");
  std::vector<Word> words;
  std::set<Word> seen;
  const std::size_t max_draws = 20 * n_words;
  for (std::size_t draw = 0; draw < max_draws && words.size() < n_words; ++draw) {
    RngStream stream = rng.child(draw);
    const std::size_t len = 1 + std::min(max_len - 1, static_cast<std::size_t>(stream.uniform() * max_len));
    Word w(len);
    for (auto& letter : w) letter = e.sample_index(stream);
    ZeroPattern p = pattern_of(e.matrix(w[0]));
    for (std::size_t k = 1; k < len; ++k) p = pattern_of(e.matrix(w[k])) * p;
    if (p.all_true() && seen.insert(w).second) words.push_back(std::move(w));
  }
  if (words.empty()) throw Error(ErrorCode::NoPositiveProduct, "no positive word found among sampled words");

  std::vector<LambdaSample> out(words.size());
  parallel_for(words.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = {words[i], perron_of_word(e, words[i]).log_lambda};
  });
  return out;
}

std::vector<LambdaSample> enumerate_lambda_set(const MatrixEnsemble& e, std::size_t max_len, std::size_t limit) {
  std::vector<Word> positive;
  std::vector<std::pair<Word, ZeroPattern>> level;
  for (std::size_t g = 0; g < e.size(); ++g) level.push_back({Word{g}, pattern_of(e.matrix(g))});
  for (std::size_t len = 1; len <= max_len && positive.size() < limit; ++len) {
    std::vector<std::pair<Word, ZeroPattern>> next;
    for (const auto& [w, p] : level) {
      if (p.all_true() && positive.size() < limit) positive.push_back(w);
      if (len < max_len) {
        for (std::size_t g = 0; g < e.size(); ++g) {
          Word nw = w;
          nw.push_back(g);
          next.push_back({std::move(nw), pattern_of(e.matrix(g)) * p});
        }
      }
    }
    level = std::move(next);
  }
  std::vector<LambdaSample> out(positive.size());
  parallel_for(positive.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = {positive[i], perron_of_word(e, positive[i]).log_lambda};
  });
  return out;
}

std::string_view to_string(DensityVerdict v) {
  return v == DensityVerdict::DenseCompatible ? "dense_compatible" : "arithmetic_suspect";
}

RationalFit best_rational(double x, std::int64_t q_max) {
  const long double target = std::abs(static_cast<long double>(x));
  const int sign = x < 0 ? -1 : 1;
  // Convergents p_k/q_k via the standard recurrence.
  long double p_prev = 1, q_prev = 0;
  long double p_cur = std::floor(target), q_cur = 1;
  long double rem = target - p_cur;
  for (int guard = 0; guard < 64 && rem > 1e-18L; ++guard) {
    const long double inv = 1.0L / rem;
    const long double a = std::floor(inv);
    const long double q_next = a * q_cur + q_prev;
    if (q_next > static_cast<long double>(q_max)) break;
    const long double p_next = a * p_cur + p_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    rem = inv - a;
  }
  RationalFit fit{};
  fit.ratio = x;
  fit.p = sign * static_cast<std::int64_t>(p_cur);
  fit.q = static_cast<std::int64_t>(q_cur);
  fit.error = static_cast<double>(std::abs(q_cur * target - p_cur));
  return fit;
}

CommensurabilityReport density_report(const std::vector<double>& values, double tol, std::int64_t q_max) {
  std::vector<double> distinct;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "density_report requires finite values");
    if (std::abs(v) <= tol) continue;
    const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](double u) {
      return std::abs(u - v) <= tol * std::max(std::abs(u), std::abs(v));
    });
    if (!dup) distinct.push_back(v);
  }
  CommensurabilityReport report{{}, DensityVerdict::ArithmeticSuspect};
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t j = i + 1; j < distinct.size(); ++j) {
      const bool i_larger = std::abs(distinct[i]) >= std::abs(distinct[j]);
      const double num = i_larger ? distinct[i] : distinct[j];
      const double den = i_larger ? distinct[j] : distinct[i];
      RationalFit fit = best_rational(num / den, q_max);
      fit.i = i;
      fit.j = j;
      if (fit.error > tol) report.verdict = DensityVerdict::DenseCompatible;
      report.pairs.push_back(fit);
    }
  }
  return report;
}

std::string_view to_string(ConditionCVerdict v) {
  switch (v) {
    case ConditionCVerdict::Holds: return "holds";
    case ConditionCVerdict::FailsII: return "fails_ii";
    case ConditionCVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::size_t numerical_rank(const std::vector<std::vector<double>>& vectors, double rel_tol) {
  if (vectors.empty()) return 0;
  const auto rows = static_cast<Eigen::Index>(vectors.size());
  const auto cols = static_cast<Eigen::Index>(vectors.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = vectors[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

ConditionCReport check_condition_C(const MatrixEnsemble& e, const ConditionCOptions& options) {
  ConditionCReport report;
  report.positive_word = find_positive_product(e, options.closure_cap);
  if (!report.positive_word) {
    report.verdict = ConditionCVerdict::FailsII;
    report.commensurability = density_report({}, options.tol, options.q_max);
    return report;
  }
  const std::size_t d = e.dim();
  const PerronData pd = perron_of_word(e, *report.positive_word);

  // Orbit of w_a under words of length <= max_len, level by level; stop early at full rank.
  std::vector<std::vector<double>> orbit{{pd.w.coords().begin(), pd.w.coords().end()}};
  std::vector<std::vector<double>> level = orbit;
  constexpr std::size_t kMaxOrbit = 100'000;
  report.orbit_rank = numerical_rank(orbit);
  for (std::size_t len = 1; len <= options.max_len && report.orbit_rank < d; ++len) {
    std::vector<std::vector<double>> next;
    for (const auto& v : level) {
      for (const auto& m : e.matrices()) {
        if (orbit.size() + next.size() >= kMaxOrbit) break;
        const ProjectiveStep step = act_projective(m, ConeVector::raw(v));
        next.emplace_back(step.x.coords().begin(), step.x.coords().end());
      }
    }
    orbit.insert(orbit.end(), next.begin(), next.end());
    level = std::move(next);
    report.orbit_rank = numerical_rank(orbit);
  }
  report.verdict = report.orbit_rank == d ? ConditionCVerdict::Holds : ConditionCVerdict::Unknown;

  report.lambda_samples = enumerate_lambda_set(e, options.max_len, options.max_lambda_words);
  if (report.lambda_samples.empty()) report.lambda_samples.push_back({*report.positive_word, pd.log_lambda});
  std::vector<double> values;
  for (const auto& s : report.lambda_samples) values.push_back(s.log_lambda);
  report.commensurability = density_report(values, options.tol, options.q_max);
  return report;
}

}  // namespace conewalk
