#include "conewalk/recurrence.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>

#include "conewalk/error.hpp"
#include "conewalk/parallel.hpp"

namespace conewalk {

namespace {

// Orthonormal basis of the tangent space z-perp (Gram-Schmidt on e_1..e_d).
std::vector<std::vector<double>> tangent_basis(const ConeVector& z) {
  const std::size_t d = z.dim();
  std::vector<std::vector<double>> basis;
  for (std::size_t k = 0; k < d && basis.size() + 1 < d; ++k) {
    std::vector<double> v(d, 0.0);
    v[k] = 1.0;
    auto project_out = [&](const std::vector<double>& u) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += v[i] * u[i];
      for (std::size_t i = 0; i < d; ++i) v[i] -= dot * u[i];
    };
    project_out({z.coords().begin(), z.coords().end()});
    for (const auto& b : basis) project_out(b);
    double n = 0.0;
    for (double c : v) n += c * c;
    n = std::sqrt(n);
    if (n < 1e-8) continue;
    for (double& c : v) c /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

ConeVector sample_ball(const ConeVector& z, double epsilon, RngStream& rng) {
  const std::size_t d = z.dim();
  const auto basis = tangent_basis(z);
  const double tangent_dim = static_cast<double>(basis.size());
  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<double> dir(basis.size());
    double n = 0.0;
    for (double& c : dir) {
      c = rng.normal();
      n += c * c;
    }
    n = std::sqrt(n);
    const double radius = epsilon * std::pow(rng.uniform(), 1.0 / tangent_dim);
    std::vector<double> x(z.coords().begin(), z.coords().end());
    for (std::size_t b = 0; b < basis.size(); ++b)
      for (std::size_t i = 0; i < d; ++i) x[i] += radius * dir[b] / n * basis[b][i];
    if (std::any_of(x.begin(), x.end(), [](double c) { return c < 0.0; })) continue;
    ConeVector u = ConeVector::unit(std::move(x));
    // Projection shortens the tangent step, so the chord distance is < radius < epsilon.
    if (euclidean_distance(u.coords(), z.coords()) < epsilon) return u;
  }
  throw Error(ErrorCode::InvalidArgument, "could not sample the ball around the target");
}

RecurrenceTarget build_target_for_word(const MatrixEnsemble& e, const Word& word, double epsilon, double delta,
                                       const RngStream& rng) {
  if (!(epsilon > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon and delta must be positive");
  const ScaledProduct prod = word_product(e, word);
  const PerronData pd = perron_of_word(e, word);

  RecurrenceTarget target{pd.w, pd.log_lambda, word, epsilon, delta, word.size()};
  for (std::uint64_t round = 0;; ++round) {
    if (target.epsilon < kMinEpsilon) {
      throw Error(ErrorCode::EpsilonUnderflow, "contraction around w_a needs epsilon below 1e-8");
    }
    RngStream stream = rng.child(round);
    bool ok = true;
    for (std::size_t k = 0; k < kContractionSamples && ok; ++k) {
      const ConeVector x = sample_ball(target.z, target.epsilon, stream);
      const ProjectiveStep st = act_projective(prod.matrix, x);
      const double inc = st.increment + prod.log_scale;
      ok = euclidean_distance(st.x.coords(), target.z.coords()) <= target.epsilon / 2.0 &&
           std::abs(inc - target.zeta) < delta / 2.0;
    }
    if (ok) return target;
    target.epsilon /= 2.0;
  }
}

RecurrenceTarget build_target(const MatrixEnsemble& e, double epsilon, double delta, const RngStream& rng,
                              std::size_t closure_cap) {
  const auto word = find_positive_product(e, closure_cap);
  if (!word) throw Error(ErrorCode::NoPositiveProduct, "the semigroup contains no strictly positive product");
  return build_target_for_word(e, *word, epsilon, delta, rng);
}

double clopper_pearson_lower(std::size_t hits, std::size_t trials, double confidence) {
  if (trials == 0) throw Error(ErrorCode::TooFewTrials, "no trials");
  if (hits == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(hits), static_cast<double>(trials - hits + 1), 1.0 - confidence);
}

RecurrenceStats aperiodicity_probe(const MatrixEnsemble& e, const RecurrenceTarget& target, std::size_t n_trials,
                                   const RngStream& rng) {
  if (n_trials == 0) throw Error(ErrorCode::TooFewTrials, "aperiodicity probe needs at least one trial");
  std::vector<unsigned char> hit(n_trials, 0);
  parallel_for(n_trials, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream stream = rng.child(i);
      const ConeVector x0 = sample_ball(target.z, target.epsilon, stream);
      WalkState st{x0, 0.0};
      for (std::size_t k = 0; k < target.m; ++k) st = step(st, e.matrix(e.sample_index(stream)));
      hit[i] = euclidean_distance(st.x.coords(), target.z.coords()) < target.epsilon &&
               std::abs(st.s - target.zeta) < target.delta;
    }
  });
  RecurrenceStats stats;
  stats.trials = n_trials;
  for (unsigned char h : hit) stats.hits += h;
  stats.eta_hat = static_cast<double>(stats.hits) / static_cast<double>(n_trials);
  stats.ci_low = clopper_pearson_lower(stats.hits, n_trials);
  return stats;
}

std::size_t io_event_counter(const Trajectory& traj, const RecurrenceTarget& target, std::size_t first,
                             std::size_t last) {
  const std::size_t n = traj.steps();
  if (n <= target.m) throw Error(ErrorCode::TooShort, "trajectory must be longer than the target word");
  last = std::min(last, n - target.m + 1);
  const auto z = target.z.coords();
  std::size_t events = 0;
  for (std::size_t k = first; k < last; ++k) {
    const WalkState& a = traj.states[k];
    const WalkState& b = traj.states[k + target.m];
    if (euclidean_distance(a.x.coords(), z) < target.epsilon && euclidean_distance(b.x.coords(), z) < target.epsilon &&
        std::abs(a.s - (b.s - target.zeta)) < target.delta) {
      ++events;
    }
  }
  return events;
}

}  // namespace conewalk
