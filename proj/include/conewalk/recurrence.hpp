#pragma once

#include <cstddef>
#include <vector>

#include "conewalk/ensemble.hpp"
#include "conewalk/rng.hpp"
#include "conewalk/semigroup.hpp"
#include "conewalk/walk.hpp"

namespace conewalk {

/// Target of the aperiodicity probe: z = w_a and zeta = log lambda_a for a
/// positive product a = a_{i_m} ... a_{i_1}, with a ball radius epsilon small
/// enough that a . B_eps(z) lies in B_{eps/2}(z) and |log|a x| - zeta| < delta/2
/// on B_eps(z).
struct RecurrenceTarget {
  ConeVector z;
  double zeta = 0.0;
  Word word;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t m = 0;
};

struct RecurrenceStats {
  std::size_t trials = 0;
  std::size_t hits = 0;
  double eta_hat = 0.0;
  double ci_low = 0.0;  // one-sided 99% Clopper-Pearson lower bound
  std::size_t pair_events = 0;
};

inline constexpr std::size_t kContractionSamples = 1000;
inline constexpr double kMinEpsilon = 1e-8;

/// Uniform-ish draw from B_eps(z) intersected with the nonnegative unit sphere:
/// a point of the tangent disc of radius eps at z, projected to the sphere,
/// rejected unless it lands in the ball and the cone.
ConeVector sample_ball(const ConeVector& z, double epsilon, RngStream& rng);

/// Throws NoPositiveProduct or EpsilonUnderflow. Contraction is checked on
/// kContractionSamples sampled points, halving epsilon until it holds.
RecurrenceTarget build_target(const MatrixEnsemble& e, double epsilon, double delta, const RngStream& rng,
                              std::size_t closure_cap = kDefaultClosureCap);

/// Target built from a given positive word (for probing non-shortest products).
RecurrenceTarget build_target_for_word(const MatrixEnsemble& e, const Word& word, double epsilon, double delta,
                                       const RngStream& rng);

/// Lower one-sided Clopper-Pearson bound at the given confidence.
double clopper_pearson_lower(std::size_t hits, std::size_t trials, double confidence = 0.99);

/// Counts trials x ~ B_eps(z) for which X_m is in B_eps(z) and |S_m - zeta| < delta
/// (S_0 = 0). Trial i uses rng.child(i). Throws TooFewTrials when n_trials = 0.
RecurrenceStats aperiodicity_probe(const MatrixEnsemble& e, const RecurrenceTarget& target, std::size_t n_trials,
                                   const RngStream& rng);

/// Number of n in [first, last) with |X_n - z| < eps, |X_{n+m} - z| < eps and
/// |S_n - (S_{n+m} - zeta)| < delta. `last` is clipped to steps - m + 1.
/// Throws TooShort unless the trajectory has more than m steps.
std::size_t io_event_counter(const Trajectory& traj, const RecurrenceTarget& target, std::size_t first = 0,
                             std::size_t last = static_cast<std::size_t>(-1));

}  // namespace conewalk
