#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conewalk/ensemble.hpp"
#include "conewalk/rng.hpp"
#include "conewalk/sphere_grid.hpp"

namespace conewalk {

struct WalkState {
  ConeVector x;
  double s = 0.0;
};

/// A simulated path of (X_n, S_n). states[k + 1] = step(states[k], matrix(word[k])).
struct Trajectory {
  std::vector<std::size_t> word;
  std::vector<WalkState> states;  // length n + 1, states[0] is the start
  std::vector<double> increments;

  [[nodiscard]] std::size_t steps() const noexcept { return increments.size(); }
  [[nodiscard]] const WalkState& start() const { return states.front(); }
};

using SphereFunction = std::function<double(const ConeVector&)>;

struct Estimate {
  double mean;
  double se;
};

inline constexpr std::size_t kDefaultBatches = 100;

WalkState step(const WalkState& st, const NonNegMatrix& m);

/// Draws n i.i.d. matrices from `rng` (one uniform per step) starting at (x0, t0).
/// Continuing a run with the same stream reproduces a longer run bit for bit.
Trajectory simulate(const MatrixEnsemble& e, const ConeVector& x0, double t0, std::size_t n, RngStream& rng);

/// Mean of values with batch-means standard error. Throws TooShort if fewer
/// values than batches. The mean is accumulated as an offset from the first
/// value, so constant input gives that constant and SE 0 exactly.
Estimate batch_means(const std::vector<double>& values, std::size_t batches = kDefaultBatches);

/// Mean of f(X_k) over k = 1..n.
Estimate ergodic_average(const Trajectory& traj, const SphereFunction& f, std::size_t batches = kDefaultBatches);

/// Mean increment over steps skip+1..n, i.e. (S_n - S_skip) / (n - skip).
Estimate drift_estimate(const Trajectory& traj, std::size_t skip = 0, std::size_t batches = kDefaultBatches);

/// Exact finite sum  sum_j p_j f(a_j . y).
double apply_P_pointwise(const MatrixEnsemble& e, const SphereFunction& f, const ConeVector& y);

struct SphereHistogram {
  std::vector<double> masses;  // one per grid node, summing to 1
  std::size_t samples = 0;
  std::vector<std::string> warnings;
};

struct StationaryOptions {
  std::size_t n_steps = 1'000'000;
  /// Default (when unset) is n_steps / 10.
  std::optional<std::size_t> burn_in;
  std::size_t closure_cap = 1'000'000;
};

/// Occupation frequencies of X_k, k > burn_in, binned to the nearest grid node.
/// Ensembles for which condition (C) is not confirmed are simulated with a warning.
SphereHistogram estimate_stationary(const MatrixEnsemble& e, const ConeVector& x0, const SphereGrid& grid,
                                    const StationaryOptions& options, RngStream& rng);

/// CSV: step, x_0..x_{d-1}, s, increment (increment empty on step 0).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// CSV: node, x_0..x_{d-1}, mass.
void write_histogram_csv(std::ostream& os, const SphereGrid& grid, const SphereHistogram& hist);

}  // namespace conewalk
