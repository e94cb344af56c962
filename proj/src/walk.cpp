#include "conewalk/walk.hpp"

#include <cmath>
#include <ostream>

#include "conewalk/error.hpp"
#include "conewalk/format.hpp"
#include "conewalk/semigroup.hpp"

namespace conewalk {

WalkState step(const WalkState& st, const NonNegMatrix& m) {
  ProjectiveStep next = act_projective(m, st.x);
  return {std::move(next.x), st.s + next.increment};
}

Trajectory simulate(const MatrixEnsemble& e, const ConeVector& x0, double t0, std::size_t n, RngStream& rng) {
  if (x0.dim() != e.dim()) throw Error(ErrorCode::InvalidArgument, "start vector dimension does not match ensemble");
  Trajectory traj;
  traj.word.reserve(n);
  traj.states.reserve(n + 1);
  traj.increments.reserve(n);
  traj.states.push_back({x0, t0});
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = e.sample_index(rng);
    const WalkState& cur = traj.states.back();
    ProjectiveStep next = act_projective(e.matrix(idx), cur.x);
    const double s = cur.s + next.increment;
    traj.word.push_back(idx);
    traj.increments.push_back(next.increment);
    traj.states.push_back({std::move(next.x), s});
  }
  return traj;
}

Estimate batch_means(const std::vector<double>& values, std::size_t batches) {
  if (batches < 2) throw Error(ErrorCode::InvalidArgument, "batch means needs at least 2 batches");
  const std::size_t n = values.size();
  if (n < batches) {
    throw Error(ErrorCode::TooShort, std::to_string(n) + " samples is fewer than " + std::to_string(batches) + " batches");
  }
  const double origin = values.front();
  double total = 0.0;
  for (double v : values) total += v - origin;
  const double mean = origin + total / static_cast<double>(n);

  const std::size_t b = n / batches;
  std::vector<double> offsets(batches, 0.0);  // batch mean minus origin
  for (std::size_t k = 0; k < batches; ++k) {
    double acc = 0.0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) acc += values[i] - origin;
    offsets[k] = acc / static_cast<double>(b);
  }
  double centre = 0.0;
  for (double o : offsets) centre += o;
  centre /= static_cast<double>(batches);
  double ss = 0.0;
  for (double o : offsets) ss += (o - centre) * (o - centre);
  const double var = ss / static_cast<double>(batches - 1);
  return {mean, std::sqrt(var / static_cast<double>(batches))};
}

Estimate ergodic_average(const Trajectory& traj, const SphereFunction& f, std::size_t batches) {
  std::vector<double> values;
  values.reserve(traj.steps());
  for (std::size_t k = 1; k < traj.states.size(); ++k) values.push_back(f(traj.states[k].x));
  return batch_means(values, batches);
}

Estimate drift_estimate(const Trajectory& traj, std::size_t skip, std::size_t batches) {
  if (skip >= traj.steps()) throw Error(ErrorCode::TooShort, "trajectory has no steps after skip");
  const std::vector<double> inc(traj.increments.begin() + static_cast<std::ptrdiff_t>(skip), traj.increments.end());
  return batch_means(inc, batches);
}

double apply_P_pointwise(const MatrixEnsemble& e, const SphereFunction& f, const ConeVector& y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) acc += e.prob(j) * f(act_projective(e.matrix(j), y).x);
  return acc;
}

SphereHistogram estimate_stationary(const MatrixEnsemble& e, const ConeVector& x0, const SphereGrid& grid,
                                    const StationaryOptions& options, RngStream& rng) {
  if (grid.dim() != e.dim()) throw Error(ErrorCode::InvalidArgument, "grid dimension does not match ensemble");
  const std::size_t burn_in = options.burn_in.value_or(options.n_steps / 10);
  if (options.n_steps <= burn_in) throw Error(ErrorCode::TooShort, "no steps left after burn-in");

  SphereHistogram hist;
  try {
    ConditionCOptions copt;
    copt.closure_cap = options.closure_cap;
    const ConditionCReport rep = check_condition_C(e, copt);
    if (rep.verdict != ConditionCVerdict::Holds) {
      hist.warnings.push_back(std::string("condition (C) not confirmed (verdict ") +
                              std::string(to_string(rep.verdict)) + "); stationary measure may not be unique");
    }
  } catch (const Error& err) {
    hist.warnings.push_back(std::string("condition (C) check failed: ") + err.what());
  }

  std::vector<std::size_t> counts(grid.size(), 0);
  ConeVector x = x0;
  for (std::size_t k = 1; k <= options.n_steps; ++k) {
    x = act_projective(e.matrix(e.sample_index(rng)), x).x;
    if (k > burn_in) ++counts[grid.nearest(x.coords())];
  }
  hist.samples = options.n_steps - burn_in;
  hist.masses.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    hist.masses[i] = static_cast<double>(counts[i]) / static_cast<double>(hist.samples);
  }
  return hist;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t d = traj.start().x.dim();
  os << "step";
  for (std::size_t i = 0; i < d; ++i) os << ",x" << i;
  os << ",s,increment\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const WalkState& st = traj.states[k];
    os << k;
    for (std::size_t i = 0; i < d; ++i) os << ',' << format_double(st.x[i]);
    os << ',' << format_double(st.s) << ',';
    if (k > 0) os << format_double(traj.increments[k - 1]);
    os << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const SphereGrid& grid, const SphereHistogram& hist) {
  os << "node";
  for (std::size_t i = 0; i < grid.dim(); ++i) os << ",x" << i;
  os << ",mass\n";
  for (std::size_t n = 0; n < grid.size(); ++n) {
    os << n;
    for (double c : grid.node(n)) os << ',' << format_double(c);
    os << ',' << format_double(hist.masses[n]) << '\n';
  }
}

}  // namespace conewalk
