// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "conewalk/config.hpp"
#include "conewalk/harmonic.hpp"
#include "conewalk/parallel.hpp"
#include "conewalk/recurrence.hpp"
#include "conewalk/run.hpp"
#include "conewalk/semigroup.hpp"
#include "conewalk/walk.hpp"

using namespace conewalk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

using Rows = std::vector<std::vector<double>>;

MatrixEnsemble ensemble_of(const std::vector<Rows>& ms, const std::vector<double>& probs) {
  std::vector<NonNegMatrix> mats;
  for (const auto& m : ms) mats.push_back(NonNegMatrix::validate(m));
  return MatrixEnsemble(std::move(mats), probs);
}

MatrixEnsemble estar() { return ensemble_of({{{2, 1}, {1, 1}}, {{1, 1}, {1, 2}}}, {0.5, 0.5}); }
MatrixEnsemble ones() { return ensemble_of({{{1, 1}, {1, 1}}}, {1.0}); }

const double kLog2 = std::log(2.0);

std::shared_ptr<const SphereGrid> angle_grid(std::size_t n) {
  return std::make_shared<const SphereGrid>(SphereGrid::angle(n));
}

Window reference_window(Boundary b) { return Window(30.0, 0.05, b); }

// ds = log2 / 14 and T = 43 log 2: the all-ones shift is 14 grid steps.
Window log2_window() { return Window(602 * (kLog2 / 14), kLog2 / 14, Boundary::Periodic); }

// Boolean-product BFS over 0/1 matrices, independent of the library's bitset patterns.
std::optional<std::size_t> oracle_positive_length(const std::vector<Rows>& ms) {
  using B = std::vector<std::vector<bool>>;
  const std::size_t d = ms.front().size();
  auto boolean = [&](const Rows& m) {
    B b(d, std::vector<bool>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) b[i][j] = m[i][j] > 0;
    return b;
  };
  auto times = [&](const B& a, const B& b) {
    B c(d, std::vector<bool>(d, false));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k)
        if (a[i][k])
          for (std::size_t j = 0; j < d; ++j) c[i][j] = c[i][j] || b[k][j];
    return c;
  };
  auto positive = [&](const B& b) {
    for (const auto& row : b)
      for (bool v : row)
        if (!v) return false;
    return true;
  };
  std::set<B> seen;
  std::deque<std::pair<B, std::size_t>> queue;
  for (const auto& m : ms) {
    const B b = boolean(m);
    if (seen.insert(b).second) queue.emplace_back(b, 1);
  }
  while (!queue.empty()) {
    auto [b, len] = queue.front();
    queue.pop_front();
    if (positive(b)) return len;
    for (const auto& m : ms) {
      B next = times(b, boolean(m));
      if (seen.insert(next).second) queue.emplace_back(std::move(next), len + 1);
    }
  }
  return std::nullopt;
}

void criterion_1(Outcome& o) {
  const std::vector<std::pair<std::string, std::vector<Rows>>> fixtures = {
      {"permutation", {{{0, 1}, {1, 0}}}},
      {"all-ones", {{{1, 1}, {1, 1}}}},
      {"triangular", {{{1, 1}, {0, 1}}, {{1, 0}, {1, 1}}}},
  };
  const std::optional<std::size_t> expected[] = {std::nullopt, 1, 2};
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const auto& [name, ms] = fixtures[f];
    std::vector<double> probs(ms.size(), 1.0 / static_cast<double>(ms.size()));
    const MatrixEnsemble e = ensemble_of(ms, probs);
    const auto t0 = Clock::now();
    const std::optional<Word> w = find_positive_product(e);
    const double secs = seconds_since(t0);
    const std::optional<std::size_t> oracle = oracle_positive_length(ms);
    const std::optional<std::size_t> got = w ? std::optional<std::size_t>(w->size()) : std::nullopt;
    o.detail << ' ' << name << '=' << (got ? std::to_string(*got) : "none");
    o.require(got == oracle && oracle == expected[f], name + " length");
    if (w) {
      const auto entries = word_product(e, *w).matrix.entries();
      o.require(std::all_of(entries.begin(), entries.end(), [](double v) { return v > 0.0; }), name + " witness positive");
    }
    o.require(secs < 1.0, name + " runtime");
  }
}

void criterion_2(Outcome& o) {
  const PerronData pd = perron(NonNegMatrix::validate({{2, 1}, {1, 1}}));
  const double lambda = (3.0 + std::sqrt(5.0)) / 2.0;
  // Eigenvector (lambda - 1, 1), normalized.
  const double n = std::hypot(lambda - 1.0, 1.0);
  const double w0 = (lambda - 1.0) / n;
  const double w1 = 1.0 / n;
  const double err_l = std::abs(pd.lambda - lambda);
  const double err_w = std::hypot(pd.w[0] - w0, pd.w[1] - w1);
  const double err_ref = std::hypot(pd.w[0] - 0.8506508, pd.w[1] - 0.5257311);
  o.detail << " |dlambda|=" << err_l << " |dw|=" << err_w << " iterations=" << pd.iterations;
  o.require(err_l < 1e-10, "lambda");
  o.require(err_w < 1e-8, "eigenvector");
  o.require(err_ref < 1e-7, "eigenvector digits");
  o.require(pd.iterations < 1000, "iterations");
}

void criterion_3(Outcome& o) {
  const CommensurabilityReport arith = density_report({std::log(2.0), std::log(4.0)}, 1e-9, 1'000'000);
  const CommensurabilityReport dense = density_report({std::log(2.0), std::log(3.0)}, 1e-9, 1'000'000);
  const RationalFit fit = best_rational(std::log(3.0) / std::log(2.0), 1'000'000);
  o.detail << " {log2,log4}=" << to_string(arith.verdict) << " {log2,log3}=" << to_string(dense.verdict)
           << " best=" << fit.p << '/' << fit.q << " error=" << fit.error;
  o.require(arith.verdict == DensityVerdict::ArithmeticSuspect, "log2/log4");
  o.require(dense.verdict == DensityVerdict::DenseCompatible, "log2/log3");
  for (const RationalFit& f : dense.pairs) o.require(f.q > 1'000'000 || f.error > 1e-9, "pair fit within tolerance");
  o.require(fit.q <= 1'000'000 && fit.error > 1e-9, "no close rational");
}

void criterion_4(Outcome& o) {
  const MatrixEnsemble e = estar();
  const auto t0 = Clock::now();
  const SphereFunction f = [](const ConeVector& x) { return x[0]; };
  RngStream r1(4001);
  RngStream r2(4002);
  const Estimate a = ergodic_average(simulate(e, ConeVector::unit({1, 0}), 0.0, 1'000'000, r1), f);
  const Estimate b = ergodic_average(simulate(e, ConeVector::unit({0, 1}), 0.0, 1'000'000, r2), f);
  const double secs = seconds_since(t0);
  const double diff = std::abs(a.mean - b.mean);
  const double se = std::hypot(a.se, b.se);
  o.detail << " mean(1,0)=" << a.mean << " mean(0,1)=" << b.mean << " diff=" << diff << " combined_se=" << se
           << " seconds=" << secs;
  o.require(diff <= 5.0 * se, "within 5 SE");
  o.require(diff < 0.01, "within 0.01");
  o.require(secs < 30.0, "runtime");
}

void criterion_5(Outcome& o) {
  const auto g = angle_grid(61);
  std::size_t checks = 0;
  for (const Boundary b : {Boundary::Clamp, Boundary::Periodic}) {
    const Window w(3.0, 0.05, b);
    for (const MatrixEnsemble& e : {estar(), ones()}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GridFunction L = GridFunction::random(g, w, RngStream(5000 + seed));
        const GridFunction PL = apply_P(L, e);
        o.require(PL.oscillation() <= L.oscillation(), "oscillation seed " + std::to_string(seed));
        o.require(PL.sup_norm() <= L.sup_norm(), "sup-norm seed " + std::to_string(seed));
        ++checks;
      }
      double worst = 0.0;
      const GridFunction P1 = apply_P(GridFunction::constant(g, w, 0.3), e);
      for (double v : P1.values()) worst = std::max(worst, std::abs(v - 0.3));
      o.require(worst <= 1e-12, "constant");
    }
  }
  o.detail << " random_functions=" << checks;
}

struct ReferenceRun {
  std::optional<GridFunction> L200;
};

void criterion_6(Outcome& o, ReferenceRun& ref) {
  const MatrixEnsemble e = estar();
  const auto g = angle_grid(721);
  const Window w = reference_window(Boundary::Periodic);
  double worst = 0.0;
  double slowest = 0.0;
  for (std::uint64_t seed = 1000; seed < 1010; ++seed) {
    const auto t0 = Clock::now();
    IterationResult res = iterate_to_fixed(GridFunction::random(g, w, RngStream(seed)), e, 200, 0.0);
    const double secs = seconds_since(t0);
    const double ratio = res.osc_history.back() / res.osc_history.front();
    o.detail << ' ' << seed << ':' << ratio;
    o.require(res.iterations == 200, "200 iterations");
    o.require(ratio < 0.05, "ratio seed " + std::to_string(seed));
    worst = std::max(worst, ratio);
    slowest = std::max(slowest, secs);
    if (seed == 1000) ref.L200 = std::move(res.L);
  }
  o.detail << " max=" << worst << " slowest_seconds=" << slowest;
  o.require(slowest < 300.0, "runtime");
}

void criterion_7(Outcome& o) {
  const auto g = angle_grid(721);
  const GridFunction L0 = GridFunction::from_function(
      g, log2_window(), [](std::span<const double>, double s) { return std::cos(2.0 * std::numbers::pi * s / kLog2); });
  const IterationResult res = iterate_to_fixed(L0, ones(), 200, 0.0);
  const double ratio = res.osc_history.back() / res.osc_history.front();
  o.detail << " ratio=" << ratio << " iterations=" << res.iterations;
  o.require(res.iterations == 200, "200 iterations");
  o.require(ratio > 0.9, "ratio");
}

void criterion_8(Outcome& o, const ReferenceRun& ref) {
  if (!ref.L200) {
    o.require(false, "reference run unavailable");
    return;
  }
  const GridFunction& L = *ref.L200;
  const double bound = L.oscillation() + 2.0 * s_interpolation_bound(L);
  std::set<double> zetas;
  for (const auto& s : enumerate_lambda_set(estar(), 4, 64)) zetas.insert(s.log_lambda);
  double worst = 0.0;
  for (double z : zetas) worst = std::max(worst, shift_invariance_check(L, z));
  o.detail << " zetas=" << zetas.size() << " max_defect=" << worst << " bound=" << bound;
  o.require(!zetas.empty(), "zeta from the eigenvalue set");
  o.require(worst <= bound, "shift defect");
}

void criterion_9(Outcome& o) {
  const auto g = angle_grid(721);
  const SmoothingKernel h = SmoothingKernel::triangular(0.5, 0.05);
  {
    const GridFunction Ls = smooth(GridFunction::constant(g, reference_window(Boundary::Clamp), -2.25), h);
    double worst = 0.0;
    for (double v : Ls.values()) worst = std::max(worst, std::abs(v + 2.25));
    o.detail << " constant_err=" << worst;
    o.require(worst <= 1e-12, "constant");
  }
  {
    const auto g1 = angle_grid(3);
    const Window w = reference_window(Boundary::Clamp);
    double worst = 0.0;
    for (const double omega : {1.0, 2.0 * std::numbers::pi / 3.0, 2.0}) {
      const GridFunction L =
          GridFunction::from_function(g1, w, [&](std::span<const double>, double s) { return std::cos(omega * s); });
      const GridFunction Ls = smooth(L, h);
      const auto reach = static_cast<std::size_t>(h.reach());
      for (std::size_t k = reach; k + reach < w.points(); ++k) {
        worst = std::max(worst, std::abs(Ls.at(1, k) - h.fourier_factor(omega) * std::cos(omega * w.s(k))));
      }
    }
    o.detail << " fourier_err=" << worst;
    o.require(worst <= 1e-6, "Fourier factor");
  }
  {
    const MatrixEnsemble e = estar();
    const GridFunction L = GridFunction::random(g, reference_window(Boundary::Periodic), RngStream(9000));
    const GridFunction a = smooth(apply_P(L, e), h);
    const GridFunction b = apply_P(smooth(L, h), e);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    o.detail << " commutator=" << worst;
    o.require(worst <= 1e-4, "commutation");
  }
}

void criterion_10(Outcome& o) {
  const MatrixEnsemble e = estar();
  const RecurrenceTarget t = build_target(e, 0.1, 0.1, RngStream(10'000));
  const RecurrenceStats st = aperiodicity_probe(e, t, 10'000, RngStream(10'001));
  const MatrixEnsemble j = ones();
  const RecurrenceTarget tj = build_target(j, 0.1, 0.1, RngStream(10'002));
  const RecurrenceStats sj = aperiodicity_probe(j, tj, 10'000, RngStream(10'003));
  o.detail << " E*: eps=" << t.epsilon << " hits=" << st.hits << '/' << st.trials << " ci_low=" << st.ci_low
           << " ones: eta_hat=" << sj.eta_hat;
  o.require(st.trials == 10'000 && st.ci_low > 0.0, "E* lower bound");
  o.require(sj.eta_hat == 1.0, "all-ones eta");
}

void criterion_11(Outcome& o) {
  {
    const GridFunction L = GridFunction::constant(angle_grid(91), reference_window(Boundary::Clamp), 0.625);
    bool exact = true;
    for (const Estimate& m : martingale_check(L, estar(), ConeVector::unit({1, 2}), 0.4, 1000, 20, RngStream(11'000))) {
      exact = exact && m.mean == 0.625 && m.se == 0.0;
    }
    o.require(exact, "constant");
  }
  {
    const auto g = angle_grid(181);
    const Window w = log2_window();
    // cos(2 pi s / log 2) at the knots, from the knot index mod 14 so rows are bitwise periodic.
    std::vector<double> v;
    const auto half = static_cast<long long>((w.points() - 1) / 2);
    for (std::size_t n = 0; n < g->size(); ++n) {
      for (std::size_t k = 0; k < w.points(); ++k) {
        const long long r = ((static_cast<long long>(k) - half) % 14 + 14) % 14;
        v.push_back(std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / 14.0));
      }
    }
    const GridFunction L(g, w, std::move(v));
    const ConeVector x = ConeVector::unit({1, 1});
    const double s = 5.0 * w.ds();
    const double target = eval(L, x, s);
    bool exact = true;
    std::size_t steps = 0;
    for (const Estimate& m : martingale_check(L, ones(), x, s, 1000, 20, RngStream(11'001))) {
      exact = exact && m.mean == target;
      ++steps;
    }
    o.detail << " ones_target=" << target << " steps=" << steps;
    o.require(exact, "fixed-ray periodic");
  }
}

std::map<std::string, std::string> read_outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name == "timings.txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[name] = ss.str();
  }
  return files;
}

void criterion_12(Outcome& o) {
  const ExperimentConfig cfg = parse_config(R"({
    "dimension": 2,
    "matrices": [[[2, 1], [1, 1]], [[1, 1], [1, 2]]],
    "probs": [0.5, 0.5],
    "seed": 12,
    "walk": {"n_steps": 20000, "n_paths": 16, "batches": 20},
    "stationary": {"n_steps": 50000},
    "recurrence": {"n_trials": 2000, "n_steps": 20000},
    "harmonic": {"resolution": 61, "T": 3, "ds": 0.05, "n_iter": 20, "kernel_half_width": 0.5,
                 "martingale": {"n_paths": 100, "horizon": 5}}
  })");
  const fs::path root = fs::temp_directory_path() / "conewalk_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> outputs;
  for (const unsigned threads : {1u, 4u, 16u}) {
    set_thread_count(threads);
    const fs::path dir = root / std::to_string(threads);
    run_command(Command::Report, cfg, dir);
    outputs.push_back(read_outputs(dir));
  }
  set_thread_count(0);
  fs::remove_all(root);
  o.detail << " files=" << outputs.front().size();
  o.require(outputs.front().size() >= 8, "all sections written");
  o.require(outputs[0] == outputs[1] && outputs[0] == outputs[2], "byte-identical");
}

}  // namespace

int main() {
  ReferenceRun ref;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"pattern semigroup exactness", criterion_1},
      {"Perron accuracy", criterion_2},
      {"eigenvalue-set density classification", criterion_3},
      {"stationary uniqueness", criterion_4},
      {"operator contraction", criterion_5},
      {"collapse to constants on E*", [&](Outcome& o) { criterion_6(o, ref); }},
      {"arithmetic counterexample", criterion_7},
      {"shift invariance", [&](Outcome& o) { criterion_8(o, ref); }},
      {"smoothing operator", criterion_9},
      {"aperiodicity probe", criterion_10},
      {"martingale property", criterion_11},
      {"determinism across thread counts", criterion_12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& err) {
      o.require(false, std::string("exception: ") + err.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << i + 1 << ' ' << criteria[i].first << ':' << o.detail.str() << " ("
              << seconds_since(t0) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
