#include "conewalk/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "conewalk/error.hpp"
#include "conewalk/format.hpp"
#include "conewalk/harmonic.hpp"
#include "conewalk/parallel.hpp"
#include "conewalk/recurrence.hpp"
#include "conewalk/semigroup.hpp"
#include "conewalk/sphere_grid.hpp"
#include "conewalk/walk.hpp"

#ifndef CONEWALK_VERSION
#define CONEWALK_VERSION "unknown"
#endif

namespace conewalk {

namespace {

// Stream ids under the config seed, one per analysis.
constexpr std::uint64_t kStreamSemigroup = 1;
constexpr std::uint64_t kStreamWalk = 2;
constexpr std::uint64_t kStreamStationary = 3;
constexpr std::uint64_t kStreamRecurrence = 4;
constexpr std::uint64_t kStreamHarmonic = 5;

// Line-oriented "key = value" text with [section] headers.
class ReportWriter {
 public:
  void section(std::string_view name) { out_ << '\n' << '[' << name << "]\n"; }
  void field(std::string_view key, std::string_view value) { out_ << key << " = " << value << '\n'; }
  void field(std::string_view key, const char* value) { field(key, std::string_view(value)); }
  void field(std::string_view key, double value) { field(key, format_double(value)); }
  void field(std::string_view key, std::size_t value) { field(key, std::to_string(value)); }
  void field(std::string_view key, const std::vector<double>& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + format_double(values[i]);
    field(key, s + "]");
  }
  void raw(std::string_view text) { out_ << text; }
  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string word_string(const Word& w) {
  std::string s = "[";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ", " : "") + std::to_string(w[i]);
  return s + "]";
}

std::string word_csv(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + std::to_string(w[i]);
  return s;
}

std::vector<double> coords_of(const ConeVector& x) { return {x.coords().begin(), x.coords().end()}; }

ConeVector start_vector(const std::vector<double>& given, std::size_t dim) {
  return ConeVector::unit(given.empty() ? std::vector<double>(dim, 1.0) : given);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

template <typename Fn>
void write_csv(const std::filesystem::path& path, Fn&& fill) {
  std::ostringstream os;
  fill(os);
  write_file(path, os.str());
}

struct Context {
  const ExperimentConfig& cfg;
  const MatrixEnsemble& e;
  const std::filesystem::path& out;
  ReportWriter& report;
};

SemigroupConfig semigroup_config(const ExperimentConfig& cfg) { return cfg.semigroup.value_or(SemigroupConfig{}); }

void run_analyze(const Context& ctx) {
  const SemigroupConfig sc = semigroup_config(ctx.cfg);
  ConditionCOptions opts;
  opts.max_len = sc.max_len;
  opts.closure_cap = sc.closure_cap;
  opts.max_lambda_words = sc.n_words;
  opts.tol = sc.tol;
  opts.q_max = sc.q_max;

  const PatternClosure closure = pattern_closure(ctx.e, sc.closure_cap);
  const ConditionCReport rep = check_condition_C(ctx.e, opts);

  ReportWriter& r = ctx.report;
  r.section("analyze");
  r.field("closure_size", closure.patterns.size());
  r.field("positive_word", rep.positive_word ? word_string(*rep.positive_word) : "none");
  r.field("orbit_rank", rep.orbit_rank);
  r.field("condition_c", to_string(rep.verdict));
  if (!rep.positive_word) return;

  const PerronData pd = perron_of_word(ctx.e, *rep.positive_word);
  r.field("perron_log_lambda", pd.log_lambda);
  r.field("perron_vector", coords_of(pd.w));
  r.field("perron_iterations", pd.iterations);

  // Sampling can miss a positive word that enumeration found; report zero samples then.
  std::vector<LambdaSample> sampled;
  try {
    sampled = sample_lambda_set(ctx.e, sc.n_words, sc.max_len, RngStream(ctx.cfg.seed, kStreamSemigroup));
  } catch (const Error& err) {
    if (err.code() != ErrorCode::NoPositiveProduct) throw;
  }
  std::vector<double> values;
  for (const auto& s : rep.lambda_samples) values.push_back(s.log_lambda);
  for (const auto& s : sampled) values.push_back(s.log_lambda);
  const CommensurabilityReport cr = density_report(values, sc.tol, sc.q_max);
  r.field("lambda_enumerated", rep.lambda_samples.size());
  r.field("lambda_sampled", sampled.size());
  r.field("density", to_string(cr.verdict));
  r.field("rational_pairs", cr.pairs.size());
  if (!cr.pairs.empty()) {
    const RationalFit* worst = &cr.pairs.front();
    for (const auto& f : cr.pairs) {
      if (f.error > worst->error) worst = &f;
    }
    r.field("worst_fit", std::to_string(worst->p) + "/" + std::to_string(worst->q) + " at ratio " +
                             format_double(worst->ratio) + " error " + format_double(worst->error));
  }
  write_csv(ctx.out / "lambda.csv", [&](std::ostream& os) {
    os << "source,word,log_lambda\n";
    for (const auto& s : rep.lambda_samples) os << "enumerated," << word_csv(s.word) << ',' << format_double(s.log_lambda) << '\n';
    for (const auto& s : sampled) os << "sampled," << word_csv(s.word) << ',' << format_double(s.log_lambda) << '\n';
  });
}

void run_simulate(const Context& ctx) {
  const WalkConfig wc = ctx.cfg.walk.value_or(WalkConfig{});
  const std::size_t d = ctx.e.dim();
  const ConeVector x0 = start_vector(wc.start, d);
  const RngStream root(ctx.cfg.seed, kStreamWalk);

  struct PathSummary {
    Estimate drift{};
    std::vector<Estimate> coords;
    WalkState last;
  };
  std::vector<PathSummary> summaries(wc.n_paths);
  std::optional<Trajectory> first;
  parallel_for(wc.n_paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RngStream stream = root.child(p);
      Trajectory traj = simulate(ctx.e, x0, wc.t0, wc.n_steps, stream);
      PathSummary& sum = summaries[p];
      sum.drift = drift_estimate(traj, 0, wc.batches);
      for (std::size_t i = 0; i < d; ++i) {
        sum.coords.push_back(ergodic_average(traj, [i](const ConeVector& x) { return x[i]; }, wc.batches));
      }
      sum.last = traj.states.back();
      if (p == 0) first = std::move(traj);
    }
  });

  ReportWriter& r = ctx.report;
  r.section("simulate");
  r.field("n_paths", wc.n_paths);
  r.field("n_steps", wc.n_steps);
  r.field("start", coords_of(x0));
  double drift_sum = 0.0;
  for (const auto& s : summaries) drift_sum += s.drift.mean;
  r.field("mean_drift", drift_sum / static_cast<double>(wc.n_paths));
  r.field("path0_drift", summaries[0].drift.mean);
  r.field("path0_drift_se", summaries[0].drift.se);
  for (std::size_t i = 0; i < d; ++i) {
    r.field("path0_mean_x" + std::to_string(i), summaries[0].coords[i].mean);
    r.field("path0_mean_x" + std::to_string(i) + "_se", summaries[0].coords[i].se);
  }

  write_csv(ctx.out / "paths.csv", [&](std::ostream& os) {
    os << "path,drift,drift_se";
    for (std::size_t i = 0; i < d; ++i) os << ",mean_x" << i << ",mean_x" << i << "_se";
    os << ",final_s\n";
    for (std::size_t p = 0; p < summaries.size(); ++p) {
      const auto& s = summaries[p];
      os << p << ',' << format_double(s.drift.mean) << ',' << format_double(s.drift.se);
      for (const auto& c : s.coords) os << ',' << format_double(c.mean) << ',' << format_double(c.se);
      os << ',' << format_double(s.last.s) << '\n';
    }
  });
  if (wc.write_trajectory) {
    write_csv(ctx.out / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, *first); });
  }
}

std::size_t default_resolution(std::size_t dim, std::size_t angle_nodes, std::size_t level) {
  return dim == 2 ? angle_nodes : level;
}

void run_stationary(const Context& ctx) {
  const StationaryConfig sc = ctx.cfg.stationary.value_or(StationaryConfig{});
  const std::size_t d = ctx.e.dim();
  const SphereGrid grid = SphereGrid::make(d, sc.resolution ? sc.resolution : default_resolution(d, 91, 10));
  const ConeVector x0 = start_vector(ctx.cfg.walk ? ctx.cfg.walk->start : std::vector<double>{}, d);
  StationaryOptions opts;
  opts.n_steps = sc.n_steps;
  opts.burn_in = sc.burn_in;
  opts.closure_cap = semigroup_config(ctx.cfg).closure_cap;
  RngStream rng(ctx.cfg.seed, kStreamStationary);
  const SphereHistogram hist = estimate_stationary(ctx.e, x0, grid, opts, rng);

  ReportWriter& r = ctx.report;
  r.section("stationary");
  r.field("grid_nodes", grid.size());
  r.field("samples", hist.samples);
  std::vector<double> mean(d, 0.0);
  std::size_t mode = 0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += hist.masses[n] * grid.node(n)[i];
    if (hist.masses[n] > hist.masses[mode]) mode = n;
  }
  r.field("mean_x", mean);
  r.field("mode_node", mode);
  r.field("mode_mass", hist.masses[mode]);
  r.field("warnings", hist.warnings.size());
  for (std::size_t k = 0; k < hist.warnings.size(); ++k) r.field("warning_" + std::to_string(k), hist.warnings[k]);
  write_csv(ctx.out / "stationary.csv", [&](std::ostream& os) { write_histogram_csv(os, grid, hist); });
}

void run_recurrence(const Context& ctx) {
  const RecurrenceConfig rc = ctx.cfg.recurrence.value_or(RecurrenceConfig{});
  const RngStream root(ctx.cfg.seed, kStreamRecurrence);
  const RecurrenceTarget target =
      build_target(ctx.e, rc.epsilon, rc.delta, root.child(0), semigroup_config(ctx.cfg).closure_cap);
  RecurrenceStats stats = aperiodicity_probe(ctx.e, target, rc.n_trials, root.child(1));

  ReportWriter& r = ctx.report;
  r.section("recurrence");
  r.field("word", word_string(target.word));
  r.field("z", coords_of(target.z));
  r.field("zeta", target.zeta);
  r.field("epsilon", target.epsilon);
  r.field("delta", target.delta);
  r.field("trials", stats.trials);
  r.field("hits", stats.hits);
  r.field("eta_hat", stats.eta_hat);
  r.field("eta_ci_low_99", stats.ci_low);
  if (rc.n_steps > target.m) {
    RngStream stream = root.child(2);
    const Trajectory traj = simulate(ctx.e, target.z, 0.0, rc.n_steps, stream);
    stats.pair_events = io_event_counter(traj, target);
    r.field("pair_steps", rc.n_steps);
    r.field("pair_events", stats.pair_events);
  } else {
    r.field("pair_events", "skipped");
  }
}

GridFunction initial_function(const HarmonicConfig& hc, const std::shared_ptr<const SphereGrid>& grid,
                              const Window& win, std::uint64_t seed) {
  switch (hc.initial) {
    case InitialKind::Constant:
      return GridFunction::constant(grid, win, hc.initial_value);
    case InitialKind::Cosine: {
      const double period = hc.initial_period * hc.s_unit;
      return GridFunction::from_function(grid, win, [period](std::span<const double>, double s) {
        return std::cos(2.0 * std::numbers::pi * s / period);
      });
    }
    case InitialKind::Random:
      break;
  }
  return GridFunction::random(grid, win, RngStream(seed, kStreamHarmonic));
}

void run_harmonic(const Context& ctx) {
  const HarmonicConfig hc = ctx.cfg.harmonic.value_or(HarmonicConfig{});
  const std::size_t d = ctx.e.dim();
  const Window win = hc.window();
  auto grid = std::make_shared<const SphereGrid>(
      SphereGrid::make(d, hc.resolution ? hc.resolution : default_resolution(d, 721, 8)));
  const GridFunction L0 = initial_function(hc, grid, win, ctx.cfg.seed);
  const IterationResult res = iterate_to_fixed(L0, ctx.e, hc.n_iter, hc.tol);

  ReportWriter& r = ctx.report;
  r.section("harmonic");
  r.field("grid_nodes", grid->size());
  r.field("window_points", win.points());
  r.field("T", win.T());
  r.field("ds", win.ds());
  r.field("boundary", to_string(win.policy()));
  r.field("iterations", res.iterations);
  const double osc0 = res.osc_history.front();
  const double osc = res.osc_history.back();
  r.field("osc_initial", osc0);
  r.field("osc_final", osc);
  r.field("osc_ratio", osc0 > 0.0 ? format_double(osc / osc0) : "undefined");
  r.field("last_defect", res.defect_history.empty() ? 0.0 : res.defect_history.back());
  r.field("sup_norm", res.L.sup_norm());
  r.field("interpolation_bound", s_interpolation_bound(res.L));

  if (const auto word = find_positive_product(ctx.e, semigroup_config(ctx.cfg).closure_cap)) {
    const double zeta = perron_of_word(ctx.e, *word).log_lambda;
    r.field("shift_zeta", zeta);
    if (std::abs(zeta) < 2.0 * win.T()) {
      r.field("shift_defect", shift_invariance_check(res.L, zeta));
    } else {
      r.field("shift_defect", "skipped (|zeta| >= 2T)");
    }
  } else {
    r.field("shift_zeta", "none");
  }

  if (hc.kernel_half_width) {
    const SmoothingKernel h = SmoothingKernel::triangular(*hc.kernel_half_width * hc.s_unit, win.ds());
    const GridFunction Ls = smooth(res.L, h);
    r.field("smoothed_osc", Ls.oscillation());
    r.field("smoothed_defect", harmonic_defect(Ls, ctx.e).sup);
  }

  if (hc.martingale) {
    const MartingaleConfig& mc = *hc.martingale;
    const ConeVector x = start_vector(mc.x, d);
    const double s0 = mc.s * hc.s_unit;
    const std::vector<Estimate> est = martingale_check(res.L, ctx.e, x, s0, mc.n_paths, mc.horizon,
                                                       RngStream(ctx.cfg.seed, kStreamHarmonic).child(1));
    const double target = eval(res.L, x, s0);
    double worst = 0.0;
    for (const auto& m : est) worst = std::max(worst, std::abs(m.mean - target));
    r.field("martingale_value", target);
    r.field("martingale_max_deviation", worst);
    write_csv(ctx.out / "martingale.csv", [&](std::ostream& os) {
      os << "step,mean,se\n";
      for (std::size_t n = 0; n < est.size(); ++n) {
        os << n << ',' << format_double(est[n].mean) << ',' << format_double(est[n].se) << '\n';
      }
    });
  }

  write_csv(ctx.out / "harmonic_history.csv", [&](std::ostream& os) { write_history_csv(os, res); });
  write_csv(ctx.out / "harmonic_final.csv", [&](std::ostream& os) { write_grid_function_csv(os, res.L); });
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Analyze: return "analyze";
    case Command::Simulate: return "simulate";
    case Command::Stationary: return "stationary";
    case Command::Recurrence: return "recurrence";
    case Command::Harmonic: return "harmonic";
    case Command::Report: return "report";
  }
  return "unknown";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::Validate, Command::Analyze, Command::Simulate, Command::Stationary, Command::Recurrence,
                    Command::Harmonic, Command::Report}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view tool_version() { return CONEWALK_VERSION; }

Timings run_command(Command command, const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  if (command == Command::Validate) return {};
  const MatrixEnsemble e = cfg.ensemble();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create output directory " + out_dir.string());

  ReportWriter report;
  report.raw("# conewalk report\n");
  report.field("tool_version", tool_version());
  report.field("command", to_string(command));
  report.section("config");
  report.field("json", cfg.canonical);
  report.section("ensemble");
  report.field("dimension", e.dim());
  report.field("matrices", e.size());
  report.field("probs", e.probs());
  report.field("seed", std::to_string(cfg.seed));

  const Context ctx{cfg, e, out_dir, report};
  using Step = std::pair<std::string, std::function<void(const Context&)>>;
  std::vector<Step> steps;
  const auto add = [&](Command c, void (*fn)(const Context&)) { steps.emplace_back(std::string(to_string(c)), fn); };
  switch (command) {
    case Command::Analyze: add(command, run_analyze); break;
    case Command::Simulate: add(command, run_simulate); break;
    case Command::Stationary: add(command, run_stationary); break;
    case Command::Recurrence: add(command, run_recurrence); break;
    case Command::Harmonic: add(command, run_harmonic); break;
    case Command::Report:
      add(Command::Analyze, run_analyze);
      if (cfg.walk) add(Command::Simulate, run_simulate);
      if (cfg.stationary) add(Command::Stationary, run_stationary);
      if (cfg.recurrence) add(Command::Recurrence, run_recurrence);
      if (cfg.harmonic) add(Command::Harmonic, run_harmonic);
      break;
    case Command::Validate: break;
  }

  Timings timings;
  for (const auto& [name, fn] : steps) {
    const auto t0 = std::chrono::steady_clock::now();
    fn(ctx);
    timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  write_file(out_dir / "report.txt", report.str());

  std::ostringstream tf;
  tf << "section,seconds\n";
  for (const auto& [name, sec] : timings) tf << name << ',' << format_double(sec) << '\n';
  write_file(out_dir / "timings.txt", tf.str());
  return timings;
}

int exit_code_for(const std::exception& err) {
  if (const auto* e = dynamic_cast<const Error*>(&err)) return e->code() == ErrorCode::MalformedInput ? 2 : 1;
  return 1;
}

}  // namespace conewalk
