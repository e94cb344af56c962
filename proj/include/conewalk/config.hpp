#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conewalk/ensemble.hpp"
#include "conewalk/harmonic.hpp"
#include "conewalk/semigroup.hpp"

namespace conewalk {

struct WalkConfig {
  std::size_t n_steps = 10'000;
  std::size_t n_paths = 1;
  std::vector<double> start;  // empty: barycenter (1, ..., 1) / sqrt(d)
  double t0 = 0.0;
  std::size_t batches = kDefaultBatches;
  bool write_trajectory = true;
};

struct SemigroupConfig {
  std::size_t max_len = 4;
  std::int64_t q_max = 1'000'000;
  double tol = 1e-9;
  std::size_t n_words = 64;
  std::size_t closure_cap = kDefaultClosureCap;
};

struct StationaryConfig {
  std::size_t n_steps = 1'000'000;
  std::optional<std::size_t> burn_in;
  std::size_t resolution = 0;  // 0: 91 angle nodes (d = 2) or simplex level 10
};

struct RecurrenceConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  std::size_t n_trials = 10'000;
  std::size_t n_steps = 100'000;  // trajectory length for pair events; 0 skips
};

enum class InitialKind { Random, Constant, Cosine };

struct MartingaleConfig {
  std::size_t n_paths = 1000;
  std::size_t horizon = 20;
  std::vector<double> x;  // empty: barycenter
  double s = 0.0;  // in s_unit
};

struct HarmonicConfig {
  std::size_t resolution = 0;  // 0: 721 angle nodes (d = 2) or simplex level 8
  double s_unit = 1.0;         // T, ds, half widths and periods are in this unit
  double T = 30.0;
  double ds = 0.05;
  std::size_t n_iter = 200;
  double tol = 1e-6;
  std::optional<double> kernel_half_width;
  Boundary boundary = Boundary::Periodic;
  InitialKind initial = InitialKind::Random;
  double initial_value = 1.0;   // constant
  double initial_period = 1.0;  // cosine: cos(2 pi s / period)
  std::optional<MartingaleConfig> martingale;

  [[nodiscard]] Window window() const;
};

/// Parsed experiment definition. Only dimension, matrices, probs and seed are
/// required; absent sections are nullopt and commands fall back to defaults.
struct ExperimentConfig {
  std::size_t dimension = 0;
  std::vector<std::vector<std::vector<double>>> matrices;  // row-major
  std::vector<double> probs;
  std::uint64_t seed = 0;
  std::optional<WalkConfig> walk;
  std::optional<SemigroupConfig> semigroup;
  std::optional<StationaryConfig> stationary;
  std::optional<RecurrenceConfig> recurrence;
  std::optional<HarmonicConfig> harmonic;
  std::string output = "conewalk_out";
  std::string canonical;  // normalized JSON echo of the input

  /// Throws the validation error of the first bad matrix, prefixed with its index.
  [[nodiscard]] MatrixEnsemble ensemble() const;
};

/// JSON text -> config. Syntax errors, wrong types and unknown keys throw
/// MalformedInput; out-of-range values throw InvalidArgument.
ExperimentConfig parse_config(std::string_view text);
/// Throws MalformedInput if the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full semantic check: builds the ensemble, the window and the start vectors.
void validate_config(const ExperimentConfig& cfg);

}  // namespace conewalk
