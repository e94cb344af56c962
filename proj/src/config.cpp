#include "conewalk/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "conewalk/error.hpp"

namespace conewalk {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedInput, where + ": " + what);
}

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, where + ": " + what);
}

// Typed access to one JSON object; unknown keys are rejected.
class Section {
 public:
  Section(const json& node, std::string path, std::initializer_list<std::string_view> keys) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) malformed(path_, "expected an object");
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (std::string_view k : keys) known = known || k == key;
      if (!known) malformed(path_, "unknown key \"" + key + "\"");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return node_.contains(key); }
  [[nodiscard]] const json& at(const char* key) const {
    if (!has(key)) malformed(path_, std::string("missing required key \"") + key + "\"");
    return node_.at(key);
  }
  [[nodiscard]] std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  [[nodiscard]] double number(const char* key) const { return to_number(at(key), where(key)); }
  [[nodiscard]] double positive(const char* key) const {
    const double v = number(key);
    if (!(v > 0.0)) invalid(where(key), "must be positive");
    return v;
  }
  [[nodiscard]] std::uint64_t count(const char* key) const { return to_count(at(key), where(key)); }
  [[nodiscard]] std::size_t positive_count(const char* key) const {
    const auto v = count(key);
    if (v == 0) invalid(where(key), "must be positive");
    return static_cast<std::size_t>(v);
  }
  [[nodiscard]] std::vector<double> vector(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) malformed(where(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& c : v) out.push_back(to_number(c, where(key)));
    return out;
  }
  [[nodiscard]] std::string string(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) malformed(where(key), "expected a string");
    return v.get<std::string>();
  }
  [[nodiscard]] bool boolean(const char* key) const {
    const json& v = at(key);
    if (!v.is_boolean()) malformed(where(key), "expected true or false");
    return v.get<bool>();
  }

  static double to_number(const json& v, const std::string& where) {
    if (!v.is_number()) malformed(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where, "must be finite");
    return d;
  }
  static std::uint64_t to_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) invalid(where, "must be nonnegative");
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && d == std::floor(d)) return static_cast<std::uint64_t>(d);
      invalid(where, "must be a nonnegative integer");
    }
    malformed(where, "expected an integer");
  }

 private:
  const json& node_;
  std::string path_;
};

WalkConfig parse_walk(const json& node) {
  const Section s(node, "walk", {"n_steps", "n_paths", "start", "t0", "batches", "write_trajectory"});
  WalkConfig w;
  if (s.has("n_steps")) w.n_steps = s.positive_count("n_steps");
  if (s.has("n_paths")) w.n_paths = s.positive_count("n_paths");
  if (s.has("start")) w.start = s.vector("start");
  if (s.has("t0")) w.t0 = s.number("t0");
  if (s.has("batches")) {
    w.batches = s.positive_count("batches");
    if (w.batches < 2) invalid(s.where("batches"), "must be at least 2");
  }
  if (s.has("write_trajectory")) w.write_trajectory = s.boolean("write_trajectory");
  return w;
}

SemigroupConfig parse_semigroup(const json& node) {
  const Section s(node, "semigroup", {"max_len", "q_max", "tol", "n_words", "closure_cap"});
  SemigroupConfig g;
  if (s.has("max_len")) g.max_len = s.positive_count("max_len");
  if (s.has("q_max")) {
    const auto q = s.positive_count("q_max");
    if (q > (1ULL << 53)) invalid(s.where("q_max"), "must not exceed 2^53");
    g.q_max = static_cast<std::int64_t>(q);
  }
  if (s.has("tol")) g.tol = s.positive("tol");
  if (s.has("n_words")) g.n_words = s.positive_count("n_words");
  if (s.has("closure_cap")) g.closure_cap = s.positive_count("closure_cap");
  return g;
}

StationaryConfig parse_stationary(const json& node) {
  const Section s(node, "stationary", {"n_steps", "burn_in", "resolution"});
  StationaryConfig st;
  if (s.has("n_steps")) st.n_steps = s.positive_count("n_steps");
  if (s.has("burn_in")) st.burn_in = s.count("burn_in");
  if (s.has("resolution")) st.resolution = s.positive_count("resolution");
  if (st.burn_in && *st.burn_in >= st.n_steps) invalid("stationary.burn_in", "must be below n_steps");
  return st;
}

RecurrenceConfig parse_recurrence(const json& node) {
  const Section s(node, "recurrence", {"epsilon", "delta", "n_trials", "n_steps"});
  RecurrenceConfig r;
  if (s.has("epsilon")) r.epsilon = s.positive("epsilon");
  if (s.has("delta")) r.delta = s.positive("delta");
  if (s.has("n_trials")) r.n_trials = s.positive_count("n_trials");
  if (s.has("n_steps")) r.n_steps = s.count("n_steps");
  return r;
}

MartingaleConfig parse_martingale(const json& node) {
  const Section s(node, "harmonic.martingale", {"n_paths", "horizon", "x", "s"});
  MartingaleConfig m;
  if (s.has("n_paths")) {
    m.n_paths = s.positive_count("n_paths");
    if (m.n_paths < 2) invalid(s.where("n_paths"), "must be at least 2");
  }
  if (s.has("horizon")) m.horizon = s.count("horizon");
  if (s.has("x")) m.x = s.vector("x");
  if (s.has("s")) m.s = s.number("s");
  return m;
}

HarmonicConfig parse_harmonic(const json& node) {
  const Section s(node, "harmonic", {"resolution", "s_unit", "T", "ds", "subdivisions", "n_iter", "tol",
                                     "kernel_half_width", "boundary", "initial", "martingale"});
  HarmonicConfig h;
  if (s.has("resolution")) h.resolution = s.positive_count("resolution");
  if (s.has("s_unit")) h.s_unit = s.positive("s_unit");
  if (s.has("T")) h.T = s.positive("T");
  if (s.has("ds") && s.has("subdivisions")) malformed("harmonic", "give ds or subdivisions, not both");
  if (s.has("ds")) h.ds = s.positive("ds");
  if (s.has("subdivisions")) h.ds = 1.0 / static_cast<double>(s.positive_count("subdivisions"));
  if (s.has("n_iter")) h.n_iter = s.count("n_iter");
  if (s.has("tol")) h.tol = s.number("tol");
  if (h.tol < 0.0) invalid("harmonic.tol", "must be nonnegative");
  if (s.has("kernel_half_width")) h.kernel_half_width = s.positive("kernel_half_width");
  if (s.has("boundary")) {
    const std::string b = s.string("boundary");
    if (b != "clamp" && b != "periodic") malformed("harmonic.boundary", "expected \"clamp\" or \"periodic\"");
    h.boundary = boundary_from_string(b);
  }
  if (s.has("initial")) {
    const Section in(s.at("initial"), "harmonic.initial", {"kind", "value", "period"});
    const std::string kind = in.string("kind");
    if (kind == "random") {
      h.initial = InitialKind::Random;
    } else if (kind == "constant") {
      h.initial = InitialKind::Constant;
    } else if (kind == "cosine") {
      h.initial = InitialKind::Cosine;
    } else {
      malformed("harmonic.initial.kind", "expected \"random\", \"constant\" or \"cosine\"");
    }
    if (in.has("value")) h.initial_value = in.number("value");
    if (in.has("period")) h.initial_period = in.positive("period");
  }
  if (s.has("martingale")) h.martingale = parse_martingale(s.at("martingale"));
  return h;
}

// Message of a library error without its "Code: " prefix.
std::string bare_message(const Error& err) {
  const std::string what = err.what();
  const std::string prefix = std::string(to_string(err.code())) + ": ";
  return what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

}  // namespace

Window HarmonicConfig::window() const {
  // T / ds is formed in s_unit units, so an exact ratio stays exact.
  const double ratio = T / ds;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    invalid("harmonic", "ds must divide T");
  }
  const double steps = std::round(ratio);
  const double ds_abs = ds * s_unit;
  return Window(steps * ds_abs, ds_abs, boundary);
}

MatrixEnsemble ExperimentConfig::ensemble() const {
  std::vector<NonNegMatrix> ms;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    try {
      if (matrices[k].size() != dimension) {
        throw Error(ErrorCode::InvalidEnsemble, "has " + std::to_string(matrices[k].size()) + " rows, dimension is " +
                                                    std::to_string(dimension));
      }
      ms.push_back(NonNegMatrix::validate(matrices[k]));
    } catch (const Error& err) {
      throw Error(err.code(), "matrix " + std::to_string(k) + ": " + bare_message(err));
    }
  }
  return MatrixEnsemble(std::move(ms), probs);
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw Error(ErrorCode::MalformedInput, std::string("config is not valid JSON: ") + err.what());
  }
  const Section s(root, "", {"dimension", "matrices", "probs", "seed", "walk", "semigroup", "stationary",
                             "recurrence", "harmonic", "output"});
  ExperimentConfig cfg;
  cfg.dimension = s.positive_count("dimension");
  const json& mats = s.at("matrices");
  if (!mats.is_array()) malformed("matrices", "expected an array of matrices");
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const std::string where = "matrices[" + std::to_string(k) + "]";
    if (!mats[k].is_array()) malformed(where, "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : mats[k]) {
      if (!row.is_array()) malformed(where, "expected an array of rows");
      std::vector<double> r;
      for (const auto& v : row) r.push_back(Section::to_number(v, where));
      rows.push_back(std::move(r));
    }
    cfg.matrices.push_back(std::move(rows));
  }
  cfg.probs = s.vector("probs");
  if (cfg.probs.size() != cfg.matrices.size()) invalid("probs", "needs one probability per matrix");
  cfg.seed = s.count("seed");
  if (s.has("walk")) cfg.walk = parse_walk(s.at("walk"));
  if (s.has("semigroup")) cfg.semigroup = parse_semigroup(s.at("semigroup"));
  if (s.has("stationary")) cfg.stationary = parse_stationary(s.at("stationary"));
  if (s.has("recurrence")) cfg.recurrence = parse_recurrence(s.at("recurrence"));
  if (s.has("harmonic")) cfg.harmonic = parse_harmonic(s.at("harmonic"));
  if (s.has("output")) cfg.output = s.string("output");
  cfg.canonical = root.dump();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::MalformedInput, "cannot read config file " + path.string());
  return parse_config(text.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const MatrixEnsemble e = cfg.ensemble();
  auto check_start = [&](const std::vector<double>& x, const char* where) {
    if (x.empty()) return;
    if (x.size() != e.dim()) invalid(where, "dimension does not match the ensemble");
    try {
      (void)ConeVector::unit(x);
    } catch (const Error& err) {
      throw Error(err.code(), std::string(where) + ": " + bare_message(err));
    }
  };
  if (cfg.walk) {
    check_start(cfg.walk->start, "walk.start");
    if (cfg.walk->n_steps < cfg.walk->batches) invalid("walk.n_steps", "must be at least walk.batches");
  }
  if (cfg.harmonic) {
    (void)cfg.harmonic->window();
    if (cfg.harmonic->martingale) check_start(cfg.harmonic->martingale->x, "harmonic.martingale.x");
    if (e.dim() == 2 && cfg.harmonic->resolution == 1) invalid("harmonic.resolution", "needs at least 2 nodes");
  }
  if (cfg.stationary && e.dim() == 2 && cfg.stationary->resolution == 1) {
    invalid("stationary.resolution", "needs at least 2 nodes");
  }
}

}  // namespace conewalk
