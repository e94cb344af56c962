#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "conewalk/config.hpp"
#include "conewalk/error.hpp"
#include "conewalk/parallel.hpp"
#include "conewalk/run.hpp"

using namespace conewalk;
namespace fs = std::filesystem;

namespace {

const std::string kBase = R"("dimension": 2, "matrices": [[[2, 1], [1, 1]], [[1, 1], [1, 2]]], "probs": [0.5, 0.5], "seed": 3)";

std::string cfg_text(const std::string& extra = "") { return "{" + kBase + (extra.empty() ? "" : ", " + extra) + "}"; }

ErrorCode parse_code(const std::string& text) {
  try {
    validate_config(parse_config(text));
  } catch (const Error& err) {
    return err.code();
  }
  FAIL("expected an error for " << text);
  return ErrorCode::InvalidArgument;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::path(CONEWALK_TEST_SCRATCH) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CONEWALK_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal config uses defaults") {
    const ExperimentConfig cfg = parse_config(cfg_text());
    CHECK(cfg.dimension == 2);
    CHECK(cfg.seed == 3);
    CHECK_FALSE(cfg.harmonic.has_value());
    CHECK(cfg.output == "conewalk_out");
    CHECK(cfg.ensemble().size() == 2);
  }
  SUBCASE("sections") {
    const ExperimentConfig cfg = parse_config(cfg_text(
        R"("walk": {"n_steps": 500, "batches": 10}, "harmonic": {"T": 2, "subdivisions": 20, "boundary": "clamp", "initial": {"kind": "constant", "value": 4}}, "output": "x")"));
    REQUIRE(cfg.walk);
    CHECK(cfg.walk->n_steps == 500);
    REQUIRE(cfg.harmonic);
    CHECK(cfg.harmonic->ds == doctest::Approx(0.05));
    CHECK(cfg.harmonic->boundary == Boundary::Clamp);
    CHECK(cfg.harmonic->initial == InitialKind::Constant);
    CHECK(cfg.harmonic->initial_value == 4.0);
    CHECK(cfg.harmonic->window().points() == 81);
    CHECK(cfg.output == "x");
  }
  SUBCASE("syntax, type and key errors are malformed input") {
    CHECK(parse_code("{\"dimension\": 2,") == ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("extra": 1)")) == ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("walk": {"n_step": 10})")) == ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("walk": {"n_steps": "many"})")) == ErrorCode::MalformedInput);
    CHECK(parse_code(R"({"dimension": 2, "probs": [1], "seed": 1})") == ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("harmonic": {"ds": 0.05, "subdivisions": 20})")) == ErrorCode::MalformedInput);
  }
  SUBCASE("semantic errors") {
    CHECK(parse_code(cfg_text(R"("harmonic": {"T": 1, "ds": 0.3})")) != ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("walk": {"start": [1, 0, 0]})")) != ErrorCode::MalformedInput);
    CHECK(parse_code(cfg_text(R"("walk": {"n_steps": 5, "batches": 10})")) != ErrorCode::MalformedInput);
    CHECK(parse_code(R"({"dimension": 2, "matrices": [[[1, 1], [1, 1]]], "probs": [0.7], "seed": 1})") ==
          ErrorCode::InvalidEnsemble);
  }
  SUBCASE("zero column names the matrix and the column") {
    try {
      validate_config(parse_config(R"({"dimension": 2, "matrices": [[[1, 1], [1, 1]], [[1, 0], [1, 0]]], "probs": [0.5, 0.5], "seed": 1})"));
      FAIL("expected ZeroColumn");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ZeroColumn);
      const std::string msg = err.what();
      CHECK(msg.find("matrix 1") != std::string::npos);
      CHECK(msg.find("column 1") != std::string::npos);
    }
  }
  SUBCASE("exit codes") {
    CHECK(exit_code_for(Error(ErrorCode::MalformedInput, "x")) == 2);
    CHECK(exit_code_for(Error(ErrorCode::ZeroColumn, "x")) == 1);
    CHECK(exit_code_for(std::runtime_error("x")) == 1);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS((void)load_config("/nonexistent/conewalk.json"), Error);
  }
}

TEST_CASE("commands in process") {
  SUBCASE("validate writes nothing") {
    const fs::path out = scratch_dir("validate") / "out";
    run_command(Command::Validate, parse_config(cfg_text()), out);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("permutation: no positive word, condition fails") {
    const fs::path out = scratch_dir("perm");
    run_command(Command::Analyze, parse_config(R"({"dimension": 2, "matrices": [[[0, 1], [1, 0]]], "probs": [1], "seed": 1})"), out);
    const std::string report = slurp(out / "report.txt");
    CHECK(report.find("positive_word = none") != std::string::npos);
    CHECK(report.find("condition_c = fails_ii") != std::string::npos);
  }
  SUBCASE("all-ones periodic cosine does not decay") {
    const fs::path out = scratch_dir("ones");
    const ExperimentConfig cfg = parse_config(
        R"({"dimension": 2, "matrices": [[[1, 1], [1, 1]]], "probs": [1], "seed": 7,
            "harmonic": {"resolution": 31, "s_unit": 0.6931471805599453, "T": 5, "subdivisions": 14, "n_iter": 20,
                         "initial": {"kind": "cosine", "period": 1}}})");
    run_command(Command::Harmonic, cfg, out);
    std::istringstream hist(slurp(out / "harmonic_history.csv"));
    std::string line;
    std::getline(hist, line);
    CHECK(line == "iteration,osc,defect");
    std::size_t rows = 0;
    while (std::getline(hist, line)) {
      ++rows;
      CHECK(line.substr(line.find(',') + 1, 2) == "2,");
    }
    CHECK(rows == 21);
  }
  SUBCASE("E* harmonic oscillation decays") {
    const fs::path out = scratch_dir("estar_h");
    run_command(Command::Harmonic,
                parse_config(cfg_text(R"("harmonic": {"resolution": 31, "T": 2, "ds": 0.05, "n_iter": 100, "tol": 0})")), out);
    const std::string report = slurp(out / "report.txt");
    const auto pos = report.find("osc_ratio = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(report.substr(pos + 12)) < 0.5);
  }
  SUBCASE("simulate output is independent of the thread count") {
    const ExperimentConfig cfg = parse_config(cfg_text(R"("walk": {"n_steps": 2000, "n_paths": 8, "batches": 20})"));
    const fs::path a = scratch_dir("sim1");
    const fs::path b = scratch_dir("sim4");
    set_thread_count(1);
    run_command(Command::Simulate, cfg, a);
    set_thread_count(4);
    run_command(Command::Simulate, cfg, b);
    set_thread_count(0);
    for (const char* f : {"report.txt", "paths.csv", "trajectory.csv"}) {
      CHECK(slurp(a / f) == slurp(b / f));
      CHECK_FALSE(slurp(a / f).empty());
    }
  }
}

TEST_CASE("command line") {
  const fs::path dir = scratch_dir("cli");
  const fs::path good = write_file(dir / "good.json", cfg_text(R"("walk": {"n_steps": 1000, "batches": 10})"));
  const fs::path truncated = write_file(dir / "truncated.json", cfg_text().substr(0, 30));
  const fs::path zero_col =
      write_file(dir / "zero.json", R"({"dimension": 2, "matrices": [[[1, 0], [1, 0]]], "probs": [1], "seed": 1})");

  CHECK(run_cli("validate --config \"" + good.string() + "\"") == 0);
  CHECK(run_cli("validate --config \"" + truncated.string() + "\"") == 2);
  CHECK(run_cli("validate --config \"" + (dir / "absent.json").string() + "\"") == 2);
  CHECK(run_cli("validate --config \"" + zero_col.string() + "\"") == 1);
  CHECK(run_cli("frobnicate --config \"" + good.string() + "\"") == 2);
  CHECK(run_cli("simulate") == 2);
  CHECK(run_cli("--help") == 0);

  const fs::path o1 = dir / "run1";
  const fs::path o2 = dir / "run2";
  REQUIRE(run_cli("simulate --threads 1 --config \"" + good.string() + "\" --out \"" + o1.string() + "\"") == 0);
  REQUIRE(run_cli("simulate --threads 3 --config \"" + good.string() + "\" --out \"" + o2.string() + "\"") == 0);
  for (const char* f : {"report.txt", "paths.csv", "trajectory.csv"}) CHECK(slurp(o1 / f) == slurp(o2 / f));
  CHECK(fs::exists(o1 / "timings.txt"));
}
