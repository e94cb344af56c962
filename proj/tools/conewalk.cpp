#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conewalk/config.hpp"
#include "conewalk/parallel.hpp"
#include "conewalk/run.hpp"

namespace {

struct Options {
  std::string config;
  unsigned threads = 0;
  std::string out;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks driven by products of nonnegative matrices"};
  app.set_version_flag("--version", std::string(conewalk::tool_version()));
  app.require_subcommand(1, 1);

  Options opts;
  const std::pair<conewalk::Command, const char*> commands[] = {
      {conewalk::Command::Validate, "Check the config and its matrices"},
      {conewalk::Command::Analyze, "Condition (C), Perron data and log-eigenvalue commensurability"},
      {conewalk::Command::Simulate, "Simulate paths of the Markov random walk"},
      {conewalk::Command::Stationary, "Estimate the stationary measure on the sphere"},
      {conewalk::Command::Recurrence, "Aperiodicity probe and pair-event counts"},
      {conewalk::Command::Harmonic, "Iterate the transition operator on a grid function"},
      {conewalk::Command::Report, "Run every analysis whose config section is present"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(conewalk::to_string(cmd)), help);
    sub->add_option("--config", opts.config, "Experiment config (JSON)")->required();
    sub->add_option("--threads", opts.threads, "Worker thread cap (0 = all cores)");
    sub->add_option("--out", opts.out, "Output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  conewalk::Command command = conewalk::Command::Validate;
  for (const auto& [cmd, help] : commands) {
    if (app.got_subcommand(std::string(conewalk::to_string(cmd)))) command = cmd;
  }

  try {
    conewalk::set_thread_count(opts.threads);
    const conewalk::ExperimentConfig cfg = conewalk::load_config(opts.config);
    const std::filesystem::path out = opts.out.empty() ? std::filesystem::path(cfg.output) : std::filesystem::path(opts.out);
    conewalk::run_command(command, cfg, out);
    if (command == conewalk::Command::Validate) std::cout << "valid\n";
    return 0;
  } catch (const std::exception& err) {
    std::cerr << "conewalk: " << err.what() << '\n';
    return conewalk::exit_code_for(err);
  }
}
