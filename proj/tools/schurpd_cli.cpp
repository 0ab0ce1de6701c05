// Command line driver: `schurpd run <scene> --out <dir>` and
// `schurpd compare <scene> --solvers a,b --out <dir>`.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "schurpd/harness.hpp"
#include "schurpd/scenario.hpp"

namespace {

struct Common {
  std::string scene;
  std::string out;
  int frames = 0;
  int outer = 0;
  int inner = 0;
  long long seed = -1;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("scene", c.scene, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--frames", c.frames, "Override the frame count")->check(CLI::PositiveNumber);
  cmd->add_option("--outer", c.outer, "Outer iterations per frame")->check(CLI::PositiveNumber);
  cmd->add_option("--inner", c.inner, "Inner iterations per outer iteration")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Seed for mesh jitter")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--no-timing", c.no_timing, "Write zeros in timing columns (byte-stable output)");
}

schurpd::RunOptions options_from(const Common& c) {
  schurpd::RunOptions o;
  if (c.frames > 0) o.frames = c.frames;
  if (c.outer > 0) o.outer_iters = c.outer;
  if (c.inner > 0) o.inner_iters = c.inner;
  if (c.seed >= 0) o.seed = static_cast<std::uint64_t>(c.seed);
  o.timing = !c.no_timing;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasistatic Projective Dynamics with Schur-complement collision handling"};
  app.require_subcommand(1);

  Common run_args;
  std::string solver;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write OBJ frames and metrics.csv");
  add_common(run_cmd, run_args);
  run_cmd->add_option("--solver", solver, "schur, full or pcg")
      ->check(CLI::IsMember({"schur", "full", "full_refactor", "pcg"}));

  Common cmp_args;
  std::vector<std::string> solvers;
  auto* cmp_cmd = app.add_subcommand("compare", "Run solvers in lockstep and report differences");
  add_common(cmp_cmd, cmp_args);
  cmp_cmd->add_option("--solvers", solvers, "Comma separated, first is the reference")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"schur", "full", "full_refactor", "pcg"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto options = options_from(run_args);
      if (!solver.empty()) options.solver = schurpd::parse_solver_kind(solver);
      const auto scenario = schurpd::load_scenario(run_args.scene);
      const auto report = schurpd::run(scenario, run_args.out, options);
      std::printf("%s: %zu frames with %s, final energy %.6g, max penetration %.3g\n", report.scene.c_str(),
                  report.frames.size(), std::string(schurpd::to_string(report.solver)).c_str(),
                  report.final_energy(), report.max_penetration());
      if (options.timing) std::printf("solver time %.1f ms\n", report.total_ms());
    } else {
      std::vector<schurpd::SolverKind> kinds;
      for (const auto& s : solvers) kinds.push_back(schurpd::parse_solver_kind(s));
      if (kinds.size() < 2) throw schurpd::ConfigError("--solvers needs at least two entries");
      const auto scenario = schurpd::load_scenario(cmp_args.scene);
      const auto report = schurpd::compare(scenario, kinds, cmp_args.out, options_from(cmp_args));
      for (std::size_t k = 1; k < report.solvers.size(); ++k) {
        std::printf("%s vs %s: max relative difference %.3e\n", report.solvers[k].c_str(),
                    report.solvers[0].c_str(), report.max_rel_diff(report.solvers[k]));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
