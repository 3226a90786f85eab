// hybreach: experiment runner for backprojection over-approximations.
#include "hybreach/error.hpp"
#include "hybreach/experiment.hpp"
#include "hybreach/fixture.hpp"
#include "hybreach/plot.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

using namespace hybreach;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInternal = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  int parallel = 0;
  bool reproducible = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Output directory (overrides output_dir)");
  sub->add_option("--seed", c.seed, "Monte Carlo seed (overrides seed)");
  sub->add_option("--mode", c.mode, "Set representation")->check(CLI::IsMember({"axis", "rotated2d"}));
  sub->add_option("--parallel", c.parallel, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--reproducible", c.reproducible, "Leave wall times out of written files");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (!c.mode.empty()) {
    cfg.mode = set_mode_from_string(c.mode);
    if (cfg.mode == SetMode::Rotated2d && cfg.system->state_dim() != 2) {
      throw Error(ErrorKind::Config, "rotated2d mode needs a 2-state system");
    }
  }
  if (c.parallel > 0) cfg.parallel = c.parallel;
  return cfg;
}

void print_results(const std::vector<ConfigResult>& results) {
  for (const auto& r : results) {
    std::printf("%-10s lp_count=%zu mean_error=%.6g mean_wall_time_s=%.4g targets=%zu\n", r.config.id.c_str(),
                r.lp_count(), r.mean_error(), r.mean_wall_time(), r.targets.size());
  }
}

bool is_config_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::EmptySweep:
    case ErrorKind::DimensionChain:
    case ErrorKind::EmptyNetwork:
    case ErrorKind::NonFinite:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backprojection set over-approximation for neural feedback loops"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, sound_opts;
  auto* run = app.add_subcommand("run", "Run every partition configuration and write per-run artifacts");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "Error vs compute table over all partition configurations");
  add_common(sweep, sweep_opts);
  auto* sound = app.add_subcommand("soundness", "Grid check of the over-approximation guarantee");
  add_common(sound, sound_opts);
  double shrink = 0.0;
  sound->add_option("--debug-shrink", shrink, "Shrink BPOAs by this percentage before checking")
      ->check(CLI::Range(0.0, 100.0));

  auto* plot = app.add_subcommand("plot", "Render a run artifact");
  std::string artifact, plot_out = ".";
  plot->add_option("artifact", artifact, "run_*.json file")->required();
  plot->add_option("--out", plot_out, "Output directory");

  auto* policy = app.add_subcommand("make-policy", "Write the seeded double-integrator fixture controller");
  std::string policy_out;
  std::uint64_t policy_seed = 2;
  double state_limit = 10.0, control_limit = 1.0;
  std::vector<double> gain{-0.2, -0.6};
  policy->add_option("--out", policy_out, "Weight file to write")->required();
  policy->add_option("--seed", policy_seed, "Weight seed");
  policy->add_option("--state-limit", state_limit, "Operating region half-width");
  policy->add_option("--control-limit", control_limit, "Control limit");
  policy->add_option("--gain", gain, "Reference state-feedback gain")->expected(2);
  bool zero_policy = false;
  policy->add_flag("--zero", zero_policy, "Write the all-zero controller instead");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      print_results(cmd_run(cfg, RunOptions{run_opts.reproducible, 0.0}));
    } else if (*sweep) {
      const auto cfg = resolve(sweep_opts);
      print_results(cmd_sweep(cfg, RunOptions{sweep_opts.reproducible, 0.0}));
      std::printf("wrote %s\n", (cfg.output_dir / "sweep.csv").string().c_str());
    } else if (*sound) {
      const auto cfg = resolve(sound_opts);
      const auto report = cmd_soundness(cfg, RunOptions{sound_opts.reproducible, shrink});
      std::size_t members = 0;
      for (const auto& s : report.steps) {
        members += s.members;
        std::printf("%-10s target=%zu t=%d grid=%zu members=%zu violations=%zu\n", s.config_id.c_str(), s.target_index,
                    s.t, s.grid_points, s.members, s.violations);
      }
      std::printf("total violations: %zu (members checked: %zu)\n", report.total_violations(), members);
    } else if (*plot) {
      for (const auto& p : plot_file(artifact, plot_out)) std::printf("wrote %s\n", p.string().c_str());
    } else if (*policy) {
      if (zero_policy) {
        save_network(zero_network(2, 1, {5, 5}), policy_out);
        std::printf("wrote %s\n", policy_out.c_str());
        return 0;
      }
      Vector lim = Vector::Constant(2, state_limit);
      Matrix g(1, 2);
      g << gain[0], gain[1];
      const PolicyRecipe recipe{policy_seed, {5, 5}, g, HyperRect(-lim, lim),
                                HyperRect(Vector::Constant(1, -control_limit), Vector::Constant(1, control_limit))};
      save_network(make_fixture_policy(recipe), policy_out);
      std::printf("wrote %s\n", policy_out.c_str());
    }
  } catch (const Error& e) {
    std::cerr << "hybreach: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kExitConfig : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "hybreach: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
