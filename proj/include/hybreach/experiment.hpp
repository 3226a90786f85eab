#pragma once

#include "hybreach/dynamics.hpp"
#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"
#include "hybreach/oracle.hpp"
#include "hybreach/reach.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hybreach {

inline constexpr int kConfigSchemaVersion = 1;

/// Centers uniform over `center_range`, every box of the same `size`.
struct TargetGenerator {
  int count = 5;
  std::uint64_t seed = 0;
  HyperRect center_range;
  Vector size;
};

struct PartitionConfig {
  std::string id;
  std::vector<int> tsp;
  int brsp = 1;
  BrspStrategy strategy = BrspStrategy::Guided;
  double min_volume = 0.0;
};

/// Where Monte Carlo samples for the true backprojection are drawn from.
enum class SampleRegion {
  Chain,  // controls-relaxed backreach chain box
  Bpoa,   // final-step box of an unpartitioned run (itself an over-approximation)
};

struct ExperimentConfig {
  std::filesystem::path source;  // config file, empty when built in memory
  std::optional<LtiSystem> system;
  std::filesystem::path network_path;
  std::vector<HyperRect> targets;
  std::optional<TargetGenerator> generator;
  int horizon = 5;
  std::vector<PartitionConfig> partitions;
  std::size_t mc_samples = 100000;
  SampleRegion mc_region = SampleRegion::Chain;
  std::uint64_t seed = 0;
  SetMode mode = SetMode::Axis;
  std::filesystem::path output_dir = "out";
  std::size_t soundness_points = 100000;
  int parallel = 1;
};

/// Throws Error(Config) for schema problems; relative network paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<HyperRect> generate_targets(const TargetGenerator& gen);
/// Explicit targets followed by generated ones.
std::vector<HyperRect> resolve_targets(const ExperimentConfig& cfg);

PartitionParams partition_params(const PartitionConfig& pc, SetMode mode, int threads);

struct TargetResult {
  std::size_t target_index = 0;
  BpoaRun run;
  BpEstimate truth;
  double area_bpoa = 0.0;
  double area_true = 0.0;
  std::optional<double> error;  // empty when no Monte Carlo member was found
};

struct ConfigResult {
  PartitionConfig config;
  std::vector<TargetResult> targets;

  std::size_t lp_count() const;  // largest per-target count
  double mean_error() const;     // NaN when any target lacks an error
  double mean_wall_time() const;
};

struct RunOptions {
  bool reproducible = false;  // omit wall times from written artifacts
  double debug_shrink_pct = 0.0;
};

/// Ground-truth estimates per target at the final step, shared by all partition configurations.
std::vector<BpEstimate> estimate_truth(const ExperimentConfig& cfg, const LtiSystem& sys,
                                       const FeedforwardNetwork& net, const std::vector<HyperRect>& targets);

std::vector<ConfigResult> evaluate(const ExperimentConfig& cfg, const FeedforwardNetwork& net);

std::string sweep_csv(const ExperimentConfig& cfg, const std::vector<ConfigResult>& results,
                      const RunOptions& opts);

nlohmann::json run_artifact(const ExperimentConfig& cfg, const ConfigResult& cr, const TargetResult& tr,
                            const RunOptions& opts, std::size_t max_members = 2000);

struct SoundnessStep {
  std::string config_id;
  std::size_t target_index = 0;
  int t = 0;
  std::size_t grid_points = 0;
  std::size_t members = 0;
  std::size_t violations = 0;
};

struct SoundnessReport {
  std::vector<SoundnessStep> steps;
  std::size_t total_violations() const;
};

/// Grid check of every step of every configuration and target over the backreach chain boxes.
/// `shrink_pct` > 0 shrinks each BPOA about its center first (negative control).
SoundnessReport soundness(const ExperimentConfig& cfg, const FeedforwardNetwork& net, double shrink_pct = 0.0);

// Command entry points; each writes into cfg.output_dir.
std::vector<ConfigResult> cmd_run(const ExperimentConfig& cfg, const RunOptions& opts);
std::vector<ConfigResult> cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts);
SoundnessReport cmd_soundness(const ExperimentConfig& cfg, const RunOptions& opts);

nlohmann::json rect_to_json(const HyperRect& r);
HyperRect rect_from_json(const nlohmann::json& j);

}  // namespace hybreach
