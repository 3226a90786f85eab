#pragma once

#include "hybreach/dynamics.hpp"
#include "hybreach/geometry.hpp"
#include "hybreach/lp.hpp"
#include "hybreach/network.hpp"
#include "hybreach/relaxation.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hybreach {

enum class BrspStrategy { Uniform, Guided };
enum class SetMode { Axis, Rotated2d };

std::string_view to_string(BrspStrategy s);
std::string_view to_string(SetMode m);
BrspStrategy brsp_strategy_from_string(std::string_view s);
SetMode set_mode_from_string(std::string_view s);

/// Partitioning configuration r = (target grid, backreachable-set budget).
struct PartitionParams {
  std::vector<int> target_counts{1, 1};
  int br_budget = 1;
  double min_volume = 0.0;  // only consulted by the guided strategy
  BrspStrategy strategy = BrspStrategy::Guided;
  SetMode mode = SetMode::Axis;
  int threads = 1;  // workers over target elements
};

/// Over-approximation of a backprojection set for one target element at one step.
/// In rotated mode the set is the intersection of `box` and `rotated`.
struct StateSet {
  HyperRect box;
  std::optional<RotatedRect> rotated;

  double area() const;
};

/// LP bookkeeping. `trajectory` counts the LPs that bound the backprojection of the final
/// partition (the quantity 2 n_x |S| |Q| tau); `auxiliary` counts backreachable-set LPs and
/// the evaluations done while refining a guided partition.
struct LpTally {
  std::size_t trajectory = 0;
  std::size_t auxiliary = 0;
  std::size_t failures = 0;

  LpTally& operator+=(const LpTally& o) {
    trajectory += o.trajectory;
    auxiliary += o.auxiliary;
    failures += o.failures;
    return *this;
  }
};

struct BrPartition {
  HyperRect region;
  std::optional<HyperRect> bpoa;  // empty when no state of the region can follow the chain
};

struct StepRecord {
  int t = -1;
  std::optional<HyperRect> br_set;
  std::vector<BrPartition> partitions;
  std::optional<StateSet> bpoa;
  std::optional<AffineBounds> policy_bounds;  // relaxation over bpoa->box, used by downstream steps
};

/// Everything computed for one target-set element. steps[i] holds t = -(i + 1); the vector
/// stops early once an element's backprojection becomes empty.
struct ElementHistory {
  HyperRect target;
  std::vector<StepRecord> steps;

  explicit ElementHistory(HyperRect target_element) : target(std::move(target_element)) {}

  /// Backprojection at time t (t = 0 gives the target element); nullptr when empty or not computed.
  const StateSet* bpoa(int t) const;
  const AffineBounds* policy_bounds(int t) const;
  bool terminated() const;

 private:
  StateSet target_set_{target, std::nullopt};
};

struct BpoaRun {
  int horizon = 0;
  PartitionParams params;
  HyperRect target;
  std::vector<ElementHistory> elements;
  LpTally lps;
  double wall_time_s = 0.0;

  std::size_t lp_count() const { return lps.trajectory; }

  /// Per-element boxes at step t (the union is kept as a collection).
  std::vector<HyperRect> aggregate(int t) const;
  std::vector<StateSet> aggregate_sets(int t) const;
  std::optional<HyperRect> aggregate_bounds(int t) const;
  std::optional<RotatedRect> aggregate_rotated(int t) const;

  /// Area of the aggregate in the run's set representation (0 if empty).
  double aggregate_area(int t) const;
};

/// Box around all states that reach `next` in one step under some admissible control.
/// Empty when no state in the operating region can reach it.
std::optional<HyperRect> backreach(const LtiSystem& sys, const HyperRect& next, LpTally* tally = nullptr);
std::optional<HyperRect> backreach(const LtiSystem& sys, const StateSet& next, LpTally* tally = nullptr);

/// Backreachable boxes for steps -1..-horizon with controls relaxed to the control limits.
std::vector<HyperRect> backreach_chain(const LtiSystem& sys, const HyperRect& target, int horizon);

std::vector<HyperRect> tsp(const HyperRect& target, std::span<const int> counts);

/// Per-dimension grid for the uniform strategy: the largest near-cubic grid with at most `budget` cells.
std::vector<int> uniform_grid_counts(int budget, Eigen::Index dim);

/// Joint LP over the suffix trajectory from a partition element at step t to the target element.
/// Returns the box of feasible x_t, or empty when the chain is infeasible.
std::optional<HyperRect> trajectory_bpoa(const LtiSystem& sys, const ElementHistory& hist, int t,
                                         const HyperRect& partition, const AffineBounds& partition_bounds,
                                         std::size_t& lp_counter, std::size_t& failure_counter);

std::vector<HyperRect> brsp(const HyperRect& br_set, const ElementHistory& hist, const LtiSystem& sys,
                            const FeedforwardNetwork& net, int t, const PartitionParams& params,
                            LpTally* tally = nullptr);

/// Computes the backprojection of `hist` at step t from the given backreachable-set partition
/// and appends the resulting step record.
void bpoa_element_step(const LtiSystem& sys, const FeedforwardNetwork& net, ElementHistory& hist, int t,
                       const HyperRect& br_set, std::span<const HyperRect> partitions, SetMode mode,
                       LpTally* tally = nullptr);

BpoaRun hybreach_lp_plus(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target,
                         int horizon, const PartitionParams& params);

/// Number of LPs for one run without early termination: 2 n_x |S| |Q| tau.
std::size_t lp_count(std::size_t state_dim, std::size_t br_elements, std::size_t target_elements,
                     std::size_t horizon);

}  // namespace hybreach
