#pragma once

#include "hybreach/dynamics.hpp"
#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hybreach {

/// True iff the closed-loop rollout from x lands in `target` after `steps` steps while every
/// state before the last stays in the system's operating region.
bool reaches_target(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target, int steps,
                    const Vector& x);

/// Monte Carlo estimate of the backprojection set at a negative step.
struct BpEstimate {
  std::vector<Vector> members;
  std::optional<HyperRect> tight_box;
  std::optional<RotatedRect> tight_rotated;  // 2D only
  double area_axis = 0.0;
  double area_rotated = 0.0;
  std::size_t samples_used = 0;
  std::uint64_t seed = 0;

  bool empty() const { return members.empty(); }
};

/// Uniform samples from `sample_region` are generated in fixed-size chunks, each drawn from its own
/// engine seeded by (seed, chunk index), so results do not depend on `threads`.
BpEstimate mc_true_bp(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target, int t,
                      const HyperRect& sample_region, std::size_t n_samples, std::uint64_t seed, int threads = 1);

struct SoundnessViolation {
  Vector point;
  int t = 0;
};

/// Checks every grid point of `region` (spacing `pitch`, boundaries included) whose rollout reaches
/// the target at step -t against the union of `bpoa` boxes.
std::vector<SoundnessViolation> grid_soundness_check(const LtiSystem& sys, const FeedforwardNetwork& net,
                                                     const HyperRect& target, int t, const HyperRect& region,
                                                     double pitch, std::span<const HyperRect> bpoa,
                                                     double tol = 1e-6, std::size_t* members_found = nullptr);

/// Same walk with an arbitrary membership test for the over-approximation.
std::vector<SoundnessViolation> grid_soundness_check(const LtiSystem& sys, const FeedforwardNetwork& net,
                                                     const HyperRect& target, int t, const HyperRect& region,
                                                     double pitch, const std::function<bool(const Vector&)>& covered,
                                                     std::size_t* members_found = nullptr);

/// Pitch giving at least `min_points` grid points over `region`.
double pitch_for_points(const HyperRect& region, std::size_t min_points);

/// (area_bpoa - area_true) / area_true; throws Undefined when area_true <= 0.
double error_metric(double area_bpoa, double area_true);

}  // namespace hybreach
