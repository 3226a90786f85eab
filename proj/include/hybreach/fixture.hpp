#pragma once

#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"

#include <cstdint>
#include <vector>

namespace hybreach {

/// Recipe for the shipped double-integrator controller. Hidden layers are drawn from a seeded
/// Gaussian; the output layer is a least-squares fit of clip(gain * x, control limits) on uniform
/// samples of the state region, then scaled so that the certified output range over the whole
/// state region lies inside the control limits.
struct PolicyRecipe {
  std::uint64_t seed = 7;
  std::vector<Eigen::Index> hidden{5, 5};
  Matrix gain;  // n_u x n_x
  HyperRect state_region;
  HyperRect control_region;
  double first_layer_scale = 0.5;
  double first_bias_scale = 1.0;
  int fit_samples = 4000;
  int certify_cells = 64;  // per dimension
};

FeedforwardNetwork make_fixture_policy(const PolicyRecipe& recipe);

/// Output range of `net` over `region` from relaxation bounds on a cells^n grid of sub-boxes.
void certified_output_range(const FeedforwardNetwork& net, const HyperRect& region, int cells, Vector& lower,
                            Vector& upper);

}  // namespace hybreach
