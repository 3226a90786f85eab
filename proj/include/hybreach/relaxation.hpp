#pragma once

#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"

#include <vector>

namespace hybreach {

/// Affine sandwich lower_weights*x + lower_bias <= pi(x) <= upper_weights*x + upper_bias
/// valid for every x in `domain`.
struct AffineBounds {
  Matrix upper_weights;
  Vector upper_bias;
  Matrix lower_weights;
  Vector lower_bias;
  HyperRect domain;
  Vector output_lower;  // min of the lower plane over the domain
  Vector output_upper;  // max of the upper plane over the domain

  Vector upper_at(const Vector& x) const { return upper_weights * x + upper_bias; }
  Vector lower_at(const Vector& x) const { return lower_weights * x + lower_bias; }
};

/// Per-layer bounds on pre-activation values z^(k) = W^(k) a^(k) + b^(k).
struct PreActBounds {
  std::vector<Vector> lower;
  std::vector<Vector> upper;
};

/// Linear bounds for ReLU over [l, u]: lower_slope*z + lower_intercept <= relu(z) <= upper_slope*z + upper_intercept.
struct ReluLines {
  double upper_slope = 0.0;
  double upper_intercept = 0.0;
  double lower_slope = 0.0;
  double lower_intercept = 0.0;
};

/// Unstable neurons use the chord as upper line and slope 1 (u >= |l|) or 0 as lower line.
ReluLines relu_relaxation(double l, double u);

PreActBounds interval_propagate(const FeedforwardNetwork& net, const HyperRect& domain);

/// Backward linear bound propagation. Pre-activation bounds of every hidden layer are
/// themselves obtained with a backward pass over the truncated network. output_lower/upper
/// are intersected with interval bounds, so they are never looser than interval_propagate.
AffineBounds crown_bounds(const FeedforwardNetwork& net, const HyperRect& domain);

/// Same as crown_bounds, exposing the intermediate bounds used for the ReLU lines.
AffineBounds crown_bounds(const FeedforwardNetwork& net, const HyperRect& domain, PreActBounds& preact);

/// Range of the affine map W x + b over a box (exact, via the sign split of W).
void concretize(const Matrix& weights, const Vector& bias, const HyperRect& box, Vector& lower, Vector& upper);

}  // namespace hybreach
