#pragma once

#include "hybreach/geometry.hpp"
#include "hybreach/network.hpp"

#include <vector>

namespace hybreach {

/// Discrete-time plant x' = A x + B u + c on the operating region `state_region`
/// with control limits `control_region`.
struct LtiSystem {
  Matrix A;
  Matrix B;
  Vector c;
  HyperRect state_region;
  HyperRect control_region;
  double dt = 1.0;

  LtiSystem(Matrix A, Matrix B, Vector c, HyperRect state_region, HyperRect control_region, double dt = 1.0);

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index control_dim() const { return B.cols(); }
};

/// Double integrator with unit sampling time and zero offset.
LtiSystem double_integrator(HyperRect state_region, HyperRect control_region);

Vector step(const LtiSystem& sys, const Vector& x, const Vector& u);
Vector closed_loop_step(const LtiSystem& sys, const FeedforwardNetwork& net, const Vector& x);

/// [x0, p(x0), ..., p^n(x0)].
std::vector<Vector> rollout(const LtiSystem& sys, const FeedforwardNetwork& net, const Vector& x0, int steps);

}  // namespace hybreach
