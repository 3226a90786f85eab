#include "hybreach/dynamics.hpp"

#include "hybreach/error.hpp"

namespace hybreach {

LtiSystem::LtiSystem(Matrix A_, Matrix B_, Vector c_, HyperRect state_region_, HyperRect control_region_, double dt_)
    : A(std::move(A_)),
      B(std::move(B_)),
      c(std::move(c_)),
      state_region(std::move(state_region_)),
      control_region(std::move(control_region_)),
      dt(dt_) {
  const auto n = A.rows();
  if (n < 1 || A.cols() != n) throw Error(ErrorKind::DimensionMismatch, "A must be square and non-empty");
  if (B.rows() != n || B.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "B must have as many rows as A");
  if (c.size() == 0) c = Vector::Zero(n);
  if (c.size() != n) throw Error(ErrorKind::DimensionMismatch, "offset c must match the state dimension");
  if (state_region.dim() != n) throw Error(ErrorKind::DimensionMismatch, "state region dimension");
  if (control_region.dim() != B.cols()) throw Error(ErrorKind::DimensionMismatch, "control region dimension");
  if (!A.allFinite() || !B.allFinite() || !c.allFinite()) {
    throw Error(ErrorKind::NonFinite, "system matrices must be finite");
  }
}

LtiSystem double_integrator(HyperRect state_region, HyperRect control_region) {
  Matrix A(2, 2);
  A << 1.0, 1.0, 0.0, 1.0;
  Matrix B(2, 1);
  B << 0.5, 1.0;
  return LtiSystem(A, B, Vector::Zero(2), std::move(state_region), std::move(control_region), 1.0);
}

Vector step(const LtiSystem& sys, const Vector& x, const Vector& u) {
  if (x.size() != sys.state_dim() || u.size() != sys.control_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "step: state/control dimension mismatch");
  }
  return sys.A * x + sys.B * u + sys.c;
}

Vector closed_loop_step(const LtiSystem& sys, const FeedforwardNetwork& net, const Vector& x) {
  return step(sys, x, net.eval(x));
}

std::vector<Vector> rollout(const LtiSystem& sys, const FeedforwardNetwork& net, const Vector& x0, int steps) {
  if (steps < 0) throw Error(ErrorKind::InvalidArgument, "rollout needs steps >= 0");
  std::vector<Vector> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  traj.push_back(x0);
  for (int i = 0; i < steps; ++i) traj.push_back(closed_loop_step(sys, net, traj.back()));
  return traj;
}

}  // namespace hybreach
