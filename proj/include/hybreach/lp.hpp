#pragma once

#include "hybreach/geometry.hpp"

#include <limits>
#include <string_view>
#include <vector>

namespace hybreach {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string_view to_string(LpStatus status);

struct LinearConstraint {
  Vector coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Feasibility tolerance every Optimal point is checked against.
inline constexpr double kLpFeasibilityTol = 1e-6;

/// Dense linear program over `num_vars` variables with per-variable bounds.
class LpProblem {
 public:
  explicit LpProblem(Eigen::Index num_vars);

  Eigen::Index num_vars() const noexcept { return num_vars_; }
  const Vector& objective() const noexcept { return objective_; }
  Sense sense() const noexcept { return sense_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }
  const Vector& lower_bounds() const noexcept { return lower_; }
  const Vector& upper_bounds() const noexcept { return upper_; }

  void set_objective(Vector coefficients, Sense sense);
  void add_constraint(Vector coefficients, Relation relation, double rhs);
  void set_bounds(Eigen::Index var, double lo, double hi);

  /// Largest violation of constraints and bounds at `point` (0 when feasible).
  double max_violation(const Vector& point) const;

 private:
  Eigen::Index num_vars_;
  Vector objective_;
  Sense sense_ = Sense::Minimize;
  std::vector<LinearConstraint> constraints_;
  Vector lower_;
  Vector upper_;
};

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  double value = 0.0;
  Vector point;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Two-phase dense simplex. Deterministic: Dantzig pricing with lowest-index ties,
/// switching to Bland's rule after a run of degenerate pivots.
LpSolution solve(const LpProblem& problem);

}  // namespace hybreach
