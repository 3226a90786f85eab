#include "hybreach/lp.hpp"

#include "hybreach/error.hpp"

#include <algorithm>
#include <cmath>

namespace hybreach {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

LpProblem::LpProblem(Eigen::Index num_vars)
    : num_vars_(num_vars),
      objective_(Vector::Zero(num_vars)),
      lower_(Vector::Constant(num_vars, -kInfinity)),
      upper_(Vector::Constant(num_vars, kInfinity)) {
  if (num_vars < 1) throw Error(ErrorKind::InvalidArgument, "LP needs at least one variable");
}

void LpProblem::set_objective(Vector coefficients, Sense sense) {
  if (coefficients.size() != num_vars_) throw Error(ErrorKind::DimensionMismatch, "objective length");
  if (!coefficients.allFinite()) throw Error(ErrorKind::NonFinite, "objective coefficients");
  objective_ = std::move(coefficients);
  sense_ = sense;
}

void LpProblem::add_constraint(Vector coefficients, Relation relation, double rhs) {
  if (coefficients.size() != num_vars_) throw Error(ErrorKind::DimensionMismatch, "constraint length");
  if (!coefficients.allFinite() || !std::isfinite(rhs)) throw Error(ErrorKind::NonFinite, "constraint data");
  constraints_.push_back({std::move(coefficients), relation, rhs});
}

void LpProblem::set_bounds(Eigen::Index var, double lo, double hi) {
  if (var < 0 || var >= num_vars_) throw Error(ErrorKind::InvalidArgument, "variable index out of range");
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw Error(ErrorKind::InvalidArgument, "variable bounds");
  lower_[var] = lo;
  upper_[var] = hi;
}

double LpProblem::max_violation(const Vector& point) const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < num_vars_; ++j) {
    worst = std::max({worst, lower_[j] - point[j], point[j] - upper_[j]});
  }
  for (const auto& con : constraints_) {
    const double lhs = con.coefficients.dot(point);
    switch (con.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - con.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, con.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - con.rhs)); break;
    }
  }
  return worst;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr int kDegenerateRunBeforeBland = 50;

// x_j = offset + sum_k sign_k * y_{col_k}, y >= 0.
struct VariableMap {
  double offset = 0.0;
  int col = -1;
  double sign = 1.0;
  int neg_col = -1;  // free variables are split as y+ - y-
};

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(RowMatrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double rhs(Eigen::Index r) const { return t_(r, cols()); }
  double& rhs(Eigen::Index r) { return t_(r, cols()); }
  int basic(Eigen::Index r) const { return basis_[static_cast<std::size_t>(r)]; }
  void set_basic(Eigen::Index r, int c) { basis_[static_cast<std::size_t>(r)] = c; }
  auto cost_row() { return t_.row(rows()); }
  auto row(Eigen::Index r) { return t_.row(r); }

  // Objective value is stored negated in the corner cell.
  double objective() const { return -t_(rows(), cols()); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_(r, c) = 1.0;
    basis_[static_cast<std::size_t>(r)] = static_cast<int>(c);
  }

  // Rebuilds the cost row as reduced costs of `cost` with respect to the current basis.
  void price(const Vector& cost) {
    auto z = cost_row();
    z.setZero();
    z.head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double cb = cost[basic(i)];
      if (cb != 0.0) z -= cb * t_.row(i);
    }
  }

  PhaseResult run(const std::vector<bool>& blocked, long max_iter) {
    int degenerate_run = 0;
    bool bland = false;
    for (long iter = 0; iter < max_iter; ++iter) {
      Eigen::Index enter = -1;
      double best = -kCostTol;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (blocked[static_cast<std::size_t>(j)]) continue;
        const double d = t_(rows(), j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return PhaseResult::Optimal;

      Eigen::Index leave = -1;
      double ratio = 0.0;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = std::max(rhs(i), 0.0) / a;
        if (leave < 0 || r < ratio - 1e-12 || (r <= ratio + 1e-12 && basic(i) < basic(leave))) {
          leave = i;
          ratio = r;
        }
      }
      if (leave < 0) return PhaseResult::Unbounded;

      if (ratio <= kPivotTol) {
        if (++degenerate_run > kDegenerateRunBeforeBland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(leave, enter);
    }
    return PhaseResult::IterationLimit;
  }

 private:
  RowMatrix t_;
  std::vector<int> basis_;
};

}  // namespace

LpSolution solve(const LpProblem& problem) {
  const auto n = problem.num_vars();
  const Vector& lo = problem.lower_bounds();
  const Vector& hi = problem.upper_bounds();

  // Shift/split variables into nonnegative columns.
  std::vector<VariableMap> vars(static_cast<std::size_t>(n));
  int ny = 0;
  std::vector<std::pair<int, double>> bound_rows;  // y_col <= width
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& v = vars[static_cast<std::size_t>(j)];
    if (std::isfinite(lo[j])) {
      v = {lo[j], ny++, 1.0, -1};
      if (std::isfinite(hi[j])) bound_rows.emplace_back(v.col, hi[j] - lo[j]);
    } else if (std::isfinite(hi[j])) {
      v = {hi[j], ny++, -1.0, -1};
    } else {
      v.offset = 0.0;
      v.col = ny++;
      v.sign = 1.0;
      v.neg_col = ny++;
    }
  }

  struct Row {
    Vector coef;
    Relation rel;
    double rhs;
  };
  std::vector<Row> rows;
  rows.reserve(problem.constraints().size() + bound_rows.size());
  for (const auto& con : problem.constraints()) {
    Row r{Vector::Zero(ny), con.relation, con.rhs};
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = con.coefficients[j];
      if (a == 0.0) continue;
      const auto& v = vars[static_cast<std::size_t>(j)];
      r.rhs -= a * v.offset;
      r.coef[v.col] += a * v.sign;
      if (v.neg_col >= 0) r.coef[v.neg_col] -= a;
    }
    rows.push_back(std::move(r));
  }
  for (const auto& [col, width] : bound_rows) {
    Row r{Vector::Zero(ny), Relation::LessEqual, width};
    r.coef[col] = 1.0;
    rows.push_back(std::move(r));
  }

  // Nonnegative right-hand sides, then slack / surplus / artificial columns.
  int n_slack = 0;
  int n_art = 0;
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      r.coef = -r.coef;
      r.rhs = -r.rhs;
      if (r.rel == Relation::LessEqual) {
        r.rel = Relation::GreaterEqual;
      } else if (r.rel == Relation::GreaterEqual) {
        r.rel = Relation::LessEqual;
      }
    }
    if (r.rel != Relation::Equal) ++n_slack;
    if (r.rel != Relation::LessEqual) ++n_art;
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  const int total = ny + n_slack + n_art;
  Tableau tab(m, total);
  std::vector<bool> is_art(static_cast<std::size_t>(total), false);
  {
    int slack = ny;
    int art = ny + n_slack;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& r = rows[static_cast<std::size_t>(i)];
      for (int j = 0; j < ny; ++j) tab.at(i, j) = r.coef[j];
      tab.rhs(i) = r.rhs;
      if (r.rel == Relation::LessEqual) {
        tab.at(i, slack) = 1.0;
        tab.set_basic(i, slack++);
      } else {
        if (r.rel == Relation::GreaterEqual) tab.at(i, slack++) = -1.0;
        tab.at(i, art) = 1.0;
        is_art[static_cast<std::size_t>(art)] = true;
        tab.set_basic(i, art++);
      }
    }
  }

  const long max_iter = 100L * (m + total) + 1000;
  LpSolution out;

  if (n_art > 0) {
    Vector phase1_cost = Vector::Zero(total);
    double rhs_scale = 1.0;
    for (int j = 0; j < total; ++j) {
      if (is_art[static_cast<std::size_t>(j)]) phase1_cost[j] = 1.0;
    }
    for (Eigen::Index i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(tab.rhs(i)));
    tab.price(phase1_cost);
    std::vector<bool> none(static_cast<std::size_t>(total), false);
    if (tab.run(none, max_iter) != PhaseResult::Optimal) return out;
    if (tab.objective() > 1e-9 * rhs_scale * static_cast<double>(m)) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive remaining (zero-level) artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!is_art[static_cast<std::size_t>(tab.basic(i))]) continue;
      Eigen::Index best = -1;
      double best_abs = kPivotTol;
      for (int j = 0; j < total; ++j) {
        if (is_art[static_cast<std::size_t>(j)]) continue;
        const double a = std::abs(tab.at(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best >= 0) tab.pivot(i, best);
    }
  }

  // Phase 2 on the original objective expressed in y.
  const double sign = problem.sense() == Sense::Maximize ? -1.0 : 1.0;
  Vector cost = Vector::Zero(total);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cj = sign * problem.objective()[j];
    if (cj == 0.0) continue;
    const auto& v = vars[static_cast<std::size_t>(j)];
    cost[v.col] += cj * v.sign;
    if (v.neg_col >= 0) cost[v.neg_col] -= cj;
  }
  tab.price(cost);
  switch (tab.run(is_art, max_iter)) {
    case PhaseResult::Optimal: break;
    case PhaseResult::Unbounded: out.status = LpStatus::Unbounded; return out;
    case PhaseResult::IterationLimit: return out;
  }

  Vector y = Vector::Zero(total);
  for (Eigen::Index i = 0; i < m; ++i) y[tab.basic(i)] = std::max(tab.rhs(i), 0.0);
  Vector x(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    x[j] = v.offset + v.sign * y[v.col];
    if (v.neg_col >= 0) x[j] -= y[v.neg_col];
    // Snap round-off back into finite variable bounds.
    x[j] = std::clamp(x[j], lo[j], hi[j]);
  }
  if (!x.allFinite() || problem.max_violation(x) > kLpFeasibilityTol) return out;

  out.status = LpStatus::Optimal;
  out.point = std::move(x);
  out.value = problem.objective().dot(out.point);
  return out;
}

}  // namespace hybreach
