#include "hybreach/reach.hpp"

#include "hybreach/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace hybreach {

std::string_view to_string(BrspStrategy s) { return s == BrspStrategy::Uniform ? "uniform" : "guided"; }
std::string_view to_string(SetMode m) { return m == SetMode::Axis ? "axis" : "rotated2d"; }

BrspStrategy brsp_strategy_from_string(std::string_view s) {
  if (s == "uniform") return BrspStrategy::Uniform;
  if (s == "guided") return BrspStrategy::Guided;
  throw Error(ErrorKind::Parse, "unknown BRSP strategy '" + std::string(s) + "'");
}

SetMode set_mode_from_string(std::string_view s) {
  if (s == "axis") return SetMode::Axis;
  if (s == "rotated2d") return SetMode::Rotated2d;
  throw Error(ErrorKind::Parse, "unknown set mode '" + std::string(s) + "'");
}

double StateSet::area() const { return rotated ? rotated->area() : volume(box); }

const StateSet* ElementHistory::bpoa(int t) const {
  if (t == 0) return &target_set_;
  const auto i = static_cast<std::size_t>(-t - 1);
  if (t > 0 || i >= steps.size() || !steps[i].bpoa) return nullptr;
  return &*steps[i].bpoa;
}

const AffineBounds* ElementHistory::policy_bounds(int t) const {
  const auto i = static_cast<std::size_t>(-t - 1);
  if (t >= 0 || i >= steps.size() || !steps[i].policy_bounds) return nullptr;
  return &*steps[i].policy_bounds;
}

bool ElementHistory::terminated() const { return !steps.empty() && !steps.back().bpoa; }

std::vector<HyperRect> BpoaRun::aggregate(int t) const {
  std::vector<HyperRect> out;
  for (const auto& e : elements) {
    if (const auto* s = e.bpoa(t)) out.push_back(s->box);
  }
  return out;
}

std::vector<StateSet> BpoaRun::aggregate_sets(int t) const {
  std::vector<StateSet> out;
  for (const auto& e : elements) {
    if (const auto* s = e.bpoa(t)) out.push_back(*s);
  }
  return out;
}

std::optional<HyperRect> BpoaRun::aggregate_bounds(int t) const {
  const auto boxes = aggregate(t);
  if (boxes.empty()) return std::nullopt;
  return bounding_rect(boxes);
}

std::optional<RotatedRect> BpoaRun::aggregate_rotated(int t) const {
  const auto sets = aggregate_sets(t);
  if (sets.empty() || target.dim() != 2) return std::nullopt;
  std::vector<Point2> pts;
  for (const auto& s : sets) {
    if (s.rotated) {
      for (const auto& c : s.rotated->corners()) pts.push_back(c);
    } else {
      for (const auto& c : s.box.corners()) pts.emplace_back(c[0], c[1]);
    }
  }
  return min_area_rotated_rect(std::span<const Point2>(pts));
}

double BpoaRun::aggregate_area(int t) const {
  if (params.mode == SetMode::Rotated2d) {
    const auto r = aggregate_rotated(t);
    return r ? r->area() : 0.0;
  }
  const auto b = aggregate_bounds(t);
  return b ? volume(*b) : 0.0;
}

namespace {

void require_state_dim(const LtiSystem& sys, Eigen::Index dim, const char* what) {
  if (dim != sys.state_dim()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has dimension " + std::to_string(dim) +
                                                  ", system state dimension is " + std::to_string(sys.state_dim()));
  }
}

// Solves min and max of each coordinate of the variables starting at `first`; the problem's
// objective is overwritten. All 2*dim LPs are always solved. The result is empty when no LP
// finds a feasible point; an isolated failure falls back to the boxed variable's own bound.
std::optional<HyperRect> coordinate_extents(LpProblem& lp, Eigen::Index first, Eigen::Index dim,
                                            const HyperRect& fallback, std::size_t& lp_counter,
                                            std::size_t& failure_counter) {
  Vector lo(dim);
  Vector hi(dim);
  std::vector<std::pair<Eigen::Index, Sense>> failed;
  bool any_optimal = false;
  for (Eigen::Index k = 0; k < dim; ++k) {
    for (const Sense sense : {Sense::Minimize, Sense::Maximize}) {
      Vector obj = Vector::Zero(lp.num_vars());
      obj[first + k] = 1.0;
      lp.set_objective(std::move(obj), sense);
      const LpSolution sol = solve(lp);
      ++lp_counter;
      if (sol.status == LpStatus::Optimal) {
        any_optimal = true;
        (sense == Sense::Minimize ? lo : hi)[k] = sol.value;
      } else {
        failed.emplace_back(k, sense);
      }
    }
  }
  if (!any_optimal) return std::nullopt;
  for (const auto& [k, sense] : failed) {
    ++failure_counter;
    if (sense == Sense::Minimize) {
      lo[k] = fallback.lower()[k];
    } else {
      hi[k] = fallback.upper()[k];
    }
  }
  // Optimal values may cross by round-off on thin sets.
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (lo[k] > hi[k]) lo[k] = hi[k] = 0.5 * (lo[k] + hi[k]);
  }
  return HyperRect(std::move(lo), std::move(hi));
}

// Adds constraints placing A x + B u + c (x at x_col, u at u_col) inside `next`.
void constrain_image(LpProblem& lp, const LtiSystem& sys, Eigen::Index x_col, Eigen::Index u_col,
                     const StateSet& next) {
  const auto nx = sys.state_dim();
  const auto nu = sys.control_dim();
  const auto nv = lp.num_vars();
  for (Eigen::Index k = 0; k < nx; ++k) {
    Vector row = Vector::Zero(nv);
    row.segment(x_col, nx) = sys.A.row(k).transpose();
    row.segment(u_col, nu) = sys.B.row(k).transpose();
    lp.add_constraint(row, Relation::LessEqual, next.box.upper()[k] - sys.c[k]);
    lp.add_constraint(std::move(row), Relation::GreaterEqual, next.box.lower()[k] - sys.c[k]);
  }
  if (next.rotated) {
    Eigen::Matrix<double, 4, 2> normals;
    Eigen::Vector4d offsets;
    next.rotated->halfspaces(normals, offsets);
    for (int i = 0; i < 4; ++i) {
      const Vector n = normals.row(i).transpose();
      Vector row = Vector::Zero(nv);
      row.segment(x_col, nx) = sys.A.transpose() * n;
      row.segment(u_col, nu) = sys.B.transpose() * n;
      lp.add_constraint(std::move(row), Relation::LessEqual, offsets[i] - n.dot(sys.c));
    }
  }
}

void constrain_rotated(LpProblem& lp, Eigen::Index x_col, const RotatedRect& rect) {
  Eigen::Matrix<double, 4, 2> normals;
  Eigen::Vector4d offsets;
  rect.halfspaces(normals, offsets);
  for (int i = 0; i < 4; ++i) {
    Vector row = Vector::Zero(lp.num_vars());
    row.segment(x_col, 2) = normals.row(i).transpose();
    lp.add_constraint(std::move(row), Relation::LessEqual, offsets[i]);
  }
}

void set_box_bounds(LpProblem& lp, Eigen::Index first, const HyperRect& box) {
  for (Eigen::Index k = 0; k < box.dim(); ++k) lp.set_bounds(first + k, box.lower()[k], box.upper()[k]);
}

// Splits `rect` in half along its longest edge (lowest dimension on ties).
std::pair<HyperRect, HyperRect> bisect(const HyperRect& rect) {
  Eigen::Index axis = 0;
  rect.widths().maxCoeff(&axis);
  const double mid = 0.5 * (rect.lower()[axis] + rect.upper()[axis]);
  Vector upper_a = rect.upper();
  Vector lower_b = rect.lower();
  upper_a[axis] = mid;
  lower_b[axis] = mid;
  return {HyperRect(rect.lower(), upper_a), HyperRect(lower_b, rect.upper())};
}

bool attains_face(const HyperRect& box, const HyperRect& hull) {
  for (Eigen::Index k = 0; k < box.dim(); ++k) {
    const double tol = 1e-9 * (1.0 + std::abs(hull.lower()[k]) + std::abs(hull.upper()[k]));
    if (box.lower()[k] <= hull.lower()[k] + tol || box.upper()[k] >= hull.upper()[k] - tol) return true;
  }
  return false;
}

std::vector<HyperRect> guided_partition(const HyperRect& br_set, const ElementHistory& hist,
                                        const LtiSystem& sys, const FeedforwardNetwork& net, int t,
                                        const PartitionParams& params, LpTally& tally) {
  std::vector<HyperRect> elements{br_set};
  std::vector<std::optional<HyperRect>> boxes;
  auto evaluate = [&](const HyperRect& region) {
    return trajectory_bpoa(sys, hist, t, region, crown_bounds(net, region), tally.auxiliary, tally.failures);
  };
  boxes.push_back(evaluate(br_set));

  while (static_cast<int>(elements.size()) < params.br_budget) {
    std::vector<HyperRect> feasible;
    for (const auto& b : boxes) {
      if (b) feasible.push_back(*b);
    }
    if (feasible.empty()) break;
    const HyperRect hull = bounding_rect(feasible);

    // Split the largest element whose backprojection touches a face of the current hull.
    std::optional<std::size_t> pick;
    double pick_volume = -1.0;
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (!boxes[i] || !attains_face(*boxes[i], hull)) continue;
      const double v = volume(elements[i]);
      if (v < params.min_volume || elements[i].widths().maxCoeff() <= 0.0) continue;
      if (v > pick_volume) {
        pick = i;
        pick_volume = v;
      }
    }
    if (!pick) break;

    auto [first, second] = bisect(elements[*pick]);
    auto first_box = evaluate(first);
    auto second_box = evaluate(second);
    elements[*pick] = std::move(first);
    boxes[*pick] = std::move(first_box);
    elements.push_back(std::move(second));
    boxes.push_back(std::move(second_box));
  }
  return elements;
}

}  // namespace

std::optional<HyperRect> backreach(const LtiSystem& sys, const StateSet& next, LpTally* tally) {
  require_state_dim(sys, next.box.dim(), "backreach target");
  const auto nx = sys.state_dim();
  const auto nu = sys.control_dim();
  LpProblem lp(nx + nu);
  set_box_bounds(lp, 0, sys.state_region);
  set_box_bounds(lp, nx, sys.control_region);
  constrain_image(lp, sys, 0, nx, next);

  LpTally local;
  auto out = coordinate_extents(lp, 0, nx, sys.state_region, local.auxiliary, local.failures);
  if (tally) *tally += local;
  return out;
}

std::optional<HyperRect> backreach(const LtiSystem& sys, const HyperRect& next, LpTally* tally) {
  return backreach(sys, StateSet{next, std::nullopt}, tally);
}

std::vector<HyperRect> backreach_chain(const LtiSystem& sys, const HyperRect& target, int horizon) {
  std::vector<HyperRect> chain;
  HyperRect next = target;
  for (int i = 0; i < horizon; ++i) {
    auto r = backreach(sys, next);
    if (!r) break;
    chain.push_back(*r);
    next = *r;
  }
  return chain;
}

std::vector<HyperRect> tsp(const HyperRect& target, std::span<const int> counts) {
  return uniform_partition(target, counts);
}

std::vector<int> uniform_grid_counts(int budget, Eigen::Index dim) {
  if (budget < 1 || dim < 1) throw Error(ErrorKind::InvalidArgument, "uniform grid needs budget >= 1");
  int base = 1;
  while (std::pow(static_cast<double>(base + 1), static_cast<double>(dim)) <= budget) ++base;
  std::vector<int> counts(static_cast<std::size_t>(dim), base);
  auto product = [&] {
    long p = 1;
    for (int c : counts) p *= c;
    return p;
  };
  for (auto& c : counts) {
    ++c;
    if (product() > budget) {
      --c;
      break;
    }
  }
  return counts;
}

std::optional<HyperRect> trajectory_bpoa(const LtiSystem& sys, const ElementHistory& hist, int t,
                                         const HyperRect& partition, const AffineBounds& partition_bounds,
                                         std::size_t& lp_counter, std::size_t& failure_counter) {
  if (t >= 0) throw Error(ErrorKind::InvalidArgument, "trajectory_bpoa needs t < 0");
  require_state_dim(sys, partition.dim(), "partition element");
  const auto nx = sys.state_dim();
  const auto nu = sys.control_dim();
  const auto steps = static_cast<Eigen::Index>(-t);
  const auto stride = nx + nu;
  const auto x_col = [&](Eigen::Index i) { return i * stride; };
  const auto u_col = [&](Eigen::Index i) { return i * stride + nx; };

  LpProblem lp(steps * stride + nx);
  for (Eigen::Index i = 0; i <= steps; ++i) {
    const int tt = t + static_cast<int>(i);
    if (i == 0) {
      set_box_bounds(lp, x_col(0), partition);
      continue;
    }
    const StateSet* upstream = hist.bpoa(tt);
    if (!upstream) throw Error(ErrorKind::InvalidArgument, "missing upstream set at t=" + std::to_string(tt));
    set_box_bounds(lp, x_col(i), upstream->box);
    if (upstream->rotated) constrain_rotated(lp, x_col(i), *upstream->rotated);
  }

  for (Eigen::Index i = 0; i < steps; ++i) {
    const int tt = t + static_cast<int>(i);
    const AffineBounds* bounds = i == 0 ? &partition_bounds : hist.policy_bounds(tt);
    if (!bounds) throw Error(ErrorKind::InvalidArgument, "missing policy bounds at t=" + std::to_string(tt));

    // lower(x) <= u <= upper(x)
    for (Eigen::Index j = 0; j < nu; ++j) {
      Vector up = Vector::Zero(lp.num_vars());
      up[u_col(i) + j] = 1.0;
      up.segment(x_col(i), nx) = -bounds->upper_weights.row(j).transpose();
      lp.add_constraint(std::move(up), Relation::LessEqual, bounds->upper_bias[j]);
      Vector low = Vector::Zero(lp.num_vars());
      low[u_col(i) + j] = 1.0;
      low.segment(x_col(i), nx) = -bounds->lower_weights.row(j).transpose();
      lp.add_constraint(std::move(low), Relation::GreaterEqual, bounds->lower_bias[j]);
    }
    // x_{i+1} = A x_i + B u_i + c
    for (Eigen::Index k = 0; k < nx; ++k) {
      Vector row = Vector::Zero(lp.num_vars());
      row[x_col(i + 1) + k] = 1.0;
      row.segment(x_col(i), nx) -= sys.A.row(k).transpose();
      row.segment(u_col(i), nu) -= sys.B.row(k).transpose();
      lp.add_constraint(std::move(row), Relation::Equal, sys.c[k]);
    }
  }

  return coordinate_extents(lp, x_col(0), nx, partition, lp_counter, failure_counter);
}

std::vector<HyperRect> brsp(const HyperRect& br_set, const ElementHistory& hist, const LtiSystem& sys,
                            const FeedforwardNetwork& net, int t, const PartitionParams& params, LpTally* tally) {
  if (params.br_budget < 1) throw Error(ErrorKind::InvalidArgument, "BRSP budget must be >= 1");
  if (params.br_budget == 1) return {br_set};
  if (params.strategy == BrspStrategy::Uniform) {
    const auto counts = uniform_grid_counts(params.br_budget, br_set.dim());
    return uniform_partition(br_set, counts);
  }
  LpTally local;
  auto out = guided_partition(br_set, hist, sys, net, t, params, local);
  if (tally) *tally += local;
  return out;
}

void bpoa_element_step(const LtiSystem& sys, const FeedforwardNetwork& net, ElementHistory& hist, int t,
                       const HyperRect& br_set, std::span<const HyperRect> partitions, SetMode mode,
                       LpTally* tally) {
  if (static_cast<int>(hist.steps.size()) != -t - 1) {
    throw Error(ErrorKind::InvalidArgument, "element history is not at step " + std::to_string(t + 1));
  }
  if (mode == SetMode::Rotated2d && sys.state_dim() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "rotated-rectangle mode needs a 2D state");
  }
  LpTally local;
  StepRecord rec;
  rec.t = t;
  rec.br_set = br_set;
  std::vector<HyperRect> contributing;
  for (const auto& region : partitions) {
    auto box = trajectory_bpoa(sys, hist, t, region, crown_bounds(net, region), local.trajectory, local.failures);
    if (box) contributing.push_back(*box);
    rec.partitions.push_back({region, std::move(box)});
  }

  if (!contributing.empty()) {
    StateSet set{bounding_rect(contributing), std::nullopt};
    if (mode == SetMode::Rotated2d) {
      std::vector<Point2> pts;
      for (const auto& b : contributing) {
        for (const auto& c : b.corners()) pts.emplace_back(c[0], c[1]);
      }
      set.rotated = min_area_rotated_rect(std::span<const Point2>(pts));
    }
    rec.policy_bounds = crown_bounds(net, set.box);
    rec.bpoa = std::move(set);
  }
  hist.steps.push_back(std::move(rec));
  if (tally) *tally += local;
}

namespace {

void run_element(const LtiSystem& sys, const FeedforwardNetwork& net, int horizon, const PartitionParams& params,
                 ElementHistory& hist, LpTally& tally) {
  for (int t = -1; t >= -horizon; --t) {
    const StateSet* next = hist.bpoa(t + 1);
    auto br_set = backreach(sys, *next, &tally);
    if (!br_set) {
      StepRecord rec;
      rec.t = t;
      hist.steps.push_back(std::move(rec));
      return;
    }
    const auto partitions = brsp(*br_set, hist, sys, net, t, params, &tally);
    bpoa_element_step(sys, net, hist, t, *br_set, partitions, params.mode, &tally);
    if (hist.terminated()) return;
  }
}

}  // namespace

BpoaRun hybreach_lp_plus(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target,
                         int horizon, const PartitionParams& params) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 1");
  require_state_dim(sys, target.dim(), "target set");
  if (net.input_dim() != sys.state_dim() || net.output_dim() != sys.control_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "network dimensions do not match the system");
  }
  if (params.br_budget < 1) throw Error(ErrorKind::InvalidArgument, "BRSP budget must be >= 1");
  if (params.min_volume < 0.0) throw Error(ErrorKind::InvalidArgument, "minimum volume must be >= 0");
  if (params.mode == SetMode::Rotated2d && sys.state_dim() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "rotated-rectangle mode needs a 2D state");
  }

  const auto start = std::chrono::steady_clock::now();
  BpoaRun run{horizon, params, target, {}, {}, 0.0};
  for (auto& q : tsp(target, params.target_counts)) run.elements.emplace_back(std::move(q));

  std::vector<LpTally> tallies(run.elements.size());
  const auto n_elements = run.elements.size();
  const auto workers = static_cast<std::size_t>(std::clamp<long>(params.threads, 1, static_cast<long>(n_elements)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_elements; ++i) run_element(sys, net, horizon, params, run.elements[i], tallies[i]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n_elements; i += workers) {
            run_element(sys, net, horizon, params, run.elements[i], tallies[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (const auto& t : tallies) run.lps += t;
  run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::size_t lp_count(std::size_t state_dim, std::size_t br_elements, std::size_t target_elements,
                     std::size_t horizon) {
  return 2 * state_dim * br_elements * target_elements * horizon;
}

}  // namespace hybreach
