#include "hybreach/oracle.hpp"

#include "hybreach/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace hybreach {

namespace {

constexpr std::size_t kChunk = 4096;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Vector> sample_chunk(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target,
                                 int steps, const HyperRect& region, std::size_t count, std::uint64_t seed,
                                 std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<Vector> members;
  const Vector width = region.widths();
  Vector x(region.dim());
  for (std::size_t i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = region.lower()[k] + unit_uniform(rng) * width[k];
    if (reaches_target(sys, net, target, steps, x)) members.push_back(x);
  }
  return members;
}

}  // namespace

bool reaches_target(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target, int steps,
                    const Vector& x) {
  Vector state = x;
  for (int i = 0; i < steps; ++i) {
    if (!contains(sys.state_region, state, 0.0)) return false;
    state = closed_loop_step(sys, net, state);
  }
  return contains(target, state, 0.0);
}

BpEstimate mc_true_bp(const LtiSystem& sys, const FeedforwardNetwork& net, const HyperRect& target, int t,
                      const HyperRect& sample_region, std::size_t n_samples, std::uint64_t seed, int threads) {
  if (t >= 0) throw Error(ErrorKind::InvalidArgument, "mc_true_bp needs t < 0");
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "mc_true_bp needs n_samples >= 1");
  if (sample_region.dim() != sys.state_dim() || target.dim() != sys.state_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "mc_true_bp: region/target dimension");
  }

  const std::size_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<std::vector<Vector>> found(n_chunks);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < n_chunks; c += stride) {
      const std::size_t count = std::min(kChunk, n_samples - c * kChunk);
      found[c] = sample_chunk(sys, net, target, -t, sample_region, count, seed, c);
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(n_chunks)));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  BpEstimate est;
  est.samples_used = n_samples;
  est.seed = seed;
  for (auto& chunk : found) {
    for (auto& p : chunk) est.members.push_back(std::move(p));
  }
  if (est.members.empty()) return est;

  Vector lo = est.members.front();
  Vector hi = est.members.front();
  for (const auto& p : est.members) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  est.tight_box = HyperRect(lo, hi);
  est.area_axis = volume(*est.tight_box);
  if (sys.state_dim() == 2) {
    est.tight_rotated = min_area_rotated_rect(std::span<const Vector>(est.members));
    est.area_rotated = est.tight_rotated->area();
  }
  return est;
}

double pitch_for_points(const HyperRect& region, std::size_t min_points) {
  if (min_points < 1) throw Error(ErrorKind::InvalidArgument, "pitch_for_points needs min_points >= 1");
  const Vector w = region.widths();
  double vol = 1.0;
  int active = 0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) {
      vol *= w[k];
      ++active;
    }
  }
  if (active == 0) return 1.0;
  double pitch = std::pow(vol / static_cast<double>(min_points), 1.0 / active);
  auto points = [&](double p) {
    double n = 1.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) n *= std::floor(w[k] / p) + 1.0;
    return n;
  };
  while (points(pitch) < static_cast<double>(min_points)) pitch *= 0.99;
  return pitch;
}

std::vector<SoundnessViolation> grid_soundness_check(const LtiSystem& sys, const FeedforwardNetwork& net,
                                                     const HyperRect& target, int t, const HyperRect& region,
                                                     double pitch, const std::function<bool(const Vector&)>& covered,
                                                     std::size_t* members_found) {
  if (!(pitch > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid pitch must be > 0");
  if (t >= 0) throw Error(ErrorKind::InvalidArgument, "grid_soundness_check needs t < 0");
  const auto n = region.dim();
  std::vector<long> counts(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    counts[static_cast<std::size_t>(k)] = static_cast<long>(std::floor(region.widths()[k] / pitch)) + 1;
  }

  std::vector<SoundnessViolation> violations;
  std::size_t members = 0;
  std::vector<long> index(static_cast<std::size_t>(n), 0);
  Vector x(n);
  while (true) {
    for (Eigen::Index k = 0; k < n; ++k) {
      x[k] = std::min(region.lower()[k] + pitch * static_cast<double>(index[static_cast<std::size_t>(k)]),
                      region.upper()[k]);
    }
    if (reaches_target(sys, net, target, -t, x)) {
      ++members;
      if (!covered(x)) violations.push_back({x, t});
    }
    std::size_t k = 0;
    for (; k < index.size(); ++k) {
      if (++index[k] < counts[k]) break;
      index[k] = 0;
    }
    if (k == index.size()) break;
  }
  if (members_found) *members_found = members;
  return violations;
}

std::vector<SoundnessViolation> grid_soundness_check(const LtiSystem& sys, const FeedforwardNetwork& net,
                                                     const HyperRect& target, int t, const HyperRect& region,
                                                     double pitch, std::span<const HyperRect> bpoa, double tol,
                                                     std::size_t* members_found) {
  auto covered = [&](const Vector& x) {
    return std::any_of(bpoa.begin(), bpoa.end(), [&](const HyperRect& b) { return contains(b, x, tol); });
  };
  return grid_soundness_check(sys, net, target, t, region, pitch, covered, members_found);
}

double error_metric(double area_bpoa, double area_true) {
  if (!(area_true > 0.0)) throw Error(ErrorKind::Undefined, "error metric needs a positive true area");
  return (area_bpoa - area_true) / area_true;
}

}  // namespace hybreach
