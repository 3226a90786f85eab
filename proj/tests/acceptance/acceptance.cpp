// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "hybreach/experiment.hpp"
#include "hybreach/oracle.hpp"
#include "hybreach/reach.hpp"
#include "hybreach/relaxation.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace hybreach;
using hytest::box;
using hytest::vec;

namespace {

constexpr double kTol = 1e-6;  // LP feasibility tolerance carried into every geometric check

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix gain() {
  Matrix k(1, 2);
  k << -0.2, -0.6;
  return k;
}

const ConfigResult& by_id(const std::vector<ConfigResult>& rs, const std::string& id) {
  for (const auto& r : rs) {
    if (r.config.id == id) return r;
  }
  throw std::runtime_error("config id not found: " + id);
}

// 1. Soundness of the fixture run over the backreach chain boxes and a band around each BPOA.
void over_approximation() {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = load_config(hytest::config_dir() / "double_integrator_run.json");
  const auto net = hytest::fixture_policy();
  const auto& sys = *cfg.system;
  cfg.soundness_points = 100000;
  const auto rep = hybreach::soundness(cfg, net);
  std::size_t members = 0, min_grid = SIZE_MAX;
  for (const auto& s : rep.steps) {
    members += s.members;
    min_grid = std::min(min_grid, s.grid_points);
  }
  std::size_t violations = rep.total_violations();

  // Denser check near the over-approximation boundary, where misses would show up first.
  std::size_t band_members = 0;
  const auto params = partition_params(cfg.partitions.at(0), cfg.mode, 1);
  for (const auto& target : resolve_targets(cfg)) {
    const auto run = hybreach_lp_plus(sys, net, target, cfg.horizon, params);
    for (int t = -1; t >= -cfg.horizon; --t) {
      const auto bounds = run.aggregate_bounds(t);
      if (!bounds) continue;
      const HyperRect region = bounds->scaled(1.5);
      const auto boxes = run.aggregate(t);
      std::size_t m = 0;
      violations += grid_soundness_check(sys, net, target, t, region, pitch_for_points(region, 100000), boxes, kTol, &m).size();
      band_members += m;
    }
  }
  const double secs = seconds_since(t0);
  report(1, "soundness", violations == 0 && min_grid >= 100000 && secs < 120.0,
         fmt("%zu violations; >= %zu grid points per step; %zu chain-grid + %zu band members checked; %.1f s",
             violations, min_grid, members, band_members, secs));
}

// 2. Zero controller: one-step BPOA equals the preimage box A^-1 q (clipped to X).
void analytic_exactness() {
  const auto sys = hytest::fixture_system();
  const auto net = zero_network(2, 1, {5, 5});
  struct Case {
    HyperRect target, preimage_box;
  };
  // x = A^-1 y = (y1 - y2, y2); the second case meets the edge x1 = 10 of X.
  const std::vector<Case> cases{{box({4, -0.25}, {5, 0.25}), box({3.75, -0.25}, {5.25, 0.25})},
                                {box({9.5, -0.5}, {10, 0.5}), box({9, -0.5}, {10, 0.5})},
                                {box({-3, 1}, {-1, 2}), box({-5, 1}, {-2, 2})}};
  double worst_coord = 0.0, worst_err = 0.0;
  bool all = true;
  for (const auto& c : cases) {
    PartitionParams p;
    const auto run = hybreach_lp_plus(sys, net, c.target, 1, p);
    const auto b = run.aggregate_bounds(-1);
    if (!b) {
      all = false;
      continue;
    }
    worst_coord = std::max({worst_coord, (b->lower() - c.preimage_box.lower()).cwiseAbs().maxCoeff(),
                            (b->upper() - c.preimage_box.upper()).cwiseAbs().maxCoeff()});
    worst_err = std::max(worst_err, std::abs(error_metric(run.aggregate_area(-1), volume(c.preimage_box))));
  }
  report(2, "analytic exactness", all && worst_coord <= 1e-6 && worst_err < 1e-4,
         fmt("max coordinate gap %.3g (<= 1e-6), max |error| %.3g (< 1e-4) over %zu targets", worst_coord, worst_err,
             cases.size()));
}

// 3. Relaxation sandwich on random nets, and exactness on affine ones.
void relaxation_fuzz() {
  std::mt19937_64 rng(20240);
  double worst = 0.0;
  int nets = 0, affine_bad = 0;
  for (; nets < 200; ++nets) {
    const auto in = std::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
    const auto out = std::uniform_int_distribution<Eigen::Index>(1, 3)(rng);
    const int layers = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto net = hytest::random_net(rng, in, out, layers, 8);
    Vector c(in), h(in);
    for (Eigen::Index k = 0; k < in; ++k) {
      c[k] = hytest::uniform(rng, -2, 2);
      h[k] = hytest::uniform(rng, 0.01, 2.0);
    }
    const HyperRect dom = HyperRect::around(c, h);
    const auto cb = crown_bounds(net, dom);
    for (int s = 0; s < 2000; ++s) {
      const Vector x = s < (1 << in) ? dom.corners()[static_cast<std::size_t>(s)] : hytest::sample_in(rng, dom);
      const Vector y = net.eval(x);
      worst = std::min({worst, (y - cb.lower_at(x)).minCoeff(), (cb.upper_at(x) - y).minCoeff()});
    }
    const auto lin = hytest::random_net(rng, in, out, layers, 8, true);
    const auto cl = crown_bounds(lin, dom);
    if (!(cl.upper_weights == cl.lower_weights) || (cl.upper_bias - cl.lower_bias).norm() > 1e-12) ++affine_bad;
  }
  report(3, "relaxation fuzz", worst >= -1e-9 && affine_bad == 0,
         fmt("%d nets x 2000 samples, worst slack %.3g (>= -1e-9); affine nets with Psi != Phi: %d", nets, worst,
             affine_bad));
}

// 4. lp_count equals 2 n_x |S| |Q| tau for every run without empty elements.
void lp_accounting() {
  const auto sys = hytest::fixture_system();
  const auto net = hytest::fixture_policy();
  auto cfg = load_config(hytest::config_dir() / "double_integrator_sweep.json");
  int checked = 0, mismatched = 0;
  std::size_t example = 0;
  for (const auto& pc : cfg.partitions) {
    if (pc.brsp > 144) continue;  // keeps the check quick; the largest budget adds nothing new
    const auto params = partition_params(pc, SetMode::Axis, 1);
    for (const auto& target : resolve_targets(cfg)) {
      const auto run = hybreach_lp_plus(sys, net, target, cfg.horizon, params);
      bool full = true;
      for (const auto& e : run.elements) full = full && !e.terminated() && static_cast<int>(e.steps.size()) == cfg.horizon;
      if (!full) continue;
      std::size_t q = 1;
      for (int c : pc.tsp) q *= static_cast<std::size_t>(c);
      const std::size_t expect = lp_count(2, static_cast<std::size_t>(pc.brsp), q, static_cast<std::size_t>(cfg.horizon));
      ++checked;
      if (run.lp_count() != expect) ++mismatched;
      if (pc.id == "F") example = run.lp_count();
    }
  }
  report(4, "LP accounting", checked > 0 && mismatched == 0 && example == 320 && lp_count(2, 4, 4, 5) == 320,
         fmt("%d full runs checked, %d mismatches; ([2,2],4) tau=5 -> %zu LPs (formula 320)", checked, mismatched,
             example));
}

std::vector<ConfigResult> sweep_results;

// 5. Hybrid beats BRSP-only and TSP-only at the same LP budget.
void hybrid_dominance() {
  auto cfg = load_config(hytest::config_dir() / "double_integrator_sweep.json");
  sweep_results = evaluate(cfg, load_network(cfg.network_path));
  const auto& hybrid = by_id(sweep_results, "F");
  const auto& brsp = by_id(sweep_results, "BRSP16");
  const auto& tsp = by_id(sweep_results, "C");
  const bool matched = hybrid.lp_count() == brsp.lp_count() && brsp.lp_count() == tsp.lp_count();
  const double h = hybrid.mean_error(), b = brsp.mean_error(), t = tsp.mean_error();
  report(5, "hybrid dominance", matched && h <= 0.9 * b && h <= 0.9 * t,
         fmt("([2,2],4) %.4f vs ([1,1],16) %.4f and ([4,4],1) %.4f at %zu LPs each (need <= 0.9x)", h, b, t,
             hybrid.lp_count()));
}

// 6. BRSP plateau and hybrid below it.
void brsp_floor() {
  const double e144 = by_id(sweep_results, "E").mean_error();
  const double e400 = by_id(sweep_results, "BRSP400").mean_error();
  const double h = by_id(sweep_results, "H").mean_error();
  const double rel = std::abs(e400 - e144) / e144;
  report(6, "BRSP error floor", rel < 0.05 && h < e144 && e144 / h >= 3.0,
         fmt("([1,1],144) %.4f vs ([1,1],400) %.4f differ %.2f%% (< 5%%); ([4,4],9) %.4f is %.1fx below the floor (>= 3x)",
             e144, e400, 100 * rel, h, e144 / h));
}

// 7. Rotated rectangles: calipers vs a 1e4-angle sweep, and a BRSP plateau in rotated mode.
double sweep_area(const std::vector<Point2>& pts, int steps) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) {
    const double th = std::numbers::pi / 2 * i / steps;
    const Point2 a(std::cos(th), std::sin(th)), b(-std::sin(th), std::cos(th));
    double l0 = 1e300, h0 = -1e300, l1 = 1e300, h1 = -1e300;
    for (const auto& p : pts) {
      l0 = std::min(l0, a.dot(p));
      h0 = std::max(h0, a.dot(p));
      l1 = std::min(l1, b.dot(p));
      h1 = std::max(h1, b.dot(p));
    }
    best = std::min(best, (h0 - l0) * (h1 - l1));
  }
  return best;
}

void rotated_mode() {
  // Point sets whose optimal angle lies on the sweep grid: rotated rectangles' corners plus
  // interior points, and the diamond. Random clouds can only be bounded by the sweep.
  std::mt19937_64 rng(77);
  const int steps = 10000;
  double worst_rel = 0.0;
  bool cloud_ok = true;
  for (int trial = 0; trial < 40; ++trial) {
    const int k = std::uniform_int_distribution<int>(0, steps - 1)(rng);
    const double th = std::numbers::pi / 2 * k / steps;
    const Point2 a(std::cos(th), std::sin(th)), b(-std::sin(th), std::cos(th));
    const double w = hytest::uniform(rng, 0.2, 3), h = hytest::uniform(rng, 0.2, 3);
    const Point2 c(hytest::uniform(rng, -5, 5), hytest::uniform(rng, -5, 5));
    std::vector<Point2> pts;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) pts.push_back(c + sx * w * a + sy * h * b);
    }
    for (int i = 0; i < 30; ++i) pts.push_back(c + hytest::uniform(rng, -w, w) * a + hytest::uniform(rng, -h, h) * b);
    const double got = min_area_rotated_rect(std::span<const Point2>(pts)).area();
    worst_rel = std::max(worst_rel, std::abs(got - sweep_area(pts, steps)) / sweep_area(pts, steps));

    std::vector<Point2> cloud;
    for (int i = 0; i < 50; ++i) cloud.emplace_back(hytest::uniform(rng, -1, 1), hytest::uniform(rng, -2, 2));
    cloud_ok = cloud_ok && min_area_rotated_rect(std::span<const Point2>(cloud)).area() <= sweep_area(cloud, steps) * (1 + 1e-6);
  }
  const std::vector<Point2> diamond{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  worst_rel = std::max(worst_rel, std::abs(min_area_rotated_rect(std::span<const Point2>(diamond)).area() - sweep_area(diamond, steps)) / 2.0);

  auto cfg = load_config(hytest::config_dir() / "rotated_brsp.json");
  const auto rs = evaluate(cfg, load_network(cfg.network_path));
  const double e144 = by_id(rs, "E").mean_error(), e400 = by_id(rs, "BRSP400").mean_error();
  const double plateau = std::abs(e400 - e144) / e144;
  report(7, "rotated-rectangle mode", worst_rel <= 1e-6 && cloud_ok && plateau < 0.05,
         fmt("calipers vs sweep max rel gap %.2g (<= 1e-6); rotated BRSP ([1,1],144) %.4f vs ([1,1],400) %.4f differ %.2f%% (< 5%%)",
             worst_rel, e144, e400, 100 * plateau));
}

// 8. Two identical sweep invocations write byte-identical CSVs.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const auto base = std::filesystem::temp_directory_path() / "hybreach_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::string outputs[2];
  bool ran = true;
  for (int i = 0; i < 2; ++i) {
    const auto out = base / std::to_string(i);
    const std::string cmd = std::string("\"") + HYBREACH_CLI + "\" sweep --reproducible --config \"" +
                            (hytest::config_dir() / "double_integrator_sweep.json").string() + "\" --out \"" +
                            out.string() + "\" > /dev/null";
    ran = ran && std::system(cmd.c_str()) == 0;
    outputs[i] = slurp(out / "sweep.csv");
  }
  const bool same = ran && !outputs[0].empty() && outputs[0] == outputs[1];
  report(8, "determinism", same,
         fmt("two CLI sweeps -> %zu and %zu byte CSVs, %s", outputs[0].size(), outputs[1].size(),
             same ? "identical" : "different"));
}

// 9. Each ([2,2],1) element box sits inside the ([1,1],1) box for exact-bound controllers.
void tsp_containment() {
  const auto sys = hytest::fixture_system();
  struct Case {
    std::string name;
    FeedforwardNetwork net;
    HyperRect target;
  };
  const std::vector<Case> cases{{"zero", zero_network(2, 1, {5, 5}), box({4, -0.25}, {5, 0.25})},
                                {"affine", affine_network(gain(), Vector::Zero(1)), box({1.5, -0.5}, {2.5, 0.5})},
                                {"affine", affine_network(gain(), Vector::Zero(1)), box({-0.5, -0.5}, {0.5, 0.5})}};
  const int horizon = 5;
  int checked = 0, outside = 0;
  for (const auto& c : cases) {
    PartitionParams one, four;
    four.target_counts = {2, 2};
    const auto whole = hybreach_lp_plus(sys, c.net, c.target, horizon, one);
    const auto split = hybreach_lp_plus(sys, c.net, c.target, horizon, four);
    for (int t = -1; t >= -horizon; --t) {
      const auto outer = whole.aggregate_bounds(t);
      for (const auto& b : split.aggregate(t)) {
        ++checked;
        if (!outer || !contains(*outer, b, kTol)) ++outside;
      }
    }
  }
  report(9, "TSP tightening containment", checked > 0 && outside == 0,
         fmt("%d element boxes over %zu targets and %d steps, %d outside (tol 1e-6)", checked, cases.size(), horizon,
             outside));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{over_approximation,   analytic_exactness, relaxation_fuzz,
                                                    lp_accounting, hybrid_dominance, brsp_floor,
                                                    rotated_mode, determinism,       tsp_containment};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion aborted: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
