#include "hybreach/experiment.hpp"

#include "hybreach/error.hpp"
#include "hybreach/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace hybreach {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_error(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) config_error(std::string(what) + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(r)], what);
    if (row.size() != cols) config_error(std::string(what) + " has ragged rows");
    m.row(r) = row.transpose();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) config_error(std::string("missing field '") + key + "'");
  return doc.at(key);
}

HyperRect box_field(const json& j, const char* what) {
  try {
    return rect_from_json(j);
  } catch (const Error& e) {
    config_error(std::string(what) + ": " + e.what());
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::uint64_t target_seed(std::uint64_t seed, std::size_t index) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(index);
}

StateSet shrunk(const StateSet& s, double pct) {
  const double f = 1.0 - pct / 100.0;
  StateSet out{s.box.scaled(f), s.rotated};
  if (out.rotated) out.rotated->half_extents *= f;
  return out;
}

bool covers(const std::vector<StateSet>& sets, const Vector& x, double tol) {
  for (const auto& s : sets) {
    if (!contains(s.box, x, tol)) continue;
    if (s.rotated && !s.rotated->contains(Point2(x[0], x[1]), tol)) continue;
    return true;
  }
  return false;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace

json rect_to_json(const HyperRect& r) { return json{{"lower", vector_to_json(r.lower())}, {"upper", vector_to_json(r.upper())}}; }

HyperRect rect_from_json(const json& j) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    config_error("box needs 'lower' and 'upper'");
  }
  Vector lo = vector_from_json(j.at("lower"), "box lower");
  Vector hi = vector_from_json(j.at("upper"), "box upper");
  if (lo.size() != hi.size()) config_error("box lower/upper dimensions differ");
  try {
    return HyperRect(std::move(lo), std::move(hi));
  } catch (const Error& e) {
    config_error(e.what());
  }
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) config_error("config must be an object");
  const int version = require(doc, "schema_version").get<int>();
  if (version != kConfigSchemaVersion) {
    config_error("unsupported schema_version " + std::to_string(version));
  }

  ExperimentConfig cfg;
  const json& s = require(doc, "system");
  try {
    Vector c = s.contains("c") ? vector_from_json(s.at("c"), "system.c") : Vector();
    cfg.system.emplace(matrix_from_json(require(s, "A"), "system.A"), matrix_from_json(require(s, "B"), "system.B"),
                       std::move(c), box_field(require(s, "X"), "system.X"), box_field(require(s, "U"), "system.U"),
                       s.value("dt", 1.0));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    config_error(std::string("system: ") + e.what());
  }
  const auto nx = cfg.system->state_dim();

  cfg.network_path = require(doc, "network").get<std::string>();
  if (cfg.network_path.is_relative()) cfg.network_path = base_dir / cfg.network_path;

  if (doc.contains("targets")) {
    for (const auto& t : doc.at("targets")) cfg.targets.push_back(box_field(t, "targets"));
  }
  if (doc.contains("target_generator")) {
    const json& g = doc.at("target_generator");
    TargetGenerator gen{g.value("count", 5), g.value("seed", std::uint64_t{0}),
                        box_field(require(g, "center_range"), "target_generator.center_range"),
                        vector_from_json(require(g, "size"), "target_generator.size")};
    if (gen.count < 1) config_error("target_generator.count must be >= 1");
    if ((gen.size.array() < 0.0).any()) config_error("target_generator.size must be nonnegative");
    cfg.generator = std::move(gen);
  }
  if (cfg.targets.empty() && !cfg.generator) config_error("config needs 'targets' or 'target_generator'");
  for (const auto& t : cfg.targets) {
    if (t.dim() != nx) config_error("target dimension does not match the system");
  }
  if (cfg.generator && (cfg.generator->center_range.dim() != nx || cfg.generator->size.size() != nx)) {
    config_error("target_generator dimension does not match the system");
  }

  cfg.horizon = require(doc, "horizon").get<int>();
  if (cfg.horizon < 1) config_error("horizon must be >= 1");

  for (const auto& p : require(doc, "partitions")) {
    PartitionConfig pc;
    pc.id = require(p, "id").get<std::string>();
    pc.tsp = require(p, "tsp").get<std::vector<int>>();
    pc.brsp = p.value("brsp", 1);
    try {
      pc.strategy = brsp_strategy_from_string(p.value("strategy", std::string("guided")));
    } catch (const Error& e) {
      config_error(e.what());
    }
    pc.min_volume = p.value("min_volume", 0.0);
    if (static_cast<Eigen::Index>(pc.tsp.size()) != nx) config_error("partition '" + pc.id + "': tsp dimension");
    if (std::any_of(pc.tsp.begin(), pc.tsp.end(), [](int c) { return c < 1; }) || pc.brsp < 1 || pc.min_volume < 0.0) {
      config_error("partition '" + pc.id + "': counts must be >= 1 and min_volume >= 0");
    }
    cfg.partitions.push_back(std::move(pc));
  }

  cfg.mc_samples = doc.value("mc_samples", cfg.mc_samples);
  if (cfg.mc_samples < 1) config_error("mc_samples must be >= 1");
  const std::string region = doc.value("mc_region", std::string("chain"));
  if (region == "chain") {
    cfg.mc_region = SampleRegion::Chain;
  } else if (region == "bpoa") {
    cfg.mc_region = SampleRegion::Bpoa;
  } else {
    config_error("mc_region must be 'chain' or 'bpoa'");
  }
  cfg.seed = doc.value("seed", std::uint64_t{0});
  try {
    cfg.mode = set_mode_from_string(doc.value("mode", std::string("axis")));
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (cfg.mode == SetMode::Rotated2d && nx != 2) config_error("rotated2d mode needs a 2-state system");
  cfg.output_dir = doc.value("output_dir", std::string("out"));
  cfg.soundness_points = doc.value("soundness_points", cfg.soundness_points);
  cfg.parallel = doc.value("parallel", 1);
  if (cfg.parallel < 1) config_error("parallel must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    config_error("cannot parse config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg = config_from_json(doc, path.parent_path());
  } catch (const json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  cfg.source = path;
  return cfg;
}

std::vector<HyperRect> generate_targets(const TargetGenerator& gen) {
  std::mt19937_64 rng(gen.seed);
  std::vector<HyperRect> out;
  const Vector half = 0.5 * gen.size;
  for (int i = 0; i < gen.count; ++i) {
    Vector c(gen.center_range.dim());
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      c[k] = gen.center_range.lower()[k] + u * gen.center_range.widths()[k];
    }
    out.push_back(HyperRect::around(c, half));
  }
  return out;
}

std::vector<HyperRect> resolve_targets(const ExperimentConfig& cfg) {
  std::vector<HyperRect> out = cfg.targets;
  if (cfg.generator) {
    auto gen = generate_targets(*cfg.generator);
    out.insert(out.end(), gen.begin(), gen.end());
  }
  return out;
}

PartitionParams partition_params(const PartitionConfig& pc, SetMode mode, int threads) {
  PartitionParams p;
  p.target_counts = pc.tsp;
  p.br_budget = pc.brsp;
  p.min_volume = pc.min_volume;
  p.strategy = pc.strategy;
  p.mode = mode;
  p.threads = threads;
  return p;
}

std::size_t ConfigResult::lp_count() const {
  std::size_t n = 0;
  for (const auto& t : targets) n = std::max(n, t.run.lp_count());
  return n;
}

double ConfigResult::mean_error() const {
  if (targets.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& t : targets) {
    if (!t.error) return std::numeric_limits<double>::quiet_NaN();
    sum += *t.error;
  }
  return sum / static_cast<double>(targets.size());
}

double ConfigResult::mean_wall_time() const {
  if (targets.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : targets) sum += t.run.wall_time_s;
  return sum / static_cast<double>(targets.size());
}

std::vector<BpEstimate> estimate_truth(const ExperimentConfig& cfg, const LtiSystem& sys,
                                       const FeedforwardNetwork& net, const std::vector<HyperRect>& targets) {
  std::vector<BpEstimate> out;
  const int t = -cfg.horizon;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::optional<HyperRect> region;
    if (cfg.mc_region == SampleRegion::Chain) {
      const auto chain = backreach_chain(sys, targets[i], cfg.horizon);
      if (static_cast<int>(chain.size()) == cfg.horizon) region = chain.back();
    } else {
      PartitionParams base;
      base.target_counts.assign(static_cast<std::size_t>(sys.state_dim()), 1);
      region = hybreach_lp_plus(sys, net, targets[i], cfg.horizon, base).aggregate_bounds(t);
    }
    if (!region) {
      out.emplace_back();
      continue;
    }
    out.push_back(mc_true_bp(sys, net, targets[i], t, *region, cfg.mc_samples, target_seed(cfg.seed, i), cfg.parallel));
  }
  return out;
}

std::vector<ConfigResult> evaluate(const ExperimentConfig& cfg, const FeedforwardNetwork& net) {
  const LtiSystem& sys = *cfg.system;
  if (net.input_dim() != sys.state_dim() || net.output_dim() != sys.control_dim()) {
    throw Error(ErrorKind::Config, "network dimensions do not match the system");
  }
  const auto targets = resolve_targets(cfg);
  const auto truth = estimate_truth(cfg, sys, net, targets);
  const int t = -cfg.horizon;

  std::vector<ConfigResult> results;
  for (const auto& pc : cfg.partitions) {
    ConfigResult cr{pc, {}};
    const PartitionParams params = partition_params(pc, cfg.mode, cfg.parallel);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      TargetResult tr{i, hybreach_lp_plus(sys, net, targets[i], cfg.horizon, params), truth[i], 0.0, 0.0, std::nullopt};
      tr.area_bpoa = tr.run.aggregate_area(t);
      tr.area_true = cfg.mode == SetMode::Rotated2d ? tr.truth.area_rotated : tr.truth.area_axis;
      if (tr.area_true > 0.0) tr.error = error_metric(tr.area_bpoa, tr.area_true);
      cr.targets.push_back(std::move(tr));
    }
    results.push_back(std::move(cr));
  }
  return results;
}

std::string sweep_csv(const ExperimentConfig& cfg, const std::vector<ConfigResult>& results, const RunOptions& opts) {
  std::ostringstream os;
  os << "config_id,n_T,n_B,strategy,lp_count,mean_error,mean_wall_time_s,targets,seed\n";
  for (const auto& r : results) {
    std::string nt;
    for (std::size_t k = 0; k < r.config.tsp.size(); ++k) nt += (k ? "x" : "") + std::to_string(r.config.tsp[k]);
    os << r.config.id << ',' << nt << ',' << r.config.brsp << ',' << to_string(r.config.strategy) << ','
       << r.lp_count() << ',' << fmt(r.mean_error()) << ',' << (opts.reproducible ? "" : fmt(r.mean_wall_time()))
       << ',' << r.targets.size() << ',' << cfg.seed << '\n';
  }
  return os.str();
}

json run_artifact(const ExperimentConfig& cfg, const ConfigResult& cr, const TargetResult& tr, const RunOptions& opts,
                  std::size_t max_members) {
  const BpoaRun& run = tr.run;
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["config_id"] = cr.config.id;
  doc["target_index"] = tr.target_index;
  doc["target"] = rect_to_json(run.target);
  doc["horizon"] = run.horizon;
  doc["mode"] = std::string(to_string(cfg.mode));
  doc["state_dim"] = run.target.dim();
  doc["lp_count"] = run.lp_count();
  doc["lp_auxiliary"] = run.lps.auxiliary;
  doc["lp_failures"] = run.lps.failures;
  doc["wall_time_s"] = opts.reproducible ? json(nullptr) : json(run.wall_time_s);
  doc["area_bpoa"] = tr.area_bpoa;
  doc["area_true"] = tr.area_true;
  doc["error"] = tr.error ? json(*tr.error) : json(nullptr);

  json steps = json::array();
  for (int t = -1; t >= -run.horizon; --t) {
    json step{{"t", t}};
    json elements = json::array();
    for (const auto& hist : run.elements) {
      json e{{"target_element", rect_to_json(hist.target)}};
      const std::size_t idx = static_cast<std::size_t>(-t - 1);
      if (idx < hist.steps.size()) {
        const StepRecord& rec = hist.steps[idx];
        e["br_set"] = rec.br_set ? rect_to_json(*rec.br_set) : json(nullptr);
        e["bpoa"] = rec.bpoa ? rect_to_json(rec.bpoa->box) : json(nullptr);
        if (rec.bpoa && rec.bpoa->rotated) {
          const auto& rr = *rec.bpoa->rotated;
          e["rotated"] = {{"center", {rr.center.x(), rr.center.y()}},
                          {"half_extents", {rr.half_extents.x(), rr.half_extents.y()}},
                          {"angle", rr.angle}};
        }
        json parts = json::array();
        for (const auto& p : rec.partitions) {
          parts.push_back({{"region", rect_to_json(p.region)}, {"bpoa", p.bpoa ? rect_to_json(*p.bpoa) : json(nullptr)}});
        }
        e["partitions"] = std::move(parts);
      } else {
        e["br_set"] = nullptr;
        e["bpoa"] = nullptr;
        e["partitions"] = json::array();
      }
      elements.push_back(std::move(e));
    }
    step["elements"] = std::move(elements);
    const auto bounds = run.aggregate_bounds(t);
    step["aggregate_bounds"] = bounds ? rect_to_json(*bounds) : json(nullptr);
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);

  json members = json::array();
  const std::size_t n = tr.truth.members.size();
  const std::size_t stride = n > max_members ? (n + max_members - 1) / max_members : 1;
  for (std::size_t i = 0; i < n; i += stride) members.push_back(vector_to_json(tr.truth.members[i]));
  doc["mc_members"] = std::move(members);
  doc["mc_members_total"] = n;
  return doc;
}

std::size_t SoundnessReport::total_violations() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.violations;
  return n;
}

SoundnessReport soundness(const ExperimentConfig& cfg, const FeedforwardNetwork& net, double shrink_pct) {
  const LtiSystem& sys = *cfg.system;
  const auto targets = resolve_targets(cfg);
  SoundnessReport report;
  for (const auto& pc : cfg.partitions) {
    const PartitionParams params = partition_params(pc, cfg.mode, cfg.parallel);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const BpoaRun run = hybreach_lp_plus(sys, net, targets[i], cfg.horizon, params);
      const auto chain = backreach_chain(sys, targets[i], cfg.horizon);
      for (int t = -1; t >= -cfg.horizon; --t) {
        SoundnessStep st{pc.id, i, t, 0, 0, 0};
        const std::size_t idx = static_cast<std::size_t>(-t - 1);
        if (idx < chain.size()) {
          std::vector<StateSet> sets = run.aggregate_sets(t);
          if (shrink_pct > 0.0) {
            for (auto& s : sets) s = shrunk(s, shrink_pct);
          }
          const HyperRect& region = chain[idx];
          const double pitch = pitch_for_points(region, cfg.soundness_points);
          st.grid_points = 1;
          for (Eigen::Index k = 0; k < region.dim(); ++k) {
            st.grid_points *= static_cast<std::size_t>(std::floor(region.widths()[k] / pitch)) + 1;
          }
          auto covered = [&](const Vector& x) { return covers(sets, x, kLpFeasibilityTol); };
          st.violations = grid_soundness_check(sys, net, targets[i], t, region, pitch, covered, &st.members).size();
        }
        report.steps.push_back(st);
      }
    }
  }
  return report;
}

namespace {

FeedforwardNetwork load_policy(const ExperimentConfig& cfg) {
  if (!std::filesystem::exists(cfg.network_path)) {
    throw Error(ErrorKind::Config, "network file not found: " + cfg.network_path.string());
  }
  try {
    return load_network(cfg.network_path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, cfg.network_path.string() + ": " + e.what());
  }
}

void require_partitions(const ExperimentConfig& cfg) {
  if (cfg.partitions.empty()) throw Error(ErrorKind::EmptySweep, "config has no partition configurations");
}

}  // namespace

std::vector<ConfigResult> cmd_run(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_partitions(cfg);
  const auto net = load_policy(cfg);
  auto results = evaluate(cfg, net);
  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& cr : results) {
    for (const auto& tr : cr.targets) {
      const auto name = "run_" + cr.config.id + "_target" + std::to_string(tr.target_index) + ".json";
      write_file(cfg.output_dir / name, run_artifact(cfg, cr, tr, opts).dump(2) + "\n");
    }
  }
  write_file(cfg.output_dir / "summary.csv", sweep_csv(cfg, results, opts));
  return results;
}

std::vector<ConfigResult> cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_partitions(cfg);
  const auto net = load_policy(cfg);
  auto results = evaluate(cfg, net);
  std::filesystem::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "sweep.csv", sweep_csv(cfg, results, opts));

  // Final-step geometry per configuration, for external plotting.
  json geo = json::array();
  for (const auto& cr : results) {
    json targets = json::array();
    for (const auto& tr : cr.targets) {
      json boxes = json::array();
      for (const auto& b : tr.run.aggregate(-cfg.horizon)) boxes.push_back(rect_to_json(b));
      targets.push_back({{"target", rect_to_json(tr.run.target)}, {"bpoa", std::move(boxes)}});
    }
    geo.push_back({{"config_id", cr.config.id}, {"t", -cfg.horizon}, {"targets", std::move(targets)}});
  }
  write_file(cfg.output_dir / "sweep_geometry.json", geo.dump(2) + "\n");
  return results;
}

SoundnessReport cmd_soundness(const ExperimentConfig& cfg, const RunOptions& opts) {
  require_partitions(cfg);
  const auto net = load_policy(cfg);
  auto report = soundness(cfg, net, opts.debug_shrink_pct);
  std::filesystem::create_directories(cfg.output_dir);
  std::ostringstream os;
  os << "config_id,target,t,grid_points,members,violations\n";
  for (const auto& s : report.steps) {
    os << s.config_id << ',' << s.target_index << ',' << s.t << ',' << s.grid_points << ',' << s.members << ','
       << s.violations << '\n';
  }
  write_file(cfg.output_dir / "soundness.csv", os.str());
  return report;
}

}  // namespace hybreach
