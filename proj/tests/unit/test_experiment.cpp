#include "hybreach/error.hpp"
#include "hybreach/experiment.hpp"
#include "hybreach/plot.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace hybreach;
using nlohmann::json;

namespace {

json zero_config() {
  std::ifstream in(hytest::config_dir() / "zero_controller.json");
  return json::parse(in);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hybreach_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

ErrorKind kind_of(const json& doc) {
  try {
    config_from_json(doc, hytest::config_dir());
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Undefined;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = load_config(hytest::config_dir() / "double_integrator_sweep.json");
  CHECK(cfg.system->state_dim() == 2);
  CHECK(cfg.horizon == 5);
  CHECK(cfg.partitions.size() >= 8);
  CHECK(std::filesystem::exists(cfg.network_path));
  CHECK(resolve_targets(cfg).size() == 5);
  for (const auto& t : resolve_targets(cfg)) {
    CHECK(t.center()[0] >= 4.0);
    CHECK(t.center()[0] <= 6.0);
    CHECK(t.center()[1] == 0.0);
    CHECK(t.widths()[0] == doctest::Approx(0.5));
  }

  json doc = zero_config();
  doc["schema_version"] = 99;
  CHECK(kind_of(doc) == ErrorKind::Config);
  doc = zero_config();
  doc.erase("horizon");
  CHECK(kind_of(doc) == ErrorKind::Config);
  doc = zero_config();
  doc["mode"] = "polytope";
  CHECK(kind_of(doc) == ErrorKind::Config);
  doc = zero_config();
  doc["partitions"][0]["tsp"] = {2};
  CHECK(kind_of(doc) == ErrorKind::Config);
  doc = zero_config();
  doc["system"]["X"]["upper"] = {10};
  CHECK(kind_of(doc) == ErrorKind::Config);
  doc = zero_config();
  doc.erase("targets");
  CHECK(kind_of(doc) == ErrorKind::Config);
}

TEST_CASE("target generator is seeded") {
  TargetGenerator g{5, 3, hytest::box({4, 0}, {6, 0}), hytest::vec({0.5, 0.5})};
  const auto a = generate_targets(g), b = generate_targets(g);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  g.seed = 4;
  CHECK_FALSE(generate_targets(g)[0] == a[0]);
}

TEST_CASE("zero-controller run matches the analytic preimage") {
  auto cfg = config_from_json(zero_config(), hytest::config_dir());
  cfg.output_dir = scratch("zero");
  const auto results = cmd_run(cfg, RunOptions{});
  REQUIRE(results.size() == 2);
  const auto& tr = results[0].targets[0];
  // Axis box of the preimage: 1.5 x 0.5.
  CHECK(std::abs(error_metric(tr.area_bpoa, 0.75)) < 1e-4);
  CHECK(tr.run.lp_count() == 4);
  CHECK(std::filesystem::exists(cfg.output_dir / "run_A_target0.json"));
  CHECK(std::filesystem::exists(cfg.output_dir / "summary.csv"));
}

TEST_CASE("sweep csv shape and reproducibility") {
  auto cfg = config_from_json(zero_config(), hytest::config_dir());
  cfg.output_dir = scratch("sweep");
  cmd_sweep(cfg, RunOptions{true, 0.0});
  std::ifstream in(cfg.output_dir / "sweep.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string first = ss.str();
  CHECK(first.rfind("config_id,n_T,n_B,strategy,lp_count,mean_error,mean_wall_time_s,targets,seed\n", 0) == 0);
  CHECK(std::count(first.begin(), first.end(), '\n') == 3);
  cmd_sweep(cfg, RunOptions{true, 0.0});
  std::ifstream again(cfg.output_dir / "sweep.csv");
  std::stringstream s2;
  s2 << again.rdbuf();
  CHECK(s2.str() == first);
  CHECK(std::filesystem::exists(cfg.output_dir / "sweep_geometry.json"));

  cfg.partitions.clear();
  try {
    cmd_sweep(cfg, RunOptions{});
    FAIL("expected EmptySweep");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySweep);
  }
}

TEST_CASE("missing network names the path") {
  json doc = zero_config();
  doc["network"] = "nowhere/policy.json";
  auto cfg = config_from_json(doc, hytest::config_dir());
  cfg.output_dir = scratch("missing");
  try {
    cmd_run(cfg, RunOptions{});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("nowhere/policy.json") != std::string::npos);
  }
}

TEST_CASE("soundness command and negative control") {
  auto cfg = config_from_json(zero_config(), hytest::config_dir());
  cfg.output_dir = scratch("sound");
  cfg.soundness_points = 20000;
  const auto ok = cmd_soundness(cfg, RunOptions{});
  CHECK(ok.total_violations() == 0);
  std::size_t members = 0;
  for (const auto& s : ok.steps) members += s.members;
  CHECK(members > 0);
  CHECK(cmd_soundness(cfg, RunOptions{false, 10.0}).total_violations() > 0);
}

TEST_CASE("plot output") {
  auto cfg = config_from_json(zero_config(), hytest::config_dir());
  cfg.output_dir = scratch("plot");
  cfg.partitions.resize(1);
  cmd_run(cfg, RunOptions{});
  const auto files = plot_file(cfg.output_dir / "run_A_target0.json", cfg.output_dir / "plots");
  REQUIRE(files.size() == 1);
  std::ifstream in(files[0]);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("<svg") != std::string::npos);

  // Empty backprojection: target only.
  json doc = zero_config();
  doc["targets"] = {{{"lower", {50, 50}}, {"upper", {51, 51}}}};
  auto empty = config_from_json(doc, hytest::config_dir());
  empty.output_dir = scratch("plot_empty");
  empty.partitions.resize(1);
  cmd_run(empty, RunOptions{});
  CHECK(plot_file(empty.output_dir / "run_A_target0.json", empty.output_dir).size() == 1);

  // Three states: CSV only.
  json three = {{"schema_version", 1}, {"system", {{"A", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {"B", {{1}, {0}, {0}}},
                 {"X", {{"lower", {-5, -5, -5}}, {"upper", {5, 5, 5}}}}, {"U", {{"lower", {-1}}, {"upper", {1}}}}}},
                {"network", "unused.json"},
                {"targets", {{{"lower", {0, 0, 0}}, {"upper", {0.5, 0.5, 0.5}}}}},
                {"horizon", 2},
                {"partitions", {{{"id", "A"}, {"tsp", {1, 1, 1}}, {"brsp", 1}}}},
                {"mc_samples", 1000}};
  auto cfg3 = config_from_json(three, hytest::config_dir());
  const auto net3 = zero_network(3, 1, {4});
  const auto results = evaluate(cfg3, net3);
  const auto artifact = run_artifact(cfg3, results[0], results[0].targets[0], RunOptions{});
  const auto out3 = scratch("plot3");
  const auto csv = plot_artifact(artifact, out3, "three");
  REQUIRE(csv.size() == 1);
  CHECK(csv[0].extension() == ".csv");

  CHECK_THROWS_AS(plot_artifact(json{{"state_dim", 2}}, out3, "bad"), Error);
}
