#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ropejump/errors.hpp"
#include "ropejump/jobs.hpp"
#include "ropejump/scenario_io.hpp"

using namespace ropejump;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rj_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void leaves(const Json& j, const std::string& prefix, std::set<std::string>& out) {
  if (j.is_object() && !j.empty()) {
    for (const auto& [k, v] : j.items()) leaves(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  out.insert(prefix);
}

}  // namespace

TEST_CASE("presets carry their stated values") {
  const RunConfig d = preset_config("default");
  CHECK(d.scenario.mass == 5.0);
  CHECK(d.scenario.f_r_max == 90.0);
  const RunConfig l = preset_config("landing");
  CHECK(l.scenario.mass == 15.0);
  CHECK(l.scenario.f_leg_max == 600.0);
  CHECK(l.scenario.f_r_max == 300.0);
  CHECK(l.landing_enabled);
  CHECK(l.landing.K_L == 60.0);
  CHECK_FALSE(l.landing.D_L.has_value());
  const RunConfig o = preset_config("obstacle");
  REQUIRE(o.scenario.obstacle.has_value());
  CHECK(o.planner.clearance == 1.0);
  CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}

TEST_CASE("invalid values are reported with the field and unit") {
  Json j = {{"scenario", {{"mu", -1.0}, {"mass", 0.0}}}};
  try {
    parse_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("mu") != std::string::npos);
    CHECK(what.find("mass") != std::string::npos);
    CHECK(what.find("kg") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(Json{{"scenario", {{"muu", 0.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(Json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(Json{{"scenario", {{"mu", "high"}}}}), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/rj.json"), IoError);
}

TEST_CASE("schema documents every configuration leaf, numeric fields carry units") {
  std::set<std::string> documented;
  for (const SchemaField& f : config_schema()) {
    documented.insert(f.key);
    CHECK_MESSAGE(!f.doc.empty(), f.key);
    if (f.type.rfind("number", 0) == 0 || f.type == "vec3" || f.type == "vec6")
      CHECK_MESSAGE(!f.unit.empty(), f.key);
  }
  for (const std::string& preset : preset_names()) {
    std::set<std::string> keys;
    leaves(config_to_json(preset_config(preset)), "", keys);
    for (const auto& k : keys) {
      // Entries of a documented object (e.g. the obstacle) count as documented.
      bool ok = documented.count(k) > 0;
      for (const auto& d : documented)
        if (k.rfind(d + ".", 0) == 0) ok = true;
      CHECK_MESSAGE(ok, k);
    }
  }
}

TEST_CASE("configuration round-trips through JSON and the hash is stable") {
  for (const std::string& preset : preset_names()) {
    const RunConfig c = preset_config(preset);
    const Json j = config_to_json(c);
    const RunConfig back = parse_config(j);
    CHECK(config_to_json(back) == j);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }
  CHECK(config_hash(preset_config("default")) != config_hash(preset_config("landing")));
}

TEST_CASE("overrides set dotted keys and reject unknown ones") {
  RunConfig c = preset_config("default");
  apply_override(c, "scenario.mu=0.5");
  CHECK(c.scenario.mu == 0.5);
  apply_override(c, "jump.p0=[0.3, 2.0, -5.0]");
  CHECK((c.p0 - Vec3(0.3, 2.0, -5.0)).norm() == 0.0);
  apply_override(c, "simulation.controller=open-loop");
  CHECK(c.controller == ControllerKind::OpenLoop);
  CHECK_THROWS_AS(apply_override(c, "scenario.nothing=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "scenario.mu=-3"), ConfigError);
}

TEST_CASE("a reloaded plan reproduces the same rollout") {
  const fs::path dir = scratch("plan");
  const RunConfig cfg = preset_config("default");
  const JumpPlan plan = plan_from_config(cfg);
  save_plan(dir / "plan.json", plan, cfg);
  RunConfig cfg2;
  const JumpPlan back = load_plan(dir / "plan.json", cfg2);
  CHECK(config_hash(cfg2) == config_hash(cfg));
  REQUIRE(back.positions.size() == plan.positions.size());
  for (std::size_t k = 0; k < plan.positions.size(); ++k) CHECK((back.positions[k] - plan.positions[k]).norm() == 0.0);
  RunConfig ol = cfg;
  ol.controller = ControllerKind::OpenLoop;
  std::ostringstream a, b;
  write_trace_csv(a, track_plan(plan, ol));
  write_trace_csv(b, track_plan(back, ol));
  CHECK(a.str() == b.str());
}

TEST_CASE("manifest lists every output and identical runs differ only in the timestamp") {
  const RunConfig cfg = preset_config("default");
  auto run = [&](const fs::path& dir) {
    OutputWriter w(dir, "heatmap", cfg, 0);
    std::ofstream(w.path_for("data.csv")) << "y,z\n";
    w.add("data.csv", "heatmap");
    w.set_summary({{"cells", 1}});
    return w.finish();
  };
  const fs::path d1 = scratch("m1"), d2 = scratch("m2");
  const fs::path m1 = run(d1), m2 = run(d2);
  CHECK(m1.filename() == m2.filename());
  CHECK(m1.filename().string().rfind("heatmap_" + config_hash(cfg) + "_0_", 0) == 0);
  Json j1 = Json::parse(slurp(m1)), j2 = Json::parse(slurp(m2));
  for (const auto& f : j1["outputs"]) CHECK(fs::exists(d1 / f["file"].get<std::string>()));
  CHECK(j1.contains("timestamp"));
  j1.erase("timestamp");
  j2.erase("timestamp");
  CHECK(j1 == j2);
}

TEST_CASE("CSV writers emit the documented columns") {
  const fs::path dir = scratch("csv");
  HeatmapCell cell;
  cell.y = 1.0;
  cell.z = -2.0;
  cell.gamma = 3.5;
  cell.feasible = true;
  write_heatmap_csv(dir / "h.csv", {cell});
  const std::string h = slurp(dir / "h.csv");
  CHECK(h.rfind("y,z,gamma,feasible,error\n", 0) == 0);
  RobustnessSummary s;
  write_robustness_csv(dir / "r.csv", s);
  CHECK(slurp(dir / "r.csv").rfind("interval,t_start,runs,failures,mean,stddev", 0) == 0);
}
