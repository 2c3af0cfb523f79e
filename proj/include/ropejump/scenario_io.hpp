#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ropejump/fwp.hpp"
#include "ropejump/integrator.hpp"
#include "ropejump/mpc.hpp"
#include "ropejump/planner.hpp"
#include "ropejump/simulator.hpp"

namespace ropejump {

using Json = nlohmann::ordered_json;

/// Everything a command needs, fully defaulted.
struct RunConfig {
  std::string preset = "default";
  Scenario scenario;
  PlannerWeights planner;
  int planner_max_iters = 300;
  IntegratorConfig integrator;  // dt is set by the planner
  // MPC: zero N_mpc / dt_mpc mean "derive from the plan" (0.4 N and the plan knot dt).
  int mpc_N = 0;
  double mpc_dt = 0.0;
  double mpc_w_p = 1.0;
  double mpc_w_u = 1e-5;
  double mpc_w_pf = 0.0;
  int mpc_max_iters = 30;
  double dt_sim = 1e-3;
  ControllerKind controller = ControllerKind::Mpc;
  DisturbanceSpec disturbance;
  NoiseSpec noise;
  LandingParams landing;
  bool landing_enabled = false;
  HeatmapGrid heatmap;
  Vec6 heatmap_direction{(Vec6() << 0, 0, -1, 0, 0, 0).finished()};
  RobustnessOptions robustness;
  Vec3 p0{0.2, 2.5, -6.0};
  Vec3 target{0.2, 4.0, -4.0};

  /// Throws ConfigError listing every invalid field with its unit.
  void validate() const;
  MpcConfig mpc_config(const JumpPlan& plan) const;
  SimOptions sim_options() const;
  NlpOptions planner_options() const;
};

/// One documented configuration key.
struct SchemaField {
  std::string key;   // dotted path, e.g. "scenario.mu"
  std::string type;  // number, integer, vec3, vec6, string, bool, object
  std::string unit;
  std::string doc;
};
const std::vector<SchemaField>& config_schema();

/// Names of the built-in presets ("default", "landing", "obstacle").
std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);

/// Parses a JSON configuration: an optional "preset" key selects the base, every other key
/// overrides it. Unknown keys and type/range violations are reported together as ConfigError.
RunConfig parse_config(const Json& j);
RunConfig load_scenario(const std::filesystem::path& path);
Json config_to_json(const RunConfig& c);

/// Applies "dotted.key=value" (value parsed as JSON, bare words as strings).
void apply_override(RunConfig& c, const std::string& assignment);

/// 16 hex digits of FNV-1a over the canonical JSON of the configuration.
std::string config_hash(const RunConfig& c);

Json plan_to_json(const JumpPlan& plan);
/// Restores the decision variables and re-propagates the knots with `scenario`.
JumpPlan plan_from_json(const Json& j, const Scenario& scenario);
void save_plan(const std::filesystem::path& path, const JumpPlan& plan, const RunConfig& config);
/// Reads a plan file written by save_plan(); the embedded configuration is returned in `config`.
JumpPlan load_plan(const std::filesystem::path& path, RunConfig& config);

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);
void write_trace_csv(std::ostream& os, const SimTrace& trace);
Json trace_summary(const SimTrace& trace, const Scenario& scenario);
void write_heatmap_csv(const std::filesystem::path& path, const std::vector<HeatmapCell>& cells);
void write_robustness_csv(const std::filesystem::path& path, const RobustnessSummary& s);

/// Writes outputs named <command>_<hash>_<seed>_<name> into one directory and a manifest that
/// lists the configuration and every file.
class OutputWriter {
 public:
  OutputWriter(std::filesystem::path dir, std::string command, const RunConfig& config, std::uint64_t seed);
  std::filesystem::path path_for(const std::string& name) const;
  /// Records a file written at path_for(name).
  void add(const std::string& name, const std::string& kind);
  void add_input(const std::string& path);
  void set_summary(const Json& summary) { summary_ = summary; }
  /// Writes the manifest and returns its path.
  std::filesystem::path finish();

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::string stem_;
  Json config_;
  std::uint64_t seed_;
  Json files_ = Json::array();
  Json inputs_ = Json::array();
  Json summary_ = Json::object();
};

/// Output directory from $RJ_OUTPUT_DIR, else "./rj_out".
std::filesystem::path default_output_dir();

}  // namespace ropejump
