#pragma once

// Versioned run configuration and scenario files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdverify/fusion.hpp"
#include "crowdverify/geometry.hpp"
#include "crowdverify/optics.hpp"
#include "crowdverify/simulation.hpp"

namespace crowdverify {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The shipped default configuration (config/default.json).
nlohmann::json default_config();

/// Default config with `overlay` merged on top (RFC 7386 merge patch).
nlohmann::json merged_config(const nlohmann::json& overlay);

/// Applies "a.b.c=value" overrides; value is parsed as JSON, falling back to
/// a plain string.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& assignments);

nlohmann::json read_json_file(const std::filesystem::path& path);

struct CityGenParams {
  double extent = 3000.0;
  int rows = 20;
  int cols = 20;
  double footprint = 90.0;
  double height_min = 20.0;
  double height_max = 100.0;
  std::uint64_t seed = 1;
};

struct PlanParams {
  int n_los = 1;
  int max_uavs = 100;
  double altitude = 120.0;
  double spacing = 150.0;
};

struct OpticsSetup {
  double range = 300.0;
  BeamParams beam;
  MrrParams mrr;
  LinkNoise noise;
  ScanConfig scan;
  std::vector<double> wz_sweep;
};

CityGenParams city_params(const nlohmann::json& config);
GroundGrid grid_params(const nlohmann::json& config);
PlanParams plan_params(const nlohmann::json& config);
OpticsSetup optics_setup(const nlohmann::json& config);
TrustWeights trust_weights(const nlohmann::json& trust_section);
ProtocolParams protocol_params(const nlohmann::json& config);

BeamParams beam_from_json(const nlohmann::json& j, BeamParams base = {});
MrrParams mrr_from_json(const nlohmann::json& j, MrrParams base = {});
LinkNoise noise_from_json(const nlohmann::json& j, LinkNoise base = {});

/// Placement file: {"version":1,"sites":[[x,y,z],...]}.
nlohmann::json placement_to_json(const std::vector<Point3>& sites);
std::vector<Point3> placement_from_json(const nlohmann::json& j);

/// Scenario file with keys seed, city, placement, agents, link, epochs,
/// assignment_policy (and optional protocol). `city` and `placement` may be
/// inline objects or paths relative to `base_dir`. Missing link and protocol
/// values come from `config`.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                  const nlohmann::json& config);
ScenarioConfig load_scenario(const std::filesystem::path& path, const nlohmann::json& config);

}  // namespace crowdverify
