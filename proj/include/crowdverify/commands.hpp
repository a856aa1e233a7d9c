#pragma once

// Subcommand implementations behind the crowdverify CLI.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crowdverify/config.hpp"
#include "crowdverify/fusion.hpp"
#include "crowdverify/optics.hpp"
#include "crowdverify/placement.hpp"
#include "crowdverify/simulation.hpp"

namespace crowdverify {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct CommandContext {
  nlohmann::json config = default_config();
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;
};

nlohmann::json to_json(const RunManifest& m);

/// SHA-256 of the compact dump of the effective configuration.
std::string config_hash(const nlohmann::json& config);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Manhattan grid: rows x cols square buildings, one per block of size
/// extent/cols by extent/rows, centered in its block. Heights are drawn
/// uniformly from [height_min, height_max] in row-major order.
nlohmann::json generate_city(const CityGenParams& params);

std::string coverage_curve_csv(int n_los, std::span<const CoveragePoint> curve);
std::string tradeoff_csv(std::span<const TradeoffRow> rows);
std::string metrics_csv(std::span<const EpochReport> reports);
std::string crisis_map_csv(const CrisisMap& map);
nlohmann::json report_to_json(const ScenarioConfig& config, const ScenarioResult& result);

/// Trust-weighted rank displacement caused by sybil votes, summed over
/// labels, against a map of honest votes only.
struct SybilSensitivity {
  double weighted = 0.0;    // configured multipliers
  double unweighted = 0.0;  // every multiplier set to 1
};
SybilSensitivity sybil_sensitivity(const ScenarioResult& result, const TrustWeights& weights, const GroundGrid& grid);

int run_gen_city(const CommandContext& ctx);
int run_plan(const CommandContext& ctx, const std::filesystem::path& city_path);
int run_scan_tradeoff(const CommandContext& ctx);
int run_simulate(const CommandContext& ctx, const std::filesystem::path& scenario_path);
int run_fuse(const CommandContext& ctx, const std::filesystem::path& ledger_path,
             const std::optional<std::filesystem::path>& weights_path);
/// 0 on an intact chain, 1 on corruption (the index is printed).
int run_verify_ledger(const std::filesystem::path& ledger_path, std::ostream& out);

}  // namespace crowdverify
