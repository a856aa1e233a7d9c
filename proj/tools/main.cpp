#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdverify/commands.hpp"

namespace cv = crowdverify;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--config", f.config_path, "JSON config merged over the shipped defaults");
  sub->add_option("--out-dir", f.out_dir, "output directory (env CROWDVERIFY_OUT_DIR)");
  sub->add_option("--set", f.overrides, "config override key.path=value")->take_all();
}

cv::CommandContext make_context(const CommonFlags& f, std::vector<std::string> extra) {
  cv::CommandContext ctx;
  ctx.config = cv::merged_config(f.config_path.empty() ? nlohmann::json() : cv::read_json_file(f.config_path));
  extra.insert(extra.begin(), f.overrides.begin(), f.overrides.end());
  cv::apply_overrides(ctx.config, extra);
  ctx.seed = f.seed;
  if (!f.out_dir.empty()) {
    ctx.out_dir = f.out_dir;
  } else if (const char* env = std::getenv("CROWDVERIFY_OUT_DIR"); env && *env) {
    ctx.out_dir = env;
  }
  return ctx;
}

template <typename T>
void set_if(std::vector<std::string>& out, const std::string& key, const std::optional<T>& v) {
  if (v) out.push_back(key + "=" + nlohmann::json(*v).dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdverify: UAV-verified crowdsourced crisis mapping toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cv::kToolVersion));

  CommonFlags common;

  auto* gen = app.add_subcommand("gen-city", "generate a seeded Manhattan-grid city");
  add_common(gen, common);
  std::optional<int> rows, cols;
  std::optional<double> footprint, hmin, hmax, extent;
  gen->add_option("--rows", rows);
  gen->add_option("--cols", cols);
  gen->add_option("--footprint", footprint, "building side length (m)");
  gen->add_option("--height-min", hmin);
  gen->add_option("--height-max", hmax);
  gen->add_option("--extent", extent, "city side length (m)");

  auto* plan = app.add_subcommand("plan", "greedy UAV placement and coverage curve");
  add_common(plan, common);
  std::string city_path;
  std::optional<int> n_los, max_uavs;
  std::optional<double> altitude, spacing, cell_size;
  plan->add_option("city", city_path, "city JSON")->required();
  plan->add_option("--n-los", n_los);
  plan->add_option("--max-uavs", max_uavs);
  plan->add_option("--altitude", altitude);
  plan->add_option("--spacing", spacing);
  plan->add_option("--cell-size", cell_size, "ground grid cell size (m)");

  auto* scan = app.add_subcommand("scan-tradeoff", "scan time vs outage over the beamwidth sweep");
  add_common(scan, common);
  std::optional<double> range, threshold, jitter_ratio;
  std::optional<int> num_uavs;
  scan->add_option("--range", range, "link range (m)");
  scan->add_option("--threshold", threshold, "detector threshold (W)");
  scan->add_option("--jitter-ratio", jitter_ratio, "pointing jitter sigma / beam radius");
  scan->add_option("--num-uavs", num_uavs);

  auto* sim = app.add_subcommand("simulate", "run a verification protocol scenario");
  add_common(sim, common);
  std::string scenario_path;
  sim->add_option("scenario", scenario_path, "scenario JSON")->required();

  auto* fuse = app.add_subcommand("fuse", "trust-weighted crisis map from a ledger dump");
  add_common(fuse, common);
  std::string ledger_path;
  std::optional<std::string> weights_path;
  fuse->add_option("ledger", ledger_path, "ledger.ndjson")->required();
  fuse->add_option("--weights", weights_path, "JSON trust weights");

  auto* verify = app.add_subcommand("verify-ledger", "check a ledger dump's hash chain and signatures");
  std::string verify_path;
  verify->add_option("ledger", verify_path, "ledger.ndjson")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      std::vector<std::string> extra;
      set_if(extra, "city.rows", rows);
      set_if(extra, "city.cols", cols);
      set_if(extra, "city.footprint_m", footprint);
      set_if(extra, "city.height_min_m", hmin);
      set_if(extra, "city.height_max_m", hmax);
      set_if(extra, "city.extent_m", extent);
      return cv::run_gen_city(make_context(common, extra));
    }
    if (*plan) {
      std::vector<std::string> extra;
      set_if(extra, "plan.n_los", n_los);
      set_if(extra, "plan.max_uavs", max_uavs);
      set_if(extra, "plan.altitude_m", altitude);
      set_if(extra, "plan.spacing_m", spacing);
      set_if(extra, "grid.cell_size_m", cell_size);
      return cv::run_plan(make_context(common, extra), city_path);
    }
    if (*scan) {
      std::vector<std::string> extra;
      set_if(extra, "optics.range_m", range);
      set_if(extra, "optics.noise.detector_threshold_w", threshold);
      set_if(extra, "optics.noise.jitter_ratio", jitter_ratio);
      set_if(extra, "optics.scan.num_uavs", num_uavs);
      return cv::run_scan_tradeoff(make_context(common, extra));
    }
    if (*sim) return cv::run_simulate(make_context(common, {}), scenario_path);
    if (*fuse) {
      std::optional<std::filesystem::path> wp;
      if (weights_path) wp = *weights_path;
      return cv::run_fuse(make_context(common, {}), ledger_path, wp);
    }
    if (*verify) return cv::run_verify_ledger(verify_path, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
