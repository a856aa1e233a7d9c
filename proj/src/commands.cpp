#include "crowdverify/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace crowdverify {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const CommandContext& ctx, const std::string& command, RunManifest m, const Stopwatch& sw) {
  m.config_hash = config_hash(ctx.config);
  m.wall_clock_s = sw.seconds();
  write_file_atomic(ctx.out_dir / ("manifest_" + command + ".json"), to_json(m).dump(2) + "\n");
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

RunManifest manifest(std::uint64_t seed, std::vector<std::string> inputs, std::vector<std::string> outputs) {
  RunManifest m;
  m.seed = seed;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  return m;
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
  return {{"tool_version", m.tool_version}, {"config_hash", m.config_hash}, {"seed", m.seed},
          {"inputs", m.inputs},             {"outputs", m.outputs},         {"wall_clock_s", m.wall_clock_s}};
}

std::string config_hash(const nlohmann::json& config) {
  const std::string text = config.dump();
  return to_hex(sha256(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CommandError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw CommandError("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json generate_city(const CityGenParams& p) {
  if (p.rows < 0 || p.cols < 0) throw CommandError("gen-city: invalid-dimension: rows and cols must be >= 0");
  if (!(p.extent > 0.0)) throw CommandError("gen-city: invalid-dimension: extent must be > 0");
  const bool empty = p.rows == 0 || p.cols == 0;
  if (!empty) {
    const double pitch = std::min(p.extent / p.cols, p.extent / p.rows);
    if (!(p.footprint > 0.0) || p.footprint >= pitch) {
      throw CommandError("gen-city: invalid-dimension: footprint must be in (0, block pitch " + num(pitch) + ")");
    }
    if (!(p.height_min > 0.0) || p.height_max < p.height_min) {
      throw CommandError("gen-city: invalid-dimension: need 0 < height_min <= height_max");
    }
  }
  std::mt19937_64 rng(p.seed);
  std::vector<Building> buildings;
  if (!empty) {
    const double px = p.extent / p.cols;
    const double py = p.extent / p.rows;
    for (int r = 0; r < p.rows; ++r) {
      for (int c = 0; c < p.cols; ++c) {
        const double x0 = c * px + 0.5 * (px - p.footprint);
        const double y0 = r * py + 0.5 * (py - p.footprint);
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        Building b;
        b.footprint = {{x0, y0}, {x0 + p.footprint, y0}, {x0 + p.footprint, y0 + p.footprint}, {x0, y0 + p.footprint}};
        b.height = p.height_min + u * (p.height_max - p.height_min);
        buildings.push_back(std::move(b));
      }
    }
  }
  // Round-trip through the model so the output is always a valid city file.
  return urban_model_to_json(UrbanModel(Rect{{0.0, 0.0}, {p.extent, p.extent}}, std::move(buildings)));
}

std::string coverage_curve_csv(int n_los, std::span<const CoveragePoint> curve) {
  std::string out = "k,n_los,coverage_fraction\n";
  for (const auto& pt : curve) out += std::to_string(pt.k) + "," + std::to_string(n_los) + "," + num(pt.fraction) + "\n";
  return out;
}

std::string tradeoff_csv(std::span<const TradeoffRow> rows) {
  std::string out = "wz_m,scan_time_s,outage_probability\n";
  for (const auto& r : rows) out += num(r.wz) + "," + num(r.scan_time) + "," + num(r.outage) + "\n";
  return out;
}

std::string metrics_csv(std::span<const EpochReport> reports) {
  std::string out = "epoch,votes,verified,unverified,unknown,false_verified,suppressed\n";
  for (const auto& r : reports) {
    out += std::to_string(r.epoch) + "," + std::to_string(r.votes_submitted) + "," +
           std::to_string(r.flag_total(Flag::verified)) + "," + std::to_string(r.flag_total(Flag::unverified)) + "," +
           std::to_string(r.flag_total(Flag::unknown)) + "," + std::to_string(r.false_verified) + "," +
           std::to_string(r.suppressed) + "\n";
  }
  return out;
}

std::string crisis_map_csv(const CrisisMap& map) {
  std::string out = "cell_x,cell_y,label,score\n";
  const auto& g = map.grid();
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    for (SemanticLabel l : kAllLabels) {
      const double s = map.score(c, l);
      if (s == 0.0) continue;
      out += std::to_string(c % g.nx) + "," + std::to_string(c / g.nx) + "," + std::string(to_string(l)) + "," +
             num(s) + "\n";
    }
  }
  return out;
}

nlohmann::json report_to_json(const ScenarioConfig& config, const ScenarioResult& result) {
  auto epochs = nlohmann::json::array();
  for (const auto& r : result.reports) {
    nlohmann::json att;
    nlohmann::json confusion;
    for (Flag f : {Flag::verified, Flag::unverified, Flag::unknown}) {
      const auto fi = static_cast<std::size_t>(f);
      att[std::string(to_string(f))] = {{"optical", r.attestations[fi][0]}, {"rf", r.attestations[fi][1]}};
      for (VoteTruth t : {VoteTruth::honest, VoteTruth::spoofed, VoteTruth::sybil}) {
        confusion[std::string(to_string(t))][std::string(to_string(f))] = r.confusion[static_cast<std::size_t>(t)][fi];
      }
    }
    auto votes = nlohmann::json::array();
    for (const auto& v : r.votes) {
      auto flags = nlohmann::json::array();
      for (const auto& e : v.events) {
        flags.push_back({{"verifier", e.verifier},
                         {"flag", to_string(e.flag)},
                         {"los", e.los},
                         {"responder_present", e.responder_present},
                         {"link_ok", e.link_ok},
                         {"suppressed", e.suppressed},
                         {"forged", e.forged},
                         {"logged", e.logged}});
      }
      votes.push_back({{"vote_id", to_hex(v.vote_id)},
                       {"ledger_index", v.ledger_index},
                       {"agent", v.agent},
                       {"truth", to_string(v.truth)},
                       {"flags", flags}});
    }
    epochs.push_back({{"epoch", r.epoch},
                      {"votes_submitted", r.votes_submitted},
                      {"votes_rejected", r.votes_rejected},
                      {"attestations", att},
                      {"confusion", confusion},
                      {"false_verified", r.false_verified},
                      {"false_verified_by_honest", r.false_verified_by_honest},
                      {"suppressed", r.suppressed},
                      {"ledger_errors", r.ledger_errors},
                      {"votes", votes}});
  }
  const auto& m = result.metrics;
  return {{"version", 1},
          {"seed", config.seed},
          {"chain_ok", verify_chain(result.ledger).ok},
          {"ledger_entries", result.ledger.size()},
          {"metrics",
           {{"verification_precision", m.verification_precision},
            {"verification_recall", m.verification_recall},
            {"suppression_exposure", m.suppression_exposure},
            {"censored_fraction", m.censored_fraction}}},
          {"epochs", epochs}};
}

SybilSensitivity sybil_sensitivity(const ScenarioResult& result, const TrustWeights& weights, const GroundGrid& grid) {
  std::map<Hash256, VoteTruth> truth;
  for (const auto& r : result.reports) {
    for (const auto& v : r.votes) truth[v.vote_id] = v.truth;
  }
  const auto all = collect_votes(result.ledger);
  std::vector<VoteView> honest;
  for (const auto& v : all) {
    auto it = truth.find(v.vote.vote_id);
    if (it != truth.end() && it->second == VoteTruth::honest) honest.push_back(v);
  }
  TrustWeights flat = weights;
  for (auto& row : flat.flag_multipliers) row.fill(1.0);

  SybilSensitivity out;
  for (SemanticLabel l : kAllLabels) {
    out.weighted += rank_displacement(build_crisis_map(honest, weights, grid), build_crisis_map(all, weights, grid), l);
    out.unweighted += rank_displacement(build_crisis_map(honest, flat, grid), build_crisis_map(all, flat, grid), l);
  }
  return out;
}

int run_gen_city(const CommandContext& ctx) {
  Stopwatch sw;
  CityGenParams p = city_params(ctx.config);
  if (ctx.seed) p.seed = *ctx.seed;
  const auto city = generate_city(p);
  const auto out = ctx.out_dir / "city.json";
  write_file_atomic(out, json_text(city));
  write_manifest(ctx, "gen-city", manifest(p.seed, {}, {out.string()}), sw);
  return 0;
}

int run_plan(const CommandContext& ctx, const std::filesystem::path& city_path) {
  Stopwatch sw;
  const UrbanModel model = load_urban_model(city_path);
  const PlanParams pp = plan_params(ctx.config);
  const GroundGrid grid_cfg = grid_params(ctx.config);
  const GroundGrid grid = GroundGrid::covering(model.bounds(), grid_cfg.cell_size, grid_cfg.sample_height);

  PlacementProblem problem;
  problem.candidate_sites = candidate_sites(model, pp.altitude, pp.spacing);
  problem.targets = outdoor_targets(grid, model);
  problem.n_los = pp.n_los;
  problem.max_uavs = pp.max_uavs;
  validate(problem);
  if (problem.targets.empty()) throw CommandError("plan: no outdoor ground targets in the city");

  const BitMatrix vis = visibility_matrix(problem.candidate_sites, problem.targets, model);
  const PlacementResult result = greedy_place(problem, vis);

  const auto placement_path = ctx.out_dir / "placement.json";
  const auto curve_path = ctx.out_dir / "coverage_curve.csv";
  const std::string placement = json_text(placement_to_json(result.chosen_sites));
  const std::string curve = coverage_curve_csv(pp.n_los, result.coverage_curve);
  write_file_atomic(placement_path, placement);
  write_file_atomic(curve_path, curve);
  write_manifest(ctx, "plan",
                 manifest(ctx.seed.value_or(0), {city_path.string()}, {placement_path.string(), curve_path.string()}),
                 sw);
  return 0;
}

int run_scan_tradeoff(const CommandContext& ctx) {
  Stopwatch sw;
  const OpticsSetup o = optics_setup(ctx.config);
  validate(o.mrr);
  validate(o.noise);
  const auto rows = tradeoff_sweep(o.wz_sweep, o.range, o.beam, o.mrr, o.noise, o.scan);
  const auto out = ctx.out_dir / "tradeoff.csv";
  write_file_atomic(out, tradeoff_csv(rows));
  write_manifest(ctx, "scan-tradeoff", manifest(ctx.seed.value_or(0), {}, {out.string()}), sw);
  return 0;
}

int run_simulate(const CommandContext& ctx, const std::filesystem::path& scenario_path) {
  Stopwatch sw;
  ScenarioConfig sc = load_scenario(scenario_path, ctx.config);
  if (ctx.seed) sc.seed = *ctx.seed;
  const ScenarioResult result = run_scenario(sc);
  if (!verify_chain(result.ledger).ok) throw CommandError("simulate: final ledger failed verification");

  nlohmann::json report = report_to_json(sc, result);
  const GroundGrid grid = grid_params(ctx.config);
  const auto weights = trust_weights(ctx.config.value("trust", nlohmann::json::object()));
  const auto sens = sybil_sensitivity(result, weights, grid);
  report["sybil_rank_displacement"] = {{"weighted", sens.weighted}, {"unweighted", sens.unweighted}};
  const OpticsSetup optics = optics_setup(ctx.config);
  report["scan_time_s"] = scan_time(optics.scan, sc.link.beam.wz_target);

  const auto report_path = ctx.out_dir / "report.json";
  const auto ledger_path = ctx.out_dir / "ledger.ndjson";
  const auto metrics_path = ctx.out_dir / "metrics.csv";
  const std::string report_text = json_text(report);
  const std::string ledger_text = to_ndjson(result.ledger);
  const std::string metrics_text = metrics_csv(result.reports);
  write_file_atomic(report_path, report_text);
  write_file_atomic(ledger_path, ledger_text);
  write_file_atomic(metrics_path, metrics_text);
  write_manifest(ctx, "simulate",
                 manifest(sc.seed, {scenario_path.string()},
                          {report_path.string(), ledger_path.string(), metrics_path.string()}),
                 sw);
  return 0;
}

int run_fuse(const CommandContext& ctx, const std::filesystem::path& ledger_path,
             const std::optional<std::filesystem::path>& weights_path) {
  Stopwatch sw;
  const std::string text = read_text_file(ledger_path);
  const auto parsed = parse_ndjson(text);
  const VerifyResult check = verify_ndjson(text);
  if (!check.ok) throw CommandError("fuse: ledger corrupt at index " + std::to_string(check.corrupt_index));

  nlohmann::json trust = ctx.config.value("trust", nlohmann::json::object());
  if (weights_path) trust.merge_patch(read_json_file(*weights_path));
  const TrustWeights weights = trust_weights(trust);
  const GroundGrid grid = grid_params(ctx.config);
  const auto votes = collect_votes(parsed.entries);
  const CrisisMap map = build_crisis_map(votes, weights, grid);
  if (map.out_of_extent() > 0) {
    std::cerr << "fuse: " << map.out_of_extent() << " vote(s) outside the grid extent were not mapped\n";
  }
  const auto out = ctx.out_dir / "crisis_map.csv";
  write_file_atomic(out, crisis_map_csv(map));
  RunManifest m = manifest(ctx.seed.value_or(0), {ledger_path.string()}, {out.string()});
  if (weights_path) m.inputs.push_back(weights_path->string());
  write_manifest(ctx, "fuse", m, sw);
  return 0;
}

int run_verify_ledger(const std::filesystem::path& ledger_path, std::ostream& out) {
  const VerifyResult r = verify_ndjson(read_text_file(ledger_path));
  if (r.ok) {
    out << "ok\n";
    return 0;
  }
  out << "corrupt at index " << r.corrupt_index << "\n";
  return 1;
}

}  // namespace crowdverify
