#include "crowdverify/config.hpp"

#include <algorithm>
#include <fstream>

#include "crowdverify/default_config.hpp"

namespace crowdverify {

namespace {

Point3 point3_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + ": expected [x, y, z]");
  return Point3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const nlohmann::json& section(const nlohmann::json& config, const char* name) {
  static const nlohmann::json empty = nlohmann::json::object();
  auto it = config.find(name);
  return it == config.end() ? empty : *it;
}

GroundBehavior parse_ground_behavior(const std::string& s) {
  if (s == "honest") return GroundBehavior::honest;
  if (s == "spoofer") return GroundBehavior::spoofer;
  if (s == "sybil_master") return GroundBehavior::sybil_master;
  throw ConfigError("unknown ground agent behavior '" + s + "'");
}

VerifierBehavior parse_verifier_behavior(const std::string& s) {
  if (s == "honest") return VerifierBehavior::honest;
  if (s == "suppressor") return VerifierBehavior::suppressor;
  if (s == "forger") return VerifierBehavior::forger;
  throw ConfigError("unknown verifier behavior '" + s + "'");
}

}  // namespace

nlohmann::json default_config() { return nlohmann::json::parse(kDefaultConfigJson); }

nlohmann::json merged_config(const nlohmann::json& overlay) {
  nlohmann::json cfg = default_config();
  if (!overlay.is_null()) cfg.merge_patch(overlay);
  return cfg;
}

void apply_overrides(nlohmann::json& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' must look like key.path=value");
    std::string pointer = "/" + a.substr(0, eq);
    for (auto& c : pointer) {
      if (c == '.') c = '/';
    }
    const std::string raw = a.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      value = raw;
    }
    config[nlohmann::json::json_pointer(pointer)] = value;
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
}

CityGenParams city_params(const nlohmann::json& config) {
  const auto& c = section(config, "city");
  CityGenParams p;
  p.extent = c.value("extent_m", p.extent);
  p.rows = c.value("rows", p.rows);
  p.cols = c.value("cols", p.cols);
  p.footprint = c.value("footprint_m", p.footprint);
  p.height_min = c.value("height_min_m", p.height_min);
  p.height_max = c.value("height_max_m", p.height_max);
  p.seed = c.value("seed", p.seed);
  return p;
}

GroundGrid grid_params(const nlohmann::json& config) {
  const auto& g = section(config, "grid");
  GroundGrid grid;
  if (g.contains("origin_m")) {
    grid.origin = Point2{g["origin_m"].at(0).get<double>(), g["origin_m"].at(1).get<double>()};
  }
  grid.cell_size = g.value("cell_size_m", grid.cell_size);
  grid.nx = g.value("nx", std::size_t{100});
  grid.ny = g.value("ny", std::size_t{100});
  grid.sample_height = g.value("sample_height_m", grid.sample_height);
  validate(grid);
  return grid;
}

PlanParams plan_params(const nlohmann::json& config) {
  const auto& c = section(config, "plan");
  PlanParams p;
  p.n_los = c.value("n_los", p.n_los);
  p.max_uavs = c.value("max_uavs", p.max_uavs);
  p.altitude = c.value("altitude_m", p.altitude);
  p.spacing = c.value("spacing_m", p.spacing);
  return p;
}

BeamParams beam_from_json(const nlohmann::json& j, BeamParams b) {
  b.wavelength = j.value("wavelength_m", b.wavelength);
  b.transmit_power = j.value("transmit_power_w", b.transmit_power);
  b.w0 = j.value("w0_m", b.w0);
  b.wz_target = j.value("wz_target_m", b.wz_target);
  b.rx_aperture_radius = j.value("rx_aperture_radius_m", b.rx_aperture_radius);
  return b;
}

MrrParams mrr_from_json(const nlohmann::json& j, MrrParams m) {
  m.aperture_radius = j.value("aperture_radius_m", m.aperture_radius);
  m.reflectivity = j.value("reflectivity", m.reflectivity);
  m.modulation_depth = j.value("modulation_depth", m.modulation_depth);
  return m;
}

LinkNoise noise_from_json(const nlohmann::json& j, LinkNoise n) {
  n.pointing_jitter_sigma = j.value("pointing_jitter_sigma_m", n.pointing_jitter_sigma);
  n.detector_threshold = j.value("detector_threshold_w", n.detector_threshold);
  if (j.contains("jitter_ratio")) {
    if (j["jitter_ratio"].is_null()) {
      n.jitter_ratio.reset();
    } else {
      n.jitter_ratio = j["jitter_ratio"].get<double>();
    }
  }
  return n;
}

OpticsSetup optics_setup(const nlohmann::json& config) {
  const auto& o = section(config, "optics");
  OpticsSetup s;
  s.range = o.value("range_m", s.range);
  s.beam = beam_from_json(section(o, "beam"));
  s.mrr = mrr_from_json(section(o, "mrr"));
  s.noise = noise_from_json(section(o, "noise"));
  const auto& sc = section(o, "scan");
  s.scan.dwell_time = sc.value("dwell_time_s", s.scan.dwell_time);
  s.scan.num_uavs = sc.value("num_uavs", s.scan.num_uavs);
  s.scan.region_area = sc.value("region_area_m2", s.scan.region_area);
  s.scan.overlap_factor = sc.value("overlap_factor", s.scan.overlap_factor);
  if (o.contains("wz_sweep_m")) s.wz_sweep = o["wz_sweep_m"].get<std::vector<double>>();
  return s;
}

TrustWeights trust_weights(const nlohmann::json& t) {
  TrustWeights w = TrustWeights::defaults();
  if (t.contains("flag_multipliers")) {
    for (const auto& [flag, tiers] : t["flag_multipliers"].items()) {
      for (const auto& [tier, value] : tiers.items()) {
        w.multiplier(parse_flag(flag), parse_tier(tier)) = value.get<double>();
      }
    }
  }
  if (t.contains("semantic_weights")) {
    for (const auto& [label, value] : t["semantic_weights"].items()) w.semantic(parse_label(label)) = value.get<double>();
  }
  w.baseline = t.value("baseline", w.baseline);
  validate(w);
  return w;
}

ProtocolParams protocol_params(const nlohmann::json& config) {
  const auto& p = section(config, "protocol");
  ProtocolParams out;
  out.capture_radius = p.value("capture_radius_m", out.capture_radius);
  out.min_assignees = p.value("min_assignees", plan_params(config).n_los);
  out.start_time_ms = p.value("start_time_ms", out.start_time_ms);
  out.epoch_duration_ms = p.value("epoch_duration_ms", out.epoch_duration_ms);
  out.freshness_window_ms = p.value("freshness_window_ms", out.freshness_window_ms);
  return out;
}

nlohmann::json placement_to_json(const std::vector<Point3>& sites) {
  auto arr = nlohmann::json::array();
  for (const auto& s : sites) arr.push_back({s.x, s.y, s.z});
  return {{"version", 1}, {"sites", arr}};
}

std::vector<Point3> placement_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("version", 0) != 1 || !j.contains("sites") || !j["sites"].is_array()) {
    throw ConfigError("placement: expected {\"version\":1,\"sites\":[...]}");
  }
  std::vector<Point3> sites;
  for (const auto& s : j["sites"]) sites.push_back(point3_from_json(s, "placement site"));
  return sites;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                  const nlohmann::json& config) {
  for (const char* key : {"seed", "city", "placement", "agents", "epochs"}) {
    if (!j.contains(key)) throw ConfigError(std::string("scenario: missing key '") + key + "'");
  }
  for (const auto& [key, _] : j.items()) {
    static const char* allowed[] = {"seed", "city", "placement", "agents", "link", "epochs", "assignment_policy",
                                    "protocol"};
    if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return key == a; }) ==
        std::end(allowed)) {
      throw ConfigError("scenario: unknown key '" + key + "'");
    }
  }
  ScenarioConfig sc;
  sc.seed = j["seed"].get<std::uint64_t>();
  sc.epochs = j["epochs"].get<int>();

  const auto& city = j["city"];
  sc.model = city.is_string() ? load_urban_model(base_dir / city.get<std::string>()) : urban_model_from_json(city);
  const auto& placement = j["placement"];
  sc.placement = placement_from_json(placement.is_string() ? read_json_file(base_dir / placement.get<std::string>())
                                                           : placement);

  const std::string policy = j.value("assignment_policy", std::string("nearest"));
  if (policy == "nearest") {
    sc.assignment_policy = AssignmentPolicy::nearest;
  } else if (policy == "partition") {
    sc.assignment_policy = AssignmentPolicy::partition;
  } else {
    throw ConfigError("scenario: unknown assignment_policy '" + policy + "'");
  }

  // Link defaults come from the optics section.
  const OpticsSetup optics = optics_setup(config);
  sc.link.beam = optics.beam;
  sc.link.mrr = optics.mrr;
  sc.link.noise = optics.noise;
  if (j.contains("link")) {
    const auto& l = j["link"];
    sc.link.beam = beam_from_json(section(l, "beam"), sc.link.beam);
    sc.link.mrr = mrr_from_json(section(l, "mrr"), sc.link.mrr);
    sc.link.noise = noise_from_json(section(l, "noise"), sc.link.noise);
  }

  nlohmann::json proto_cfg = config;
  if (j.contains("protocol")) proto_cfg["protocol"].merge_patch(j["protocol"]);
  sc.protocol = protocol_params(proto_cfg);

  const auto& agents = j["agents"];
  for (const auto& g : agents.value("ground", nlohmann::json::array())) {
    GroundAgent a;
    a.behavior = parse_ground_behavior(g.value("behavior", std::string("honest")));
    if (g.contains("true_location") && !g["true_location"].is_null()) {
      a.true_location = point3_from_json(g["true_location"], "ground agent true_location");
    }
    if (g.contains("claimed")) a.claimed = point3_from_json(g["claimed"], "ground agent claimed");
    a.sybil_count = g.value("count", 0);
    a.has_mrr = g.value("has_mrr", true);
    a.label = parse_label(g.value("label", std::string("medical")));
    a.severity = g.value("severity", 3);
    sc.ground.push_back(a);
  }
  if (agents.contains("verifiers")) {
    for (const auto& v : agents["verifiers"]) {
      VerifierAgent a;
      a.site = v.at("site").get<std::size_t>();
      a.behavior = parse_verifier_behavior(v.value("behavior", std::string("honest")));
      a.p_suppress = v.value("p_suppress", a.behavior == VerifierBehavior::suppressor ? 1.0 : 0.0);
      a.colluding_agents = v.value("colluding_agents", std::vector<std::size_t>{});
      a.tier = parse_tier(v.value("tier", std::string("optical")));
      sc.verifiers.push_back(a);
    }
  } else {
    for (std::size_t s = 0; s < sc.placement.size(); ++s) {
      VerifierAgent a;
      a.site = s;
      sc.verifiers.push_back(a);
    }
  }
  validate(sc);
  return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const nlohmann::json& config) {
  return scenario_from_json(read_json_file(path), path.parent_path(), config);
}

}  // namespace crowdverify
