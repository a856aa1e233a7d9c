// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "crowdverify/commands.hpp"
#include "optics_oracle.hpp"
#include "support.hpp"

using namespace crowdverify;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Coverage curve shape on a synthetic 20x20 city.
Outcome coverage_shape() {
  Stopwatch sw;
  CityGenParams cp;  // 20x20 blocks over 3000 m
  const UrbanModel model = urban_model_from_json(generate_city(cp));
  const GroundGrid grid = GroundGrid::covering(model.bounds(), cp.extent / 60.0);
  if (grid.nx != 60 || grid.ny != 60) return {false, "grid is not 60x60"};

  PlacementProblem problem;
  problem.candidate_sites = candidate_sites(model, 120.0, 150.0);
  problem.targets = outdoor_targets(grid, model);
  problem.max_uavs = 150;
  const BitMatrix vis = visibility_matrix(problem.candidate_sites, problem.targets, model);

  std::vector<std::vector<double>> curves;
  std::vector<int> first90;
  bool monotone = true;
  for (int n = 1; n <= 3; ++n) {
    problem.n_los = n;
    const auto r = greedy_place(problem, vis);
    std::vector<double> c;
    for (const auto& pt : r.coverage_curve) {
      if (!c.empty() && pt.fraction < c.back()) monotone = false;
      c.push_back(pt.fraction);
    }
    c.resize(static_cast<std::size_t>(problem.max_uavs), c.empty() ? 0.0 : c.back());
    auto it = std::find_if(c.begin(), c.end(), [](double f) { return f >= 0.9; });
    first90.push_back(it == c.end() ? -1 : static_cast<int>(it - c.begin()) + 1);
    curves.push_back(std::move(c));
  }
  bool ordered = true;
  for (std::size_t k = 0; k < curves[0].size(); ++k) {
    ordered = ordered && curves[0][k] >= curves[1][k] && curves[1][k] >= curves[2][k];
  }
  const bool reached = std::all_of(first90.begin(), first90.end(), [](int k) { return k > 0; });
  const bool increasing = reached && first90[0] < first90[1] && first90[1] < first90[2];
  const double t = sw.seconds();
  return {monotone && ordered && increasing && t <= 120.0,
          fmt("monotone=%d ordered=%d first90(N=1,2,3)=%d,%d,%d targets=%zu sites=%zu time=%.1fs", monotone, ordered,
              first90[0], first90[1], first90[2], problem.targets.size(), problem.candidate_sites.size(), t)};
}

// 2. Greedy against the exhaustive optimum on small geometric instances.
Outcome greedy_quality() {
  Stopwatch sw;
  std::mt19937_64 rng(20240601);
  const double bound = 1.0 - std::exp(-1.0);
  int below_bound = 0, exceeds = 0, multi = 0, matched = 0;
  for (int inst = 0; inst < 200; ++inst) {
    std::vector<Building> bs;
    const int nb = std::uniform_int_distribution<int>(2, 8)(rng);
    for (int k = 0; k < nb; ++k) {
      const double cx = testsupport::uniform(rng, 20, 180), cy = testsupport::uniform(rng, 20, 180);
      const double hw = testsupport::uniform(rng, 4, 15), hh = testsupport::uniform(rng, 4, 15);
      bs.push_back(testsupport::box(cx - hw, cy - hh, cx + hw, cy + hh, testsupport::uniform(rng, 10, 60)));
    }
    const UrbanModel model(Rect{{0, 0}, {200, 200}}, bs);
    PlacementProblem p;
    const int nc = std::uniform_int_distribution<int>(2, 12)(rng);
    const int nt = std::uniform_int_distribution<int>(3, 25)(rng);
    while (static_cast<int>(p.candidate_sites.size()) < nc) {
      const Point3 s{testsupport::uniform(rng, 0, 200), testsupport::uniform(rng, 0, 200), testsupport::uniform(rng, 20, 80)};
      if (!model.is_inside_building(s)) p.candidate_sites.push_back(s);
    }
    while (static_cast<int>(p.targets.size()) < nt) {
      const Point3 t{testsupport::uniform(rng, 0, 200), testsupport::uniform(rng, 0, 200), 1.5};
      if (!model.is_indoor({t.x, t.y})) p.targets.push_back(t);
    }
    const BitMatrix vis = visibility_matrix(p.candidate_sites, p.targets, model, 1);
    p.max_uavs = std::uniform_int_distribution<int>(1, std::min(nc, 6))(rng);
    for (int n = 1; n <= 3; ++n) {
      p.n_los = n;
      const auto g = greedy_place(p, vis);
      const double gf = g.coverage_curve.empty() ? 0.0 : g.coverage_curve.back().fraction;
      const double opt = brute_force_place(p, vis).fraction;
      if (n == 1) {
        below_bound += gf + 1e-12 < bound * opt;
      } else {
        ++multi;
        exceeds += gf > opt + 1e-12;
        matched += std::abs(gf - opt) <= 1e-12;
      }
    }
  }
  const double match_rate = static_cast<double>(matched) / multi;
  const double t = sw.seconds();
  return {below_bound == 0 && exceeds == 0 && match_rate >= 0.5 && t <= 60.0,
          fmt("n_los=1 below (1-1/e)*opt: %d/200; n_los=2,3 above opt: %d, match rate %.3f; time=%.1fs", below_bound,
              exceeds, match_rate, t)};
}

// 3. Scan-time / outage tradeoff over the default sweep.
Outcome tradeoff_shape() {
  Stopwatch sw;
  const OpticsSetup o = optics_setup(default_config());
  const auto rows = tradeoff_sweep(o.wz_sweep, o.range, o.beam, o.mrr, o.noise, o.scan);
  const std::size_t n = rows.size();
  bool scan_dec = true, out_inc = true;
  for (std::size_t i = 1; i < n; ++i) {
    scan_dec = scan_dec && rows[i].scan_time < rows[i - 1].scan_time;
    out_inc = out_inc && rows[i].outage >= rows[i - 1].outage;
  }
  // min-max normalized curves; look for a sign change away from the ends
  auto norm = [&](auto get) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : rows) lo = std::min(lo, get(r)), hi = std::max(hi, get(r));
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(hi > lo ? (get(r) - lo) / (hi - lo) : 0.0);
    return v;
  };
  const auto ns = norm([](const TradeoffRow& r) { return r.scan_time; });
  const auto no = norm([](const TradeoffRow& r) { return r.outage; });
  int cross_at = -1;
  for (std::size_t i = 1; i + 2 < n; ++i) {
    if ((ns[i] - no[i]) > 0 && (ns[i + 1] - no[i + 1]) <= 0) cross_at = static_cast<int>(i);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    BeamParams b = o.beam;
    b.w0 = waist_for_radius(rows[i].wz, o.range, b.wavelength);
    const double sigma = effective_jitter_sigma(o.range, b, o.noise);
    const double mc = testsupport::mc_outage(o.range, b, o.mrr, o.noise.detector_threshold, sigma, 1000 + i);
    worst = std::max(worst, std::abs(mc - rows[i].outage));
  }
  const double t = sw.seconds();
  return {n >= 8 && scan_dec && out_inc && cross_at >= 0 && worst <= 0.003 && t <= 60.0,
          fmt("points=%zu scan_decreasing=%d outage_nondecreasing=%d crossing between wz=%g and %g; max |MC-model|=%.5f; "
              "time=%.1fs",
              n, scan_dec, out_inc, cross_at >= 0 ? rows[cross_at].wz : NAN, cross_at >= 0 ? rows[cross_at + 1].wz : NAN,
              worst, t)};
}

// 4. Scan time arithmetic.
Outcome scan_arithmetic() {
  const ScanConfig c{0.050, 20, 1.0e6, 1.0};
  const double t = scan_time(c, 10.0);
  return {t == 8.0, fmt("directions=%lld scan_time=%.17g s", pointing_directions(c, 10.0), t)};
}

// 5. Ledger tamper evidence, replay and forgery rejection.
Outcome ledger_integrity() {
  const auto& scheme = default_signature_scheme();
  Ledger ledger(scheme);
  const std::int64_t now = 1'700'000'000'000;
  ledger.set_clock(now);
  std::vector<KeyPair> users, verifiers;
  for (std::uint8_t i = 0; i < 8; ++i) {
    users.push_back(scheme.keypair_from_seed(Bytes(32, static_cast<std::uint8_t>(i + 1))));
    verifiers.push_back(scheme.keypair_from_seed(Bytes(32, static_cast<std::uint8_t>(i + 101))));
    ledger.register_identity({users.back().public_key, Role::user});
    ledger.register_identity({verifiers.back().public_key, Role::verifier});
  }
  std::mt19937_64 rng(55);
  std::vector<VoteRecord> votes;
  while (ledger.size() < 500) {
    if (votes.empty() || rng() % 3 != 0) {
      const auto& u = users[rng() % users.size()];
      votes.push_back(make_vote(scheme, u, {testsupport::uniform(rng, 0, 3000), testsupport::uniform(rng, 0, 3000), 1.5},
                                now - static_cast<std::int64_t>(rng() % 1000), static_cast<SemanticLabel>(rng() % kLabelCount),
                                1 + static_cast<int>(rng() % 5), rng()));
      ledger.submit_vote(votes.back());
    } else {
      ledger.submit_attestation(make_attestation(scheme, verifiers[rng() % verifiers.size()],
                                                 votes[rng() % votes.size()].vote_id, static_cast<Flag>(rng() % 3),
                                                 static_cast<Tier>(rng() % 2), now));
    }
  }
  const auto entries = ledger.entries();
  const Bytes bytes = serialize_ledger(entries);
  std::vector<std::uint64_t> owner;
  for (const auto& e : entries) owner.insert(owner.end(), 8 + 32 + 4 + e.payload.size() + 32, e.index);

  int missed = 0, late = 0;
  for (int m = 0; m < 1000; ++m) {
    const std::size_t pos = rng() % bytes.size();
    const auto mask = static_cast<std::uint8_t>(1 + rng() % 255);
    Bytes copy = bytes;
    copy[pos] ^= mask;
    const auto r = verify_serialized(copy);
    missed += r.ok;
    late += !r.ok && r.corrupt_index > owner[pos];
  }

  int replay_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const auto& e = entries[rng() % entries.size()];
    const Payload p = e.decoded();
    if (!std::holds_alternative<VoteRecord>(p)) {
      --i;
      continue;
    }
    try {
      ledger.submit_vote(std::get<VoteRecord>(decode_payload(e.payload)));
    } catch (const LedgerError& err) {
      replay_ok += err.code() == LedgerErrc::replayed_nonce;
    }
  }

  int forged = 0, rejected = 0;
  for (int i = 0; i < 300; ++i) {
    const auto& real = users[i % users.size()];
    const auto& other = users[(i + 1) % users.size()];
    VoteRecord v = make_vote(scheme, real, {1, 2, 1.5}, now, SemanticLabel::medical, 3, 1'000'000 + i);
    switch (i % 3) {
      case 0:  // claims another author
        v.author = other.public_key;
        break;
      case 1:  // random signature
        for (auto& b : v.signature) b = static_cast<std::uint8_t>(rng());
        break;
      case 2:  // single flipped bit
        v.signature[rng() % v.signature.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        break;
    }
    v.vote_id = compute_vote_id(v);
    ++forged;
    try {
      ledger.submit_vote(v);
    } catch (const LedgerError& err) {
      rejected += err.code() == LedgerErrc::bad_signature;
    }
    AttestationRecord a = make_attestation(scheme, verifiers[i % verifiers.size()], votes[i % votes.size()].vote_id,
                                           Flag::verified, Tier::optical, now);
    a.signature[rng() % a.signature.size()] ^= 0x40;
    ++forged;
    try {
      ledger.submit_attestation(a);
    } catch (const LedgerError& err) {
      rejected += err.code() == LedgerErrc::bad_signature;
    }
  }
  const bool pristine = verify_serialized(bytes).ok && ledger.size() == 500;
  return {pristine && missed == 0 && late == 0 && replay_ok == 100 && rejected == forged,
          fmt("entries=%zu mutations undetected=%d detected-late=%d; replays rejected=%d/100; forgeries rejected=%d/%d",
              entries.size(), missed, late, replay_ok, rejected, forged)};
}

ScenarioConfig open_scenario(std::size_t n_honest) {
  ScenarioConfig c;
  c.seed = 3;
  c.model = UrbanModel(Rect{{0, 0}, {1200, 1200}}, {});
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) c.placement.push_back({200.0 + 400 * ix, 200.0 + 400 * iy, 120});
  }
  for (std::size_t s = 0; s < c.placement.size(); ++s) {
    VerifierAgent v;
    v.site = s;
    c.verifiers.push_back(v);
  }
  std::mt19937_64 rng(31);
  for (std::size_t i = 0; i < n_honest; ++i) {
    GroundAgent a;
    a.true_location = Point3{testsupport::uniform(rng, 0, 1200), testsupport::uniform(rng, 0, 1200), 1.5};
    c.ground.push_back(a);
  }
  c.link.noise = LinkNoise{};  // zero jitter, zero threshold
  return c;
}

// 6. Flag soundness without link noise.
Outcome protocol_soundness() {
  ScenarioConfig honest = open_scenario(60);
  const auto r1 = run_scenario(honest);
  std::size_t votes = 0, verified_votes = 0, non_verified_flags = 0;
  for (const auto& v : r1.reports[0].votes) {
    ++votes;
    bool any = false;
    for (const auto& e : v.events) {
      any = any || (e.logged && e.flag == Flag::verified);
      non_verified_flags += e.flag != Flag::verified;
    }
    verified_votes += any;
  }
  const bool all_verified = votes == 60 && verified_votes == votes && non_verified_flags == 0;

  ScenarioConfig spoofed = honest;
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    GroundAgent s;
    s.behavior = GroundBehavior::spoofer;
    for (;;) {
      s.claimed = {testsupport::uniform(rng, 0, 1200), testsupport::uniform(rng, 0, 1200), 1.5};
      bool clear = true;
      for (const auto& g : honest.ground) clear = clear && distance(*g.true_location, s.claimed) > 10.0;
      if (clear) break;
    }
    spoofed.ground.push_back(s);
  }
  const auto r2 = run_scenario(spoofed);
  const auto& rep = r2.reports[0];
  const std::size_t unverified = rep.flag_total(Flag::unverified);
  const std::size_t honest_verified = rep.confusion[0][static_cast<std::size_t>(Flag::verified)];
  const bool spoof_ok = unverified == 10 && rep.false_verified_by_honest == 0 && honest_verified == 60;

  // canyon between two tall slabs, every verifier outside it
  ScenarioConfig occ;
  occ.seed = 5;
  occ.model = UrbanModel(Rect{{0, 0}, {1000, 1000}},
                         {testsupport::box(100, 100, 200, 900, 200), testsupport::box(300, 100, 400, 900, 200)});
  occ.placement = {{50, 500, 120}, {450, 500, 120}, {50, 950, 120}};
  for (std::size_t s = 0; s < 3; ++s) {
    VerifierAgent v;
    v.site = s;
    occ.verifiers.push_back(v);
  }
  occ.protocol.min_assignees = 3;
  GroundAgent a;
  a.true_location = Point3{250, 500, 1.5};
  occ.ground.push_back(a);
  const auto r3 = run_scenario(occ);
  const auto& ev = r3.reports[0].votes.at(0).events;
  const bool occluded_unknown =
      ev.size() == 3 && std::all_of(ev.begin(), ev.end(), [](const FlagEvent& e) { return e.flag == Flag::unknown; });

  return {all_verified && spoof_ok && occluded_unknown,
          fmt("all-honest verified %zu/%zu; with 10 spoofers: unverified=%zu false-verified-by-honest=%zu honest verified "
              "%zu/60; occluded vote flags unknown=%d (%zu flags)",
              verified_votes, votes, unverified, rep.false_verified_by_honest, honest_verified, occluded_unknown,
              ev.size())};
}

// 7. Redundant assignment against a full suppressor.
Outcome anti_censorship() {
  CityGenParams cp;
  cp.extent = 1200;
  cp.rows = 8;
  cp.cols = 8;
  cp.footprint = 100;
  cp.seed = 4;
  const UrbanModel model = urban_model_from_json(generate_city(cp));
  PlacementProblem p;
  p.candidate_sites = candidate_sites(model, 120, 150);
  p.targets = outdoor_targets(GroundGrid::covering(model.bounds(), 30.0), model);
  p.n_los = 2;
  p.max_uavs = 30;
  const auto placed = greedy_place(p, visibility_matrix(p.candidate_sites, p.targets, model));

  ScenarioConfig c;
  c.seed = 17;
  c.model = model;
  c.placement = placed.chosen_sites;
  for (std::size_t s = 0; s < c.placement.size(); ++s) {
    VerifierAgent v;
    v.site = s;
    c.verifiers.push_back(v);
  }
  std::mt19937_64 rng(71);
  while (c.ground.size() < 200) {
    const Point3 t{testsupport::uniform(rng, 0, 1200), testsupport::uniform(rng, 0, 1200), 1.5};
    if (model.is_indoor({t.x, t.y})) continue;
    GroundAgent a;
    a.true_location = t;
    c.ground.push_back(a);
  }
  c.link.noise = LinkNoise{};

  // the suppressor is the verifier holding the most votes under single assignment
  std::vector<Point3> claims, positions;
  for (const auto& g : c.ground) claims.push_back(*g.true_location);
  for (const auto& s : c.placement) positions.push_back(s);
  const auto single = assign_votes(claims, positions, c.assignment_policy, 1);
  const std::size_t bad = static_cast<std::size_t>(
      std::max_element(single.begin(), single.end(), [](const auto& x, const auto& y) { return x.size() < y.size(); }) -
      single.begin());
  c.verifiers[bad].behavior = VerifierBehavior::suppressor;
  c.verifiers[bad].p_suppress = 1.0;

  auto covered_stats = [&](int m) {
    c.protocol.min_assignees = m;
    const auto r = run_scenario(c);
    std::size_t covered = 0, attested = 0;
    for (const auto& v : r.reports[0].votes) {
      if (v.truth != VoteTruth::honest || !v.any_los()) continue;
      ++covered;
      attested += v.logged_count() > 0;
    }
    return std::pair{covered, attested};
  };
  const auto [cov2, att2] = covered_stats(2);
  const auto [cov1, att1] = covered_stats(1);
  const double suppressed1 = cov1 == 0 ? 0.0 : static_cast<double>(cov1 - att1) / static_cast<double>(cov1);
  return {cov2 > 0 && att2 == cov2 && suppressed1 > 0.0,
          fmt("%zu UAVs; min_assignees=2: %zu/%zu LoS-covered honest votes attested; min_assignees=1: suppressed "
              "fraction %.3f",
              c.placement.size(), att2, cov2, suppressed1)};
}

// 8. Fusion properties.
Outcome fusion_properties() {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GroundGrid g;
  g.cell_size = 10;
  g.nx = 12;
  g.ny = 12;
  const VoteRecord base =
      make_vote(default_signature_scheme(), default_signature_scheme().keypair_from_seed(Bytes(32, 9)), {0, 0, 0}, 0,
                SemanticLabel::medical, 1, 0);
  int mono = 0, add = 0, scale = 0;
  for (int c = 0; c < 1000; ++c) {
    TrustWeights w;
    const double vo = 1.0 + 4.0 * u(rng);
    w.multiplier(Flag::verified, Tier::optical) = vo;
    w.multiplier(Flag::verified, Tier::rf) = 1.0 + (vo - 1.0) * u(rng);
    w.multiplier(Flag::unverified, Tier::optical) = u(rng);
    w.multiplier(Flag::unverified, Tier::rf) = u(rng);
    w.multiplier(Flag::unknown, Tier::optical) = 0.25 + 1.5 * u(rng);
    w.multiplier(Flag::unknown, Tier::rf) = 0.25 + 1.5 * u(rng);
    for (auto& s : w.semantic_weights) s = 0.05 + 4.0 * u(rng);
    w.baseline = 0.1 + 2.0 * u(rng);
    validate(w);

    std::vector<VoteView> views(1 + rng() % 60);
    for (auto& v : views) {
      v.vote = base;
      v.vote.claimed_location = {120 * u(rng), 120 * u(rng), 1.5};
      v.vote.severity = 1 + static_cast<int>(rng() % 5);
      v.vote.label = static_cast<SemanticLabel>(rng() % kLabelCount);
      for (std::size_t a = rng() % 4; a > 0; --a) {
        v.attestations.push_back({base.vote_id, static_cast<Flag>(rng() % 3), static_cast<Tier>(rng() % 2), {}, 0, {}});
      }
    }
    const auto& t = views[rng() % views.size()];
    const double s0 = score_vote(t.vote, t.attestations, w);
    for (Tier tier : {Tier::optical, Tier::rf}) {
      auto up = t.attestations, down = t.attestations;
      up.push_back({base.vote_id, Flag::verified, tier, {}, 0, {}});
      down.push_back({base.vote_id, Flag::unverified, tier, {}, 0, {}});
      mono += score_vote(t.vote, up, w) < s0;
      mono += score_vote(t.vote, down, w) > s0;
    }

    const std::span<const VoteView> all(views);
    const std::size_t cut = rng() % (views.size() + 1);
    const CrisisMap whole = build_crisis_map(all, w, g);
    const CrisisMap l = build_crisis_map(all.first(cut), w, g);
    const CrisisMap r = build_crisis_map(all.subspan(cut), w, g);
    bool additive = true;
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
      for (SemanticLabel lab : kAllLabels) {
        const double sum = l.score(cell, lab) + r.score(cell, lab);
        additive = additive && std::abs(whole.score(cell, lab) - sum) <= 1e-9 * std::max(1.0, sum);
      }
    }
    add += !additive;

    TrustWeights scaled = w;
    const double k = std::exp(testsupport::uniform(rng, -5.0, 5.0));
    for (auto& s : scaled.semantic_weights) s *= k;
    const CrisisMap m2 = build_crisis_map(all, scaled, g);
    bool same = true;
    for (SemanticLabel lab : kAllLabels) {
      const std::size_t topk = 1 + rng() % 12;
      const auto a = top_k_cells(whole, lab, topk), b = top_k_cells(m2, lab, topk);
      same = same && a.size() == b.size();
      for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].cell == b[i].cell;
    }
    scale += !same;
  }
  return {mono == 0 && add == 0 && scale == 0,
          fmt("1000 cases: monotonicity violations=%d additivity violations=%d scale-invariance violations=%d", mono, add,
              scale)};
}

// 9. Byte-identical simulate runs through the CLI.
Outcome determinism() {
  const fs::path root = CROWDVERIFY_TEST_TMP;
  const fs::path scenario = fs::path(CROWDVERIFY_SOURCE_DIR) / "config" / "scenarios" / "district.json";
  std::vector<std::string> ledgers, metrics;
  for (const char* run : {"run_a", "run_b"}) {
    const fs::path dir = root / run;
    fs::remove_all(dir);
    const std::string cmd = std::string(CROWDVERIFY_CLI) + " simulate " + scenario.string() + " --seed 7 --out-dir " +
                            dir.string() + " >/dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "simulate exited non-zero"};
    ledgers.push_back(read_text_file(dir / "ledger.ndjson"));
    metrics.push_back(read_text_file(dir / "metrics.csv"));
  }
  const bool same = ledgers[0] == ledgers[1] && metrics[0] == metrics[1] && !ledgers[0].empty();
  return {same, fmt("ledger.ndjson %zu bytes identical=%d; metrics.csv %zu bytes identical=%d", ledgers[0].size(),
                    ledgers[0] == ledgers[1], metrics[0].size(), metrics[0] == metrics[1])};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"coverage-curve-shape", coverage_shape},   {"greedy-quality", greedy_quality},
      {"tradeoff-shape", tradeoff_shape},         {"scan-time-arithmetic", scan_arithmetic},
      {"ledger-integrity", ledger_integrity},     {"protocol-soundness", protocol_soundness},
      {"anti-censorship", anti_censorship},       {"fusion-properties", fusion_properties},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
