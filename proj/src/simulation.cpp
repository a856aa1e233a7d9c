#include "crowdverify/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crowdverify {

namespace {

bool finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

}  // namespace

std::string_view to_string(VoteTruth t) {
  switch (t) {
    case VoteTruth::honest: return "honest";
    case VoteTruth::spoofed: return "spoofed";
    case VoteTruth::sybil: return "sybil";
  }
  return "?";
}

std::size_t VoteOutcome::logged_count() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const FlagEvent& e) { return e.logged; }));
}

bool VoteOutcome::any_los() const {
  return std::any_of(events.begin(), events.end(), [](const FlagEvent& e) { return e.los; });
}

std::size_t EpochReport::flag_total(Flag f) const {
  const auto& row = attestations[static_cast<std::size_t>(f)];
  return row[0] + row[1];
}

void validate(const ScenarioConfig& config) {
  if (config.epochs < 0) throw ScenarioError("scenario: epochs must be >= 0");
  if (config.protocol.min_assignees < 1) throw ScenarioError("scenario: min_assignees must be >= 1");
  if (!(config.protocol.capture_radius >= 0.0)) throw ScenarioError("scenario: capture_radius must be >= 0");
  if (config.protocol.epoch_duration_ms <= 0) throw ScenarioError("scenario: epoch_duration_ms must be > 0");
  if (config.protocol.freshness_window_ms < 0) throw ScenarioError("scenario: freshness window must be >= 0");
  validate(config.link.beam);
  validate(config.link.mrr);
  validate(config.link.noise);
  for (const auto& p : config.placement) {
    if (!finite(p)) throw ScenarioError("scenario: non-finite placement site");
  }
  if (config.verifiers.empty()) throw ScenarioError("scenario: at least one verifier is required");
  for (std::size_t i = 0; i < config.ground.size(); ++i) {
    const auto& a = config.ground[i];
    const std::string who = "scenario: ground agent " + std::to_string(i);
    if (a.severity < 1 || a.severity > 5) throw ScenarioError(who + " severity must be in 1..5");
    if (a.true_location && !finite(*a.true_location)) throw ScenarioError(who + " has a non-finite location");
    switch (a.behavior) {
      case GroundBehavior::honest:
        if (!a.true_location) throw ScenarioError(who + " is honest but has no true location");
        break;
      case GroundBehavior::spoofer:
        if (!finite(a.claimed)) throw ScenarioError(who + " has a non-finite claim");
        if (a.true_location && *a.true_location == a.claimed) {
          throw ScenarioError(who + " is a spoofer claiming its true location");
        }
        break;
      case GroundBehavior::sybil_master:
        if (a.sybil_count < 0) throw ScenarioError(who + " sybil count must be >= 0");
        if (!finite(a.claimed)) throw ScenarioError(who + " has a non-finite claim");
        break;
    }
  }
  for (std::size_t i = 0; i < config.verifiers.size(); ++i) {
    const auto& v = config.verifiers[i];
    const std::string who = "scenario: verifier " + std::to_string(i);
    if (v.site >= config.placement.size()) throw ScenarioError(who + " references a missing placement site");
    if (!(v.p_suppress >= 0.0 && v.p_suppress <= 1.0)) throw ScenarioError(who + " p_suppress must be in [0,1]");
    for (std::size_t c : v.colluding_agents) {
      if (c >= config.ground.size()) throw ScenarioError(who + " colludes with a missing ground agent");
    }
  }
}

std::vector<std::vector<std::size_t>> assign_votes(std::span<const Point3> votes, std::span<const Point3> verifiers,
                                                   AssignmentPolicy policy, int min_assignees) {
  if (verifiers.empty()) throw ScenarioError("assign_votes: no verifiers");
  if (min_assignees < 1) throw ScenarioError("assign_votes: min_assignees must be >= 1");
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(min_assignees), verifiers.size());
  std::vector<std::vector<std::size_t>> out(verifiers.size());
  std::vector<std::size_t> order(verifiers.size());
  std::vector<double> dist(verifiers.size());
  for (std::size_t v = 0; v < votes.size(); ++v) {
    for (std::size_t k = 0; k < verifiers.size(); ++k) {
      dist[k] = policy == AssignmentPolicy::nearest ? distance(votes[v], verifiers[k]) : distance2d(votes[v], verifiers[k]);
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    for (std::size_t r = 0; r < take; ++r) out[order[r]].push_back(v);
  }
  return out;
}

SimulationState::SimulationState(const ScenarioConfig& config)
    : rng_(config.seed),
      ledger_(std::make_unique<Ledger>(default_signature_scheme(),
                                       LedgerConfig{config.protocol.freshness_window_ms})) {
  validate(config);
  for (std::size_t i = 0; i < config.ground.size(); ++i) {
    ground_keys_.push_back(draw_keypair());
    ledger_->register_identity({ground_keys_.back().public_key, Role::user});
  }
  for (std::size_t i = 0; i < config.verifiers.size(); ++i) {
    verifier_keys_.push_back(draw_keypair());
    ledger_->register_identity({verifier_keys_.back().public_key, Role::verifier});
  }
}

KeyPair SimulationState::draw_keypair() {
  Bytes seed(32);
  for (std::size_t w = 0; w < 4; ++w) {
    const std::uint64_t word = draw();
    for (std::size_t b = 0; b < 8; ++b) seed[w * 8 + b] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  return ledger_->scheme().keypair_from_seed(seed);
}

EpochReport run_epoch(SimulationState& state, const ScenarioConfig& config) {
  EpochReport report;
  report.epoch = state.next_epoch_++;
  const std::int64_t clock =
      config.protocol.start_time_ms + static_cast<std::int64_t>(report.epoch) * config.protocol.epoch_duration_ms;
  Ledger& ledger = *state.ledger_;
  const SignatureScheme& scheme = ledger.scheme();
  ledger.set_clock(clock);

  // t1: vote submission
  auto submit = [&](const KeyPair& key, const Point3& claim, const GroundAgent& agent, std::size_t agent_index,
                    VoteTruth truth) {
    const std::uint64_t nonce = state.draw();
    VoteRecord vote = make_vote(scheme, key, claim, clock, agent.label, agent.severity, nonce);
    try {
      const std::uint64_t idx = ledger.submit_vote(vote);
      ++report.votes_submitted;
      report.votes.push_back(VoteOutcome{vote.vote_id, idx, agent_index, truth, {}});
    } catch (const LedgerError& e) {
      ++report.votes_rejected;
      report.ledger_errors.emplace_back(e.what());
    }
  };
  for (std::size_t i = 0; i < config.ground.size(); ++i) {
    const auto& agent = config.ground[i];
    switch (agent.behavior) {
      case GroundBehavior::honest:
        submit(state.ground_keys_[i], *agent.true_location, agent, i, VoteTruth::honest);
        break;
      case GroundBehavior::spoofer:
        submit(state.ground_keys_[i], agent.claimed, agent, i, VoteTruth::spoofed);
        break;
      case GroundBehavior::sybil_master:
        for (int c = 0; c < agent.sybil_count; ++c) {
          const KeyPair fabricated = state.draw_keypair();
          submit(fabricated, agent.claimed, agent, i, VoteTruth::sybil);
        }
        break;
    }
  }

  // t2: query acquisition of this epoch's claims and assignment
  const Rect everywhere{{-INFINITY, -INFINITY}, {INFINITY, INFINITY}};
  const auto pending = ledger.query_votes(everywhere, {clock, clock + config.protocol.epoch_duration_ms - 1});
  std::vector<Point3> claims;
  std::vector<std::size_t> outcome_of;  // pending index -> report.votes index
  for (const auto& view : pending) {
    claims.push_back(view.vote.claimed_location);
    auto it = std::find_if(report.votes.begin(), report.votes.end(),
                           [&](const VoteOutcome& o) { return o.vote_id == view.vote.vote_id; });
    outcome_of.push_back(static_cast<std::size_t>(it - report.votes.begin()));
  }
  std::vector<Point3> positions;
  for (const auto& v : config.verifiers) positions.push_back(config.placement[v.site]);
  const auto assignment = assign_votes(claims, positions, config.assignment_policy, config.protocol.min_assignees);

  // t3..t5
  for (std::size_t vi = 0; vi < config.verifiers.size(); ++vi) {
    const auto& verifier = config.verifiers[vi];
    const Point3& pos = positions[vi];
    for (std::size_t p : assignment[vi]) {
      const auto& vote = pending[p].vote;
      if (!state.flagged_.emplace(vi, vote.vote_id).second) continue;
      VoteOutcome& outcome = report.votes[outcome_of[p]];
      FlagEvent ev;
      ev.verifier = vi;

      const bool colluding =
          verifier.behavior == VerifierBehavior::forger &&
          std::find(verifier.colluding_agents.begin(), verifier.colluding_agents.end(), outcome.agent) !=
              verifier.colluding_agents.end();
      ev.los = has_los(pos, vote.claimed_location, config.model);
      if (colluding) {
        ev.flag = Flag::verified;
        ev.forged = true;
      } else if (!ev.los) {
        ev.flag = Flag::unknown;
      } else {
        for (const auto& agent : config.ground) {
          if (agent.has_mrr && agent.true_location &&
              distance(*agent.true_location, vote.claimed_location) <= config.protocol.capture_radius) {
            ev.responder_present = true;
            break;
          }
        }
        if (ev.responder_present) {
          const double range = std::max(distance(pos, vote.claimed_location), 1e-3);
          const double p_out = outage_probability(range, config.link.beam, config.link.mrr, config.link.noise);
          ev.link_ok = state.uniform() < 1.0 - p_out;
          ev.flag = ev.link_ok ? Flag::verified : Flag::unknown;
        } else {
          ev.flag = Flag::unverified;
        }
      }

      if (verifier.behavior == VerifierBehavior::suppressor && state.uniform() < verifier.p_suppress) {
        ev.suppressed = true;
        ++report.suppressed;
      } else {
        try {
          ledger.submit_attestation(
              make_attestation(scheme, state.verifier_keys_[vi], vote.vote_id, ev.flag, verifier.tier, clock));
          ev.logged = true;
          const auto f = static_cast<std::size_t>(ev.flag);
          ++report.attestations[f][static_cast<std::size_t>(verifier.tier)];
          ++report.confusion[static_cast<std::size_t>(outcome.truth)][f];
          if (ev.flag == Flag::verified && outcome.truth != VoteTruth::honest) {
            ++report.false_verified;
            if (verifier.behavior == VerifierBehavior::honest) ++report.false_verified_by_honest;
          }
        } catch (const LedgerError& e) {
          report.ledger_errors.emplace_back(e.what());
        }
      }
      outcome.events.push_back(ev);
    }
  }
  return report;
}

ScenarioMetrics compute_metrics(std::span<const EpochReport> reports) {
  std::size_t verified = 0, verified_honest = 0, honest_votes = 0, honest_with_verified = 0;
  std::size_t suppressed = 0, issued = 0, assigned_honest = 0, censored = 0;
  for (const auto& r : reports) {
    verified += r.flag_total(Flag::verified);
    verified_honest += r.confusion[static_cast<std::size_t>(VoteTruth::honest)][static_cast<std::size_t>(Flag::verified)];
    suppressed += r.suppressed;
    for (const auto& v : r.votes) {
      issued += v.events.size();
      if (v.truth != VoteTruth::honest) continue;
      ++honest_votes;
      if (std::any_of(v.events.begin(), v.events.end(),
                      [](const FlagEvent& e) { return e.logged && e.flag == Flag::verified; })) {
        ++honest_with_verified;
      }
      if (!v.events.empty()) {
        ++assigned_honest;
        if (v.logged_count() == 0) ++censored;
      }
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  return ScenarioMetrics{ratio(verified_honest, verified), ratio(honest_with_verified, honest_votes),
                         ratio(suppressed, issued), ratio(censored, assigned_honest)};
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  SimulationState state(config);
  ScenarioResult result;
  for (int e = 0; e < config.epochs; ++e) result.reports.push_back(run_epoch(state, config));
  result.ledger = state.ledger().entries();
  result.metrics = compute_metrics(result.reports);
  return result;
}

}  // namespace crowdverify
