#pragma once

// Seeded discrete-event simulator of the five-slot verification protocol:
// vote submission, query acquisition, directed interrogation, response
// evaluation and attestation logging.
//
// Randomness comes from one mt19937_64 stream. Draw order:
//   setup   ground agents then verifiers, index order, 4 words per key seed
//   t1      ground agents in index order: one nonce per vote; sybil masters
//           draw a key seed then a nonce for each fabricated vote
//   t3-t5   verifiers in index order, each over its assigned votes in
//           ledger order: one link draw when a responder is present under
//           LoS, then one suppression draw for a suppressor
// Uniforms are (word >> 11) * 2^-53 so runs are identical across platforms.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdverify/geometry.hpp"
#include "crowdverify/ledger.hpp"
#include "crowdverify/optics.hpp"

namespace crowdverify {

enum class GroundBehavior { honest, spoofer, sybil_master };

struct GroundAgent {
  std::optional<Point3> true_location;  // absent for purely fabricated identities
  GroundBehavior behavior = GroundBehavior::honest;
  Point3 claimed;       // spoofer / sybil_master claim
  int sybil_count = 0;  // sybil_master only
  bool has_mrr = true;
  SemanticLabel label = SemanticLabel::medical;
  int severity = 3;
};

enum class VerifierBehavior { honest, suppressor, forger };

struct VerifierAgent {
  std::size_t site = 0;  // index into the placement
  VerifierBehavior behavior = VerifierBehavior::honest;
  double p_suppress = 0.0;
  std::vector<std::size_t> colluding_agents;  // forger: ground agents it vouches for
  Tier tier = Tier::optical;
};

struct LinkConfig {
  BeamParams beam;
  MrrParams mrr;
  LinkNoise noise;
};

enum class AssignmentPolicy { nearest, partition };

struct ProtocolParams {
  double capture_radius = 3.0;  // m
  int min_assignees = 1;
  std::int64_t start_time_ms = 1'700'000'000'000;
  std::int64_t epoch_duration_ms = 60'000;
  std::int64_t freshness_window_ms = 300'000;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  UrbanModel model{Rect{{0, 0}, {1, 1}}, {}};
  std::vector<Point3> placement;  // chosen UAV sites
  std::vector<GroundAgent> ground;
  std::vector<VerifierAgent> verifiers;
  LinkConfig link;
  int epochs = 1;
  AssignmentPolicy assignment_policy = AssignmentPolicy::nearest;
  ProtocolParams protocol;
};

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const ScenarioConfig& config);

/// Per verifier, the indices of `votes` assigned to it (ascending). Each vote
/// goes to its min(min_assignees, #verifiers) closest verifiers: 3D distance
/// for `nearest`, ground-plane distance for `partition`; ties to the lower
/// verifier index.
std::vector<std::vector<std::size_t>> assign_votes(std::span<const Point3> votes, std::span<const Point3> verifiers,
                                                   AssignmentPolicy policy, int min_assignees = 1);

enum class VoteTruth { honest, spoofed, sybil };
std::string_view to_string(VoteTruth t);

struct FlagEvent {
  std::size_t verifier = 0;
  Flag flag = Flag::unknown;
  bool los = false;
  bool responder_present = false;
  bool link_ok = false;
  bool suppressed = false;
  bool forged = false;
  bool logged = false;
};

struct VoteOutcome {
  Hash256 vote_id{};
  std::uint64_t ledger_index = 0;
  std::size_t agent = 0;
  VoteTruth truth = VoteTruth::honest;
  std::vector<FlagEvent> events;

  std::size_t logged_count() const;
  bool any_los() const;
};

struct EpochReport {
  int epoch = 0;
  std::size_t votes_submitted = 0;
  std::size_t votes_rejected = 0;
  std::array<std::array<std::size_t, 2>, 3> attestations{};  // logged, [flag][tier]
  std::array<std::array<std::size_t, 3>, 3> confusion{};     // logged, [truth][flag]
  std::size_t false_verified = 0;                             // verified on a non-honest vote
  std::size_t false_verified_by_honest = 0;
  std::size_t suppressed = 0;
  std::vector<VoteOutcome> votes;
  std::vector<std::string> ledger_errors;

  std::size_t flag_total(Flag f) const;
};

struct ScenarioMetrics {
  double verification_precision = 0.0;  // verified on honest votes / all verified
  double verification_recall = 0.0;     // honest votes with >= 1 verified / honest votes
  double suppression_exposure = 0.0;    // suppressed flags / issued flags
  double censored_fraction = 0.0;       // assigned honest votes left with no logged flag
};

/// Mutable run state: the ledger, the random stream and agent keys.
class SimulationState {
 public:
  explicit SimulationState(const ScenarioConfig& config);

  Ledger& ledger() { return *ledger_; }
  const Ledger& ledger() const { return *ledger_; }
  int next_epoch() const { return next_epoch_; }

 private:
  friend EpochReport run_epoch(SimulationState& state, const ScenarioConfig& config);

  std::uint64_t draw() { return rng_(); }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  KeyPair draw_keypair();

  std::mt19937_64 rng_;
  std::unique_ptr<Ledger> ledger_;
  std::vector<KeyPair> ground_keys_;
  std::vector<KeyPair> verifier_keys_;
  std::set<std::pair<std::size_t, Hash256>> flagged_;  // (verifier, vote)
  int next_epoch_ = 0;
};

/// One full t1..t5 pass.
EpochReport run_epoch(SimulationState& state, const ScenarioConfig& config);

struct ScenarioResult {
  std::vector<EpochReport> reports;
  std::vector<LedgerEntry> ledger;
  ScenarioMetrics metrics;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

ScenarioMetrics compute_metrics(std::span<const EpochReport> reports);

}  // namespace crowdverify
