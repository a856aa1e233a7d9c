#pragma once

// Trust-weighted scoring of votes and aggregation into a gridded crisis map.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdverify/geometry.hpp"
#include "crowdverify/ledger.hpp"

namespace crowdverify {

struct TrustWeights {
  // [flag][tier], indexed by the enum values
  std::array<std::array<double, 2>, 3> flag_multipliers{};
  std::array<double, kLabelCount> semantic_weights{};
  double baseline = 1.0;

  double multiplier(Flag f, Tier t) const {
    return flag_multipliers[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)];
  }
  double& multiplier(Flag f, Tier t) { return flag_multipliers[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)]; }
  double semantic(SemanticLabel l) const { return semantic_weights[static_cast<std::size_t>(l)]; }
  double& semantic(SemanticLabel l) { return semantic_weights[static_cast<std::size_t>(l)]; }

  /// verified: optical 2.0, rf 1.5; unverified 0.25; unknown 1.0;
  /// medical/trapped 2.0, gas_leak 1.5, other labels 1.0; baseline 1.0.
  static TrustWeights defaults();
};

class FusionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Enforces the tier ordering (verified optical >= verified rf) and
/// unverified <= 1 <= verified for both tiers.
void validate(const TrustWeights& w);

/// severity * semantic weight * baseline * product of per-attestation
/// multipliers. Throws FusionError if an attestation targets another vote.
double score_vote(const VoteRecord& vote, std::span<const AttestationRecord> attestations, const TrustWeights& w);

class CrisisMap {
 public:
  explicit CrisisMap(GroundGrid grid);

  const GroundGrid& grid() const { return grid_; }
  double score(std::size_t cell, SemanticLabel label) const {
    return scores_[cell * kLabelCount + static_cast<std::size_t>(label)];
  }
  void add(std::size_t cell, SemanticLabel label, double value) {
    scores_[cell * kLabelCount + static_cast<std::size_t>(label)] += value;
  }
  std::size_t out_of_extent() const { return out_of_extent_; }
  void count_out_of_extent() { ++out_of_extent_; }

  /// Cell holding the point, with right-open cell intervals; -1 outside.
  long long cell_of(double x, double y) const;

 private:
  GroundGrid grid_;
  std::vector<double> scores_;
  std::size_t out_of_extent_ = 0;
};

/// Out-of-extent votes are counted in the map, never dropped silently.
CrisisMap build_crisis_map(std::span<const VoteView> entries, const TrustWeights& w, const GroundGrid& grid);

struct CellScore {
  std::size_t cell = 0;
  std::size_t ix = 0;
  std::size_t iy = 0;
  double score = 0.0;
};

/// Highest-scoring non-zero cells for the label; ties go to the lower index.
std::vector<CellScore> top_k_cells(const CrisisMap& map, SemanticLabel label, std::size_t k);

/// Sum over cells ranked in `reference` of |rank change| in `perturbed`
/// (cells absent from the perturbed ranking count as ranked last).
double rank_displacement(const CrisisMap& reference, const CrisisMap& perturbed, SemanticLabel label);

}  // namespace crowdverify
