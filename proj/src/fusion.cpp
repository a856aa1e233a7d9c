#include "crowdverify/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace crowdverify {

TrustWeights TrustWeights::defaults() {
  TrustWeights w;
  w.multiplier(Flag::verified, Tier::optical) = 2.0;
  w.multiplier(Flag::verified, Tier::rf) = 1.5;
  w.multiplier(Flag::unverified, Tier::optical) = 0.25;
  w.multiplier(Flag::unverified, Tier::rf) = 0.25;
  w.multiplier(Flag::unknown, Tier::optical) = 1.0;
  w.multiplier(Flag::unknown, Tier::rf) = 1.0;
  w.semantic_weights.fill(1.0);
  w.semantic(SemanticLabel::medical) = 2.0;
  w.semantic(SemanticLabel::trapped) = 2.0;
  w.semantic(SemanticLabel::gas_leak) = 1.5;
  w.baseline = 1.0;
  return w;
}

void validate(const TrustWeights& w) {
  for (const auto& row : w.flag_multipliers) {
    for (double m : row) {
      if (!std::isfinite(m) || m < 0.0) throw FusionError("trust weights: flag multipliers must be finite and >= 0");
    }
  }
  for (double s : w.semantic_weights) {
    if (!std::isfinite(s) || s <= 0.0) throw FusionError("trust weights: semantic weights must be > 0");
  }
  if (!std::isfinite(w.baseline) || w.baseline <= 0.0) throw FusionError("trust weights: baseline must be > 0");
  if (w.multiplier(Flag::verified, Tier::optical) < w.multiplier(Flag::verified, Tier::rf)) {
    throw FusionError("trust weights: verified optical multiplier must be >= verified rf");
  }
  for (Tier t : {Tier::optical, Tier::rf}) {
    if (w.multiplier(Flag::unverified, t) > 1.0) throw FusionError("trust weights: unverified multipliers must be <= 1");
    if (w.multiplier(Flag::verified, t) < 1.0) throw FusionError("trust weights: verified multipliers must be >= 1");
  }
}

double score_vote(const VoteRecord& vote, std::span<const AttestationRecord> attestations, const TrustWeights& w) {
  double score = static_cast<double>(vote.severity) * w.semantic(vote.label) * w.baseline;
  for (const auto& a : attestations) {
    if (a.target_vote_id != vote.vote_id) {
      throw FusionError("score_vote: attestation targets vote " + to_hex(a.target_vote_id) + ", not " +
                        to_hex(vote.vote_id));
    }
    score *= w.multiplier(a.flag, a.tier);
  }
  return score;
}

CrisisMap::CrisisMap(GroundGrid grid) : grid_(grid) {
  validate(grid_);
  scores_.assign(grid_.cell_count() * kLabelCount, 0.0);
}

long long CrisisMap::cell_of(double x, double y) const {
  const double fx = std::floor((x - grid_.origin.x) / grid_.cell_size);
  const double fy = std::floor((y - grid_.origin.y) / grid_.cell_size);
  if (!(fx >= 0.0 && fy >= 0.0) || fx >= static_cast<double>(grid_.nx) || fy >= static_cast<double>(grid_.ny)) {
    return -1;
  }
  return static_cast<long long>(fy) * static_cast<long long>(grid_.nx) + static_cast<long long>(fx);
}

CrisisMap build_crisis_map(std::span<const VoteView> entries, const TrustWeights& w, const GroundGrid& grid) {
  CrisisMap map(grid);
  for (const auto& e : entries) {
    const long long cell = map.cell_of(e.vote.claimed_location.x, e.vote.claimed_location.y);
    if (cell < 0) {
      map.count_out_of_extent();
      continue;
    }
    map.add(static_cast<std::size_t>(cell), e.vote.label, score_vote(e.vote, e.attestations, w));
  }
  return map;
}

namespace {

std::vector<CellScore> ranking(const CrisisMap& map, SemanticLabel label) {
  std::vector<CellScore> cells;
  const auto& g = map.grid();
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double s = map.score(c, label);
    if (s > 0.0) cells.push_back({c, c % g.nx, c / g.nx, s});
  }
  std::stable_sort(cells.begin(), cells.end(), [](const CellScore& a, const CellScore& b) { return a.score > b.score; });
  // scores equal up to accumulated rounding form one tie group, ordered by cell index
  constexpr double kTieTolerance = 1e-9;
  for (std::size_t lo = 0; lo < cells.size();) {
    std::size_t hi = lo + 1;
    while (hi < cells.size() && cells[hi - 1].score - cells[hi].score <= kTieTolerance * cells[hi - 1].score) ++hi;
    std::sort(cells.begin() + static_cast<std::ptrdiff_t>(lo), cells.begin() + static_cast<std::ptrdiff_t>(hi),
              [](const CellScore& a, const CellScore& b) { return a.cell < b.cell; });
    lo = hi;
  }
  return cells;
}

}  // namespace

std::vector<CellScore> top_k_cells(const CrisisMap& map, SemanticLabel label, std::size_t k) {
  if (k < 1) throw FusionError("top_k_cells: k must be >= 1");
  auto cells = ranking(map, label);
  if (cells.size() > k) cells.resize(k);
  return cells;
}

double rank_displacement(const CrisisMap& reference, const CrisisMap& perturbed, SemanticLabel label) {
  const auto ref = ranking(reference, label);
  const auto per = ranking(perturbed, label);
  std::vector<long long> rank_in_perturbed(perturbed.grid().cell_count(), static_cast<long long>(per.size()));
  for (std::size_t r = 0; r < per.size(); ++r) rank_in_perturbed[per[r].cell] = static_cast<long long>(r);
  double total = 0.0;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    const long long other = ref[r].cell < rank_in_perturbed.size() ? rank_in_perturbed[ref[r].cell]
                                                                   : static_cast<long long>(per.size());
    total += static_cast<double>(std::llabs(other - static_cast<long long>(r)));
  }
  return total;
}

}  // namespace crowdverify
