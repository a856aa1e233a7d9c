#pragma once

// Greedy set-multicover placement of UAV verifiers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdverify/geometry.hpp"

namespace crowdverify {

struct PlacementProblem {
  std::vector<Point3> candidate_sites;
  std::vector<Point3> targets;
  int n_los = 1;
  int max_uavs = 1;
};

struct CoveragePoint {
  int k = 0;
  double fraction = 0.0;

  friend bool operator==(const CoveragePoint&, const CoveragePoint&) = default;
};

struct PlacementResult {
  std::vector<Point3> chosen_sites;
  std::vector<std::size_t> chosen_indices;  // into candidate_sites, selection order
  std::vector<CoveragePoint> coverage_curve;
  std::vector<int> final_counts;  // per target
};

class PlacementError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const PlacementProblem& problem);

/// Each step picks the candidate that reduces the most coverage deficits
/// (targets it sees whose count is still below n_los). Ties go to the lowest
/// index. Stops at full coverage, zero gain, or the UAV budget.
PlacementResult greedy_place(const PlacementProblem& problem, const BitMatrix& vis);

double coverage_fraction(std::span<const int> counts, int n_los);

struct BruteForceResult {
  std::vector<std::size_t> indices;  // sorted ascending
  double fraction = 0.0;
};

inline constexpr std::size_t kBruteForceMaxCandidates = 15;

/// Exhaustive optimum over subsets of size <= max_uavs; ties resolve to the
/// lexicographically smallest index set. Test oracle only.
BruteForceResult brute_force_place(const PlacementProblem& problem, const BitMatrix& vis);

/// Per-target coverage counts for an arbitrary subset of candidates.
std::vector<int> coverage_counts(const BitMatrix& vis, std::span<const std::size_t> chosen);

}  // namespace crowdverify
