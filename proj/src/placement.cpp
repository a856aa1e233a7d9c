#include "crowdverify/placement.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace crowdverify {

void validate(const PlacementProblem& problem) {
  if (problem.n_los < 1) throw PlacementError("placement: n_los must be >= 1");
  if (problem.max_uavs < 1) throw PlacementError("placement: max_uavs must be >= 1");
  if (problem.candidate_sites.empty()) throw PlacementError("placement: no candidate sites");
}

namespace {

void check_dimensions(const PlacementProblem& problem, const BitMatrix& vis) {
  if (vis.rows() != problem.candidate_sites.size() || vis.cols() != problem.targets.size()) {
    throw PlacementError("placement: visibility matrix is " + std::to_string(vis.rows()) + "x" +
                         std::to_string(vis.cols()) + ", expected " +
                         std::to_string(problem.candidate_sites.size()) + "x" +
                         std::to_string(problem.targets.size()));
  }
}

std::size_t covered(std::span<const int> counts, int n_los) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [&](int c) { return c >= n_los; }));
}

}  // namespace

double coverage_fraction(std::span<const int> counts, int n_los) {
  if (counts.empty()) throw PlacementError("coverage_fraction: empty counts");
  return static_cast<double>(covered(counts, n_los)) / static_cast<double>(counts.size());
}

std::vector<int> coverage_counts(const BitMatrix& vis, std::span<const std::size_t> chosen) {
  std::vector<int> counts(vis.cols(), 0);
  for (std::size_t s : chosen) {
    for (std::size_t t = 0; t < vis.cols(); ++t) counts[t] += vis.get(s, t) ? 1 : 0;
  }
  return counts;
}

PlacementResult greedy_place(const PlacementProblem& problem, const BitMatrix& vis) {
  validate(problem);
  check_dimensions(problem, vis);
  const std::size_t n_cand = vis.rows();
  const std::size_t n_targets = vis.cols();
  const std::size_t words = (n_targets + 63) / 64;

  PlacementResult result;
  result.final_counts.assign(n_targets, 0);
  if (n_targets == 0) return result;

  // deficit bit set <=> target count still below n_los
  std::vector<std::uint64_t> deficit(words, ~std::uint64_t{0});
  if (n_targets % 64 != 0) deficit.back() = (std::uint64_t{1} << (n_targets % 64)) - 1;
  std::vector<bool> used(n_cand, false);
  std::size_t satisfied = 0;

  while (result.chosen_indices.size() < static_cast<std::size_t>(problem.max_uavs) && satisfied < n_targets) {
    std::size_t best = n_cand;
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < n_cand; ++c) {
      if (used[c]) continue;
      auto row = vis.row_words(c);
      std::size_t gain = 0;
      for (std::size_t w = 0; w < words; ++w) gain += std::popcount(row[w] & deficit[w]);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best == n_cand) break;  // no positive gain left

    used[best] = true;
    result.chosen_indices.push_back(best);
    result.chosen_sites.push_back(problem.candidate_sites[best]);
    for (std::size_t t = 0; t < n_targets; ++t) {
      if (!vis.get(best, t)) continue;
      if (++result.final_counts[t] == problem.n_los) {
        deficit[t / 64] &= ~(std::uint64_t{1} << (t % 64));
        ++satisfied;
      }
    }
    result.coverage_curve.push_back(
        {static_cast<int>(result.chosen_indices.size()),
         static_cast<double>(satisfied) / static_cast<double>(n_targets)});
  }
  return result;
}

BruteForceResult brute_force_place(const PlacementProblem& problem, const BitMatrix& vis) {
  validate(problem);
  check_dimensions(problem, vis);
  const std::size_t n = vis.rows();
  if (n > kBruteForceMaxCandidates) {
    throw PlacementError("brute_force_place: " + std::to_string(n) + " candidates exceeds limit of " +
                         std::to_string(kBruteForceMaxCandidates));
  }
  const std::size_t budget = std::min<std::size_t>(n, static_cast<std::size_t>(problem.max_uavs));

  std::vector<std::size_t> best_set;
  std::size_t best_covered = 0;
  bool have_best = false;
  std::vector<std::size_t> subset;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > budget) continue;
    subset.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) subset.push_back(i);
    }
    auto counts = coverage_counts(vis, subset);
    std::size_t cov = covered(counts, problem.n_los);
    if (!have_best || cov > best_covered || (cov == best_covered && subset < best_set)) {
      best_set = subset;
      best_covered = cov;
      have_best = true;
    }
  }
  BruteForceResult out;
  out.indices = std::move(best_set);
  out.fraction = vis.cols() == 0 ? 0.0 : static_cast<double>(best_covered) / static_cast<double>(vis.cols());
  return out;
}

}  // namespace crowdverify
