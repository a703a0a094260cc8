#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smot/data_io.hpp"
#include "smot/geometry.hpp"

namespace smot {

/// {0.05, 0.10, ..., 0.95}.
std::vector<double> canonical_thresholds();

/// Throws ValidationError unless every threshold lies in (0, 1).
void validate_thresholds(std::span<const double> alphas);

/// One-to-one pairs (gt index, pred index), ordered by gt index.
using Assignment = std::vector<std::pair<int, int>>;

/// Lexicographic matching objective: pair count, then summed association
/// potential, then summed similarity.
struct MatchObjective {
  int cardinality = 0;
  double potential = 0.0;
  double similarity = 0.0;
};

MatchObjective objective(const Assignment& assignment, const Eigen::MatrixXd& sim,
                         const Eigen::MatrixXd& potential);

/// True when both objectives agree on cardinality and on both sums within `tol`.
bool same_objective(const MatchObjective& a, const MatchObjective& b, double tol = 1e-9);

Eigen::MatrixXd similarity_matrix(std::span<const Detection> gt, std::span<const Detection> pred,
                                  const SimilarityConfig& cfg);

/// Jaccard-style association prior between every co-present (gt, pred) track
/// pair, keyed by track id: summed similarity / (|g| + |p| - summed similarity).
std::map<std::pair<int, int>, double> association_potential(const SequencePair& seq,
                                                            const SimilarityConfig& cfg);

/// Optimal one-to-one matching among pairs with sim >= alpha under the
/// three-tier objective, solved as a single weighted assignment.
Assignment match_frame(const Eigen::MatrixXd& sim, double alpha, const Eigen::MatrixXd& potential);

/// Exhaustive reference for match_frame on matrices up to 6x6. Among equal
/// optima returns the lexicographically smallest pair list.
Assignment brute_force_match(const Eigen::MatrixXd& sim, double alpha,
                             const Eigen::MatrixXd& potential);

struct TrackKey {
  std::uint32_t scope = 0;
  int id = 0;
  auto operator<=>(const TrackKey&) const = default;
};

struct PairKey {
  std::uint32_t scope = 0;
  int gt = 0;
  int pred = 0;
  auto operator<=>(const PairKey&) const = default;
};

/// Counts for one similarity threshold. Track keys carry a scope so that
/// accumulators from different sequences can be merged without id clashes.
struct MatchAccumulator {
  double alpha = 0.0;
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::map<PairKey, std::int64_t> pair_tp;
  std::map<TrackKey, std::int64_t> gt_track_size;
  std::map<TrackKey, std::int64_t> pred_track_size;

  /// Count addition. Throws PairingError when thresholds differ.
  MatchAccumulator& merge(const MatchAccumulator& other);

  /// tp = sum(pair_tp), tp + fn = |gt|, tp + fp = |pred|, and every pair count
  /// bounded by both of its track sizes.
  bool consistent() const;
};

/// Runs the potential pass once, then matches every frame at every alpha.
/// Returns one accumulator per alpha, in input order.
std::vector<MatchAccumulator> accumulate(const SequencePair& seq, const SimilarityConfig& cfg,
                                         std::span<const double> alphas, std::uint32_t scope = 0);

}  // namespace smot
