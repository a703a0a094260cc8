#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smot/data_io.hpp"
#include "smot/geometry.hpp"
#include "smot/matching.hpp"

namespace smot {

/// True when the accumulator saw neither ground truth nor predictions.
bool is_vacuous(const MatchAccumulator& acc) noexcept;

/// tp / (tp + fn + fp); 1.0 for the vacuous case.
double so_deta(const MatchAccumulator& acc) noexcept;

/// Mean association accuracy over true positives, in grouped form. 0 when
/// there are no true positives.
double so_assa(const MatchAccumulator& acc) noexcept;

/// tp / (tp + fn) and tp / (tp + fp); 1.0 when vacuous, 0 on an empty side.
double det_re(const MatchAccumulator& acc) noexcept;
double det_pr(const MatchAccumulator& acc) noexcept;

/// Per-threshold detection/association scores and their threshold averages.
/// Used for both the DotD suite (SO-HOTA) and the IoU suite (HOTA).
struct HotaScores {
  Measure measure = Measure::dotd;
  std::vector<double> alphas;
  std::vector<double> deta, assa, detre, detpr, hota;  // one entry per alpha
  double mean_deta = 0.0;
  double mean_assa = 0.0;
  double mean_detre = 0.0;
  double mean_detpr = 0.0;
  double mean_hota = 0.0;
  bool vacuous = false;
};

/// Scores a list of per-alpha accumulators (one sequence or a pooled set).
HotaScores score_hota(std::span<const MatchAccumulator> per_alpha, Measure measure);

/// Accumulates every sequence (in parallel), pools counts per alpha and
/// scores the pooled counts.
std::vector<MatchAccumulator> pooled_accumulators(std::span<const SequencePair> seqs,
                                                  const SimilarityConfig& cfg,
                                                  std::span<const double> alphas, int jobs = 1);

HotaScores so_hota_suite(std::span<const SequencePair> seqs, MeanObjectSize s,
                         std::span<const double> alphas, int jobs = 1);
HotaScores hota_suite(std::span<const SequencePair> seqs, std::span<const double> alphas,
                      int jobs = 1);

/// Frame-level CLEAR accounting.
struct ClearCounts {
  std::int64_t gt = 0;
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::int64_t idsw = 0;
  std::int64_t gt_tracks = 0;
  std::int64_t mostly_tracked = 0;
  std::int64_t mostly_lost = 0;

  ClearCounts& merge(const ClearCounts& other) noexcept;
};

struct ClearScores {
  double mota = 0.0;
  double mt = 0.0;
  double ml = 0.0;
  std::int64_t idsw = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

ClearCounts clear_counts(const SequencePair& seq, double iou_threshold = 0.5);

/// Throws ValidationError when there is no ground truth (MOTA undefined).
ClearScores clear_scores(const ClearCounts& counts);
ClearScores clear_metrics(std::span<const SequencePair> seqs, double iou_threshold = 0.5);

/// Identity-level counts under the best one-to-one track assignment.
struct IdentityCounts {
  std::int64_t idtp = 0;
  std::int64_t idfn = 0;
  std::int64_t idfp = 0;

  IdentityCounts& merge(const IdentityCounts& other) noexcept;
};

IdentityCounts identity_counts(const SequencePair& seq, double iou_threshold = 0.5);

/// 2 IDTP / (2 IDTP + IDFP + IDFN); 1.0 when there is nothing to score.
double idf1_score(const IdentityCounts& counts) noexcept;
double idf1(std::span<const SequencePair> seqs, double iou_threshold = 0.5);

struct MetricSelection {
  bool so_hota = true;
  bool hota = true;
  bool clear = true;
  bool idf1 = true;

  friend bool operator==(const MetricSelection&, const MetricSelection&) = default;
};

struct EvalConfig {
  MetricSelection metrics;
  MeanObjectSize s{1.0};
  std::vector<double> alphas = canonical_thresholds();
  double iou_threshold = 0.5;
  int jobs = 1;
};

/// Raw counts for one sequence, or for several pooled together.
struct SequenceEvaluation {
  MetricSelection metrics;
  double s = 0.0;
  std::vector<double> alphas;
  double iou_threshold = 0.5;

  std::vector<MatchAccumulator> dotd;  // per alpha, when metrics.so_hota
  std::vector<MatchAccumulator> iou;   // per alpha, when metrics.hota
  ClearCounts clear;
  IdentityCounts identity;
};

SequenceEvaluation evaluate_sequence(const SequencePair& seq, const EvalConfig& cfg,
                                     std::uint32_t scope = 0);

/// Count-level pooling. Throws PairingError on mismatched configurations.
SequenceEvaluation pool(std::span<const SequenceEvaluation> parts);

/// Ratio metrics derived from counts. Absent optionals were not requested
/// (or, for MOTA, are undefined because there is no ground truth).
struct MetricValues {
  std::optional<HotaScores> so;
  std::optional<HotaScores> classic;
  std::optional<ClearScores> clear;
  std::optional<double> idf1;
  bool vacuous = false;
  std::vector<std::string> warnings;
};

MetricValues summarize(const SequenceEvaluation& eval);

struct MetricReport {
  MetricSelection metrics;
  double s_used = 0.0;
  std::vector<double> thresholds;
  double iou_threshold = 0.5;
  std::vector<std::pair<std::string, MetricValues>> per_sequence;
  MetricValues pooled;
};

/// Per-sequence evaluation (parallel over sequences) plus count-level pooling.
MetricReport evaluate(std::span<const SequencePair> seqs, const EvalConfig& cfg);

}  // namespace smot
