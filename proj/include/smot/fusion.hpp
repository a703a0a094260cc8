#pragma once

#include <span>
#include <vector>

#include "smot/data_io.hpp"
#include "smot/geometry.hpp"

namespace smot {

struct ScoredBox {
  BoundingBox box;
  double confidence = 1.0;
};

/// Weighted boxes fusion across detectors. Boxes are visited in decreasing
/// weight * confidence and join the cluster whose running fused box they
/// overlap most (IoU >= cluster_iou), otherwise they open a new cluster.
/// Fused corners are averages weighted by weight * confidence; the fused
/// confidence is the detector-weighted mean of member confidences.
/// Throws ValidationError unless the weights sum to 1 within 1e-9.
std::vector<ScoredBox> wbf(std::span<const std::vector<ScoredBox>> box_lists,
                           std::span<const double> weights, double cluster_iou);

/// Per-frame detector weights proportional to each detector's mean
/// confidence. A detector with no detections gets weight 0. Throws
/// ValidationError when every detector is empty.
std::vector<double> adaptive_wbf_weights(std::span<const std::vector<double>> confidences);
std::vector<double> adaptive_wbf_weights(std::span<const std::vector<ScoredBox>> box_lists);

/// Keeps each primary detection that overlaps (IoU > 0) at least one
/// secondary detection of the same frame. Kept detections are unmodified.
std::vector<Detection> intersection_ensemble(std::span<const Detection> primary,
                                             std::span<const Detection> secondary);

/// Fills per-track gaps of at most `max_gap` missing frames by linear
/// interpolation of left, top, width, height (and confidence). Output is
/// ordered by (frame, track id); detections without an id pass through.
std::vector<Detection> interpolate_tracks(std::span<const Detection> outputs, int max_gap);

}  // namespace smot
