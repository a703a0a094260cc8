#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smot/data_io.hpp"
#include "smot/geometry.hpp"
#include "smot/kalman.hpp"

namespace smot {

struct TrackerConfig {
  Measure similarity = Measure::expanded_penalty;
  double assoc_threshold = 0.1;
  double ema_lambda = 0.9;
  double ocm_weight = 0.2;
  double expand = 1.0;
  double penalty_weight = 0.25;
  int max_age = 30;
  int min_hits = 3;
  int interpolation_max_gap = 20;
  // Size normalizer for the distance penalty and DotD. When unset the tracker
  // uses the running mean size of every detection seen so far.
  std::optional<double> object_size;
  KalmanNoise noise;
};

void validate(const TrackerConfig& cfg);

struct TrackState {
  int id = 0;
  BoxKalmanFilter::State kalman;
  Eigen::Vector2d ema_velocity = Eigen::Vector2d::Zero();
  bool ema_initialized = false;
  int hits = 0;
  int age = 0;
  int time_since_update = 0;
  BoundingBox last_observation;
  int last_observation_frame = 0;
  double last_confidence = 1.0;
  // Filter state right after the last observation, replayed on re-association.
  BoxKalmanFilter::State observed_kalman;

  BoundingBox box() const noexcept { return BoxKalmanFilter::to_box(kalman.mean); }
};

/// Advances the track one frame and returns the predicted box.
BoundingBox predict(TrackState& track, const BoxKalmanFilter& kf);

/// Moves every track into the next frame's camera coordinates: boxes are
/// replaced by the hull of their mapped corners, velocities go through the
/// linear part. The identity transform leaves tracks untouched.
void affine_compensate(std::span<TrackState> tracks, const AffineTransform& t);

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Angle in [0, pi] between two vectors; 0 if either is (nearly) zero.
double direction_difference(const Eigen::Vector2d& a, const Eigen::Vector2d& b) noexcept;

/// Minimizes -sim + ocm_weight * angle / pi over tracks x detections. Pairs
/// below assoc_threshold never match.
AssociationResult associate(std::span<const TrackState> tracks, std::span<const Detection> detections,
                            const TrackerConfig& cfg, MeanObjectSize s);

/// Measurement update with EMA velocity bookkeeping. After a gap the filter is
/// first replayed along the straight line between the two observations.
void update(TrackState& track, const Detection& det, int frame, const TrackerConfig& cfg,
            const BoxKalmanFilter& kf);

/// Online tracker for one sequence. Frames must arrive in increasing order;
/// skipped frames are predicted through with no detections.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {});

  /// Processes `frame` (0-based) and returns the confirmed tracks updated in
  /// it, ordered by id. `motion` maps the previous frame into this one.
  std::vector<Detection> step(int frame, std::span<const Detection> detections,
                              const AffineTransform* motion = nullptr);

  std::span<const TrackState> tracks() const noexcept { return tracks_; }
  const TrackerConfig& config() const noexcept { return cfg_; }

 private:
  std::vector<Detection> advance(int frame, std::span<const Detection> detections,
                                 const AffineTransform* motion);
  MeanObjectSize current_size() const;

  TrackerConfig cfg_;
  BoxKalmanFilter kf_;
  std::vector<TrackState> tracks_;
  int next_id_ = 1;
  int last_frame_ = -1;
  int frames_seen_ = 0;
  double area_sum_ = 0.0;
  double area_count_ = 0.0;
};

/// Runs a fresh tracker over a whole detection list (any order), frame by
/// frame from 0 to the last detection's frame.
std::vector<Detection> run_tracker(std::span<const Detection> detections, const TrackerConfig& cfg,
                                   const AffineSchedule& motion = {});

}  // namespace smot
