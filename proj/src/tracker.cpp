#include "smot/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "smot/assignment.hpp"
#include "smot/error.hpp"

namespace smot {

void validate(const TrackerConfig& cfg) {
  if (!std::isfinite(cfg.assoc_threshold)) throw ValidationError("assoc_threshold must be finite");
  if (!(cfg.ema_lambda >= 0.0 && cfg.ema_lambda <= 1.0)) {
    throw ValidationError("ema_lambda must lie in [0,1]");
  }
  if (!(cfg.ocm_weight >= 0.0) || !std::isfinite(cfg.ocm_weight)) {
    throw ValidationError("ocm_weight must be finite and >= 0");
  }
  if (!(cfg.expand >= 0.0) || !std::isfinite(cfg.expand)) {
    throw ValidationError("expand must be finite and >= 0");
  }
  if (!(cfg.penalty_weight >= 0.0) || !std::isfinite(cfg.penalty_weight)) {
    throw ValidationError("penalty_weight must be finite and >= 0");
  }
  if (cfg.max_age < 0) throw ValidationError("max_age must be >= 0");
  if (cfg.min_hits < 1) throw ValidationError("min_hits must be >= 1");
  if (cfg.interpolation_max_gap < 0) throw ValidationError("interpolation_max_gap must be >= 0");
  if (cfg.object_size) MeanObjectSize{*cfg.object_size};
}

BoundingBox predict(TrackState& track, const BoxKalmanFilter& kf) {
  kf.predict(track.kalman);
  ++track.age;
  ++track.time_since_update;
  return track.box();
}

namespace {

Eigen::Vector2d center_of(const BoundingBox& b) { return {b.center_x(), b.center_y()}; }

BoundingBox map_box(const BoundingBox& box, const AffineTransform& t) {
  const double xs[2] = {box.left, box.right()};
  const double ys[2] = {box.top, box.bottom()};
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  bool first = true;
  for (double x : xs) {
    for (double y : ys) {
      const double mx = t.a * x + t.b * y + t.tx;
      const double my = t.c * x + t.d * y + t.ty;
      if (first) {
        min_x = max_x = mx;
        min_y = max_y = my;
        first = false;
      } else {
        min_x = std::min(min_x, mx);
        max_x = std::max(max_x, mx);
        min_y = std::min(min_y, my);
        max_y = std::max(max_y, my);
      }
    }
  }
  return {min_x, min_y, max_x - min_x, max_y - min_y};
}

Eigen::Vector2d map_vector(const Eigen::Vector2d& v, const AffineTransform& t) {
  return {t.a * v.x() + t.b * v.y(), t.c * v.x() + t.d * v.y()};
}

void map_state(BoxKalmanFilter::State& s, const AffineTransform& t) {
  const BoundingBox mapped = map_box(BoxKalmanFilter::to_box(s.mean), t);
  s.mean(0) = mapped.center_x();
  s.mean(1) = mapped.center_y();
  s.mean(2) = mapped.width;
  s.mean(3) = mapped.height;
  const Eigen::Vector2d v = map_vector(s.mean.segment<2>(4), t);
  s.mean(4) = v.x();
  s.mean(5) = v.y();
}

}  // namespace

void affine_compensate(std::span<TrackState> tracks, const AffineTransform& t) {
  if (t.is_identity()) return;
  if (t.determinant() == 0.0) throw ValidationError("singular affine transform");
  for (auto& track : tracks) {
    map_state(track.kalman, t);
    map_state(track.observed_kalman, t);
    track.last_observation = map_box(track.last_observation, t);
    track.ema_velocity = map_vector(track.ema_velocity, t);
  }
}

double direction_difference(const Eigen::Vector2d& a, const Eigen::Vector2d& b) noexcept {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-6 || nb < 1e-6) return 0.0;
  const double cross = a.x() * b.y() - a.y() * b.x();
  return std::abs(std::atan2(cross, a.dot(b)));
}

AssociationResult associate(std::span<const TrackState> tracks, std::span<const Detection> detections,
                            const TrackerConfig& cfg, MeanObjectSize s) {
  AssociationResult out;
  const auto n = static_cast<Eigen::Index>(tracks.size());
  const auto m = static_cast<Eigen::Index>(detections.size());
  if (n == 0 || m == 0) {
    for (int i = 0; i < n; ++i) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < m; ++j) out.unmatched_detections.push_back(j);
    return out;
  }

  SimilarityConfig sim_cfg;
  sim_cfg.measure = cfg.similarity;
  sim_cfg.s = s;
  sim_cfg.expand = cfg.expand;
  sim_cfg.penalty_weight = cfg.penalty_weight;

  // Ineligible pairs get a cost no eligible combination can reach, so the
  // solver first maximizes the number of eligible matches.
  constexpr double kBlocked = 1e6;
  Eigen::MatrixXd cost(n, m);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> eligible(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& track = tracks[static_cast<std::size_t>(i)];
    const BoundingBox predicted = track.box();
    const Eigen::Vector2d from = center_of(track.last_observation);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& det = detections[static_cast<std::size_t>(j)];
      const double sim = similarity(predicted, det.box, sim_cfg);
      eligible(i, j) = sim >= cfg.assoc_threshold;
      if (!eligible(i, j)) {
        cost(i, j) = kBlocked;
        continue;
      }
      const double angle = direction_difference(track.ema_velocity, center_of(det.box) - from);
      cost(i, j) = -sim + cfg.ocm_weight * angle / std::numbers::pi;
    }
  }

  const auto assigned = solve_min_cost_assignment(cost);
  std::vector<char> det_used(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = assigned[static_cast<std::size_t>(i)];
    if (j >= 0 && eligible(i, j)) {
      out.matches.emplace_back(static_cast<int>(i), j);
      det_used[static_cast<std::size_t>(j)] = 1;
    } else {
      out.unmatched_tracks.push_back(static_cast<int>(i));
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!det_used[static_cast<std::size_t>(j)]) out.unmatched_detections.push_back(static_cast<int>(j));
  }
  return out;
}

void update(TrackState& track, const Detection& det, int frame, const TrackerConfig& cfg,
            const BoxKalmanFilter& kf) {
  const int gap = std::max(1, frame - track.last_observation_frame);
  const Eigen::Vector2d observed =
      (center_of(det.box) - center_of(track.last_observation)) / static_cast<double>(gap);
  if (!track.ema_initialized) {
    track.ema_velocity = observed;
    track.ema_initialized = true;
  } else {
    track.ema_velocity = cfg.ema_lambda * track.ema_velocity + (1.0 - cfg.ema_lambda) * observed;
  }

  if (track.time_since_update > 1 && gap > 1) {
    // Replay the filter along the straight line between the two observations.
    BoxKalmanFilter::State replay = track.observed_kalman;
    const BoundingBox& from = track.last_observation;
    for (int k = 1; k < gap; ++k) {
      const double u = static_cast<double>(k) / gap;
      const BoundingBox virtual_box{from.left + u * (det.box.left - from.left),
                                    from.top + u * (det.box.top - from.top),
                                    from.width + u * (det.box.width - from.width),
                                    from.height + u * (det.box.height - from.height)};
      kf.predict(replay);
      kf.update(replay, virtual_box);
    }
    kf.predict(replay);
    track.kalman = replay;
  }

  kf.update(track.kalman, det.box);
  track.observed_kalman = track.kalman;
  track.last_observation = det.box;
  track.last_observation_frame = frame;
  track.last_confidence = det.confidence;
  ++track.hits;
  track.time_since_update = 0;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg), kf_(cfg.noise) { validate(cfg_); }

MeanObjectSize Tracker::current_size() const {
  if (cfg_.object_size) return MeanObjectSize(*cfg_.object_size);
  if (area_count_ == 0.0) return MeanObjectSize(1.0);
  return MeanObjectSize(std::sqrt(area_sum_ / area_count_));
}

std::vector<Detection> Tracker::step(int frame, std::span<const Detection> detections,
                                     const AffineTransform* motion) {
  if (frame <= last_frame_) {
    throw ValidationError("frame " + std::to_string(frame + 1) + " arrived after frame " +
                          std::to_string(last_frame_ + 1));
  }
  for (const auto& d : detections) validate(d.box, "detection");
  while (last_frame_ + 1 < frame) advance(last_frame_ + 1, {}, nullptr);
  return advance(frame, detections, motion);
}

std::vector<Detection> Tracker::advance(int frame, std::span<const Detection> detections,
                                        const AffineTransform* motion) {
  last_frame_ = frame;
  ++frames_seen_;
  for (const auto& d : detections) {
    area_sum_ += d.box.area();
    area_count_ += 1.0;
  }

  for (auto& track : tracks_) predict(track, kf_);
  if (motion) affine_compensate(tracks_, *motion);

  const auto assoc = associate(tracks_, detections, cfg_, current_size());
  for (const auto& [ti, di] : assoc.matches) {
    update(tracks_[static_cast<std::size_t>(ti)], detections[static_cast<std::size_t>(di)], frame,
           cfg_, kf_);
  }
  for (int di : assoc.unmatched_detections) {
    const auto& det = detections[static_cast<std::size_t>(di)];
    TrackState t;
    t.id = next_id_++;
    t.kalman = kf_.initiate(det.box);
    t.observed_kalman = t.kalman;
    t.hits = 1;
    t.last_observation = det.box;
    t.last_observation_frame = frame;
    t.last_confidence = det.confidence;
    tracks_.push_back(t);
  }
  std::erase_if(tracks_, [&](const TrackState& t) { return t.time_since_update > cfg_.max_age; });

  std::vector<Detection> out;
  for (const auto& t : tracks_) {
    if (t.time_since_update != 0) continue;
    if (t.hits < cfg_.min_hits && frames_seen_ > cfg_.min_hits) continue;
    out.push_back({frame, t.last_observation, t.last_confidence, t.id, 1});
  }
  std::sort(out.begin(), out.end(),
            [](const Detection& a, const Detection& b) { return *a.track_id < *b.track_id; });
  return out;
}

std::vector<Detection> run_tracker(std::span<const Detection> detections, const TrackerConfig& cfg,
                                   const AffineSchedule& motion) {
  std::map<int, std::vector<Detection>> by_frame;
  for (const auto& d : detections) by_frame[d.frame].push_back(d);
  std::vector<Detection> out;
  if (by_frame.empty()) return out;

  Tracker tracker(cfg);
  const int last = by_frame.rbegin()->first;
  const std::vector<Detection> none;
  for (int f = 0; f <= last; ++f) {
    const auto it = by_frame.find(f);
    const auto& dets = it == by_frame.end() ? none : it->second;
    const AffineTransform t = motion.at(f);
    const auto emitted = tracker.step(f, dets, f > 0 && !motion.empty() ? &t : nullptr);
    out.insert(out.end(), emitted.begin(), emitted.end());
  }
  return out;
}

}  // namespace smot
