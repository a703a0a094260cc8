#include "smot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "smot/error.hpp"
#include "smot/metrics.hpp"
#include "smot/random.hpp"

namespace smot {

void validate(const DisplacementStudyConfig& cfg) {
  if (!std::isfinite(cfg.box_size) || cfg.box_size <= 0.0) {
    throw ValidationError("box size must be finite and > 0");
  }
  if (cfg.frames < 1) throw ValidationError("frames must be >= 1");
  for (std::size_t i = 0; i < cfg.shifts.size(); ++i) {
    if (!std::isfinite(cfg.shifts[i]) || cfg.shifts[i] < 0.0) {
      throw ValidationError("shifts must be finite and >= 0");
    }
    if (i > 0 && cfg.shifts[i] < cfg.shifts[i - 1]) throw ValidationError("shifts must be sorted");
  }
  if (cfg.s_override) MeanObjectSize{*cfg.s_override};
}

std::vector<CurveRow> displacement_study(const DisplacementStudyConfig& cfg) {
  validate(cfg);
  const double d = cfg.box_size;
  const MeanObjectSize s(cfg.s_override.value_or(d));
  const auto alphas = canonical_thresholds();
  const BoundingBox gt_box{100.0, 100.0, d, d};

  std::vector<CurveRow> rows;
  rows.reserve(cfg.shifts.size());
  for (double x : cfg.shifts) {
    BoundingBox pred_box = gt_box;
    pred_box.top += x;

    SequencePair seq;
    seq.name = "displacement";
    seq.frame_count = cfg.frames;
    for (int f = 0; f < cfg.frames; ++f) {
      seq.gt.push_back({f, gt_box, 1.0, 1, 1});
      seq.pred.push_back({f, pred_box, 1.0, 1, 1});
    }
    const std::span<const SequencePair> one(&seq, 1);

    CurveRow row;
    row.x = x;
    row.iou = iou(gt_box, pred_box);
    row.dotd = dotd(gt_box, pred_box, s);
    row.hota = hota_suite(one, alphas).mean_hota;
    row.so_hota = so_hota_suite(one, s, alphas).mean_hota;
    rows.push_back(row);
  }
  return rows;
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "x,iou,dotd,hota,so_hota\n";
  char buf[160];
  for (const auto& r : rows) {
    const int n = std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f\n", r.x, r.iou, r.dotd,
                                r.hota, r.so_hota);
    out.write(buf, n);
  }
}

Motion parse_motion(std::string_view name) {
  if (name == "linear") return Motion::linear;
  if (name == "sinusoidal") return Motion::sinusoidal;
  if (name == "flock") return Motion::flock;
  throw ValidationError("unknown motion model '" + std::string(name) + "'");
}

void validate(const SceneConfig& cfg) {
  if (cfg.n_objects < 1) throw ValidationError("n_objects must be >= 1");
  if (cfg.frames < 1) throw ValidationError("frames must be >= 1");
  if (!(cfg.box_min > 0.0) || !(cfg.box_max >= cfg.box_min) || !std::isfinite(cfg.box_max)) {
    throw ValidationError("box size range must satisfy 0 < min <= max");
  }
  if (!(cfg.speed_min >= 0.0) || !(cfg.speed_max >= cfg.speed_min) || !std::isfinite(cfg.speed_max)) {
    throw ValidationError("speed range must satisfy 0 <= min <= max");
  }
  // Room for the largest box plus the sinusoidal swing on both sides.
  const double need = 7.0 * cfg.box_max;
  if (!(cfg.arena_width >= need) || !(cfg.arena_height >= need) || !std::isfinite(cfg.arena_width) ||
      !std::isfinite(cfg.arena_height)) {
    throw ValidationError("arena must be at least 7x the largest box on each side");
  }
  if (cfg.speed_max >= std::min(cfg.arena_width, cfg.arena_height) / 4.0) {
    throw ValidationError("speed too large for the arena");
  }
}

namespace {

// Reflects position p into [lo, hi], flipping velocity on every bounce.
void reflect(double& p, double& v, double lo, double hi) {
  while (p < lo || p > hi) {
    if (p < lo) {
      p = 2.0 * lo - p;
      v = -v;
    } else {
      p = 2.0 * hi - p;
      v = -v;
    }
  }
}

struct Mover {
  double x = 0.0, y = 0.0;    // top-left of the base trajectory
  double vx = 0.0, vy = 0.0;  // px/frame
  double w = 0.0, h = 0.0;
  double amplitude = 0.0, period = 1.0, phase = 0.0;  // sinusoidal only
  double jx = 0.0, jy = 0.0;                          // flock jitter velocity
};

}  // namespace

SequencePair generate_scene(const SceneConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const double W = cfg.arena_width;
  const double H = cfg.arena_height;

  double group_vx = 0.0, group_vy = 0.0, group_cx = 0.0, group_cy = 0.0;
  if (cfg.motion == Motion::flock) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    group_vx = speed * std::cos(angle);
    group_vy = speed * std::sin(angle);
    group_cx = rng.uniform(0.25 * W, 0.75 * W);
    group_cy = rng.uniform(0.25 * H, 0.75 * H);
  }

  std::vector<Mover> movers(static_cast<std::size_t>(cfg.n_objects));
  for (auto& m : movers) {
    m.w = rng.uniform(cfg.box_min, cfg.box_max);
    m.h = rng.uniform(cfg.box_min, cfg.box_max);
    if (cfg.motion == Motion::sinusoidal) {
      m.amplitude = rng.uniform(1.0, 2.0) * std::max(m.w, m.h);
      m.period = rng.uniform(20.0, 60.0);
      m.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const double margin = m.amplitude;
    if (cfg.motion == Motion::flock) {
      const double spread = 6.0 * cfg.box_max;
      m.x = std::clamp(group_cx + rng.uniform(-spread, spread), 0.0, W - m.w);
      m.y = std::clamp(group_cy + rng.uniform(-spread, spread), 0.0, H - m.h);
      m.vx = group_vx;
      m.vy = group_vy;
    } else {
      m.x = rng.uniform(margin, W - m.w - margin);
      m.y = rng.uniform(margin, H - m.h - margin);
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
      m.vx = speed * std::cos(angle);
      m.vy = speed * std::sin(angle);
    }
  }

  SequencePair seq;
  seq.name = "scene";
  seq.frame_count = cfg.frames;
  seq.gt.reserve(static_cast<std::size_t>(cfg.frames) * movers.size());
  const double jitter_cap = 0.25 * std::max(cfg.speed_max, 0.5);

  for (int f = 0; f < cfg.frames; ++f) {
    for (std::size_t i = 0; i < movers.size(); ++i) {
      auto& m = movers[i];
      if (f > 0) {
        if (cfg.motion == Motion::flock) {
          m.jx = std::clamp(m.jx + rng.normal(0.0, 0.1 * jitter_cap), -jitter_cap, jitter_cap);
          m.jy = std::clamp(m.jy + rng.normal(0.0, 0.1 * jitter_cap), -jitter_cap, jitter_cap);
          double vx = m.vx + m.jx, vy = m.vy + m.jy;
          m.x += vx;
          m.y += vy;
          const double before_x = vx, before_y = vy;
          reflect(m.x, vx, 0.0, W - m.w);
          reflect(m.y, vy, 0.0, H - m.h);
          if (vx != before_x) m.vx = -m.vx, m.jx = -m.jx;
          if (vy != before_y) m.vy = -m.vy, m.jy = -m.jy;
        } else {
          m.x += m.vx;
          m.y += m.vy;
          reflect(m.x, m.vx, m.amplitude, W - m.w - m.amplitude);
          reflect(m.y, m.vy, m.amplitude, H - m.h - m.amplitude);
        }
      }
      double left = m.x, top = m.y;
      if (cfg.motion == Motion::sinusoidal) {
        const double speed = std::hypot(m.vx, m.vy);
        const double nx = speed > 0.0 ? -m.vy / speed : 0.0;
        const double ny = speed > 0.0 ? m.vx / speed : 1.0;
        const double offset =
            m.amplitude * std::sin(2.0 * std::numbers::pi * f / m.period + m.phase);
        left += offset * nx;
        top += offset * ny;
      }
      seq.gt.push_back({f, BoundingBox{left, top, m.w, m.h}, 1.0, static_cast<int>(i) + 1, 1});
    }
  }
  return seq;
}

void validate(const CorruptionConfig& cfg) {
  if (!(cfg.center_noise_sigma >= 0.0) || !std::isfinite(cfg.center_noise_sigma)) {
    throw ValidationError("noise sigma must be finite and >= 0");
  }
  for (double r : {cfg.miss_rate, cfg.fp_rate, cfg.id_switch_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("corruption rates must lie in [0,1]");
  }
}

std::vector<Detection> corrupt(const SequencePair& gt, const CorruptionConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);

  std::map<int, std::vector<const Detection*>> by_frame;
  int max_id = 0;
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool have_extent = false;
  for (const auto& d : gt.gt) {
    by_frame[d.frame].push_back(&d);
    max_id = std::max(max_id, d.track_id.value_or(0));
    if (!have_extent) {
      min_x = d.box.left, min_y = d.box.top, max_x = d.box.right(), max_y = d.box.bottom();
      have_extent = true;
    }
    min_x = std::min(min_x, d.box.left);
    min_y = std::min(min_y, d.box.top);
    max_x = std::max(max_x, d.box.right());
    max_y = std::max(max_y, d.box.bottom());
  }

  std::map<int, int> relabel;  // gt id -> emitted id
  int next_fp_id = max_id + 1;
  std::vector<Detection> out;
  out.reserve(gt.gt.size());

  for (auto& [frame, dets] : by_frame) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection* a, const Detection* b) {
      return a->track_id.value_or(0) < b->track_id.value_or(0);
    });

    if (cfg.id_switch_rate > 0.0 && dets.size() >= 2) {
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (!dets[i]->track_id || !rng.bernoulli(cfg.id_switch_rate)) continue;
        std::size_t other = rng.index(dets.size() - 1);
        if (other >= i) ++other;
        if (!dets[other]->track_id) continue;
        const int a = *dets[i]->track_id, b = *dets[other]->track_id;
        const int la = relabel.contains(a) ? relabel[a] : a;
        const int lb = relabel.contains(b) ? relabel[b] : b;
        relabel[a] = lb;
        relabel[b] = la;
      }
    }

    for (const auto* d : dets) {
      if (cfg.miss_rate > 0.0 && rng.bernoulli(cfg.miss_rate)) continue;
      Detection p = *d;
      if (cfg.center_noise_sigma > 0.0) {
        p.box.left += rng.normal(0.0, cfg.center_noise_sigma);
        p.box.top += rng.normal(0.0, cfg.center_noise_sigma);
      }
      if (p.track_id) {
        const auto it = relabel.find(*p.track_id);
        if (it != relabel.end()) p.track_id = it->second;
      }
      if (cfg.drop_ids) p.track_id.reset();
      out.push_back(p);
    }

    if (cfg.fp_rate > 0.0) {
      const auto n_fp = rng.poisson(cfg.fp_rate * static_cast<double>(dets.size()));
      for (std::uint64_t k = 0; k < n_fp; ++k) {
        const auto* like = dets[rng.index(dets.size())];
        Detection fp;
        fp.frame = frame;
        fp.box.width = like->box.width;
        fp.box.height = like->box.height;
        fp.box.left = rng.uniform(min_x, std::max(min_x, max_x - fp.box.width));
        fp.box.top = rng.uniform(min_y, std::max(min_y, max_y - fp.box.height));
        fp.confidence = rng.uniform(0.05, 0.6);
        if (!cfg.drop_ids) fp.track_id = next_fp_id++;
        out.push_back(fp);
      }
    }
  }
  return out;
}

}  // namespace smot
