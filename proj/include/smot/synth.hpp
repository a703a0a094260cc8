#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "smot/data_io.hpp"

namespace smot {

/// A static d x d ground-truth track against the same track shifted down by x.
struct DisplacementStudyConfig {
  double box_size = 16.0;
  std::vector<double> shifts;
  int frames = 50;
  std::optional<double> s_override;  // defaults to box_size
};

struct CurveRow {
  double x = 0.0;
  double iou = 0.0;
  double dotd = 0.0;
  double hota = 0.0;
  double so_hota = 0.0;
};

void validate(const DisplacementStudyConfig& cfg);

/// One row per shift: kernel values and full-pipeline HOTA / SO-HOTA.
std::vector<CurveRow> displacement_study(const DisplacementStudyConfig& cfg);

/// `x,iou,dotd,hota,so_hota` with 6-decimal fixed point.
void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);

enum class Motion { linear, sinusoidal, flock };

Motion parse_motion(std::string_view name);

struct SceneConfig {
  int n_objects = 5;
  int frames = 100;
  double arena_width = 1920.0;
  double arena_height = 1080.0;
  double box_min = 8.0;
  double box_max = 24.0;
  Motion motion = Motion::linear;
  double speed_min = 1.0;
  double speed_max = 4.0;
  std::uint64_t seed = 0;
};

void validate(const SceneConfig& cfg);

/// Ground-truth tracks 1..n_objects over every frame. Boxes reflect off the
/// arena walls and never leave it.
SequencePair generate_scene(const SceneConfig& cfg);

struct CorruptionConfig {
  double center_noise_sigma = 0.0;
  double miss_rate = 0.0;
  double fp_rate = 0.0;
  double id_switch_rate = 0.0;
  bool drop_ids = false;
  std::uint64_t seed = 0;
};

void validate(const CorruptionConfig& cfg);

/// Turns ground truth into predictions: misses, center jitter, Poisson false
/// positives (fresh ids), permanent id swaps, optional identity stripping.
std::vector<Detection> corrupt(const SequencePair& gt, const CorruptionConfig& cfg);

}  // namespace smot
