#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "smot/data_io.hpp"
#include "smot/matching.hpp"
#include "smot/synth.hpp"

namespace smot::testing {

inline Detection det(int frame, int id, double left, double top, double w, double h,
                     double conf = 1.0) {
  Detection d;
  d.frame = frame;
  d.track_id = id;
  d.box = {left, top, w, h};
  d.confidence = conf;
  return d;
}

inline SequencePair make_pair(std::vector<Detection> gt, std::vector<Detection> pred,
                              std::string name = "seq") {
  SequencePair seq;
  seq.name = std::move(name);
  int frames = 1;
  for (const auto& d : gt) frames = std::max(frames, d.frame + 1);
  for (const auto& d : pred) frames = std::max(frames, d.frame + 1);
  seq.frame_count = frames;
  seq.gt = std::move(gt);
  seq.pred = std::move(pred);
  return seq;
}

// Corrupted copy of a random scene. Used wherever a test needs "some realistic sequence".
inline SequencePair corrupted_scene(std::uint64_t seed, int objects = 4, int frames = 30) {
  SceneConfig scene;
  scene.n_objects = objects;
  scene.frames = frames;
  scene.arena_width = 400;
  scene.arena_height = 300;
  scene.box_min = 8;
  scene.box_max = 20;
  scene.seed = seed;
  scene.motion = static_cast<Motion>(seed % 3);
  auto seq = generate_scene(scene);
  std::mt19937_64 pick(seed);
  CorruptionConfig c;
  c.center_noise_sigma = std::uniform_real_distribution<double>(0.0, 6.0)(pick);
  c.miss_rate = std::uniform_real_distribution<double>(0.0, 0.3)(pick);
  c.fp_rate = std::uniform_real_distribution<double>(0.0, 0.3)(pick);
  c.id_switch_rate = std::uniform_real_distribution<double>(0.0, 0.1)(pick);
  c.seed = seed * 7919 + 1;
  seq.pred = corrupt(seq, c);
  seq.name = "scene" + std::to_string(seed);
  return seq;
}

// Literal per-true-positive association accuracy: for every matched detection pair,
// count co-matches, misses and extras of its track pair by walking the match lists.
struct NaiveMatch {
  int frame;
  int gt;
  int pred;
};

inline double naive_assa(const std::vector<NaiveMatch>& matches,
                         const std::map<int, int>& gt_sizes, const std::map<int, int>& pred_sizes) {
  if (matches.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : matches) {
    long tpa = 0, gt_matched_elsewhere = 0, pred_matched_elsewhere = 0;
    for (const auto& o : matches) {
      if (o.gt == c.gt && o.pred == c.pred) ++tpa;
      else if (o.gt == c.gt) ++gt_matched_elsewhere;
      else if (o.pred == c.pred) ++pred_matched_elsewhere;
    }
    const long gt_unmatched = gt_sizes.at(c.gt) - tpa - gt_matched_elsewhere;
    const long pred_unmatched = pred_sizes.at(c.pred) - tpa - pred_matched_elsewhere;
    const long fna = gt_matched_elsewhere + gt_unmatched;
    const long fpa = pred_matched_elsewhere + pred_unmatched;
    sum += static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa);
  }
  return sum / static_cast<double>(matches.size());
}

// Reconstructs per-frame matches the same way the accumulator does, but keeps the
// individual match records so the naive loop above can run over them.
inline std::vector<NaiveMatch> per_frame_matches(const SequencePair& seq, const SimilarityConfig& cfg,
                                                 double alpha) {
  const auto potential = association_potential(seq, cfg);
  std::map<int, std::vector<Detection>> gt_by_frame, pred_by_frame;
  for (const auto& d : seq.gt) gt_by_frame[d.frame].push_back(d);
  for (const auto& d : seq.pred) pred_by_frame[d.frame].push_back(d);
  std::vector<NaiveMatch> out;
  for (const auto& [frame, gts] : gt_by_frame) {
    const auto it = pred_by_frame.find(frame);
    if (it == pred_by_frame.end()) continue;
    const auto& preds = it->second;
    const auto sim = similarity_matrix(gts, preds, cfg);
    Eigen::MatrixXd pot(sim.rows(), sim.cols());
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
      for (Eigen::Index j = 0; j < sim.cols(); ++j) {
        const auto key = std::make_pair(*gts[i].track_id, *preds[j].track_id);
        const auto p = potential.find(key);
        pot(i, j) = p == potential.end() ? 0.0 : p->second;
      }
    }
    for (const auto& [i, j] : match_frame(sim, alpha, pot)) {
      out.push_back({frame, *gts[i].track_id, *preds[j].track_id});
    }
  }
  return out;
}

inline std::map<int, int> track_sizes(const std::vector<Detection>& dets) {
  std::map<int, int> out;
  for (const auto& d : dets) ++out[*d.track_id];
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("smot_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace smot::testing
