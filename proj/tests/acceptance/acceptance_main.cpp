// Acceptance suite: one PASS/FAIL line per numbered criterion.
#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smot/fusion.hpp"
#include "smot/matching.hpp"
#include "smot/metrics.hpp"
#include "smot/parallel.hpp"
#include "smot/synth.hpp"
#include "smot/tracker.hpp"
#include "support.hpp"

using namespace smot;
using smot::testing::det;
using smot::testing::make_pair;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum class Status { pass, fail, not_applicable } status = Status::pass;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      status = Status::fail;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MeanObjectSize gt_size(std::span<const SequencePair> seqs) {
  std::vector<BoundingBox> boxes;
  for (const auto& s : seqs) {
    for (const auto& d : s.gt) boxes.push_back(d.box);
  }
  return mean_object_size(boxes);
}

Outcome displacement_reproduction() {
  Outcome o;
  DisplacementStudyConfig cfg;
  cfg.box_size = 16;
  cfg.frames = 50;
  cfg.s_override = 16;
  for (int x = 0; x <= 64; ++x) cfg.shifts.push_back(x);
  const auto t0 = Clock::now();
  const auto rows = displacement_study(cfg);
  const double elapsed = seconds_since(t0);

  bool a = rows.size() == 65, b = true, c_mono = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    a = a && std::abs(r.dotd - std::exp(-r.x / 16.0)) <= 1e-9;
    if (r.x >= 16) b = b && r.hota == 0.0;
    if (i > 0) c_mono = c_mono && r.so_hota <= rows[i - 1].so_hota;
  }
  o.check(a, "(a) dotd = exp(-x/16)");
  o.check(b, "(b) hota = 0 for x >= 16");
  o.check(c_mono, "(c) so_hota non-increasing");
  o.check(rows.back().so_hota > 0.0,
          "(c) so_hota > 0 at x = 64 (got " + fmt("%.6g", rows.back().so_hota) +
              "; dotd there is " + fmt("%.6g", rows.back().dotd) + " < lowest threshold 0.05)");
  o.check(std::abs(rows[8].iou - 1.0 / 3.0) <= 1e-9, "(d) iou at x = 8");
  o.check(std::abs(rows[8].hota - 6.0 / 19.0) <= 1e-9, "(d) hota at x = 8");
  o.check(elapsed < 5.0, "runtime < 5 s");
  o.note("runtime " + fmt("%.3f s", elapsed));
  return o;
}

Outcome worked_example() {
  Outcome o;
  std::vector<Detection> gt, pred;
  for (int f = 0; f < 4; ++f) gt.push_back(det(f, 1, 40, 40, 12, 12));
  for (int f = 0; f < 3; ++f) pred.push_back(det(f, 1, 40, 40, 12, 12));
  const std::vector<SequencePair> seqs{make_pair(gt, pred)};
  const auto s = so_hota_suite(seqs, MeanObjectSize(12), canonical_thresholds());
  o.check(std::abs(s.mean_hota - 0.75) <= 1e-12, "SO-HOTA = 0.75");
  o.check(std::abs(s.mean_deta - 0.75) <= 1e-12, "SO-DetA = 0.75");
  o.check(std::abs(s.mean_assa - 0.75) <= 1e-12, "SO-AssA = 0.75");
  o.check(std::abs(s.mean_detpr - 1.0) <= 1e-12, "SO-DetPr = 1.0");
  o.check(std::abs(s.mean_detre - 0.75) <= 1e-12, "SO-DetRe = 0.75");
  return o;
}

Outcome mean_identities() {
  Outcome o;
  double worst = 0.0;
  bool nineteen = true, averaged = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<SequencePair> seqs{smot::testing::corrupted_scene(1000 + seed)};
    const auto s = so_hota_suite(seqs, gt_size(seqs), canonical_thresholds());
    nineteen = nineteen && s.hota.size() == 19;
    double sum = 0.0;
    for (std::size_t a = 0; a < s.hota.size(); ++a) {
      worst = std::max(worst, std::abs(s.hota[a] - std::sqrt(s.deta[a] * s.assa[a])));
      sum += s.hota[a];
    }
    averaged = averaged && std::abs(s.mean_hota - sum / 19.0) <= 1e-12;
  }
  o.check(worst <= 1e-12, "geometric-mean identity");
  o.check(nineteen, "19 thresholds");
  o.check(averaged, "headline = mean over 19 thresholds");
  o.note("max deviation " + fmt("%.2e", worst));
  return o;
}

Outcome matching_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 5);
  const auto alphas = canonical_thresholds();
  int mismatches = 0, comparisons = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd sim(dim(rng), dim(rng));
    Eigen::MatrixXd pot(sim.rows(), sim.cols());
    const bool ties = trial % 4 == 0;
    for (Eigen::Index i = 0; i < sim.size(); ++i) {
      sim.data()[i] = ties ? coarse(rng) / 5.0 : u(rng);
      pot.data()[i] = ties ? coarse(rng) / 5.0 : u(rng);
    }
    for (double alpha : alphas) {
      ++comparisons;
      const auto fast = objective(match_frame(sim, alpha, pot), sim, pot);
      const auto slow = objective(brute_force_match(sim, alpha, pot), sim, pot);
      if (!same_objective(fast, slow)) ++mismatches;
    }
  }
  o.check(mismatches == 0, std::to_string(mismatches) + " objective mismatches");
  o.note(std::to_string(comparisons) + " comparisons");
  return o;
}

Outcome grouped_vs_naive() {
  Outcome o;
  const auto alphas = canonical_thresholds();
  double worst = 0.0;
  int instances = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto seq = smot::testing::corrupted_scene(500 + seed, 3, 15);
    SimilarityConfig cfg;
    cfg.s = gt_size(std::span<const SequencePair>(&seq, 1));
    const auto accs = accumulate(seq, cfg, alphas);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      if (accs[a].tp > 100) continue;
      const auto matches = smot::testing::per_frame_matches(seq, cfg, alphas[a]);
      const double naive = smot::testing::naive_assa(matches, smot::testing::track_sizes(seq.gt),
                                                     smot::testing::track_sizes(seq.pred));
      worst = std::max(worst, std::abs(naive - so_assa(accs[a])));
      ++instances;
    }
  }
  o.check(worst <= 1e-12, "grouped equals per-match loop");
  o.check(instances > 0, "instances generated");
  o.note(std::to_string(instances) + " instances, max deviation " + fmt("%.2e", worst));
  return o;
}

Outcome classical_sanity() {
  Outcome o;
  auto perfect = smot::testing::corrupted_scene(77);
  perfect.pred = perfect.gt;
  const std::vector<SequencePair> ps{perfect};
  const auto c = clear_metrics(ps);
  o.check(c.mota == 1.0 && idf1(ps) == 1.0 && c.mt == 1.0 && c.ml == 0.0 && c.idsw == 0,
          "perfect prediction");

  std::vector<Detection> gt, pred;
  for (int f = 0; f < 10; ++f) gt.push_back(det(f, 1, 100, 100, 20, 20));
  for (int f = 0; f < 5; ++f) pred.push_back(det(f, 7, 100, 100, 20, 20));
  for (int f = 7; f < 10; ++f) pred.push_back(det(f, 8, 100, 100, 20, 20));
  pred.push_back(det(0, 9, 400, 400, 20, 20));
  const std::vector<SequencePair> constructed{make_pair(gt, pred)};
  const auto m = clear_metrics(constructed);
  o.check(m.fn == 2 && m.fp == 1 && m.idsw == 1 && m.mota == 0.6, "10/2/1/1 gives MOTA 0.6");

  std::vector<Detection> hgt, hpred;
  for (int f = 0; f < 10; ++f) {
    hgt.push_back(det(f, 1, 100, 100, 10, 10));
    hpred.push_back(det(f, 1, 100, 100, 10, 10));
    for (int k = 0; k < 3; ++k) hpred.push_back(det(f, 10 + k, 300 + 50 * k, 300, 10, 10));
  }
  const std::vector<SequencePair> heavy{make_pair(hgt, hpred)};
  const double heavy_mota = clear_metrics(heavy).mota;
  o.check(heavy_mota < 0.0, "heavy false positives give MOTA < 0");
  o.note("heavy-FP MOTA " + fmt("%.2f", heavy_mota));
  return o;
}

// Five objects on parallel lanes 100 px apart, constant velocity.
std::vector<Detection> lane_scene(int frames, double box, double spacing, double speed_base,
                                  double speed_step, double drift_step) {
  std::vector<Detection> out;
  for (int f = 0; f < frames; ++f) {
    for (int k = 0; k < 5; ++k) {
      const double cx = 50.0 + (speed_base + speed_step * k) * f;
      const double cy = 100.0 + spacing * k + drift_step * k * f;
      Detection d;
      d.frame = f;
      d.track_id = k + 1;
      d.box = BoundingBox::from_center(cx, cy, box, box);
      out.push_back(d);
    }
  }
  return out;
}

double min_separation(const std::vector<Detection>& dets) {
  std::map<int, std::vector<const Detection*>> by_frame;
  for (const auto& d : dets) by_frame[d.frame].push_back(&d);
  double best = 1e300;
  for (const auto& [f, v] : by_frame) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) best = std::min(best, center_distance(v[i]->box, v[j]->box));
    }
  }
  return best;
}

Outcome closed_loop_tracker() {
  Outcome o;
  auto seq = make_pair(lane_scene(1000, 12.0, 100.0, 1.0, 0.3, 0.02), {});
  const std::span<const SequencePair> one(&seq, 1);
  const double s = gt_size(one).value();
  o.check(min_separation(seq.gt) >= 5.0 * s, "scenario separation >= 5 S");

  std::vector<Detection> raw = seq.gt;
  for (auto& d : raw) d.track_id.reset();
  TrackerConfig cfg;
  cfg.min_hits = 1;
  const auto t0 = Clock::now();
  seq.pred = run_tracker(raw, cfg);
  const double elapsed = seconds_since(t0);

  const auto so = so_hota_suite(one, MeanObjectSize(s), canonical_thresholds());
  const auto idsw = clear_metrics(one).idsw;
  o.check(so.mean_hota >= 0.99, "SO-HOTA >= 0.99");
  o.check(idsw == 0, "IDSW = 0");
  o.check(elapsed < 2.0, "1000 frames < 2 s");
  o.note("SO-HOTA " + fmt("%.4f", so.mean_hota) + ", IDSW " + std::to_string(idsw) + ", " +
         fmt("%.3f s", elapsed));
  return o;
}

Outcome ablation_direction() {
  Outcome o;
  // Box side d = 16, every object moves 1.5 d per frame.
  const double d = 16.0;
  std::vector<Detection> gt;
  const double dirs[4][2] = {{1, 0}, {0, 1}, {0.6, 0.8}, {-0.8, 0.6}};
  for (int f = 0; f < 150; ++f) {
    for (int k = 0; k < 4; ++k) {
      const double cx = 2000.0 + 1500.0 * k + 1.5 * d * dirs[k][0] * f;
      const double cy = 2000.0 + 1.5 * d * dirs[k][1] * f;
      Detection det_k;
      det_k.frame = f;
      det_k.track_id = k + 1;
      det_k.box = BoundingBox::from_center(cx, cy, d, d);
      gt.push_back(det_k);
    }
  }
  std::vector<Detection> raw = gt;
  for (auto& x : raw) x.track_id.reset();
  const std::vector<double> alphas = canonical_thresholds();

  const auto pooled_assa = [&](Measure measure) {
    TrackerConfig cfg;
    cfg.similarity = measure;
    cfg.min_hits = 1;
    auto seq = make_pair(gt, run_tracker(raw, cfg));
    const std::span<const SequencePair> one(&seq, 1);
    return so_hota_suite(one, MeanObjectSize(d), alphas).mean_assa;
  };
  const double with_penalty = pooled_assa(Measure::expanded_penalty);
  const double plain_iou = pooled_assa(Measure::iou);
  o.check(with_penalty > plain_iou, "expanded_penalty SO-AssA > iou SO-AssA");
  o.note("expanded_penalty " + fmt("%.4f", with_penalty) + " vs iou " + fmt("%.4f", plain_iou));
  return o;
}

Outcome fusion_weights() {
  Outcome o;
  const std::vector<std::vector<double>> conf{{0.8}, {0.4}};
  const auto w = adaptive_wbf_weights(conf);
  o.check(std::abs(w[0] - 2.0 / 3.0) <= 1e-12 && std::abs(w[1] - 1.0 / 3.0) <= 1e-12,
          "(0.8, 0.4) -> (2/3, 1/3)");
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> detectors(1, 8), count(1, 30);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> lists(static_cast<std::size_t>(detectors(rng)));
    for (auto& l : lists) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i) l.push_back(c(rng));
    }
    const auto ws = adaptive_wbf_weights(lists);
    double sum = 0.0;
    for (double x : ws) sum += x;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  o.check(worst <= 1e-12, "weights sum to 1 on 1000 random inputs");
  return o;
}

long peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss / 1024;
}

Outcome throughput() {
  Outcome o;
  constexpr int kSequences = 211;
  constexpr int kFrames = 108192;
  constexpr long kTargetDetections = 371690;

  const auto g0 = Clock::now();
  std::vector<SequencePair> seqs(kSequences);
  long detections = 0;
  long frames_left = kFrames;
  long budget = kTargetDetections;
  for (int k = 0; k < kSequences; ++k) {
    const int frames = static_cast<int>(frames_left / (kSequences - k));
    frames_left -= frames;
    const long remaining_frames = frames_left;
    // Four objects while the remaining budget still allows three for the rest.
    const int objects = budget - 4L * frames >= 3L * remaining_frames ? 4 : 3;
    budget -= static_cast<long>(objects) * frames;
    SceneConfig scene;
    scene.n_objects = objects;
    scene.frames = frames;
    scene.seed = 7000 + static_cast<std::uint64_t>(k);
    scene.motion = static_cast<Motion>(k % 3);
    seqs[k] = generate_scene(scene);
    seqs[k].name = "seq" + std::to_string(k);
    CorruptionConfig c;
    c.center_noise_sigma = 2.0;
    c.miss_rate = 0.1;
    c.fp_rate = 0.1;
    c.id_switch_rate = 0.002;
    c.seed = 9000 + static_cast<std::uint64_t>(k);
    seqs[k].pred = corrupt(seqs[k], c);
    detections += static_cast<long>(seqs[k].gt.size());
  }
  const double generation = seconds_since(g0);

  EvalConfig cfg;
  cfg.s = gt_size(seqs);
  cfg.jobs = default_jobs();
  const auto t0 = Clock::now();
  const auto report = evaluate(seqs, cfg);
  const double elapsed = seconds_since(t0);
  const long rss = peak_rss_mb();

  long frames = 0;
  for (const auto& s : seqs) frames += s.frame_count;
  o.check(frames == kFrames, "frame total");
  o.check(report.thresholds.size() == 19, "19 thresholds");
  o.check(elapsed < 120.0, "evaluation < 120 s");
  o.check(rss < 2048, "peak memory < 2 GB");
  o.note(std::to_string(kSequences) + " sequences, " + std::to_string(frames) + " frames, " +
         std::to_string(detections) + " gt detections; generation " + fmt("%.1f s", generation) +
         ", evaluation " + fmt("%.1f s", elapsed) + " on " + std::to_string(cfg.jobs) +
         " worker(s), peak RSS " + std::to_string(rss) + " MB, SO-HOTA " +
         fmt("%.4f", report.pooled.so->mean_hota));
  return o;
}

Outcome leaderboard_numbers() {
  Outcome o;
  o.status = Outcome::Status::not_applicable;
  o.note("challenge leaderboard scores need the original dataset and trained detectors; covered by 1-10");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1  displacement study", displacement_reproduction},
      {"2  worked SO-HOTA example", worked_example},
      {"3  geometric-mean and averaging identities", mean_identities},
      {"4  matching optimality oracle", matching_oracle},
      {"5  grouped vs per-match association accuracy", grouped_vs_naive},
      {"6  classical metric sanity", classical_sanity},
      {"7  closed-loop tracker", closed_loop_tracker},
      {"8  ablation direction", ablation_direction},
      {"9  adaptive fusion weights", fusion_weights},
      {"10 throughput at dataset scale", throughput},
      {"11 leaderboard numbers", leaderboard_numbers},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.status = Outcome::Status::fail;
      o.note(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::Status::pass   ? "[PASS]"
                      : o.status == Outcome::Status::fail ? "[FAIL]"
                                                          : "[N/A] ";
    if (o.status == Outcome::Status::fail) ++failures;
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s %s%s%s\n", tag, name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criterion/criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
