#include "smot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "smot/assignment.hpp"
#include "smot/error.hpp"
#include "smot/parallel.hpp"

namespace smot {

bool is_vacuous(const MatchAccumulator& acc) noexcept {
  return acc.tp == 0 && acc.fn == 0 && acc.fp == 0;
}

double so_deta(const MatchAccumulator& acc) noexcept {
  if (is_vacuous(acc)) return 1.0;
  return static_cast<double>(acc.tp) / static_cast<double>(acc.tp + acc.fn + acc.fp);
}

double so_assa(const MatchAccumulator& acc) noexcept {
  if (acc.tp == 0) return is_vacuous(acc) ? 1.0 : 0.0;
  double total = 0.0;
  for (const auto& [key, tpa] : acc.pair_tp) {
    const auto g = acc.gt_track_size.find({key.scope, key.gt});
    const auto p = acc.pred_track_size.find({key.scope, key.pred});
    if (g == acc.gt_track_size.end() || p == acc.pred_track_size.end()) continue;
    const double t = static_cast<double>(tpa);
    total += t * t / static_cast<double>(g->second + p->second - tpa);
  }
  return total / static_cast<double>(acc.tp);
}

double det_re(const MatchAccumulator& acc) noexcept {
  if (is_vacuous(acc)) return 1.0;
  if (acc.tp + acc.fn == 0) return 0.0;
  return static_cast<double>(acc.tp) / static_cast<double>(acc.tp + acc.fn);
}

double det_pr(const MatchAccumulator& acc) noexcept {
  if (is_vacuous(acc)) return 1.0;
  if (acc.tp + acc.fp == 0) return 0.0;
  return static_cast<double>(acc.tp) / static_cast<double>(acc.tp + acc.fp);
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct FrameGroups {
  std::vector<std::vector<const Detection*>> gt, pred;
};

FrameGroups group_by_frame(const SequencePair& seq) {
  int frames = seq.frame_count;
  for (const auto& d : seq.gt) frames = std::max(frames, d.frame + 1);
  for (const auto& d : seq.pred) frames = std::max(frames, d.frame + 1);
  FrameGroups g;
  g.gt.resize(static_cast<std::size_t>(frames));
  g.pred.resize(static_cast<std::size_t>(frames));
  for (const auto& d : seq.gt) {
    if (!d.track_id) throw ValidationError("gt detection without track id in '" + seq.name + "'");
    g.gt[static_cast<std::size_t>(d.frame)].push_back(&d);
  }
  for (const auto& d : seq.pred) {
    if (!d.track_id) throw ValidationError("pred detection without track id in '" + seq.name + "'");
    g.pred[static_cast<std::size_t>(d.frame)].push_back(&d);
  }
  return g;
}

Eigen::MatrixXd iou_matrix(const std::vector<const Detection*>& gt,
                           const std::vector<const Detection*>& pred) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = iou(gt[i]->box, pred[j]->box);
    }
  }
  return m;
}

}  // namespace

HotaScores score_hota(std::span<const MatchAccumulator> per_alpha, Measure measure) {
  HotaScores s;
  s.measure = measure;
  s.vacuous = !per_alpha.empty();
  for (const auto& acc : per_alpha) {
    s.alphas.push_back(acc.alpha);
    const double deta = so_deta(acc);
    const double assa = so_assa(acc);
    s.deta.push_back(deta);
    s.assa.push_back(assa);
    s.detre.push_back(det_re(acc));
    s.detpr.push_back(det_pr(acc));
    s.hota.push_back(std::sqrt(deta * assa));
    s.vacuous = s.vacuous && is_vacuous(acc);
  }
  s.mean_deta = mean(s.deta);
  s.mean_assa = mean(s.assa);
  s.mean_detre = mean(s.detre);
  s.mean_detpr = mean(s.detpr);
  s.mean_hota = mean(s.hota);
  return s;
}

std::vector<MatchAccumulator> pooled_accumulators(std::span<const SequencePair> seqs,
                                                  const SimilarityConfig& cfg,
                                                  std::span<const double> alphas, int jobs) {
  validate_thresholds(alphas);
  std::vector<std::vector<MatchAccumulator>> parts(seqs.size());
  parallel_for(seqs.size(), jobs, [&](std::size_t i) {
    parts[i] = accumulate(seqs[i], cfg, alphas, static_cast<std::uint32_t>(i));
  });
  std::vector<MatchAccumulator> pooled(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) pooled[a].alpha = alphas[a];
  for (const auto& part : parts) {
    for (std::size_t a = 0; a < alphas.size(); ++a) pooled[a].merge(part[a]);
  }
  return pooled;
}

HotaScores so_hota_suite(std::span<const SequencePair> seqs, MeanObjectSize s,
                         std::span<const double> alphas, int jobs) {
  SimilarityConfig cfg;
  cfg.measure = Measure::dotd;
  cfg.s = s;
  return score_hota(pooled_accumulators(seqs, cfg, alphas, jobs), Measure::dotd);
}

HotaScores hota_suite(std::span<const SequencePair> seqs, std::span<const double> alphas, int jobs) {
  SimilarityConfig cfg;
  cfg.measure = Measure::iou;
  return score_hota(pooled_accumulators(seqs, cfg, alphas, jobs), Measure::iou);
}

ClearCounts& ClearCounts::merge(const ClearCounts& o) noexcept {
  gt += o.gt;
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  idsw += o.idsw;
  gt_tracks += o.gt_tracks;
  mostly_tracked += o.mostly_tracked;
  mostly_lost += o.mostly_lost;
  return *this;
}

ClearCounts clear_counts(const SequencePair& seq, double iou_threshold) {
  const auto groups = group_by_frame(seq);
  ClearCounts c;
  std::unordered_map<int, int> previous_frame_pair;  // gt id -> pred id, last frame only
  std::unordered_map<int, int> last_match;            // gt id -> pred id, ever
  std::unordered_map<int, std::int64_t> gt_frames, matched_frames;

  for (std::size_t f = 0; f < groups.gt.size(); ++f) {
    const auto& gt = groups.gt[f];
    const auto& pred = groups.pred[f];
    for (const auto* d : gt) ++gt_frames[*d->track_id];
    c.gt += static_cast<std::int64_t>(gt.size());

    std::vector<std::pair<int, int>> matches;
    if (!gt.empty() && !pred.empty()) {
      const Eigen::MatrixXd sim = iou_matrix(gt, pred);
      std::vector<char> row_done(gt.size(), 0), col_done(pred.size(), 0);

      for (std::size_t i = 0; i < gt.size(); ++i) {
        const auto prev = previous_frame_pair.find(*gt[i]->track_id);
        if (prev == previous_frame_pair.end()) continue;
        for (std::size_t j = 0; j < pred.size(); ++j) {
          if (col_done[j] || *pred[j]->track_id != prev->second) continue;
          if (sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= iou_threshold) {
            matches.emplace_back(static_cast<int>(i), static_cast<int>(j));
            row_done[i] = col_done[j] = 1;
          }
          break;
        }
      }

      std::vector<int> rows, cols;
      for (std::size_t i = 0; i < gt.size(); ++i) if (!row_done[i]) rows.push_back(static_cast<int>(i));
      for (std::size_t j = 0; j < pred.size(); ++j) if (!col_done[j]) cols.push_back(static_cast<int>(j));
      if (!rows.empty() && !cols.empty()) {
        Eigen::MatrixXd score(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          for (std::size_t k = 0; k < cols.size(); ++k) {
            const double v = sim(rows[r], cols[k]);
            score(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v >= iou_threshold ? v : 0.0;
          }
        }
        const auto assigned = solve_max_score_assignment(score);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const int k = assigned[r];
          if (k >= 0 && sim(rows[r], cols[static_cast<std::size_t>(k)]) >= iou_threshold) {
            matches.emplace_back(rows[r], cols[static_cast<std::size_t>(k)]);
          }
        }
      }
    }

    previous_frame_pair.clear();
    for (const auto& [i, j] : matches) {
      const int g = *gt[static_cast<std::size_t>(i)]->track_id;
      const int p = *pred[static_cast<std::size_t>(j)]->track_id;
      const auto last = last_match.find(g);
      if (last != last_match.end() && last->second != p) ++c.idsw;
      last_match[g] = p;
      previous_frame_pair[g] = p;
      ++matched_frames[g];
    }
    const auto n_tp = static_cast<std::int64_t>(matches.size());
    c.tp += n_tp;
    c.fn += static_cast<std::int64_t>(gt.size()) - n_tp;
    c.fp += static_cast<std::int64_t>(pred.size()) - n_tp;
  }

  for (const auto& [g, total] : gt_frames) {
    ++c.gt_tracks;
    const auto it = matched_frames.find(g);
    const double ratio =
        static_cast<double>(it == matched_frames.end() ? 0 : it->second) / static_cast<double>(total);
    if (ratio >= 0.8) ++c.mostly_tracked;
    if (ratio <= 0.2) ++c.mostly_lost;
  }
  return c;
}

ClearScores clear_scores(const ClearCounts& c) {
  if (c.gt == 0) throw ValidationError("MOTA undefined without ground-truth detections");
  ClearScores s;
  s.mota = 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt);
  s.mt = static_cast<double>(c.mostly_tracked) / static_cast<double>(c.gt_tracks);
  s.ml = static_cast<double>(c.mostly_lost) / static_cast<double>(c.gt_tracks);
  s.idsw = c.idsw;
  s.fp = c.fp;
  s.fn = c.fn;
  return s;
}

ClearScores clear_metrics(std::span<const SequencePair> seqs, double iou_threshold) {
  ClearCounts total;
  for (const auto& seq : seqs) total.merge(clear_counts(seq, iou_threshold));
  return clear_scores(total);
}

IdentityCounts& IdentityCounts::merge(const IdentityCounts& o) noexcept {
  idtp += o.idtp;
  idfn += o.idfn;
  idfp += o.idfp;
  return *this;
}

IdentityCounts identity_counts(const SequencePair& seq, double iou_threshold) {
  const auto groups = group_by_frame(seq);
  // Only tracks that ever overlap can end up matched; the assignment runs on
  // that subset. Minimizing the ID cost is the same as maximizing co-matches.
  std::unordered_map<int, int> gt_dense, pred_dense;
  std::vector<std::tuple<int, int, std::int64_t>> co;
  std::unordered_map<std::uint64_t, std::size_t> co_slot;
  for (std::size_t f = 0; f < groups.gt.size(); ++f) {
    const auto& gt = groups.gt[f];
    const auto& pred = groups.pred[f];
    for (const auto* g : gt) {
      for (const auto* p : pred) {
        if (iou(g->box, p->box) < iou_threshold) continue;
        const int gi = gt_dense.emplace(*g->track_id, static_cast<int>(gt_dense.size())).first->second;
        const int pi = pred_dense.emplace(*p->track_id, static_cast<int>(pred_dense.size())).first->second;
        const auto slot = (static_cast<std::uint64_t>(gi) << 32) | static_cast<std::uint32_t>(pi);
        const auto [it, inserted] = co_slot.emplace(slot, co.size());
        if (inserted) co.emplace_back(gi, pi, 0);
        ++std::get<2>(co[it->second]);
      }
    }
  }

  IdentityCounts c;
  if (!co.empty()) {
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_dense.size()),
                                                  static_cast<Eigen::Index>(pred_dense.size()));
    for (const auto& [gi, pi, n] : co) score(gi, pi) = static_cast<double>(n);
    const auto assigned = solve_max_score_assignment(score);
    for (Eigen::Index i = 0; i < score.rows(); ++i) {
      const int j = assigned[static_cast<std::size_t>(i)];
      if (j >= 0) c.idtp += static_cast<std::int64_t>(score(i, j));
    }
  }
  c.idfn = static_cast<std::int64_t>(seq.gt.size()) - c.idtp;
  c.idfp = static_cast<std::int64_t>(seq.pred.size()) - c.idtp;
  return c;
}

double idf1_score(const IdentityCounts& c) noexcept {
  const auto denom = 2 * c.idtp + c.idfp + c.idfn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(c.idtp) / static_cast<double>(denom);
}

double idf1(std::span<const SequencePair> seqs, double iou_threshold) {
  IdentityCounts total;
  for (const auto& seq : seqs) total.merge(identity_counts(seq, iou_threshold));
  return idf1_score(total);
}

SequenceEvaluation evaluate_sequence(const SequencePair& seq, const EvalConfig& cfg,
                                     std::uint32_t scope) {
  SequenceEvaluation e;
  e.metrics = cfg.metrics;
  e.s = cfg.s.value();
  e.alphas = cfg.alphas;
  e.iou_threshold = cfg.iou_threshold;
  if (cfg.metrics.so_hota) {
    SimilarityConfig sim;
    sim.measure = Measure::dotd;
    sim.s = cfg.s;
    e.dotd = accumulate(seq, sim, cfg.alphas, scope);
  }
  if (cfg.metrics.hota) {
    SimilarityConfig sim;
    sim.measure = Measure::iou;
    e.iou = accumulate(seq, sim, cfg.alphas, scope);
  }
  if (cfg.metrics.clear) e.clear = clear_counts(seq, cfg.iou_threshold);
  if (cfg.metrics.idf1) e.identity = identity_counts(seq, cfg.iou_threshold);
  return e;
}

SequenceEvaluation pool(std::span<const SequenceEvaluation> parts) {
  if (parts.empty()) throw PairingError("nothing to pool");
  SequenceEvaluation out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto& p = parts[k];
    if (!(p.metrics == out.metrics) || p.s != out.s || p.alphas != out.alphas ||
        p.iou_threshold != out.iou_threshold) {
      throw PairingError("cannot pool evaluations built with different configurations");
    }
    for (std::size_t a = 0; a < out.dotd.size(); ++a) out.dotd[a].merge(p.dotd[a]);
    for (std::size_t a = 0; a < out.iou.size(); ++a) out.iou[a].merge(p.iou[a]);
    out.clear.merge(p.clear);
    out.identity.merge(p.identity);
  }
  return out;
}

MetricValues summarize(const SequenceEvaluation& e) {
  MetricValues v;
  bool vacuous = true;
  if (e.metrics.so_hota) {
    v.so = score_hota(e.dotd, Measure::dotd);
    vacuous = vacuous && v.so->vacuous;
  }
  if (e.metrics.hota) {
    v.classic = score_hota(e.iou, Measure::iou);
    vacuous = vacuous && v.classic->vacuous;
  }
  if (e.metrics.clear) {
    if (e.clear.gt > 0) {
      v.clear = clear_scores(e.clear);
    } else {
      v.warnings.emplace_back("MOTA undefined: no ground-truth detections");
    }
    vacuous = vacuous && e.clear.gt == 0 && e.clear.fp == 0;
  }
  if (e.metrics.idf1) {
    v.idf1 = idf1_score(e.identity);
    vacuous = vacuous && e.identity.idtp + e.identity.idfn + e.identity.idfp == 0;
  }
  v.vacuous = vacuous;
  if (vacuous) v.warnings.emplace_back("vacuous: no ground truth and no predictions");
  return v;
}

MetricReport evaluate(std::span<const SequencePair> seqs, const EvalConfig& cfg) {
  validate_thresholds(cfg.alphas);
  std::vector<SequenceEvaluation> parts(seqs.size());
  parallel_for(seqs.size(), cfg.jobs, [&](std::size_t i) {
    parts[i] = evaluate_sequence(seqs[i], cfg, static_cast<std::uint32_t>(i));
  });

  MetricReport r;
  r.metrics = cfg.metrics;
  r.s_used = cfg.s.value();
  r.thresholds = cfg.alphas;
  r.iou_threshold = cfg.iou_threshold;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    r.per_sequence.emplace_back(seqs[i].name, summarize(parts[i]));
  }
  if (!parts.empty()) {
    r.pooled = summarize(pool(parts));
  } else {
    SequenceEvaluation empty;
    empty.metrics = cfg.metrics;
    empty.s = cfg.s.value();
    empty.alphas = cfg.alphas;
    for (double a : cfg.alphas) {
      MatchAccumulator acc;
      acc.alpha = a;
      if (cfg.metrics.so_hota) empty.dotd.push_back(acc);
      if (cfg.metrics.hota) empty.iou.push_back(acc);
    }
    r.pooled = summarize(empty);
  }
  return r;
}

}  // namespace smot
