#include "smot/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smot/error.hpp"

namespace smot {

namespace {

struct Cluster {
  double sum_w = 0.0;     // sum of weight * confidence
  double sum_det_w = 0.0; // sum of detector weight
  double sum_conf = 0.0;  // sum of detector weight * confidence
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;  // weighted corner sums
  double plain_x1 = 0.0, plain_y1 = 0.0, plain_x2 = 0.0, plain_y2 = 0.0;
  int members = 0;

  BoundingBox fused() const {
    double l, t, r, b;
    if (sum_w > 0.0) {
      l = x1 / sum_w, t = y1 / sum_w, r = x2 / sum_w, b = y2 / sum_w;
    } else {
      l = plain_x1 / members, t = plain_y1 / members, r = plain_x2 / members, b = plain_y2 / members;
    }
    return {l, t, r - l, b - t};
  }

  void add(const ScoredBox& sb, double weight) {
    const double w = weight * sb.confidence;
    sum_w += w;
    sum_det_w += weight;
    sum_conf += weight * sb.confidence;
    x1 += w * sb.box.left;
    y1 += w * sb.box.top;
    x2 += w * sb.box.right();
    y2 += w * sb.box.bottom();
    plain_x1 += sb.box.left;
    plain_y1 += sb.box.top;
    plain_x2 += sb.box.right();
    plain_y2 += sb.box.bottom();
    ++members;
  }
};

}  // namespace

std::vector<ScoredBox> wbf(std::span<const std::vector<ScoredBox>> box_lists,
                           std::span<const double> weights, double cluster_iou) {
  if (weights.size() != box_lists.size()) {
    throw ValidationError("wbf needs one weight per detector");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("wbf weights must sum to 1");
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("wbf weights must be >= 0");
  }

  struct Entry {
    const ScoredBox* box;
    double weight;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < box_lists.size(); ++k) {
    for (const auto& sb : box_lists[k]) entries.push_back({&sb, weights[k]});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.weight * a.box->confidence > b.weight * b.box->confidence;
  });

  std::vector<Cluster> clusters;
  for (const auto& e : entries) {
    int best = -1;
    double best_iou = cluster_iou;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double overlap = iou(clusters[c].fused(), e.box->box);
      if (overlap >= best_iou) {
        best_iou = overlap;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) {
      clusters.emplace_back();
      best = static_cast<int>(clusters.size()) - 1;
    }
    clusters[static_cast<std::size_t>(best)].add(*e.box, e.weight);
  }

  std::vector<ScoredBox> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) {
    const double conf = c.sum_det_w > 0.0 ? c.sum_conf / c.sum_det_w : 0.0;
    out.push_back({c.fused(), conf});
  }
  return out;
}

std::vector<double> adaptive_wbf_weights(std::span<const std::vector<double>> confidences) {
  std::vector<double> means;
  means.reserve(confidences.size());
  for (const auto& list : confidences) {
    means.push_back(list.empty() ? 0.0
                                 : std::accumulate(list.begin(), list.end(), 0.0) /
                                       static_cast<double>(list.size()));
  }
  const double total = std::accumulate(means.begin(), means.end(), 0.0);
  const bool any = std::any_of(confidences.begin(), confidences.end(),
                               [](const auto& l) { return !l.empty(); });
  if (!any) throw ValidationError("no detections from any detector; nothing to fuse");
  if (!(total > 0.0)) {
    // Every detection has zero confidence: fall back to equal weights over
    // the detectors that produced something.
    std::vector<double> w(confidences.size(), 0.0);
    double n = 0.0;
    for (const auto& l : confidences) n += l.empty() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = confidences[i].empty() ? 0.0 : 1.0 / n;
    return w;
  }
  for (auto& m : means) m /= total;
  return means;
}

std::vector<double> adaptive_wbf_weights(std::span<const std::vector<ScoredBox>> box_lists) {
  std::vector<std::vector<double>> confidences;
  confidences.reserve(box_lists.size());
  for (const auto& list : box_lists) {
    auto& c = confidences.emplace_back();
    for (const auto& sb : list) c.push_back(sb.confidence);
  }
  return adaptive_wbf_weights(confidences);
}

std::vector<Detection> intersection_ensemble(std::span<const Detection> primary,
                                             std::span<const Detection> secondary) {
  std::vector<Detection> out;
  for (const auto& p : primary) {
    const bool confirmed = std::any_of(secondary.begin(), secondary.end(), [&](const Detection& s) {
      return s.frame == p.frame && iou(p.box, s.box) > 0.0;
    });
    if (confirmed) out.push_back(p);
  }
  return out;
}

}  // namespace smot
