#include "smot/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "smot/assignment.hpp"
#include "smot/error.hpp"

namespace smot {

std::vector<double> canonical_thresholds() {
  std::vector<double> alphas;
  for (int k = 1; k <= 19; ++k) alphas.push_back(k / 20.0);
  return alphas;
}

void validate_thresholds(std::span<const double> alphas) {
  if (alphas.empty()) throw ValidationError("threshold list is empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw ValidationError("threshold " + std::to_string(a) + " outside (0,1)");
    }
  }
}

MatchObjective objective(const Assignment& assignment, const Eigen::MatrixXd& sim,
                         const Eigen::MatrixXd& potential) {
  MatchObjective obj;
  obj.cardinality = static_cast<int>(assignment.size());
  for (const auto& [i, j] : assignment) {
    obj.potential += potential(i, j);
    obj.similarity += sim(i, j);
  }
  return obj;
}

bool same_objective(const MatchObjective& a, const MatchObjective& b, double tol) {
  return a.cardinality == b.cardinality && std::abs(a.potential - b.potential) <= tol &&
         std::abs(a.similarity - b.similarity) <= tol;
}

Eigen::MatrixXd similarity_matrix(std::span<const Detection> gt, std::span<const Detection> pred,
                                  const SimilarityConfig& cfg) {
  Eigen::MatrixXd sim(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          similarity(gt[i].box, pred[j].box, cfg);
    }
  }
  return sim;
}

Assignment match_frame(const Eigen::MatrixXd& sim, double alpha, const Eigen::MatrixXd& potential) {
  const auto rows = sim.rows();
  const auto cols = sim.cols();
  Assignment out;
  if (rows == 0 || cols == 0) return out;

  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> eligible = sim.array() >= alpha;
  const auto n_eligible = eligible.count();
  if (n_eligible == 0) return out;
  if (n_eligible == 1) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (eligible(i, j)) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
    return out;
  }

  // K dominates any achievable sum of the lower tiers, and eps keeps the
  // similarity tier from overturning the potential tier.
  const double n = static_cast<double>(std::max(rows, cols));
  const double max_pot = potential.size() > 0 ? potential.cwiseAbs().maxCoeff() : 0.0;
  const double big = n * (1.0 + max_pot) + 1.0;
  const double eps = 1.0 / (n * n * 1e6);

  Eigen::MatrixXd score = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (eligible(i, j)) score(i, j) = big + potential(i, j) + eps * sim(i, j);
    }
  }
  const auto row_to_col = solve_max_score_assignment(score);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int j = row_to_col[static_cast<std::size_t>(i)];
    if (j >= 0 && eligible(i, j)) out.emplace_back(static_cast<int>(i), j);
  }
  return out;
}

Assignment brute_force_match(const Eigen::MatrixXd& sim, double alpha,
                             const Eigen::MatrixXd& potential) {
  if (sim.rows() > 6 || sim.cols() > 6) {
    throw std::invalid_argument("brute_force_match supports at most 6x6 matrices");
  }
  constexpr double tol = 1e-12;
  const int rows = static_cast<int>(sim.rows());
  const int cols = static_cast<int>(sim.cols());

  Assignment best;
  MatchObjective best_obj;
  Assignment current;
  std::vector<char> used(static_cast<std::size_t>(cols), 0);

  const auto better = [&](const MatchObjective& cand, const Assignment& cand_pairs) {
    if (cand.cardinality != best_obj.cardinality) return cand.cardinality > best_obj.cardinality;
    if (std::abs(cand.potential - best_obj.potential) > tol) return cand.potential > best_obj.potential;
    if (std::abs(cand.similarity - best_obj.similarity) > tol) {
      return cand.similarity > best_obj.similarity;
    }
    return cand_pairs < best;
  };

  std::function<void(int)> visit = [&](int row) {
    if (row == rows) {
      const auto obj = objective(current, sim, potential);
      if (better(obj, current)) {
        best = current;
        best_obj = obj;
      }
      return;
    }
    visit(row + 1);
    for (int j = 0; j < cols; ++j) {
      if (used[j] || !(sim(row, j) >= alpha)) continue;
      used[j] = 1;
      current.emplace_back(row, j);
      visit(row + 1);
      current.pop_back();
      used[j] = 0;
    }
  };
  visit(0);
  return best;
}

MatchAccumulator& MatchAccumulator::merge(const MatchAccumulator& other) {
  if (alpha != other.alpha) throw PairingError("cannot merge accumulators of different thresholds");
  tp += other.tp;
  fn += other.fn;
  fp += other.fp;
  for (const auto& [k, v] : other.pair_tp) pair_tp[k] += v;
  for (const auto& [k, v] : other.gt_track_size) gt_track_size[k] += v;
  for (const auto& [k, v] : other.pred_track_size) pred_track_size[k] += v;
  return *this;
}

bool MatchAccumulator::consistent() const {
  std::int64_t pair_sum = 0, gt_total = 0, pred_total = 0;
  for (const auto& [k, v] : pair_tp) {
    pair_sum += v;
    const auto g = gt_track_size.find({k.scope, k.gt});
    const auto p = pred_track_size.find({k.scope, k.pred});
    if (g == gt_track_size.end() || p == pred_track_size.end()) return false;
    if (v > std::min(g->second, p->second)) return false;
  }
  for (const auto& [k, v] : gt_track_size) gt_total += v;
  for (const auto& [k, v] : pred_track_size) pred_total += v;
  return tp == pair_sum && tp + fn == gt_total && tp + fp == pred_total;
}

namespace {

// Detections regrouped by frame with dense per-sequence track indices.
struct FrameIndex {
  std::vector<Detection> gt;
  std::vector<Detection> pred;
  std::vector<std::size_t> gt_offset;  // frame f -> [gt_offset[f], gt_offset[f+1])
  std::vector<std::size_t> pred_offset;
  std::vector<int> gt_track;  // per detection, dense track index
  std::vector<int> pred_track;
  std::vector<int> gt_ids;  // dense index -> track id
  std::vector<int> pred_ids;
  std::vector<std::int64_t> gt_size;
  std::vector<std::int64_t> pred_size;
  int frames = 0;

  std::span<const Detection> gt_in(int f) const {
    return {gt.data() + gt_offset[f], gt_offset[f + 1] - gt_offset[f]};
  }
  std::span<const Detection> pred_in(int f) const {
    return {pred.data() + pred_offset[f], pred_offset[f + 1] - pred_offset[f]};
  }
};

void index_side(std::span<const Detection> src, int frames, const char* side,
                std::vector<Detection>& sorted, std::vector<std::size_t>& offset,
                std::vector<int>& track, std::vector<int>& ids, std::vector<std::int64_t>& size) {
  sorted.assign(src.begin(), src.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  offset.assign(static_cast<std::size_t>(frames) + 1, 0);
  for (const auto& d : sorted) ++offset[static_cast<std::size_t>(d.frame) + 1];
  for (int f = 0; f < frames; ++f) offset[f + 1] += offset[f];

  std::unordered_map<int, int> dense;
  track.clear();
  track.reserve(sorted.size());
  for (const auto& d : sorted) {
    if (!d.track_id) throw ValidationError(std::string(side) + " detection without track id");
    const auto [it, inserted] = dense.emplace(*d.track_id, static_cast<int>(ids.size()));
    if (inserted) {
      ids.push_back(*d.track_id);
      size.push_back(0);
    }
    ++size[static_cast<std::size_t>(it->second)];
    track.push_back(it->second);
  }
}

FrameIndex build_index(const SequencePair& seq) {
  FrameIndex idx;
  int frames = seq.frame_count;
  for (const auto& d : seq.gt) frames = std::max(frames, d.frame + 1);
  for (const auto& d : seq.pred) frames = std::max(frames, d.frame + 1);
  idx.frames = frames;
  index_side(seq.gt, frames, "gt", idx.gt, idx.gt_offset, idx.gt_track, idx.gt_ids, idx.gt_size);
  index_side(seq.pred, frames, "pred", idx.pred, idx.pred_offset, idx.pred_track, idx.pred_ids,
             idx.pred_size);
  return idx;
}

std::uint64_t pair_slot(int g, int p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g)) << 32) |
         static_cast<std::uint32_t>(p);
}

// Summed per-frame similarity for every co-present dense track pair; also
// hands back the per-frame matrices for reuse.
std::unordered_map<std::uint64_t, double> potential_pass(const FrameIndex& idx,
                                                         const SimilarityConfig& cfg,
                                                         std::vector<Eigen::MatrixXd>* sims) {
  std::unordered_map<std::uint64_t, double> sums;
  if (sims) sims->resize(static_cast<std::size_t>(idx.frames));
  for (int f = 0; f < idx.frames; ++f) {
    const auto g = idx.gt_in(f);
    const auto p = idx.pred_in(f);
    if (g.empty() || p.empty()) continue;
    Eigen::MatrixXd sim = similarity_matrix(g, p, cfg);
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
      const int gt_track = idx.gt_track[idx.gt_offset[f] + static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < sim.cols(); ++j) {
        const int pred_track = idx.pred_track[idx.pred_offset[f] + static_cast<std::size_t>(j)];
        sums[pair_slot(gt_track, pred_track)] += sim(i, j);
      }
    }
    if (sims) (*sims)[static_cast<std::size_t>(f)] = std::move(sim);
  }
  for (auto& [slot, total] : sums) {
    const auto g = static_cast<std::size_t>(slot >> 32);
    const auto p = static_cast<std::size_t>(slot & 0xffffffffu);
    total = total / (static_cast<double>(idx.gt_size[g] + idx.pred_size[p]) - total);
  }
  return sums;
}

}  // namespace

std::map<std::pair<int, int>, double> association_potential(const SequencePair& seq,
                                                            const SimilarityConfig& cfg) {
  const auto idx = build_index(seq);
  const auto dense = potential_pass(idx, cfg, nullptr);
  std::map<std::pair<int, int>, double> out;
  for (const auto& [slot, value] : dense) {
    out[{idx.gt_ids[slot >> 32], idx.pred_ids[slot & 0xffffffffu]}] = value;
  }
  return out;
}

std::vector<MatchAccumulator> accumulate(const SequencePair& seq, const SimilarityConfig& cfg,
                                         std::span<const double> alphas, std::uint32_t scope) {
  const auto idx = build_index(seq);
  std::vector<Eigen::MatrixXd> sims;
  const auto potentials = potential_pass(idx, cfg, &sims);

  const std::size_t n_alpha = alphas.size();
  std::vector<MatchAccumulator> acc(n_alpha);
  std::vector<std::unordered_map<std::uint64_t, std::int64_t>> pair_counts(n_alpha);
  for (std::size_t a = 0; a < n_alpha; ++a) acc[a].alpha = alphas[a];

  Eigen::MatrixXd pot;
  for (int f = 0; f < idx.frames; ++f) {
    const auto n_gt = static_cast<std::int64_t>(idx.gt_in(f).size());
    const auto n_pred = static_cast<std::int64_t>(idx.pred_in(f).size());
    if (n_gt == 0 || n_pred == 0) {
      for (auto& a : acc) {
        a.fn += n_gt;
        a.fp += n_pred;
      }
      continue;
    }
    const auto& sim = sims[static_cast<std::size_t>(f)];
    pot.resize(sim.rows(), sim.cols());
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
      const int gt_track = idx.gt_track[idx.gt_offset[f] + static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < sim.cols(); ++j) {
        const int pred_track = idx.pred_track[idx.pred_offset[f] + static_cast<std::size_t>(j)];
        pot(i, j) = potentials.at(pair_slot(gt_track, pred_track));
      }
    }
    for (std::size_t a = 0; a < n_alpha; ++a) {
      const auto matches = match_frame(sim, alphas[a], pot);
      const auto n_tp = static_cast<std::int64_t>(matches.size());
      acc[a].tp += n_tp;
      acc[a].fn += n_gt - n_tp;
      acc[a].fp += n_pred - n_tp;
      for (const auto& [i, j] : matches) {
        const int gt_track = idx.gt_track[idx.gt_offset[f] + static_cast<std::size_t>(i)];
        const int pred_track = idx.pred_track[idx.pred_offset[f] + static_cast<std::size_t>(j)];
        ++pair_counts[a][pair_slot(gt_track, pred_track)];
      }
    }
  }

  std::map<TrackKey, std::int64_t> gt_sizes, pred_sizes;
  for (std::size_t g = 0; g < idx.gt_ids.size(); ++g) gt_sizes[{scope, idx.gt_ids[g]}] = idx.gt_size[g];
  for (std::size_t p = 0; p < idx.pred_ids.size(); ++p) {
    pred_sizes[{scope, idx.pred_ids[p]}] = idx.pred_size[p];
  }
  for (std::size_t a = 0; a < n_alpha; ++a) {
    for (const auto& [slot, count] : pair_counts[a]) {
      acc[a].pair_tp[{scope, idx.gt_ids[slot >> 32], idx.pred_ids[slot & 0xffffffffu]}] = count;
    }
    acc[a].gt_track_size = gt_sizes;
    acc[a].pred_track_size = pred_sizes;
  }
  return acc;
}

}  // namespace smot
