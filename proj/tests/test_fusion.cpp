#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "smot/error.hpp"
#include "smot/fusion.hpp"
#include "support.hpp"

using namespace smot;
using smot::testing::det;

TEST(AdaptiveWeights, ProportionalToMeanConfidence) {
  const std::vector<std::vector<double>> conf{{0.8}, {0.4}};
  const auto w = adaptive_wbf_weights(conf);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-12);
}

TEST(AdaptiveWeights, UsesMeansNotSums) {
  const std::vector<std::vector<double>> conf{{0.9, 0.7, 0.8}, {0.4}};
  const auto w = adaptive_wbf_weights(conf);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-12);
}

TEST(AdaptiveWeights, DegenerateInputs) {
  const std::vector<std::vector<double>> none{{}, {}};
  EXPECT_THROW(adaptive_wbf_weights(none), ValidationError);
  const std::vector<std::vector<double>> zeros{{0.0}, {0.0, 0.0}, {}};
  const auto w = adaptive_wbf_weights(zeros);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  EXPECT_DOUBLE_EQ(w[2], 0.0);
  const std::vector<std::vector<double>> one_empty{{0.6}, {}};
  EXPECT_DOUBLE_EQ(adaptive_wbf_weights(one_empty)[0], 1.0);
}

TEST(AdaptiveWeightsProperty, SumToOne) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> detectors(1, 6), count(0, 20);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> conf(static_cast<std::size_t>(detectors(rng)));
    for (auto& l : conf) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i) l.push_back(c(rng));
    }
    if (std::all_of(conf.begin(), conf.end(), [](const auto& l) { return l.empty(); })) {
      conf[0].push_back(0.5);
    }
    const auto w = adaptive_wbf_weights(conf);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    for (double v : w) EXPECT_GE(v, 0.0);
  }
}

TEST(Wbf, FusesOverlappingBoxesByConfidence) {
  const std::vector<std::vector<ScoredBox>> lists{{{{0, 0, 10, 10}, 0.9}}, {{{2, 0, 10, 10}, 0.3}}};
  const std::vector<double> w{0.5, 0.5};
  const auto fused = wbf(lists, w, 0.5);
  ASSERT_EQ(fused.size(), 1u);
  EXPECT_NEAR(fused[0].box.left, (0.9 * 0 + 0.3 * 2) / 1.2, 1e-12);
  EXPECT_NEAR(fused[0].box.width, 10.0, 1e-12);
  EXPECT_NEAR(fused[0].confidence, 0.6, 1e-12);
}

TEST(Wbf, KeepsDisjointBoxesApart) {
  const std::vector<std::vector<ScoredBox>> lists{{{{0, 0, 10, 10}, 0.9}, {{50, 50, 10, 10}, 0.5}},
                                                  {{{200, 0, 10, 10}, 0.8}}};
  const std::vector<double> w{0.6, 0.4};
  EXPECT_EQ(wbf(lists, w, 0.55).size(), 3u);
}

TEST(Wbf, RejectsBadWeights) {
  const std::vector<std::vector<ScoredBox>> lists{{}, {}};
  const std::vector<double> not_normalized{0.5, 0.6};
  EXPECT_THROW(wbf(lists, not_normalized, 0.5), ValidationError);
  const std::vector<double> wrong_count{1.0};
  EXPECT_THROW(wbf(lists, wrong_count, 0.5), ValidationError);
}

TEST(WbfProperty, ConvexCombinationAndCountBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0.0, 60.0), size(5.0, 15.0), conf(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<ScoredBox>> lists(3);
    std::size_t total = 0;
    for (auto& l : lists) {
      const int n = static_cast<int>(rng() % 6);
      for (int i = 0; i < n; ++i) l.push_back({{pos(rng), pos(rng), size(rng), size(rng)}, conf(rng)});
      total += l.size();
    }
    if (total == 0) continue;
    const auto weights = adaptive_wbf_weights(lists);
    const auto fused = wbf(lists, weights, 0.3);
    EXPECT_LE(fused.size(), total);
    double min_l = 1e9, max_r = -1e9, min_t = 1e9, max_b = -1e9;
    for (const auto& l : lists) {
      for (const auto& sb : l) {
        min_l = std::min(min_l, sb.box.left);
        max_r = std::max(max_r, sb.box.right());
        min_t = std::min(min_t, sb.box.top);
        max_b = std::max(max_b, sb.box.bottom());
      }
    }
    for (const auto& f : fused) {
      EXPECT_GE(f.box.left, min_l - 1e-9);
      EXPECT_LE(f.box.right(), max_r + 1e-9);
      EXPECT_GE(f.box.top, min_t - 1e-9);
      EXPECT_LE(f.box.bottom(), max_b + 1e-9);
      EXPECT_GE(f.confidence, 0.0);
      EXPECT_LE(f.confidence, 1.0 + 1e-12);
    }
  }
}

TEST(IntersectionEnsemble, KeepsOnlyConfirmedPrimaryBoxes) {
  const std::vector<Detection> primary{det(0, 1, 0, 0, 10, 10), det(0, 2, 100, 100, 10, 10),
                                       det(1, 3, 0, 0, 10, 10)};
  const std::vector<Detection> secondary{det(0, 9, 5, 5, 10, 10), det(2, 9, 0, 0, 10, 10),
                                         det(0, 8, 110, 100, 10, 10)};
  const auto kept = intersection_ensemble(primary, secondary);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(*kept[0].track_id, 1);
  EXPECT_TRUE(intersection_ensemble(primary, {}).empty());
}
