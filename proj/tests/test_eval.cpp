// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "soap/error.hpp"
#include "soap/eval.hpp"
#include "soap/geom.hpp"

namespace soap {
namespace {

Box car(double x, double y, double score = 1.0) {
  Box b;
  b.center = {x, y, 1.0};
  b.size = {1.9, 4.6, 1.6};
  b.score = score;
  return b;
}

EvalGroundTruth counted(const FrameBoxes& boxes, std::size_t points = 50) {
  EvalGroundTruth gt(boxes.size());
  for (std::size_t f = 0; f < boxes.size(); ++f) {
    for (const Box& b : boxes[f]) gt[f].push_back({b, points, false});
  }
  return gt;
}

double ap_at(const FrameBoxes& pred, const EvalGroundTruth& gt, double threshold) {
  const std::vector<double> t{threshold};
  return *match_and_score(pred, gt, MatchMode::center_distance, t).per_threshold[0].ap;
}

// Greedy center-distance matching without ignored boxes, written plainly.
std::vector<std::pair<double, bool>> match_oracle(const FrameBoxes& pred, const FrameBoxes& gt,
                                                  double threshold) {
  std::vector<std::pair<double, bool>> out;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    std::vector<Box> order = pred[f];
    std::stable_sort(order.begin(), order.end(), [](const Box& a, const Box& b) { return a.score > b.score; });
    std::vector<bool> used(gt[f].size(), false);
    for (const Box& p : order) {
      double best = threshold;
      int best_j = -1;
      for (std::size_t j = 0; j < gt[f].size(); ++j) {
        const double d = (p.center - gt[f][j].center).head<2>().norm();
        if (!used[j] && d <= best) {
          if (best_j < 0 || d < best) {
            best = d;
            best_j = static_cast<int>(j);
          }
        }
      }
      if (best_j >= 0) used[best_j] = true;
      out.emplace_back(p.score, best_j >= 0);
    }
  }
  return out;
}

struct RandomCase {
  FrameBoxes pred;
  FrameBoxes gt;
  std::size_t positives = 0;
};

RandomCase random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> where(-40.0, 40.0), unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.8);
  RandomCase c;
  c.pred.resize(5);
  c.gt.resize(5);
  for (std::size_t f = 0; f < 5; ++f) {
    for (int k = 0; k < 8; ++k) {
      // Objects far apart so each prediction sees at most one candidate.
      const Box g = car(10.0 * k - 35.0, 15.0 * static_cast<double>(f % 3));
      c.gt[f].push_back(g);
      ++c.positives;
      if (unit(rng) < 0.7) c.pred[f].push_back(car(g.center.x() + jitter(rng), g.center.y() + jitter(rng), unit(rng)));
    }
    for (int k = 0; k < 3; ++k) c.pred[f].push_back(car(where(rng), where(rng) + 100.0, unit(rng)));
  }
  return c;
}

TEST(InterpolatedAp, HandCurve) {
  PrCurve curve{{1.0, 0.5}, {0.5, 1.0}};
  // Recall up to 0.5 at precision 1, the rest at 0.5.
  EXPECT_NEAR(interpolated_ap(curve), (51 * 1.0 + 50 * 0.5) / 101.0, 1e-12);
  EXPECT_DOUBLE_EQ(interpolated_ap(PrCurve{}), 0.0);
}

TEST(MatchAndScore, PerfectPredictionsScoreOne) {
  const FrameBoxes gt{{car(0, 0), car(10, 0)}, {car(5, 5)}};
  const auto r = match_and_score(gt, counted(gt), MatchMode::center_distance, std::vector<double>{0.5, 1.0, 2.0, 4.0});
  ASSERT_TRUE(r.mean_ap.has_value());
  EXPECT_DOUBLE_EQ(*r.mean_ap, 1.0);
  const auto iou = match_and_score(gt, counted(gt), MatchMode::iou, std::vector<double>{0.7});
  EXPECT_DOUBLE_EQ(*iou.mean_ap, 1.0);
}

TEST(MatchAndScore, NoPredictionsScoreZeroNoPositivesScoreNothing) {
  const FrameBoxes gt{{car(0, 0)}};
  EXPECT_DOUBLE_EQ(ap_at(FrameBoxes(1), counted(gt), 1.0), 0.0);
  const auto r = match_and_score(gt, EvalGroundTruth(1), MatchMode::center_distance, std::vector<double>{1.0});
  EXPECT_FALSE(r.mean_ap.has_value());
  EXPECT_EQ(r.per_threshold[0].false_positives, 1u);
}

TEST(MatchAndScore, OneTruePositiveOneFalsePositive) {
  const FrameBoxes gt{{car(0, 0)}};
  const FrameBoxes fp_first{{car(0.1, 0, 0.5), car(30, 30, 0.9)}};
  const FrameBoxes tp_first{{car(0.1, 0, 0.9), car(30, 30, 0.5)}};
  EXPECT_DOUBLE_EQ(ap_at(fp_first, counted(gt), 1.0), 0.5);
  EXPECT_DOUBLE_EQ(ap_at(fp_first, counted(gt), 1.0), oracle::brute_force_ap({{0.5, true}, {0.9, false}}, 1));
  EXPECT_DOUBLE_EQ(ap_at(tp_first, counted(gt), 1.0), 1.0);
}

TEST(MatchAndScore, EqualScoresAreGrouped) {
  const FrameBoxes gt{{car(0, 0)}};
  for (const auto& pred : {FrameBoxes{{car(0, 0, 0.5), car(30, 30, 0.5)}},
                           FrameBoxes{{car(30, 30, 0.5), car(0, 0, 0.5)}}}) {
    EXPECT_DOUBLE_EQ(ap_at(pred, counted(gt), 1.0), 0.5);
  }
}

TEST(MatchAndScore, MatchesBruteForceOnRandomCases) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto c = random_case(seed);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      const double expected = oracle::brute_force_ap(match_oracle(c.pred, c.gt, t), c.positives);
      EXPECT_NEAR(ap_at(c.pred, counted(c.gt), t), expected, 1e-12) << "seed " << seed << " threshold " << t;
    }
  }
}

TEST(MatchAndScore, InvariantUnderMonotoneScoreMaps) {
  const auto c = random_case(77);
  FrameBoxes squashed = c.pred;
  for (auto& frame : squashed) {
    for (Box& b : frame) b.score = 0.1 + 0.5 * b.score * b.score;
  }
  for (double t : {0.5, 2.0}) EXPECT_DOUBLE_EQ(ap_at(c.pred, counted(c.gt), t), ap_at(squashed, counted(c.gt), t));
}

TEST(MatchAndScore, LowestScoredFalsePositiveNeverHelps) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto c = random_case(seed);
    FrameBoxes extra = c.pred;
    extra[0].push_back(car(0, 500, -1.0));
    EXPECT_LE(ap_at(extra, counted(c.gt), 1.0), ap_at(c.pred, counted(c.gt), 1.0));
  }
}

TEST(MatchAndScore, IgnoredGroundTruthAbsorbsPredictions) {
  EvalGroundTruth gt(1);
  gt[0].push_back({car(0, 0), 50, false});
  gt[0].push_back({car(20, 0), 2, true});
  const FrameBoxes pred{{car(0, 0, 0.5), car(20, 0, 0.9)}};
  const auto r = match_and_score(pred, gt, MatchMode::center_distance, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(*r.mean_ap, 1.0);
  EXPECT_EQ(r.per_threshold[0].positives, 1u);
  EXPECT_EQ(r.per_threshold[0].false_positives, 0u);
}

TEST(MatchAndScore, IouModeUsesThreeDimensionalOverlap) {
  const FrameBoxes gt{{car(0, 0)}};
  Box shifted = car(0, 0);
  shifted.center.z() += 0.5;  // iou_3d = 1.1 / 2.1 < 0.7
  ASSERT_LT(iou_3d(shifted, gt[0][0]), 0.7);
  const auto r = match_and_score(FrameBoxes{{shifted}}, counted(gt), MatchMode::iou, std::vector<double>{0.7});
  EXPECT_DOUBLE_EQ(*r.mean_ap, 0.0);
  const auto loose = match_and_score(FrameBoxes{{shifted}}, counted(gt), MatchMode::iou, std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(*loose.mean_ap, 1.0);
}

TEST(MatchAndScore, FrameMisalignment) {
  EXPECT_THROW(match_and_score(FrameBoxes(2), EvalGroundTruth(3), MatchMode::iou, std::vector<double>{0.7}), Error);
}

TEST(BucketReport, EmptyBucketHasNoAp) {
  const FrameBoxes gt{{car(10, 0)}};
  MatchConfig cfg;
  const auto report = bucket_report(gt, counted(gt), cfg);
  ASSERT_EQ(report.buckets.size(), 3u);
  EXPECT_EQ(report.buckets[0].name, "overall");
  EXPECT_DOUBLE_EQ(*report.find("0-30m")->mean_ap, 1.0);
  EXPECT_FALSE(report.find("30-50m")->mean_ap.has_value());
  EXPECT_EQ(report.find("nope"), nullptr);
}

TEST(BucketReport, SingleBucketEqualsOverall) {
  const auto c = random_case(5);
  MatchConfig cfg;
  cfg.buckets = {{"all", 0.0, 1e9}};
  const auto report = bucket_report(c.pred, counted(c.gt), cfg);
  EXPECT_EQ(report.buckets[0].mean_ap, report.buckets[1].mean_ap);
  EXPECT_EQ(report.buckets[0].positives, report.buckets[1].positives);
}

TEST(BucketReport, PredictionsOutsideBucketAreDropped) {
  const FrameBoxes gt{{car(10, 0)}};
  const FrameBoxes pred{{car(10, 0, 0.5), car(40, 0, 0.9)}};
  const auto report = bucket_report(pred, counted(gt), MatchConfig{});
  EXPECT_DOUBLE_EQ(*report.find("0-30m")->mean_ap, 1.0);
  EXPECT_DOUBLE_EQ(*report.find("overall")->mean_ap, 0.5);
}

TEST(BucketReport, LevelTwoCountsAtLeastLevelOne) {
  const auto c = random_case(9);
  EvalGroundTruth gt = counted(c.gt);
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> pts(0, 12);
  for (auto& frame : gt) {
    for (auto& g : frame) g.points = pts(rng);
  }
  MatchConfig l1;
  MatchConfig l2;
  l2.level2 = true;
  const auto r1 = bucket_report(c.pred, gt, l1);
  const auto r2 = bucket_report(c.pred, gt, l2);
  EXPECT_EQ(r1.level, "level1");
  EXPECT_EQ(r2.level, "level2");
  for (std::size_t k = 0; k < r1.buckets.size(); ++k) EXPECT_GE(r2.buckets[k].positives, r1.buckets[k].positives);
  std::size_t over5 = 0;
  for (const auto& frame : gt) {
    for (const auto& g : frame) over5 += g.points > 5;
  }
  EXPECT_EQ(r1.buckets[0].positives, over5);
  EXPECT_EQ(r2.buckets[0].positives, c.positives);
}

TEST(MatchConfig, Validation) {
  MatchConfig cfg;
  cfg.thresholds.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = MatchConfig::iou_ap(1.5);
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_NO_THROW(MatchConfig::iou_ap().validate());
  EXPECT_EQ(match_mode_from_string("iou"), MatchMode::iou);
  EXPECT_THROW(match_mode_from_string("bogus"), Error);
}

}  // namespace
}  // namespace soap
