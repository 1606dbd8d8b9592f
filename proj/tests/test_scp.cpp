// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/scp.hpp"

namespace soap {
namespace {

Box car(double x, double y, double score = 0.9, double yaw = 0.0) {
  Box b;
  b.center = {x, y, 1.0};
  b.size = {1.9, 4.6, 1.6};
  b.yaw = yaw;
  b.score = score;
  return b;
}

std::vector<FrameRecord> frames_of(std::size_t n) {
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0; i < n; ++i) {
    FrameRecord f;
    f.index = static_cast<std::int64_t>(i);
    f.timestamp = 0.1 * i;
    f.pose = Pose::from_yaw(0.01 * i, {0.5 * i, 0.0, 0.0});
    frames.push_back(f);
  }
  return frames;
}

// Points filling a global box, expressed in each frame.
std::vector<PointCloud> clouds_with(const std::vector<FrameRecord>& frames,
                                    const std::vector<Box>& global_objects) {
  std::vector<PointCloud> clouds(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Pose to_local = frames[f].pose.inverse();
    for (const Box& g : global_objects) {
      for (double dx : {-0.5, 0.0, 0.5}) {
        for (double dy : {-1.5, 0.0, 1.5}) {
          const Eigen::Vector3d p = g.center + Eigen::Vector3d(dx, dy, 0.0);
          clouds[f].push_back({to_local * p, 0.0});
        }
      }
    }
  }
  return clouds;
}

FrameBoxes localize_all(const std::vector<FrameRecord>& frames, const std::vector<std::vector<Box>>& global) {
  FrameBoxes out(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const Box& g : global[f]) out[f].push_back(transform_box(frames[f].pose.inverse(), g));
  }
  return out;
}

TEST(ScpConfig, FrameRateProfiles) {
  EXPECT_EQ(ScpConfig::for_frame_rate(10.0).eta, 10u);
  EXPECT_EQ(ScpConfig::for_frame_rate(2.0).eta, 2u);
  ScpConfig c;
  c.mu = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = ScpConfig{};
  c.eta = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(GatherScatter, RoundTrip) {
  const auto frames = frames_of(4);
  std::vector<std::vector<Box>> global{{car(3, 1)}, {car(3, 1), car(8, 2)}, {}, {car(-2, 0)}};
  const FrameBoxes local = localize_all(frames, global);
  const auto gathered = gather_global(frames, local);
  ASSERT_EQ(gathered.size(), 4u);
  EXPECT_EQ(gathered[1].frame, 1);
  EXPECT_LT((gathered[2].box.center - car(8, 2).center).norm(), 1e-12);
  std::vector<Box> boxes{car(3, 1)};
  const FrameBoxes back = scatter_local(frames, boxes);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    ASSERT_EQ(back[f].size(), 1u);
    EXPECT_LT((transform_box(frames[f].pose, back[f][0]).center - car(3, 1).center).norm(), 1e-12);
  }
}

// Connected components by breadth-first search over all pairs.
std::vector<std::vector<std::size_t>> components_oracle(const std::vector<Box>& boxes, double thr) {
  std::vector<int> label(boxes.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < boxes.size(); ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> comp{s}, queue{s};
    label[s] = static_cast<int>(out.size());
    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (label[j] < 0 && bev_iou(boxes[i], boxes[j]) > thr) {
          label[j] = label[s];
          comp.push_back(j);
          queue.push_back(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  return out;
}

TEST(LinkComponents, MatchesBreadthFirstOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Box> boxes;
    for (int i = 0; i < 150; ++i) boxes.push_back(oracle::random_box(rng, 15.0));
    for (double thr : {0.0, 0.1, 0.5}) {
      EXPECT_EQ(link_components(boxes, thr), components_oracle(boxes, thr)) << "threshold " << thr;
    }
  }
}

TEST(LinkComponents, ChainsAreTransitive) {
  // Consecutive boxes overlap; the ends do not.
  std::vector<Box> boxes{car(0, 0), car(0, 2.0), car(0, 4.0), car(0, 6.0)};
  EXPECT_EQ(bev_iou(boxes[0], boxes[3]), 0.0);
  const auto comps = link_components(boxes, 0.3);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].size(), 4u);
}

TEST(FuseMembers, WeightedAttributes) {
  Box a = car(0, 0, 0.8, 0.1);
  a.velocity = Eigen::Vector2d(1.0, 0.0);
  a.label = "car";
  Box b = car(1, 0, 0.2, 0.5);
  b.size = {2.9, 4.6, 1.6};
  b.label = "truck";
  Box c = car(0, 1, 0.2, 0.7);
  c.velocity = Eigen::Vector2d(0.0, 1.0);
  c.label = "car";
  const std::vector<Box> boxes{a, b, c};
  const std::vector<std::int64_t> priority{0, 0, 0};
  const Box f = fuse_members(boxes, priority);
  EXPECT_NEAR(f.center.x(), 0.2 / 1.2, 1e-12);
  EXPECT_NEAR(f.center.y(), 0.2 / 1.2, 1e-12);
  EXPECT_NEAR(f.size.x(), (0.8 * 1.9 + 0.2 * 2.9 + 0.2 * 1.9) / 1.2, 1e-12);
  EXPECT_DOUBLE_EQ(f.yaw, 0.1);
  EXPECT_NEAR(f.score, 0.4, 1e-12);
  EXPECT_EQ(f.label, "car");
  ASSERT_TRUE(f.velocity.has_value());
  EXPECT_NEAR(f.velocity->x(), 0.8, 1e-12);
  EXPECT_NEAR(f.velocity->y(), 0.2, 1e-12);
}

TEST(FuseMembers, HeadingTiesAndSingletons) {
  const std::vector<Box> boxes{car(0, 0, 0.5, 0.3), car(0, 0, 0.5, 0.9)};
  EXPECT_DOUBLE_EQ(fuse_members(boxes, std::vector<std::int64_t>{1, 0}).yaw, 0.9);
  EXPECT_DOUBLE_EQ(fuse_members(boxes, std::vector<std::int64_t>{0, 0}).yaw, 0.3);
  Box single = car(4, 4, 0.3, 1.0);
  single.id = "x";
  const Box out = fuse_members(std::vector<Box>{single}, std::vector<std::int64_t>{0});
  EXPECT_TRUE(same_geometry(out, single, 0.0));
  EXPECT_EQ(out.id, single.id);
  try {
    fuse_members(std::vector<Box>{car(0, 0, 0.0), car(0, 0, 0.0)}, std::vector<std::int64_t>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::zero_total_score);
  }
}

TEST(FilterClusters, MinimumSupport) {
  std::vector<Cluster> clusters(3);
  clusters[0].members.resize(1);
  clusters[1].members.resize(5);
  clusters[2].members.resize(10);
  EXPECT_EQ(filter_clusters(clusters, 1).size(), 3u);
  EXPECT_EQ(filter_clusters(clusters, 5).size(), 2u);
  EXPECT_EQ(filter_clusters(clusters, 10).size(), 1u);
  EXPECT_THROW(filter_clusters(clusters, 0), Error);
}

TEST(ScpPipeline, SingleFramePassthroughWithEtaOne) {
  const auto frames = frames_of(1);
  const std::vector<Box> objects{car(5, 0, 0.7), car(15, 3, 0.4)};
  const FrameBoxes boxes = localize_all(frames, {objects});
  const auto clouds = clouds_with(frames, objects);
  ScpConfig cfg;
  cfg.eta = 1;
  const auto r = scp_pipeline(frames, boxes, clouds, cfg);
  ASSERT_EQ(r.per_frame[0].size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_TRUE(same_geometry(r.per_frame[0][k], boxes[0][k], 1e-12));
    EXPECT_DOUBLE_EQ(r.per_frame[0][k].score, boxes[0][k].score);
  }
}

TEST(ScpPipeline, RemovesSparseFalsePositivesAndKeepsStationary) {
  const auto frames = frames_of(30);
  const Box parked = car(10, 4, 0.6);
  std::mt19937_64 rng(32);
  std::normal_distribution<double> jitter(0.0, 0.1);
  std::uniform_real_distribution<double> where(-40.0, 40.0);
  std::vector<std::vector<Box>> global(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (f % 3 != 0) global[f].push_back(car(10 + jitter(rng), 4 + jitter(rng), 0.6));
    global[f].push_back(car(where(rng), where(rng), 0.95));  // independent per frame
  }
  const auto clouds = clouds_with(frames, {parked});
  ScpConfig cfg;
  cfg.eta = 10;
  const auto r = scp_pipeline(frames, localize_all(frames, global), clouds, cfg);
  ASSERT_EQ(r.global.size(), 1u);
  EXPECT_LT((r.global[0].center - parked.center).head<2>().norm(), 0.1);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    ASSERT_EQ(r.per_frame[f].size(), 1u) << "frame " << f;
  }
  EXPECT_EQ(r.clusters_kept, 1u);
  EXPECT_GT(r.clusters_found, 1u);
}

TEST(ScpPipeline, PrunesBoxesWithoutPoints) {
  const auto frames = frames_of(12);
  std::vector<std::vector<Box>> global(frames.size(), std::vector<Box>{car(10, 4)});
  // Points exist only in even frames.
  auto clouds = clouds_with(frames, {car(10, 4)});
  for (std::size_t f = 1; f < clouds.size(); f += 2) clouds[f].clear();
  ScpConfig cfg;
  cfg.eta = 5;
  const auto r = scp_pipeline(frames, localize_all(frames, global), clouds, cfg);
  for (std::size_t f = 0; f < frames.size(); ++f) EXPECT_EQ(r.per_frame[f].size(), f % 2 == 0 ? 1u : 0u);
}

TEST(ScpPipeline, ThreadCountDoesNotChangeOutput) {
  const auto frames = frames_of(20);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> where(-20.0, 20.0);
  std::vector<std::vector<Box>> global(frames.size());
  std::vector<Box> objects;
  for (int k = 0; k < 6; ++k) objects.push_back(car(where(rng), where(rng)));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const Box& o : objects) global[f].push_back(car(o.center.x() + 0.05 * f, o.center.y(), 0.5));
  }
  const auto clouds = clouds_with(frames, objects);
  ScpConfig cfg;
  cfg.eta = 3;
  const auto a = scp_pipeline(frames, localize_all(frames, global), clouds, cfg, 1);
  const auto b = scp_pipeline(frames, localize_all(frames, global), clouds, cfg, 4);
  ASSERT_EQ(a.global.size(), b.global.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    ASSERT_EQ(a.per_frame[f].size(), b.per_frame[f].size());
    for (std::size_t k = 0; k < a.per_frame[f].size(); ++k) {
      EXPECT_TRUE(same_geometry(a.per_frame[f][k], b.per_frame[f][k], 0.0));
    }
  }
}

TEST(ScpPipeline, MisalignedInputs) {
  const auto frames = frames_of(3);
  FrameBoxes boxes(2);
  std::vector<PointCloud> clouds(3);
  try {
    scp_pipeline(frames, boxes, clouds, ScpConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::frame_misalignment);
  }
}

}  // namespace
}  // namespace soap
