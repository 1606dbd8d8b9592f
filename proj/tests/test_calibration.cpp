// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "soap/calibration.hpp"
#include "soap/error.hpp"
#include "soap/fuse.hpp"
#include "soap/geom.hpp"

namespace soap {
namespace {

Box car(double x, double y, double score, double yaw = 0.0) {
  Box b;
  b.center = {x, y, 1.0};
  b.size = {1.9, 4.6, 1.6};
  b.yaw = yaw;
  b.score = score;
  return b;
}

std::vector<CalibrationSample> identity_consistent(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> score(0.01, 0.99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CalibrationSample> out(n);
  for (auto& s : out) {
    s.score = score(rng);
    s.correct = unit(rng) < s.score;
  }
  return out;
}

// 50 score levels (2j - 1) / 100 with 200 samples each, of which exactly the
// matching fraction is correct: the empirical frequency equals the score.
std::vector<CalibrationSample> exact_identity_set() {
  std::vector<CalibrationSample> out;
  for (int j = 1; j <= 50; ++j) {
    const double s = (2 * j - 1) / 100.0;
    for (int k = 0; k < 200; ++k) out.push_back({s, k < 2 * (2 * j - 1)});
  }
  return out;
}

// Log-likelihood written out from the model definition.
double likelihood_oracle(const Eigen::Vector3d& p, const std::vector<CalibrationSample>& samples) {
  double ll = 0.0;
  for (const auto& s : samples) {
    const double x = std::clamp(s.score, kScoreFloor, 1.0 - kScoreFloor);
    const double z = p[0] * std::log(x) - p[1] * std::log(1.0 - x) + p[2];
    const double prob = 1.0 / (1.0 + std::exp(-z));
    ll += s.correct ? std::log(prob) : std::log(1.0 - prob);
  }
  return ll;
}

TEST(CalibrationMap, IdentityIsIdentity) {
  const auto id = CalibrationMap::identity();
  for (double s = 0.01; s < 1.0; s += 0.01) EXPECT_NEAR(id(s), s, 1e-12);
  // Clamping keeps the ends finite.
  EXPECT_GT(id(0.0), 0.0);
  EXPECT_LT(id(1.0), 1.0);
}

TEST(CalibrationMap, MonotoneForNonNegativeParameters) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ab(0.0, 3.0), c(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const CalibrationMap m{ab(rng), ab(rng), c(rng)};
    double prev = 0.0;
    for (double s = 0.0; s <= 1.0; s += 0.005) {
      EXPECT_GE(m(s), prev);
      prev = m(s);
    }
  }
}

TEST(Likelihood, MatchesDirectFormula) {
  const auto samples = identity_consistent(300, 42);
  const CalibrationMap m{0.7, 1.3, -0.2};
  EXPECT_NEAR(beta_log_likelihood(m, samples), likelihood_oracle(m.params(), samples), 1e-9);
}

TEST(Likelihood, GradientMatchesCentralDifferences) {
  const auto samples = identity_consistent(200, 43);
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> ab(0.05, 3.0), c(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const CalibrationMap m{ab(rng), ab(rng), c(rng)};
    const Eigen::Vector3d g = beta_log_likelihood_gradient(m, samples);
    const Eigen::Vector3d fd = oracle::central_difference(
        [&](const Eigen::Vector3d& p) { return likelihood_oracle(p, samples); }, m.params(), 1e-5);
    EXPECT_LE((g - fd).lpNorm<Eigen::Infinity>(), 1e-6 * std::max(1.0, g.lpNorm<Eigen::Infinity>()))
        << "at " << m.params().transpose();
  }
}

TEST(Fit, RecoversIdentityOnConsistentData) {
  const auto samples = exact_identity_set();
  ASSERT_EQ(samples.size(), 10'000u);
  const auto fit = fit_beta_calibration(samples);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(std::abs(fit.map.a - 1.0), 0.05);
  EXPECT_LT(std::abs(fit.map.b - 1.0), 0.05);
  EXPECT_LT(std::abs(fit.map.c), 0.05);
}

TEST(Fit, SeparatesCleanLabels) {
  std::vector<CalibrationSample> samples;
  for (int i = 0; i < 2000; ++i) samples.push_back({i % 2 ? 0.9 : 0.1, i % 2 == 1});
  const auto fit = fit_beta_calibration(samples);
  EXPECT_GT(fit.map(0.9), 0.99);
  EXPECT_LT(fit.map(0.1), 0.01);
}

TEST(Fit, NoGridPointBeatsTheFit) {
  const auto samples = identity_consistent(500, 46);
  const auto fit = fit_beta_calibration(samples);
  ASSERT_TRUE(fit.converged);
  const double ll = likelihood_oracle(fit.map.params(), samples);
  EXPECT_NEAR(fit.log_likelihood, ll, 1e-8);
  for (double a = 0.0; a <= 3.0; a += 0.1) {
    for (double b = 0.0; b <= 3.0; b += 0.1) {
      for (double c = -1.5; c <= 1.5; c += 0.1) {
        EXPECT_LE(likelihood_oracle({a, b, c}, samples), ll + 1e-9);
      }
    }
  }
}

TEST(Fit, ConstraintsHoldOnAntiCorrelatedScores) {
  // High scores are mostly wrong: the unconstrained optimum has a < 0.
  auto samples = identity_consistent(2000, 47);
  for (auto& s : samples) s.correct = !s.correct;
  const auto fit = fit_beta_calibration(samples);
  EXPECT_GE(fit.map.a, 0.0);
  EXPECT_GE(fit.map.b, 0.0);
  EXPECT_EQ(fit.map.a, 0.0);
  EXPECT_EQ(fit.map.b, 0.0);
}

TEST(Fit, IndependentOfSampleOrder) {
  auto samples = identity_consistent(1000, 48);
  const auto a = fit_beta_calibration(samples);
  std::mt19937_64 rng(49);
  std::shuffle(samples.begin(), samples.end(), rng);
  const auto b = fit_beta_calibration(samples);
  EXPECT_EQ(a.map.a, b.map.a);
  EXPECT_EQ(a.map.b, b.map.b);
  EXPECT_EQ(a.map.c, b.map.c);
}

TEST(Fit, DegenerateLabels) {
  std::vector<CalibrationSample> all_true(10, CalibrationSample{0.5, true});
  for (const auto& samples : {all_true, std::vector<CalibrationSample>{}}) {
    try {
      fit_beta_calibration(samples);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::degenerate_labels);
    }
  }
}

TEST(ApplyCalibration, KeepsOrderAndGeometry) {
  const std::vector<Box> boxes{car(0, 0, 0.2), car(5, 5, 0.9), car(9, 0, 0.5)};
  const CalibrationMap m{2.0, 0.5, 0.3};
  const auto out = apply_calibration(m, boxes);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(same_geometry(out[i], boxes[i], 0.0));
    EXPECT_DOUBLE_EQ(out[i].score, m(boxes[i].score));
  }
}

TEST(CalibrationSamples, GreedyByScore) {
  FrameBoxes gt{{car(0, 0, 1.0), car(20, 0, 1.0)}};
  FrameBoxes pred{{car(0.2, 0, 0.3), car(0, 0, 0.8), car(50, 50, 0.9), car(20, 0.5, 0.4)}};
  const auto samples = calibration_samples(pred, gt, 0.5);
  ASSERT_EQ(samples.size(), 4u);
  // Descending score: far FP, exact match, matched shifted box, duplicate.
  EXPECT_DOUBLE_EQ(samples[0].score, 0.9);
  EXPECT_FALSE(samples[0].correct);
  EXPECT_TRUE(samples[1].correct);
  EXPECT_TRUE(samples[2].correct);
  EXPECT_DOUBLE_EQ(samples[3].score, 0.3);
  EXPECT_FALSE(samples[3].correct);
  EXPECT_THROW(calibration_samples(pred, FrameBoxes{}, 0.5), Error);
}

TEST(Wbf, SingletonsPassThrough) {
  const std::vector<Box> a{car(0, 0, 0.7)};
  const std::vector<Box> b{car(30, 0, 0.4)};
  const auto out = wbf_merge(a, b, 0.55);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(same_geometry(out[0], a[0], 0.0));
  EXPECT_TRUE(same_geometry(out[1], b[0], 0.0));
  EXPECT_TRUE(wbf_merge({}, {}, 0.5).empty());
  EXPECT_THROW(wbf_merge(a, b, 1.1), Error);
}

TEST(Wbf, FusesOverlapsAndPrefersFirstSourceOnHeadingTies) {
  const std::vector<Box> a{car(0, 0, 0.5, 0.1)};
  const std::vector<Box> b{car(0.4, 0, 0.5, -0.1)};
  const auto out = wbf_merge(a, b, 0.55);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].center.x(), 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(out[0].yaw, 0.1);
  EXPECT_DOUBLE_EQ(wbf_merge(b, a, 0.55)[0].yaw, -0.1);
  EXPECT_NEAR(out[0].score, 0.5, 1e-12);
}

TEST(SoapPseudoLabels, CalibratesEachSourceSeparately) {
  FrameBoxes det{{car(0, 0, 0.6)}, {}};
  FrameBoxes scp{{car(40, 0, 0.6)}, {car(10, 10, 0.2)}};
  const SourceCalibration maps{CalibrationMap{1.0, 1.0, 1.0}, CalibrationMap::identity()};
  const auto out = soap_pseudo_labels(det, scp, maps, 0.55, 2);
  ASSERT_EQ(out.size(), 2u);
  ASSERT_EQ(out[0].size(), 2u);
  EXPECT_NEAR(out[0][0].score, 0.6, 1e-12);  // SCP box first, identity map
  EXPECT_NEAR(out[0][1].score, maps.detector(0.6), 1e-12);
  EXPECT_GT(out[0][1].score, 0.6);
  ASSERT_EQ(out[1].size(), 1u);
  EXPECT_THROW(soap_pseudo_labels(det, FrameBoxes(3), maps, 0.55), Error);
}

}  // namespace
}  // namespace soap
