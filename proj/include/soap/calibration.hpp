// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_CALIBRATION_HPP
#define SOAP_CALIBRATION_HPP

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "soap/box.hpp"

namespace soap {

/// Beta calibration p = logistic(a ln s - b ln(1 - s) + c), a, b >= 0.
struct CalibrationMap {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;

  static CalibrationMap identity() { return {}; }

  double operator()(double score) const;

  Eigen::Vector3d params() const { return {a, b, c}; }
};

struct CalibrationSample {
  double score = 0.0;
  bool correct = false;
};

/// Scores are clamped to [kScoreFloor, 1 - kScoreFloor] before taking logs.
inline constexpr double kScoreFloor = 1e-6;

/// Binomial log-likelihood of the samples under `map`.
double beta_log_likelihood(const CalibrationMap& map, std::span<const CalibrationSample> samples);

/// Gradient of beta_log_likelihood() with respect to (a, b, c).
Eigen::Vector3d beta_log_likelihood_gradient(const CalibrationMap& map,
                                             std::span<const CalibrationSample> samples);

struct CalibrationFitOptions {
  double gradient_tolerance = 1e-8;
  std::size_t max_iterations = 10'000;
};

struct CalibrationFit {
  CalibrationMap map;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/**
 * Maximum-likelihood fit by projected batch gradient ascent with a
 * backtracking line search. Samples are put in a canonical order first, so
 * the result does not depend on their input order. Throws
 * Errc::degenerate_labels and Errc::non_finite_likelihood.
 */
CalibrationFit fit_beta_calibration(std::span<const CalibrationSample> samples,
                                    const CalibrationFitOptions& options = {});

/// Replaces each score with its calibrated value; order is kept.
std::vector<Box> apply_calibration(const CalibrationMap& map, std::span<const Box> boxes);

}  // namespace soap

#endif  // SOAP_CALIBRATION_HPP
