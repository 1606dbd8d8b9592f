// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "soap/error.hpp"

namespace soap {

namespace {

double clamp_score(double s) { return std::clamp(s, kScoreFloor, 1.0 - kScoreFloor); }

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Design matrix rows (ln s, -ln(1 - s), 1) and 0/1 targets.
struct Problem {
  Eigen::MatrixX3d x;
  Eigen::VectorXd y;

  explicit Problem(std::span<const CalibrationSample> samples)
      : x(static_cast<Eigen::Index>(samples.size()), 3),
        y(static_cast<Eigen::Index>(samples.size())) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double s = clamp_score(samples[static_cast<std::size_t>(i)].score);
      x.row(i) << std::log(s), -std::log1p(-s), 1.0;
      y[i] = samples[static_cast<std::size_t>(i)].correct ? 1.0 : 0.0;
    }
  }

  double log_likelihood(const Eigen::Vector3d& theta) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = x.row(i).dot(theta);
      total += y[i] * z - softplus(z);
    }
    return total;
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& theta) const {
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = x.row(i).dot(theta);
      g += (y[i] - logistic(z)) * x.row(i).transpose();
    }
    return g;
  }
};

Eigen::Vector3d project(Eigen::Vector3d theta) {
  theta[0] = std::max(theta[0], 0.0);
  theta[1] = std::max(theta[1], 0.0);
  return theta;
}

// Gradient with the components that push against an active bound removed.
Eigen::Vector3d projected_gradient(const Eigen::Vector3d& theta, Eigen::Vector3d g) {
  for (int k = 0; k < 2; ++k) {
    if (theta[k] <= 0.0 && g[k] < 0.0) g[k] = 0.0;
  }
  return g;
}

}  // namespace

double CalibrationMap::operator()(double score) const {
  const double s = clamp_score(score);
  return logistic(a * std::log(s) - b * std::log1p(-s) + c);
}

double beta_log_likelihood(const CalibrationMap& map, std::span<const CalibrationSample> samples) {
  return Problem(samples).log_likelihood(map.params());
}

Eigen::Vector3d beta_log_likelihood_gradient(const CalibrationMap& map,
                                             std::span<const CalibrationSample> samples) {
  return Problem(samples).gradient(map.params());
}

CalibrationFit fit_beta_calibration(std::span<const CalibrationSample> samples,
                                    const CalibrationFitOptions& options) {
  std::size_t positives = 0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) {
      throw Error(Errc::non_finite_likelihood, "calibration sample score is not finite");
    }
    positives += s.correct ? 1 : 0;
  }
  if (positives == 0 || positives == samples.size()) {
    throw Error(Errc::degenerate_labels, "calibration needs both correct and incorrect samples");
  }

  std::vector<CalibrationSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const CalibrationSample& l, const CalibrationSample& r) {
    return l.score != r.score ? l.score < r.score : l.correct < r.correct;
  });
  const Problem problem(sorted);
  // The mean log-likelihood keeps the stopping tolerance independent of n.
  const double scale = 1.0 / static_cast<double>(sorted.size());
  auto objective = [&](const Eigen::Vector3d& t) { return scale * problem.log_likelihood(t); };
  auto gradient = [&](const Eigen::Vector3d& t) -> Eigen::Vector3d {
    return scale * problem.gradient(t);
  };

  Eigen::Vector3d theta = CalibrationMap::identity().params();
  double value = objective(theta);
  Eigen::Vector3d g = gradient(theta);
  if (!std::isfinite(value) || !g.allFinite()) {
    throw Error(Errc::non_finite_likelihood, "log-likelihood is not finite at the start point");
  }

  CalibrationFit fit;
  double step = 1.0;
  for (; fit.iterations < options.max_iterations; ++fit.iterations) {
    if (projected_gradient(theta, g).lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    // Armijo backtracking along the projected path.
    Eigen::Vector3d next;
    double next_value = 0.0;
    double t = step;
    for (int tries = 0;; ++tries) {
      next = project(theta + t * g);
      next_value = objective(next);
      if (std::isfinite(next_value) && next_value >= value + 1e-4 * g.dot(next - theta)) break;
      t *= 0.5;
      if (tries > 60) break;
    }
    const Eigen::Vector3d next_g = gradient(next);
    if (!std::isfinite(next_value) || !next_g.allFinite()) {
      throw Error(Errc::non_finite_likelihood, "log-likelihood became non-finite during the fit");
    }
    if (next == theta) {
      fit.converged = true;
      break;
    }
    // Barzilai-Borwein estimate seeds the next trial step.
    const Eigen::Vector3d ds = next - theta;
    const double curvature = -ds.dot(next_g - g);
    step = curvature > 0.0 ? std::clamp(ds.squaredNorm() / curvature, 1e-10, 1e10) : 2.0 * t;
    theta = next;
    value = next_value;
    g = next_g;
  }
  fit.map = CalibrationMap{theta[0], theta[1], theta[2]};
  fit.log_likelihood = problem.log_likelihood(theta);
  return fit;
}

std::vector<Box> apply_calibration(const CalibrationMap& map, std::span<const Box> boxes) {
  std::vector<Box> out(boxes.begin(), boxes.end());
  for (Box& b : out) b.score = map(b.score);
  return out;
}

}  // namespace soap
