// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_SIM_HPP
#define SOAP_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"

namespace soap {

enum class MotionProfile {
  stationary,
  quasi_stationary,
  dynamic,
};

const char* to_string(MotionProfile profile) noexcept;
MotionProfile motion_profile_from_string(const std::string& name);

/// Planar pose sample of a trajectory. `position` is the box center in the
/// global frame.
struct Waypoint {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

struct ObjectSpec {
  std::string id;
  std::string label = "car";
  Eigen::Vector3d size{1.9, 4.6, 1.6};
  std::vector<Waypoint> trajectory;
  MotionProfile profile = MotionProfile::stationary;
};

/// Rotating scanner mounted `mount_height` above the ego origin. Rays form
/// an azimuth x elevation grid.
struct SensorSpec {
  double max_range = 60.0;
  std::size_t azimuth_steps = 1024;
  std::size_t elevation_steps = 24;
  double min_elevation = -0.35;  // rad
  double max_elevation = 0.05;   // rad
  double mount_height = 1.8;
  double noise_sigma = 0.02;
  double dropout = 0.05;

  std::size_t rays_per_frame() const noexcept { return azimuth_steps * elevation_steps; }
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  std::string sequence_id = "sim";
  std::size_t n_frames = 200;
  double frame_rate = 10.0;
  std::vector<Waypoint> ego_path;  // position z and yaw are used as given
  std::vector<ObjectSpec> objects;
  SensorSpec sensor;

  /// Throws Errc::invalid_spec.
  void validate() const;
  double duration() const noexcept { return static_cast<double>(n_frames - 1) / frame_rate; }
};

/// Linear interpolation of a trajectory, held constant outside its span.
/// Yaw follows the shorter arc.
Waypoint sample_trajectory(std::span<const Waypoint> trajectory, double time);

/// Planar velocity of the segment active at `time` (zero outside the span).
Eigen::Vector2d trajectory_velocity(std::span<const Waypoint> trajectory, double time);

/// Restricts a trajectory to [begin, end], adding interpolated end points.
std::vector<Waypoint> clip_trajectory(std::span<const Waypoint> trajectory, double begin,
                                      double end);

struct SimulatedSequence {
  std::vector<FrameRecord> frames;
  std::vector<PointCloud> clouds;  // local frame
  FrameBoxes ground_truth;         // local frame, objects that returned at least one point
  std::vector<std::vector<std::size_t>> point_counts;  // aligned with ground_truth
  std::map<std::string, MotionProfile> profiles;       // object id -> profile
};

/// Ray-casts every frame. Pure function of the spec.
SimulatedSequence generate_sequence(const ScenarioSpec& spec, int threads = 1);

/// Generator for frame `frame` of stream `stream`; independent of schedule.
std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame);

enum class ScoreDistribution {
  uniform,
  beta,
};

struct DetectorSpec {
  /// (point count, recall) knots, linearly interpolated and clamped.
  std::vector<std::pair<double, double>> recall_curve{{0.0, 0.0}, {5.0, 0.3}, {30.0, 0.8},
                                                      {100.0, 0.95}};
  double center_sigma = 0.15;  // m
  double size_sigma = 0.05;    // fraction of each extent
  double yaw_sigma = 0.05;     // rad
  double velocity_sigma = 0.2;
  double score_base = 1.0;
  double score_slope = 0.6;   // per unit of perturbation magnitude
  double score_sigma = 0.05;
  double score_floor = 0.05;
  double fp_rate = 2.0;        // Poisson mean per frame
  double fp_radius = 50.0;     // m, FPs are uniform in this disc around the ego
  ScoreDistribution fp_scores = ScoreDistribution::uniform;
  double fp_score_lo = 0.1;    // uniform bounds
  double fp_score_hi = 0.9;
  double fp_score_alpha = 2.0;  // beta shape
  double fp_score_beta = 5.0;
  /// Persistent clutter: fixed global-frame boxes reported with this
  /// per-frame probability. Off by default.
  std::size_t clutter_count = 0;
  double clutter_probability = 0.0;
  std::uint64_t stream = 1;

  /// Throws Errc::invalid_spec.
  void validate() const;
  double recall_at(double points) const;
};

/**
 * Emits per-frame detections from local ground truth. Each ground-truth box
 * is detected with probability recall_at(point count), perturbed, and
 * scored by score_base - score_slope * m + noise where m sums the center
 * error (m), relative size error and yaw error (rad). False positives carry
 * no id.
 */
FrameBoxes simulate_detector(std::span<const FrameRecord> frames, const FrameBoxes& ground_truth,
                             const std::vector<std::vector<std::size_t>>& point_counts,
                             const DetectorSpec& spec, std::uint64_t seed, int threads = 1);

/// Height of the bottom face of simulated objects above the ground plane.
inline constexpr double kGroundClearance = 0.2;

/// Parked-then-departing object: dwells at `start` for `dwell` seconds, then
/// accelerates along `heading` at `acceleration` up to `max_speed` and stops
/// again after covering `travel` meters. Acceleration is sampled every 0.1 s.
ObjectSpec make_dweller(std::string id, const Eigen::Vector2d& start, double heading,
                        double dwell, double acceleration, double max_speed, double travel);

struct BenchmarkOptions {
  std::size_t n_frames = 200;
  double frame_rate = 10.0;
  std::size_t parked = 12;
  std::size_t dwellers = 12;
  std::size_t movers = 6;
  double ego_speed = 5.0;
};

/// Straight road scene with parked cars, dwellers and moving traffic.
ScenarioSpec benchmark_scenario(std::uint64_t seed, const BenchmarkOptions& options = {});

/// Default detector used by the benchmark, a noisy few-frame model.
DetectorSpec benchmark_detector();

/// Stand-in for a model that reads the aggregated cloud: point counts come
/// from the aggregate, so recall saturates early.
DetectorSpec aggregated_detector();

}  // namespace soap

#endif  // SOAP_SIM_HPP
