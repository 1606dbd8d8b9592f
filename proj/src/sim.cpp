// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/parallel.hpp"

namespace soap {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_spec, what);
}

void validate_trajectory(std::span<const Waypoint> trajectory, double duration,
                         const std::string& owner) {
  require(!trajectory.empty(), owner + ": trajectory has no waypoints");
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& w = trajectory[k];
    require(w.position.allFinite() && std::isfinite(w.yaw) && std::isfinite(w.time),
            owner + ": non-finite waypoint");
    require(w.time >= -1e-9 && w.time <= duration + 1e-9,
            owner + ": waypoint time outside the sequence span");
    if (k > 0) require(w.time > trajectory[k - 1].time, owner + ": waypoint times must increase");
  }
}

// Parameter interval [t_enter, t_exit] of a ray against an axis-aligned box
// centred at the origin; nullopt-like negative result when missed.
double slab_hit(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                const Eigen::Vector3d& half) {
  double enter = -std::numeric_limits<double>::infinity();
  double exit = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir[k]) < 1e-15) {
      if (std::abs(origin[k]) > half[k]) return -1.0;
      continue;
    }
    double t0 = (-half[k] - origin[k]) / dir[k];
    double t1 = (half[k] - origin[k]) / dir[k];
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    exit = std::min(exit, t1);
    if (enter > exit) return -1.0;
  }
  return enter > 0.0 ? enter : -1.0;
}

struct PlacedObject {
  const ObjectSpec* spec;
  Box box;  // global
  Eigen::Matrix3d to_box;  // global direction -> box frame
  double azimuth = 0.0;    // sensor-local, of the center
  double half_width = 0.0;  // angular half extent, pi when the sensor is inside
  std::size_t returns = 0;  // points this object produced in the frame
};

Box object_box(const ObjectSpec& object, double time) {
  const Waypoint w = sample_trajectory(object.trajectory, time);
  Box box;
  box.center = w.position;
  box.size = object.size;
  box.yaw = normalize_angle(w.yaw);
  box.velocity = trajectory_velocity(object.trajectory, time);
  box.label = object.label;
  box.id = object.id;
  return box;
}

double poisson_draw(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  return static_cast<double>(std::poisson_distribution<int>(mean)(rng));
}

double beta_draw(std::mt19937_64& rng, double alpha, double beta) {
  const double x = std::gamma_distribution<double>(alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(beta, 1.0)(rng);
  return x / (x + y);
}

double fp_score(std::mt19937_64& rng, const DetectorSpec& spec) {
  if (spec.fp_scores == ScoreDistribution::beta) {
    return beta_draw(rng, spec.fp_score_alpha, spec.fp_score_beta);
  }
  return std::uniform_real_distribution<double>(spec.fp_score_lo, spec.fp_score_hi)(rng);
}

Box random_car(std::mt19937_64& rng, const Eigen::Vector2d& xy, double ground_z) {
  std::normal_distribution<double> jitter(0.0, 0.05);
  Box b;
  b.size = Eigen::Vector3d(1.9, 4.6, 1.6).cwiseProduct(
      Eigen::Vector3d(1.0 + jitter(rng), 1.0 + jitter(rng), 1.0 + jitter(rng)));
  b.center = Eigen::Vector3d(xy.x(), xy.y(), ground_z + kGroundClearance + 0.5 * b.size.z());
  b.yaw = normalize_angle(std::uniform_real_distribution<double>(-kPi, kPi)(rng));
  b.velocity = Eigen::Vector2d::Zero();
  return b;
}

}  // namespace

const char* to_string(MotionProfile profile) noexcept {
  switch (profile) {
    case MotionProfile::stationary: return "stationary";
    case MotionProfile::quasi_stationary: return "quasi-stationary";
    case MotionProfile::dynamic: return "dynamic";
  }
  return "unknown";
}

MotionProfile motion_profile_from_string(const std::string& name) {
  if (name == "stationary") return MotionProfile::stationary;
  if (name == "quasi-stationary") return MotionProfile::quasi_stationary;
  if (name == "dynamic") return MotionProfile::dynamic;
  throw Error(Errc::invalid_spec, "unknown motion profile '" + name + "'");
}

void ScenarioSpec::validate() const {
  require(n_frames >= 1, "n_frames must be at least 1");
  require(frame_rate > 0.0 && std::isfinite(frame_rate), "frame_rate must be positive");
  validate_trajectory(ego_path, duration(), "ego_path");
  for (const auto& o : objects) {
    require(!o.id.empty(), "object without id");
    require((o.size.array() > 0.0).all() && o.size.allFinite(), o.id + ": size must be positive");
    validate_trajectory(o.trajectory, duration(), o.id);
  }
  require(sensor.max_range > 0.0, "sensor max_range must be positive");
  require(sensor.azimuth_steps >= 1 && sensor.elevation_steps >= 1, "sensor needs rays");
  require(sensor.min_elevation <= sensor.max_elevation, "sensor elevation range inverted");
  require(sensor.noise_sigma >= 0.0, "sensor noise_sigma must be non-negative");
  require(sensor.dropout >= 0.0 && sensor.dropout < 1.0, "sensor dropout must lie in [0, 1)");
}

Waypoint sample_trajectory(std::span<const Waypoint> trajectory, double time) {
  if (trajectory.empty()) throw Error(Errc::invalid_spec, "empty trajectory");
  if (time <= trajectory.front().time) return trajectory.front();
  if (time >= trajectory.back().time) return trajectory.back();
  const auto next = std::upper_bound(trajectory.begin(), trajectory.end(), time,
                                     [](double t, const Waypoint& w) { return t < w.time; });
  const Waypoint& b = *next;
  const Waypoint& a = *(next - 1);
  const double u = (time - a.time) / (b.time - a.time);
  Waypoint out;
  out.time = time;
  out.position = a.position + u * (b.position - a.position);
  out.yaw = normalize_angle(a.yaw + u * normalize_angle(b.yaw - a.yaw));
  return out;
}

Eigen::Vector2d trajectory_velocity(std::span<const Waypoint> trajectory, double time) {
  if (trajectory.size() < 2 || time < trajectory.front().time || time >= trajectory.back().time) {
    return Eigen::Vector2d::Zero();
  }
  const auto next = std::upper_bound(trajectory.begin(), trajectory.end(), time,
                                     [](double t, const Waypoint& w) { return t < w.time; });
  const Waypoint& b = *next;
  const Waypoint& a = *(next - 1);
  return (b.position - a.position).head<2>() / (b.time - a.time);
}

std::vector<Waypoint> clip_trajectory(std::span<const Waypoint> trajectory, double begin,
                                      double end) {
  std::vector<Waypoint> out;
  out.push_back(sample_trajectory(trajectory, begin));
  out.back().time = begin;
  for (const auto& w : trajectory) {
    if (w.time > begin && w.time < end) out.push_back(w);
  }
  if (end > begin) {
    out.push_back(sample_trajectory(trajectory, end));
    out.back().time = end;
  }
  return out;
}

std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32)};
  return std::mt19937_64(seq);
}

SimulatedSequence generate_sequence(const ScenarioSpec& spec, int threads) {
  spec.validate();
  const auto n = spec.n_frames;
  const SensorSpec& sensor = spec.sensor;
  SimulatedSequence out;
  out.frames.resize(n);
  out.clouds.resize(n);
  out.ground_truth.resize(n);
  out.point_counts.resize(n);
  for (const auto& o : spec.objects) out.profiles[o.id] = o.profile;

  std::vector<double> azimuths(sensor.azimuth_steps);
  for (std::size_t k = 0; k < azimuths.size(); ++k) {
    azimuths[k] = normalize_angle(2.0 * kPi * static_cast<double>(k) /
                                  static_cast<double>(sensor.azimuth_steps));
  }
  std::vector<double> elevations(sensor.elevation_steps);
  for (std::size_t j = 0; j < elevations.size(); ++j) {
    const double u = elevations.size() == 1
                         ? 0.5
                         : static_cast<double>(j) / static_cast<double>(elevations.size() - 1);
    elevations[j] = sensor.min_elevation + u * (sensor.max_elevation - sensor.min_elevation);
  }

  parallel_for(n, threads, [&](std::size_t f) {
    const double time = static_cast<double>(f) / spec.frame_rate;
    const Waypoint ego = sample_trajectory(spec.ego_path, time);
    const Pose pose = Pose::from_yaw(ego.yaw, ego.position);
    FrameRecord& record = out.frames[f];
    record.index = static_cast<std::int64_t>(f);
    record.timestamp = time;
    record.pose = pose;
    record.sequence_id = spec.sequence_id;
    char name[32];
    std::snprintf(name, sizeof name, "frames/%06zu.bin", f);
    record.cloud_ref = name;

    const Eigen::Vector3d origin = pose * Eigen::Vector3d(0.0, 0.0, sensor.mount_height);
    std::vector<PlacedObject> placed;
    for (const auto& o : spec.objects) {
      PlacedObject p{&o, object_box(o, time), {}, 0.0, kPi, 0};
      p.to_box = Eigen::AngleAxisd(p.box.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix().transpose();
      const Eigen::Vector3d rel = pose.rotation().transpose() * (p.box.center - origin);
      const double reach = 0.5 * p.box.size.head<2>().norm();
      const double dist = rel.head<2>().norm();
      if (dist - reach > sensor.max_range) continue;
      p.azimuth = std::atan2(rel.y(), rel.x());
      if (dist > reach) p.half_width = std::asin(reach / dist);
      placed.push_back(p);
    }

    std::mt19937_64 rng = frame_rng(spec.seed, 0, f);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Pose to_local = pose.inverse();
    PointCloud& cloud = out.clouds[f];
    for (double az : azimuths) {
      std::vector<PlacedObject*> candidates;
      for (auto& p : placed) {
        if (p.half_width >= kPi || angular_distance(az, p.azimuth) <= p.half_width + 1e-6) {
          candidates.push_back(&p);
        }
      }
      for (double el : elevations) {
        const Eigen::Vector3d local_dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                        std::sin(el));
        const Eigen::Vector3d dir = pose.rotation() * local_dir;
        double best = sensor.max_range;
        bool hit = false;
        PlacedObject* target = nullptr;
        if (dir.z() < 0.0) {
          const double t = -origin.z() / dir.z();
          if (t > 0.0 && t <= best) {
            best = t;
            hit = true;
          }
        }
        for (PlacedObject* p : candidates) {
          const double t = slab_hit(p->to_box * (origin - p->box.center), p->to_box * dir,
                                    0.5 * p->box.size);
          if (t > 0.0 && t <= best) {
            best = t;
            hit = true;
            target = p;
          }
        }
        const double drop = unit(rng);
        const Eigen::Vector3d jitter(noise(rng), noise(rng), noise(rng));
        if (!hit || drop < sensor.dropout) continue;
        if (target) ++target->returns;
        const Eigen::Vector3d global = origin + best * dir + sensor.noise_sigma * jitter;
        cloud.push_back(Point{to_local * global, 0.0});
      }
    }

    // Visibility follows the returns; the count is the exact in-box count,
    // which noise can push below the number of returns.
    for (const auto& p : placed) {
      if (p.returns == 0) continue;
      Box local = transform_box(to_local, p.box);
      const std::size_t count = points_in_box(cloud, local);
      out.ground_truth[f].push_back(std::move(local));
      out.point_counts[f].push_back(count);
    }
  });
  return out;
}

void DetectorSpec::validate() const {
  require(!recall_curve.empty(), "recall curve needs at least one knot");
  for (std::size_t k = 0; k < recall_curve.size(); ++k) {
    require(recall_curve[k].second >= 0.0 && recall_curve[k].second <= 1.0,
            "recall values must lie in [0, 1]");
    if (k > 0) require(recall_curve[k].first > recall_curve[k - 1].first,
                       "recall knots must increase in point count");
  }
  require(center_sigma >= 0.0 && size_sigma >= 0.0 && yaw_sigma >= 0.0 && velocity_sigma >= 0.0 &&
              score_sigma >= 0.0,
          "detector sigmas must be non-negative");
  require(fp_rate >= 0.0 && fp_radius > 0.0, "false-positive rate and radius must be valid");
  require(score_floor >= 0.0 && score_floor <= 1.0, "score_floor must lie in [0, 1]");
  require(fp_score_lo >= 0.0 && fp_score_hi <= 1.0 && fp_score_lo <= fp_score_hi,
          "uniform score bounds must lie in [0, 1]");
  require(fp_score_alpha > 0.0 && fp_score_beta > 0.0, "beta score shapes must be positive");
  require(clutter_probability >= 0.0 && clutter_probability <= 1.0,
          "clutter_probability must lie in [0, 1]");
}

double DetectorSpec::recall_at(double points) const {
  if (points <= recall_curve.front().first) return recall_curve.front().second;
  if (points >= recall_curve.back().first) return recall_curve.back().second;
  const auto next = std::upper_bound(
      recall_curve.begin(), recall_curve.end(), points,
      [](double v, const std::pair<double, double>& knot) { return v < knot.first; });
  const auto& [x1, y1] = *next;
  const auto& [x0, y0] = *(next - 1);
  return y0 + (points - x0) / (x1 - x0) * (y1 - y0);
}

FrameBoxes simulate_detector(std::span<const FrameRecord> frames, const FrameBoxes& ground_truth,
                             const std::vector<std::vector<std::size_t>>& point_counts,
                             const DetectorSpec& spec, std::uint64_t seed, int threads) {
  spec.validate();
  if (ground_truth.size() != frames.size() || point_counts.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "ground truth and point counts must align with frames");
  }

  // Persistent clutter lives in the global frame, anchored near ego positions.
  std::vector<Box> clutter;
  if (spec.clutter_count > 0 && !frames.empty()) {
    std::mt19937_64 rng = frame_rng(seed, spec.stream, std::numeric_limits<std::uint64_t>::max());
    std::uniform_int_distribution<std::size_t> anchor(0, frames.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < spec.clutter_count; ++k) {
      const Pose& pose = frames[anchor(rng)].pose;
      const double r = spec.fp_radius * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      const Eigen::Vector3d xy = pose * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), 0.0);
      clutter.push_back(random_car(rng, xy.head<2>(), 0.0));
    }
  }

  FrameBoxes out(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t f) {
    if (point_counts[f].size() != ground_truth[f].size()) {
      throw Error(Errc::frame_misalignment, "point counts must align with boxes");
    }
    std::mt19937_64 rng = frame_rng(seed, spec.stream, static_cast<std::uint64_t>(frames[f].index));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto& dets = out[f];
    for (std::size_t k = 0; k < ground_truth[f].size(); ++k) {
      const Box& gt = ground_truth[f][k];
      // Draw every variate so the stream layout does not depend on outcomes.
      const double u = unit(rng);
      const Eigen::Vector3d dc(spec.center_sigma * normal(rng), spec.center_sigma * normal(rng),
                               0.25 * spec.center_sigma * normal(rng));
      const Eigen::Vector3d ds(spec.size_sigma * normal(rng), spec.size_sigma * normal(rng),
                               spec.size_sigma * normal(rng));
      const double dyaw = spec.yaw_sigma * normal(rng);
      const Eigen::Vector2d dv(spec.velocity_sigma * normal(rng), spec.velocity_sigma * normal(rng));
      const double score_noise = spec.score_sigma * normal(rng);
      if (!(u < spec.recall_at(static_cast<double>(point_counts[f][k])))) continue;

      Box det = gt;
      det.id.reset();
      det.center += dc;
      det.size = gt.size.cwiseProduct((Eigen::Vector3d::Ones() + ds).cwiseMax(0.2));
      det.yaw = normalize_angle(gt.yaw + dyaw);
      if (gt.velocity) det.velocity = *gt.velocity + dv;
      const double magnitude = dc.norm() + ds.cwiseAbs().mean() + std::abs(dyaw);
      det.score = std::clamp(spec.score_base - spec.score_slope * magnitude + score_noise,
                             spec.score_floor, 1.0);
      dets.push_back(std::move(det));
    }

    const Pose& pose = frames[f].pose;
    const double ground_z = -pose.translation().z();
    const int n_fp = static_cast<int>(poisson_draw(rng, spec.fp_rate));
    for (int k = 0; k < n_fp; ++k) {
      const double r = spec.fp_radius * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      Box fp = random_car(rng, Eigen::Vector2d(r * std::cos(phi), r * std::sin(phi)), ground_z);
      fp.score = fp_score(rng, spec);
      dets.push_back(std::move(fp));
    }

    const Pose to_local = pose.inverse();
    for (const Box& c : clutter) {
      const double u = unit(rng);
      const double score = fp_score(rng, spec);
      Box local = transform_box(to_local, c);
      if (!(u < spec.clutter_probability) || local.center.head<2>().norm() > spec.fp_radius) continue;
      local.score = score;
      dets.push_back(std::move(local));
    }
  });
  return out;
}

ObjectSpec make_dweller(std::string id, const Eigen::Vector2d& start, double heading,
                        double dwell, double acceleration, double max_speed, double travel) {
  if (!(acceleration > 0.0 && max_speed > 0.0 && travel >= 0.0 && dwell >= 0.0)) {
    throw Error(Errc::invalid_spec, "dweller parameters must be positive");
  }
  ObjectSpec o;
  o.id = std::move(id);
  o.profile = MotionProfile::quasi_stationary;
  const Eigen::Vector3d origin(start.x(), start.y(), kGroundClearance + 0.5 * o.size.z());
  const Eigen::Vector3d dir(std::cos(heading), std::sin(heading), 0.0);
  // Box y axis is the heading, so the box yaw is heading - pi/2.
  const double yaw = normalize_angle(heading - 0.5 * kPi);
  auto at = [&](double t, double d) { return Waypoint{t, origin + d * dir, yaw}; };

  o.trajectory.push_back(at(0.0, 0.0));
  if (dwell > 0.0) o.trajectory.push_back(at(dwell, 0.0));
  const double t_cruise = max_speed / acceleration;
  const double d_cruise = 0.5 * acceleration * t_cruise * t_cruise;
  constexpr double kStep = 0.1;
  for (double tau = kStep;; tau += kStep) {
    const double accel_tau = std::min(tau, t_cruise);
    const double d = 0.5 * acceleration * accel_tau * accel_tau;
    if (d >= travel || tau >= t_cruise) break;
    o.trajectory.push_back(at(dwell + tau, d));
  }
  double t_stop = 0.0;
  if (travel <= d_cruise) {
    t_stop = std::sqrt(2.0 * travel / acceleration);
  } else {
    o.trajectory.push_back(at(dwell + t_cruise, d_cruise));
    t_stop = t_cruise + (travel - d_cruise) / max_speed;
  }
  if (travel > 0.0 && dwell + t_stop > o.trajectory.back().time) {
    o.trajectory.push_back(at(dwell + t_stop, travel));
  }
  return o;
}

ScenarioSpec benchmark_scenario(std::uint64_t seed, const BenchmarkOptions& options) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.sequence_id = "benchmark-" + std::to_string(seed);
  spec.n_frames = options.n_frames;
  spec.frame_rate = options.frame_rate;
  const double duration = spec.duration();
  spec.ego_path = {Waypoint{0.0, Eigen::Vector3d::Zero(), 0.0},
                   Waypoint{duration, Eigen::Vector3d(options.ego_speed * duration, 0.0, 0.0), 0.0}};
  if (duration == 0.0) spec.ego_path.pop_back();

  std::mt19937_64 rng = frame_rng(seed, 7, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double road_end = options.ego_speed * duration;
  const double z = kGroundClearance + 0.5 * 1.6;
  auto parked_yaw = [&] { return (unit(rng) < 0.5 ? 0.0 : kPi) + 0.05 * (unit(rng) - 0.5); };
  auto clip = [&](ObjectSpec o) {
    o.trajectory = clip_trajectory(o.trajectory, 0.0, duration);
    if (duration == 0.0) o.trajectory.resize(1);
    return o;
  };

  // Parked rows at y = -4.5 (right curb) and y = 8 (left curb). Each object
  // reserves a stretch of curb covering its footprint and, for dwellers, the
  // distance it later drives, so no two objects ever overlap.
  struct Slot {
    bool dweller;
    std::size_t index;
    double travel;
    double start = 0.0;
  };
  constexpr double kCarLength = 4.6;
  constexpr double kMargin = 1.0;
  const double row_begin = -20.0;
  const double row_end = road_end + 20.0;
  std::array<std::vector<Slot>, 2> rows;
  for (std::size_t k = 0; k < options.parked; ++k) rows[k % 2].push_back(Slot{false, k, 0.0});
  for (std::size_t k = 0; k < options.dwellers; ++k) {
    rows[k % 2].push_back(Slot{true, k, 3.0 + 2.0 * unit(rng)});
  }
  for (auto& row : rows) {
    std::shuffle(row.begin(), row.end(), rng);
    double used = 0.0;
    for (const Slot& s : row) used += kCarLength + kMargin + s.travel;
    // Short sequences stretch the row past the road end rather than crowd it.
    const double free = std::max(row_end - row_begin - used, 0.25 * used);
    // Random gaps summing to the free length.
    std::vector<double> gaps(row.size() + 1);
    double total = 0.0;
    for (double& g : gaps) total += (g = unit(rng) + 1e-3);
    double x = row_begin;
    for (std::size_t i = 0; i < row.size(); ++i) {
      x += free * gaps[i] / total;
      row[i].start = x;
      x += kCarLength + kMargin + row[i].travel;
    }
  }
  for (std::size_t r = 0; r < 2; ++r) {
    const double y = r == 0 ? -4.5 : 8.0;
    for (const Slot& s : rows[r]) {
      const double lo = s.start + 0.5 * (kCarLength + kMargin);  // center at the low end
      if (!s.dweller) {
        ObjectSpec o;
        o.id = "parked-" + std::to_string(s.index);
        o.profile = MotionProfile::stationary;
        const double yaw = normalize_angle(parked_yaw() - 0.5 * kPi);
        o.trajectory = {Waypoint{0.0, Eigen::Vector3d(lo, y + 0.3 * (unit(rng) - 0.5), z), yaw}};
        spec.objects.push_back(clip(std::move(o)));
        continue;
      }
      const double heading = r == 0 ? 0.0 : kPi;
      const double x0 = heading == 0.0 ? lo : lo + s.travel;
      const double dwell = duration * (0.8 + 0.1 * unit(rng));
      const double speed = 1.0 + 0.4 * unit(rng);
      spec.objects.push_back(clip(make_dweller("dweller-" + std::to_string(s.index),
                                               Eigen::Vector2d(x0, y), heading, dwell, 0.5, speed,
                                               s.travel)));
    }
  }
  // Traffic: oncoming lane at y = 3.5, ego lane ahead at y = 0. Within a
  // lane the leading car is never slower than the one behind it, so gaps
  // only grow.
  std::vector<double> oncoming_speeds, ahead_speeds;
  for (std::size_t k = 0; k < options.movers; ++k) {
    if (k % 2 == 0) {
      oncoming_speeds.push_back(6.0 + 4.0 * unit(rng));
    } else {
      ahead_speeds.push_back(options.ego_speed + 1.0 + unit(rng));
    }
  }
  // Oncoming cars lead with the lowest k, cars ahead with the highest.
  std::sort(oncoming_speeds.begin(), oncoming_speeds.end());
  std::sort(ahead_speeds.begin(), ahead_speeds.end());
  for (std::size_t k = 0; k < options.movers; ++k) {
    ObjectSpec o;
    o.id = "mover-" + std::to_string(k);
    o.profile = MotionProfile::dynamic;
    const bool oncoming = k % 2 == 0;
    const double speed = oncoming ? oncoming_speeds[oncoming_speeds.size() - 1 - k / 2] : ahead_speeds[k / 2];
    const double phase = static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(1, options.movers));
    if (oncoming) {
      const double x0 = road_end + 20.0 + phase * speed * duration;
      o.trajectory = {Waypoint{0.0, Eigen::Vector3d(x0, 3.5, z), normalize_angle(0.5 * kPi)},
                      Waypoint{duration, Eigen::Vector3d(x0 - speed * duration, 3.5, z),
                               normalize_angle(0.5 * kPi)}};
    } else {
      const double x0 = 12.0 + 25.0 * phase;
      o.trajectory = {Waypoint{0.0, Eigen::Vector3d(x0, 0.0, z), -0.5 * kPi},
                      Waypoint{duration, Eigen::Vector3d(x0 + speed * duration, 0.0, z), -0.5 * kPi}};
    }
    if (duration == 0.0) o.trajectory.resize(1);
    spec.objects.push_back(std::move(o));
  }
  return spec;
}

DetectorSpec benchmark_detector() {
  DetectorSpec d;
  d.recall_curve = {{0.0, 0.0}, {5.0, 0.25}, {20.0, 0.6}, {80.0, 0.85}, {200.0, 0.9}};
  d.center_sigma = 0.25;
  d.size_sigma = 0.06;
  d.yaw_sigma = 0.08;
  d.score_sigma = 0.1;
  d.fp_rate = 2.0;
  return d;
}

DetectorSpec aggregated_detector() {
  DetectorSpec d;
  d.recall_curve = {{0.0, 0.0}, {10.0, 0.5}, {50.0, 0.85}, {200.0, 0.92}};
  d.center_sigma = 0.2;
  d.size_sigma = 0.05;
  d.yaw_sigma = 0.05;
  d.score_sigma = 0.1;
  d.fp_rate = 2.0;
  d.stream = 2;
  return d;
}

}  // namespace soap
