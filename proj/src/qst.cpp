// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/qst.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "soap/error.hpp"
#include "soap/geom.hpp"

namespace soap {

namespace {

// Per-pair speeds of a track in timestamp order.
std::vector<double> pair_speeds(const TrackedObject& track) {
  std::vector<const Observation*> obs;
  for (const auto& o : track.observations) obs.push_back(&o);
  std::stable_sort(obs.begin(), obs.end(), [](const Observation* a, const Observation* b) {
    return a->timestamp < b->timestamp;
  });
  std::vector<double> speeds;
  for (std::size_t k = 1; k < obs.size(); ++k) {
    const double dt = obs[k]->timestamp - obs[k - 1]->timestamp;
    if (!(dt > 0.0)) {
      throw Error(Errc::invalid_argument,
                  "track '" + track.object_id + "' has observations without increasing timestamps");
    }
    const double d = (obs[k]->box.center.head<2>() - obs[k - 1]->box.center.head<2>()).norm();
    speeds.push_back(d / dt);
  }
  return speeds;
}

std::unordered_map<std::int64_t, std::size_t> frame_positions(std::span<const FrameRecord> frames) {
  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < frames.size(); ++i) pos.emplace(frames[i].index, i);
  return pos;
}

}  // namespace

Eigen::VectorXd point_weights(const TrackedObject& track) {
  if (track.observations.empty()) {
    throw Error(Errc::invalid_argument, "track '" + track.object_id + "' has no observations");
  }
  std::size_t total = 0;
  for (const auto& o : track.observations) total += o.point_count;
  if (total == 0) {
    throw Error(Errc::zero_total_points,
                "track '" + track.object_id + "' has no points in any observation");
  }
  Eigen::VectorXd w(static_cast<Eigen::Index>(track.observations.size()));
  const double denom = static_cast<double>(total);
  for (std::size_t j = 0; j < track.observations.size(); ++j) {
    w[static_cast<Eigen::Index>(j)] = static_cast<double>(track.observations[j].point_count) / denom;
  }
  return w;
}

double qss(const TrackedObject& track, std::size_t i) {
  const Eigen::VectorXd w = point_weights(track);
  if (i >= track.observations.size()) {
    throw Error(Errc::invalid_argument, "observation index out of range");
  }
  const Box& bi = track.observations[i].box;
  double score = 0.0;
  for (std::size_t j = 0; j < track.observations.size(); ++j) {
    score += w[static_cast<Eigen::Index>(j)] * bev_iou(bi, track.observations[j].box);
  }
  return score;
}

Eigen::VectorXd qss_all(const TrackedObject& track) {
  const Eigen::VectorXd w = point_weights(track);
  const auto n = static_cast<Eigen::Index>(track.observations.size());
  // bev_iou is exactly symmetric, so each pair is evaluated once.
  Eigen::MatrixXd iou(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    iou(i, i) = bev_iou(track.observations[i].box, track.observations[i].box);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      iou(i, j) = iou(j, i) = bev_iou(track.observations[i].box, track.observations[j].box);
    }
  }
  Eigen::VectorXd scores(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += w[j] * iou(i, j);
    scores[i] = s;
  }
  return scores;
}

QuasiStationaryLabel select_quasi_stationary(const TrackedObject& track) {
  const Eigen::VectorXd scores = qss_all(track);
  std::size_t best = 0;
  for (std::size_t i = 1; i < track.observations.size(); ++i) {
    const double s = scores[static_cast<Eigen::Index>(i)];
    const double b = scores[static_cast<Eigen::Index>(best)];
    if (s > b || (s == b && track.observations[i].frame < track.observations[best].frame)) {
      best = i;
    }
  }
  return QuasiStationaryLabel{track.object_id, track.observations[best].box,
                              scores[static_cast<Eigen::Index>(best)], best};
}

QstLabels build_qst_labels(std::span<const TrackedObject> tracks,
                           std::span<const FrameRecord> frames, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(Errc::invalid_argument, "epsilon must lie in [0, 1]");
  }
  QstLabels out;
  out.labels.resize(frames.size());
  std::vector<Pose> to_local;
  for (const auto& f : frames) to_local.push_back(f.pose.inverse());

  for (const auto& track : tracks) {
    QuasiStationaryLabel label;
    try {
      label = select_quasi_stationary(track);
    } catch (const Error& e) {
      out.skipped.push_back({track.object_id, e.what()});
      continue;
    }
    if (!(label.score_star > epsilon)) continue;
    Box global = label.box_star;
    global.id = track.object_id;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      out.labels[f].push_back(transform_box(to_local[f], global));
    }
    out.accepted.push_back(std::move(label));
  }
  return out;
}

double max_speed(const TrackedObject& track) {
  const auto speeds = pair_speeds(track);
  return speeds.empty() ? 0.0 : *std::max_element(speeds.begin(), speeds.end());
}

double min_speed(const TrackedObject& track) {
  const auto speeds = pair_speeds(track);
  return speeds.empty() ? 0.0 : *std::min_element(speeds.begin(), speeds.end());
}

FrameBoxes naive_speed_filter_labels(std::span<const TrackedObject> tracks,
                                     std::span<const FrameRecord> frames,
                                     double speed_threshold) {
  if (!(speed_threshold >= 0.0)) {
    throw Error(Errc::invalid_argument, "speed_threshold must be non-negative");
  }
  FrameBoxes out(frames.size());
  const auto pos = frame_positions(frames);
  for (const auto& track : tracks) {
    const bool single = track.observations.size() < 2;
    if (!single && !(max_speed(track) < speed_threshold)) continue;
    for (const auto& o : track.observations) {
      const auto it = pos.find(o.frame);
      if (it == pos.end()) continue;
      Box b = transform_box(frames[it->second].pose.inverse(), o.box);
      b.id = track.object_id;
      out[it->second].push_back(std::move(b));
    }
  }
  return out;
}

SpeedTable speed_statistics(std::span<const TrackedObject> tracks, std::span<const double> bins) {
  // Absorbs rounding in displacement / dt so a speed equal to a bin counts.
  constexpr double kSlack = 1e-9;
  SpeedTable table;
  table.bins.assign(bins.begin(), bins.end());
  std::map<std::string, std::vector<double>> min_speeds;
  for (const auto& track : tracks) {
    if (track.observations.empty()) continue;
    min_speeds[track.observations.front().box.label].push_back(min_speed(track));
  }
  for (const auto& [label, speeds] : min_speeds) {
    std::vector<double> row;
    for (double bin : bins) {
      const auto below = std::count_if(speeds.begin(), speeds.end(),
                                       [&](double s) { return s <= bin + kSlack; });
      row.push_back(static_cast<double>(below) / static_cast<double>(speeds.size()));
    }
    table.cdf[label] = std::move(row);
    table.counts[label] = speeds.size();
  }
  return table;
}

std::vector<TrackedObject> build_tracks(std::span<const FrameRecord> frames,
                                        const FrameBoxes& local_boxes,
                                        const std::vector<std::vector<std::size_t>>& counts) {
  if (local_boxes.size() != frames.size() || counts.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "annotations and point counts must align with frames");
  }
  std::vector<TrackedObject> tracks;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (counts[f].size() != local_boxes[f].size()) {
      throw Error(Errc::frame_misalignment, "point counts must align with boxes");
    }
    for (std::size_t k = 0; k < local_boxes[f].size(); ++k) {
      const Box& local = local_boxes[f][k];
      if (!local.id) continue;
      auto [it, inserted] = slot.emplace(*local.id, tracks.size());
      if (inserted) tracks.push_back(TrackedObject{*local.id, {}});
      tracks[it->second].observations.push_back(Observation{
          frames[f].index, frames[f].timestamp, transform_box(frames[f].pose, local), counts[f][k]});
    }
  }
  return tracks;
}

}  // namespace soap
