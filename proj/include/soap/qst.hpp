// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_QST_HPP
#define SOAP_QST_HPP

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"

namespace soap {

/// One annotated observation of an object, box in the global frame.
struct Observation {
  std::int64_t frame = 0;
  double timestamp = 0.0;
  Box box;
  std::size_t point_count = 0;
};

struct TrackedObject {
  std::string object_id;
  std::vector<Observation> observations;
};

struct QuasiStationaryLabel {
  std::string object_id;
  Box box_star;
  double score_star = 0.0;
  std::size_t observation = 0;  // index of b* within the track
};

/// Point-count weights C(b_j) / sum_k C(b_k). Throws Errc::zero_total_points.
Eigen::VectorXd point_weights(const TrackedObject& track);

/// Point-weighted average BEV IoU of observation `i` against every
/// observation of the track (itself included).
double qss(const TrackedObject& track, std::size_t i);

/// qss() for every observation.
Eigen::VectorXd qss_all(const TrackedObject& track);

/// Observation with the largest QSS; ties go to the earliest frame index.
QuasiStationaryLabel select_quasi_stationary(const TrackedObject& track);

struct SkippedTrack {
  std::string object_id;
  std::string reason;
};

struct QstLabels {
  FrameBoxes labels;  // local frame, aligned with the input frames
  std::vector<QuasiStationaryLabel> accepted;
  std::vector<SkippedTrack> skipped;
};

/// Projects b* of every track with s* > epsilon into every frame, including
/// frames in which the object was never observed.
QstLabels build_qst_labels(std::span<const TrackedObject> tracks,
                           std::span<const FrameRecord> frames, double epsilon);

/// Largest center speed between consecutive observations (BEV displacement
/// over elapsed time). Zero for single-observation tracks.
double max_speed(const TrackedObject& track);

/// Smallest such speed. Zero for single-observation tracks.
double min_speed(const TrackedObject& track);

/// Ablation baseline: keeps tracks whose max_speed() is below
/// `speed_threshold` and emits only their observed boxes.
FrameBoxes naive_speed_filter_labels(std::span<const TrackedObject> tracks,
                                     std::span<const FrameRecord> frames,
                                     double speed_threshold);

struct SpeedTable {
  std::vector<double> bins;
  /// class label -> fraction of objects with min speed <= bin, per bin.
  std::map<std::string, std::vector<double>> cdf;
  std::map<std::string, std::size_t> counts;
};

SpeedTable speed_statistics(std::span<const TrackedObject> tracks, std::span<const double> bins);

/**
 * Builds tracks from per-frame local annotations grouped by box id. Boxes
 * are moved into the global frame; counts come from `counts[frame][box]`.
 * Boxes without an id are ignored.
 */
std::vector<TrackedObject> build_tracks(std::span<const FrameRecord> frames,
                                        const FrameBoxes& local_boxes,
                                        const std::vector<std::vector<std::size_t>>& counts);

}  // namespace soap

#endif  // SOAP_QST_HPP
