// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_IO_HPP
#define SOAP_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "soap/aggregate.hpp"
#include "soap/box.hpp"
#include "soap/calibration.hpp"
#include "soap/error.hpp"
#include "soap/eval.hpp"
#include "soap/sim.hpp"

namespace soap::io {

namespace fs = std::filesystem;

// Point clouds. Layout (little-endian):
//   bytes 0-7   magic "SOAPPCD\0"
//   bytes 8-11  uint32 version (1)
//   bytes 12-15 uint32 reserved, zero
//   bytes 16-23 uint64 point count N
//   then N records of float32 x, y, z, t
inline constexpr std::uint32_t kCloudVersion = 1;

/// Values are narrowed to float32. Throws Errc::non_finite_values, io_error.
void write_cloud(const fs::path& path, std::span<const Point> cloud);

/// Throws bad_magic, unsupported_version, truncated_file, trailing_data,
/// non_finite_values, io_error.
PointCloud read_cloud(const fs::path& path);

/// One line of a box file.
struct BoxRecord {
  std::int64_t frame = 0;
  Box box;
  std::optional<std::size_t> points;  // ground truth only
};

std::string format_box_record(const BoxRecord& record);

/// Parses one line; `line_number` is used in error messages.
BoxRecord parse_box_record(const std::string& line, std::size_t line_number);

void write_boxes(const fs::path& path, std::span<const BoxRecord> records);
std::vector<BoxRecord> read_boxes(const fs::path& path);

/// Flattens per-frame lists into records tagged with frame indices.
std::vector<BoxRecord> to_records(std::span<const FrameRecord> frames, const FrameBoxes& boxes,
                                  const std::vector<std::vector<std::size_t>>* points = nullptr);

/// Groups records by frame, aligned with `frames`. Records for unknown
/// frames raise Errc::frame_misalignment.
FrameBoxes group_by_frame(std::span<const FrameRecord> frames, std::span<const BoxRecord> records);

/// Like group_by_frame() but keeps point counts (missing counts are 0).
EvalGroundTruth group_ground_truth(std::span<const FrameRecord> frames,
                                   std::span<const BoxRecord> records);

struct SequenceManifest {
  std::uint32_t version = 1;
  std::string sequence_id;
  double frame_rate = 10.0;
  std::vector<FrameRecord> frames;  // cloud_ref relative to the manifest directory
  std::optional<std::string> annotations;
  std::optional<std::string> detections;
  std::optional<double> z_offset;
};

/// Pose deviation from orthonormality accepted silently on load.
inline constexpr double kPoseTolerance = 1e-6;
/// Larger deviations up to this bound are repaired with a warning; beyond
/// it the manifest is rejected.
inline constexpr double kPoseRepairLimit = 1e-2;

void write_manifest(const fs::path& path, const SequenceManifest& manifest);

/// Validates the version, frame order, poses and that every referenced file
/// exists (Errc::input_missing otherwise).
SequenceManifest read_manifest(const fs::path& path);

/// Loader resolving cloud_ref against `base`.
CloudLoader directory_loader(const fs::path& base);

/// Aggregated cloud: JSON metadata next to a point cloud file.
void write_aggregate(const fs::path& json_path, const AggregatedCloud& cloud);
AggregatedCloud read_aggregate(const fs::path& json_path);

void write_calibration(const fs::path& path, const CalibrationMap& map);
CalibrationMap read_calibration(const fs::path& path);

using Json = nlohmann::ordered_json;

Json to_json(const CalibrationMap& map);
CalibrationMap calibration_from_json(const nlohmann::json& j);

Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

Json to_json(const DetectorSpec& spec);
/// Keys present in `j` override `defaults`; unknown keys are rejected.
DetectorSpec detector_from_json(const nlohmann::json& j, const DetectorSpec& defaults = {});

Json to_json(const EvalReport& report);

ScenarioSpec read_scenario(const fs::path& path);
void write_scenario(const fs::path& path, const ScenarioSpec& spec);
DetectorSpec read_detector(const fs::path& path);

/// Parses a JSON document, mapping syntax errors onto `code`.
nlohmann::json parse_json(const std::string& text, Errc code, const std::string& what);

/// Writes `text` atomically enough for batch use (temp file + rename).
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace soap::io

#endif  // SOAP_IO_HPP
