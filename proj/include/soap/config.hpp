// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_CONFIG_HPP
#define SOAP_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "soap/aggregate.hpp"
#include "soap/eval.hpp"
#include "soap/io.hpp"
#include "soap/sim.hpp"

namespace soap {

/// Which labels the aggregated-cloud model is assumed to have learned from.
enum class Ablation {
  naive_speed,  // observed boxes of tracks slower than the speed threshold
  qst,          // quasi-stationary labels, no spatial-consistency step
  qst_scp,      // quasi-stationary labels followed by SCP
};

const char* to_string(Ablation a) noexcept;
Ablation ablation_from_string(const std::string& name);

struct PipelineConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  Ablation ablation = Ablation::qst_scp;

  double voxel_size = 0.0325;
  std::size_t point_budget = 1'000'000;
  double z_offset = 0.0;
  std::optional<CropBox> crop = CropBox{};

  std::optional<double> epsilon;  // frame-rate profile when unset
  double speed_threshold = 0.2;

  double mu = 0.5;
  std::optional<std::size_t> eta;  // frame-rate profile when unset
  double nms_iou = 0.5;
  double wbf_iou = 0.5;
  double calibration_iou = 0.5;

  MatchConfig match;
  BenchmarkOptions benchmark;
  DetectorSpec detector = benchmark_detector();
  DetectorSpec sfa_detector = aggregated_detector();

  double frame_rate() const noexcept { return benchmark.frame_rate; }
  /// 0.85 at >= 5 Hz, 0.7 below.
  double effective_epsilon() const noexcept;
  /// 10 at >= 5 Hz, 2 below.
  std::size_t effective_eta() const noexcept;

  /// Throws Errc::config_invalid.
  void validate() const;
};

io::Json to_json(const PipelineConfig& config);

/// Keys present in `j` override the defaults; unknown keys are rejected with
/// Errc::config_invalid.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig read_config(const std::filesystem::path& path);

}  // namespace soap

#endif  // SOAP_CONFIG_HPP
