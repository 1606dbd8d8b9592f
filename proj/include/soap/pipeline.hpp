// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_PIPELINE_HPP
#define SOAP_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/calibration.hpp"
#include "soap/config.hpp"
#include "soap/eval.hpp"
#include "soap/fuse.hpp"
#include "soap/io.hpp"
#include "soap/scp.hpp"
#include "soap/sim.hpp"

namespace soap {

/// Speed below which a ground-truth box counts as stationary in a frame.
inline constexpr double kStationarySpeed = 0.2;

enum class MotionSubset {
  all,
  stationary,  // |v| < kStationarySpeed in that frame
  dynamic,
};

/// Ground truth with boxes outside `subset` marked ignored.
EvalGroundTruth motion_subset(const FrameBoxes& ground_truth,
                              const std::vector<std::vector<std::size_t>>& point_counts,
                              MotionSubset subset);

/// Training labels the aggregated-cloud model is assumed to have learned
/// from, built from annotated tracks: the naive speed filter or QST.
FrameBoxes policy_labels(std::span<const FrameRecord> frames, const FrameBoxes& ground_truth,
                         const std::vector<std::vector<std::size_t>>& point_counts,
                         Ablation ablation, double epsilon, double speed_threshold);

/**
 * What a model run on the full-sequence aggregate sees: every labelled
 * object at its first labelled global pose, in every frame. Boxes without
 * an id stay in their own frame.
 */
FrameBoxes scene_boxes(std::span<const FrameRecord> frames, const FrameBoxes& labels);

/**
 * Point counts of each label box in the aggregated cloud. Boxes whose
 * centers fall outside `crop` in their frame get zero.
 */
std::vector<std::vector<std::size_t>> aggregated_counts(std::span<const FrameRecord> frames,
                                                        const FrameBoxes& labels,
                                                        const AggregatedCloud& aggregated,
                                                        const std::optional<CropBox>& crop,
                                                        int threads = 1);

/// Everything one domain produces before fusion.
struct DomainRun {
  SimulatedSequence sequence;
  FrameBoxes labels;      // policy labels
  FrameBoxes sfa;         // aggregated-cloud model output
  FrameBoxes stationary;  // sfa, or SCP output when enabled
  FrameBoxes detector;    // few-frame model output
  std::size_t aggregated_points = 0;
  std::size_t clusters_found = 0;
  std::size_t clusters_kept = 0;
};

DomainRun run_domain(const PipelineConfig& config, std::uint64_t scenario_seed,
                     std::uint64_t detector_seed);

/// Seed of an independent sub-stream of the run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/**
 * simulate -> aggregate -> detect -> SCP -> calibrate (source domain) ->
 * fuse -> evaluate (target domain). Returns the metrics report; contains
 * nothing that depends on timing or thread count.
 */
io::Json run_pipeline(const PipelineConfig& config);

}  // namespace soap

#endif  // SOAP_PIPELINE_HPP
