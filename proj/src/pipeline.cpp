// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <set>

#include "soap/error.hpp"
#include "soap/geom.hpp"
#include "soap/parallel.hpp"
#include "soap/qst.hpp"

namespace soap {

namespace {

// Re-raises library errors as stage failures naming the stage.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(Errc::stage_failure, std::string(name) + ": " + e.what());
  }
}

std::size_t total_boxes(const FrameBoxes& boxes) {
  std::size_t n = 0;
  for (const auto& f : boxes) n += f.size();
  return n;
}

io::Json subset_reports(const FrameBoxes& predictions, const SimulatedSequence& seq,
                        const MatchConfig& match, int threads) {
  io::Json out;
  const std::pair<const char*, MotionSubset> subsets[] = {{"all", MotionSubset::all},
                                                          {"stationary", MotionSubset::stationary},
                                                          {"dynamic", MotionSubset::dynamic}};
  for (const auto& [name, subset] : subsets) {
    const auto gt = motion_subset(seq.ground_truth, seq.point_counts, subset);
    out[name] = io::to_json(bucket_report(predictions, gt, match, threads));
  }
  return out;
}

io::Json domain_stages(const DomainRun& run) {
  std::size_t points = 0;
  for (const auto& c : run.sequence.clouds) points += c.size();
  return io::Json{{"frames", run.sequence.frames.size()},
                  {"points", points},
                  {"ground_truth_boxes", total_boxes(run.sequence.ground_truth)},
                  {"aggregated_points", run.aggregated_points},
                  {"label_boxes", total_boxes(run.labels)},
                  {"sfa_boxes", total_boxes(run.sfa)},
                  {"clusters_found", run.clusters_found},
                  {"clusters_kept", run.clusters_kept},
                  {"stationary_boxes", total_boxes(run.stationary)},
                  {"detector_boxes", total_boxes(run.detector)}};
}

struct StreamFit {
  CalibrationFit fit;
  bool identity_fallback = false;
};

// A stream whose source-domain boxes are all correct (or all wrong) has
// nothing to calibrate against; its scores pass through unchanged.
StreamFit fit_stream(const std::vector<CalibrationSample>& samples, const char* name) {
  try {
    return {fit_beta_calibration(samples), false};
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_labels) throw;
    spdlog::warn("{} calibration: {}; using the identity map", name, e.detail());
    return {CalibrationFit{CalibrationMap::identity(), 0.0, 0, true}, true};
  }
}

io::Json fit_json(const StreamFit& s, std::size_t samples) {
  return io::Json{{"a", s.fit.map.a},
                  {"b", s.fit.map.b},
                  {"c", s.fit.map.c},
                  {"samples", samples},
                  {"iterations", s.fit.iterations},
                  {"converged", s.fit.converged},
                  {"identity_fallback", s.identity_fallback}};
}

}  // namespace

EvalGroundTruth motion_subset(const FrameBoxes& ground_truth,
                              const std::vector<std::vector<std::size_t>>& point_counts,
                              MotionSubset subset) {
  if (point_counts.size() != ground_truth.size()) {
    throw Error(Errc::frame_misalignment, "point counts must align with ground truth");
  }
  EvalGroundTruth out(ground_truth.size());
  for (std::size_t f = 0; f < ground_truth.size(); ++f) {
    for (std::size_t k = 0; k < ground_truth[f].size(); ++k) {
      const Box& b = ground_truth[f][k];
      const double speed = b.velocity ? b.velocity->norm() : 0.0;
      const bool stationary = speed < kStationarySpeed;
      const bool ignore = (subset == MotionSubset::stationary && !stationary) ||
                          (subset == MotionSubset::dynamic && stationary);
      out[f].push_back(GroundTruthBox{b, point_counts[f].at(k), ignore});
    }
  }
  return out;
}

FrameBoxes policy_labels(std::span<const FrameRecord> frames, const FrameBoxes& ground_truth,
                         const std::vector<std::vector<std::size_t>>& point_counts,
                         Ablation ablation, double epsilon, double speed_threshold) {
  const auto tracks = build_tracks(frames, ground_truth, point_counts);
  if (ablation == Ablation::naive_speed) {
    return naive_speed_filter_labels(tracks, frames, speed_threshold);
  }
  auto qst = build_qst_labels(tracks, frames, epsilon);
  for (const auto& s : qst.skipped) spdlog::debug("qst skipped '{}': {}", s.object_id, s.reason);
  return std::move(qst.labels);
}

FrameBoxes scene_boxes(std::span<const FrameRecord> frames, const FrameBoxes& labels) {
  if (labels.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "labels must align with frames");
  }
  FrameBoxes out(frames.size());
  std::vector<Box> objects;
  std::set<std::string> seen;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const Box& b : labels[f]) {
      if (!b.id) {
        out[f].push_back(b);
      } else if (seen.insert(*b.id).second) {
        objects.push_back(transform_box(frames[f].pose, b));
      }
    }
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Pose to_local = frames[f].pose.inverse();
    for (const Box& g : objects) out[f].push_back(transform_box(to_local, g));
  }
  return out;
}

std::vector<std::vector<std::size_t>> aggregated_counts(std::span<const FrameRecord> frames,
                                                        const FrameBoxes& labels,
                                                        const AggregatedCloud& aggregated,
                                                        const std::optional<CropBox>& crop,
                                                        int threads) {
  if (labels.size() != frames.size()) {
    throw Error(Errc::frame_misalignment, "labels must align with frames");
  }
  // Counting in the global frame equals counting in the localized cloud.
  const BevGrid grid(aggregated.points, 1.0);
  std::vector<std::vector<std::size_t>> counts(frames.size());
  parallel_for(frames.size(), threads, [&](std::size_t f) {
    for (const Box& local : labels[f]) {
      if (crop && !crop->contains(local.center)) {
        counts[f].push_back(0);
        continue;
      }
      counts[f].push_back(grid.count_in_box(transform_box(frames[f].pose, local)));
    }
  });
  return counts;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DomainRun run_domain(const PipelineConfig& config, std::uint64_t scenario_seed,
                     std::uint64_t detector_seed) {
  DomainRun run;
  const int threads = config.threads;
  run.sequence = stage("simulate", [&] {
    return generate_sequence(benchmark_scenario(scenario_seed, config.benchmark), threads);
  });
  const auto& frames = run.sequence.frames;

  run.labels = stage("qst-labels", [&] {
    return policy_labels(frames, run.sequence.ground_truth, run.sequence.point_counts,
                         config.ablation, config.effective_epsilon(), config.speed_threshold);
  });

  const auto aggregated = stage("aggregate", [&] {
    AggregateOptions opts;
    opts.voxel_size = config.voxel_size;
    opts.point_budget = config.point_budget;
    opts.z_offset = config.z_offset;
    opts.seed = derive_seed(detector_seed, 10);
    opts.threads = threads;
    const auto loader = [&](const FrameRecord& frame) {
      return run.sequence.clouds.at(static_cast<std::size_t>(frame.index));
    };
    return aggregate_sequence(frames, loader, opts);
  });
  run.aggregated_points = aggregated.points.size();

  run.sfa = stage("detect-sim", [&] {
    const auto scene = scene_boxes(frames, run.labels);
    const auto counts = aggregated_counts(frames, scene, aggregated, config.crop, threads);
    return simulate_detector(frames, scene, counts, config.sfa_detector,
                             derive_seed(detector_seed, 1), threads);
  });

  if (config.ablation == Ablation::qst_scp) {
    ScpConfig scp;
    scp.mu = config.mu;
    scp.eta = config.effective_eta();
    scp.nms_iou = config.nms_iou;
    scp.wbf_iou = config.wbf_iou;
    auto result = stage("scp", [&] {
      return scp_pipeline(frames, run.sfa, run.sequence.clouds, scp, threads);
    });
    run.clusters_found = result.clusters_found;
    run.clusters_kept = result.clusters_kept;
    run.stationary = std::move(result.per_frame);
  } else {
    run.stationary = run.sfa;
  }

  run.detector = stage("detect-sim", [&] {
    return simulate_detector(frames, run.sequence.ground_truth, run.sequence.point_counts,
                             config.detector, derive_seed(detector_seed, 2), threads);
  });
  return run;
}

io::Json run_pipeline(const PipelineConfig& config) {
  config.validate();
  const int threads = config.threads;
  const DomainRun source = run_domain(config, derive_seed(config.seed, 1), derive_seed(config.seed, 2));
  const DomainRun target = run_domain(config, derive_seed(config.seed, 3), derive_seed(config.seed, 4));

  const auto det_samples = calibration_samples(source.detector, source.sequence.ground_truth,
                                               config.calibration_iou);
  const auto stat_samples = calibration_samples(source.stationary, source.sequence.ground_truth,
                                                config.calibration_iou);
  const auto det_fit = stage("calibrate", [&] { return fit_stream(det_samples, "detector"); });
  const auto stat_fit = stage("calibrate", [&] { return fit_stream(stat_samples, "stationary"); });

  const auto soap = stage("fuse", [&] {
    return soap_pseudo_labels(target.detector, target.stationary,
                              SourceCalibration{det_fit.fit.map, stat_fit.fit.map}, config.wbf_iou, threads);
  });

  io::Json metrics;
  stage("evaluate", [&] {
    metrics["detector"] = subset_reports(target.detector, target.sequence, config.match, threads);
    metrics["stationary_stream"] =
        subset_reports(target.stationary, target.sequence, config.match, threads);
    metrics["soap"] = subset_reports(soap, target.sequence, config.match, threads);
    return 0;
  });

  return io::Json{{"format", "soap-metrics"},
                  {"version", 1},
                  {"config", to_json(config)},
                  {"stages", {{"source", domain_stages(source)}, {"target", domain_stages(target)},
                              {"soap_boxes", total_boxes(soap)}}},
                  {"calibration",
                   {{"detector", fit_json(det_fit, det_samples.size())},
                    {"stationary_stream", fit_json(stat_fit, stat_samples.size())}}},
                  {"metrics", metrics}};
}

}  // namespace soap
