// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0
//
// soap: stage-per-subcommand front end. Every stage reads and writes the
// formats in docs/formats.md; `pipeline` runs the whole chain in memory.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "soap/aggregate.hpp"
#include "soap/calibration.hpp"
#include "soap/config.hpp"
#include "soap/error.hpp"
#include "soap/eval.hpp"
#include "soap/fuse.hpp"
#include "soap/io.hpp"
#include "soap/pipeline.hpp"
#include "soap/qst.hpp"
#include "soap/scp.hpp"
#include "soap/sim.hpp"

namespace fs = std::filesystem;
using namespace soap;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfigInvalid = 2, kInputMissing = 3, kStageFailure = 4 };

// Options shared by every subcommand. Unset optionals fall back to the
// config file, then to built-in defaults.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string format = "json";
  std::string out;

  std::optional<double> voxel_size;
  std::optional<std::size_t> point_budget;
  std::optional<double> z_offset;
  std::optional<double> epsilon;
  std::optional<double> speed_threshold;
  std::optional<double> mu;
  std::optional<std::size_t> eta;
  std::optional<double> nms_iou;
  std::optional<double> wbf_iou;
  std::optional<double> calibration_iou;
  std::optional<std::string> ablation;
  std::optional<double> crop;  // half extent in x and y
  std::optional<std::string> match_mode;
  std::vector<double> thresholds;
  bool level2 = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed for every random stream");
  app->add_option("--threads", c.threads, "Worker threads (results do not depend on it)");
  app->add_option("--output-format", c.format, "Report format")
      ->check(CLI::IsMember({"json", "table"}));
}

void add_tuning(CLI::App* app, Common& c) {
  app->add_option("--voxel-size", c.voxel_size, "Voxel edge in meters");
  app->add_option("--point-budget", c.point_budget, "Maximum aggregated points");
  app->add_option("--z-offset", c.z_offset, "Vertical shift applied before aggregation (m)");
  app->add_option("--epsilon", c.epsilon, "QSS acceptance threshold");
  app->add_option("--speed-threshold", c.speed_threshold, "Naive filter speed (m/s)");
  app->add_option("--mu", c.mu, "Cluster IoU threshold");
  app->add_option("--eta", c.eta, "Minimum cluster size");
  app->add_option("--nms-iou", c.nms_iou, "NMS IoU threshold");
  app->add_option("--wbf-iou", c.wbf_iou, "Fusion IoU threshold");
  app->add_option("--calibration-iou", c.calibration_iou, "BEV IoU for correct predictions");
  app->add_option("--ablation", c.ablation, "naive-speed | qst | qst+scp")
      ->check(CLI::IsMember({"naive-speed", "qst", "qst+scp"}));
  app->add_option("--crop", c.crop, "Half extent of the x/y crop around each frame (m)");
  app->add_option("--match", c.match_mode, "center-distance | iou")
      ->check(CLI::IsMember({"center-distance", "iou"}));
  app->add_option("--thresholds", c.thresholds, "Match thresholds (m or IoU)");
  app->add_flag("--level2", c.level2, "Keep ground truth with few points");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : read_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.voxel_size) cfg.voxel_size = *c.voxel_size;
  if (c.point_budget) cfg.point_budget = *c.point_budget;
  if (c.z_offset) cfg.z_offset = *c.z_offset;
  if (c.epsilon) cfg.epsilon = *c.epsilon;
  if (c.speed_threshold) cfg.speed_threshold = *c.speed_threshold;
  if (c.mu) cfg.mu = *c.mu;
  if (c.eta) cfg.eta = *c.eta;
  if (c.nms_iou) cfg.nms_iou = *c.nms_iou;
  if (c.wbf_iou) cfg.wbf_iou = *c.wbf_iou;
  if (c.calibration_iou) cfg.calibration_iou = *c.calibration_iou;
  if (c.ablation) cfg.ablation = ablation_from_string(*c.ablation);
  if (c.crop) {
    CropBox box;
    box.min.head<2>().setConstant(-*c.crop);
    box.max.head<2>().setConstant(*c.crop);
    cfg.crop = box;
  }
  if (c.match_mode) {
    cfg.match.mode = match_mode_from_string(*c.match_mode);
    if (cfg.match.mode == MatchMode::iou) cfg.match.thresholds = {0.7};
  }
  if (!c.thresholds.empty()) cfg.match.thresholds = c.thresholds;
  if (c.level2) cfg.match.level2 = true;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, e.detail());
  }
  return cfg;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    io::write_text(c.out, text);
  }
}

struct Sequence {
  fs::path base;
  io::SequenceManifest manifest;
};

Sequence load_sequence(const std::string& path) {
  Sequence s{fs::path(path).parent_path(), io::read_manifest(path)};
  return s;
}

std::vector<PointCloud> load_clouds(const Sequence& s) {
  const auto loader = io::directory_loader(s.base);
  std::vector<PointCloud> clouds;
  for (const auto& f : s.manifest.frames) clouds.push_back(loader(f));
  return clouds;
}

std::vector<io::BoxRecord> annotations(const Sequence& s, const std::string& override_path) {
  if (!override_path.empty()) return io::read_boxes(override_path);
  if (!s.manifest.annotations) {
    throw Error(Errc::input_missing, "manifest has no annotations; pass --ground-truth");
  }
  return io::read_boxes(s.base / *s.manifest.annotations);
}

// Ground-truth boxes and their point counts, aligned with the frames.
std::pair<FrameBoxes, std::vector<std::vector<std::size_t>>> ground_truth_with_counts(
    const Sequence& s, const std::string& override_path) {
  const auto gt = io::group_ground_truth(s.manifest.frames, annotations(s, override_path));
  FrameBoxes boxes(gt.size());
  std::vector<std::vector<std::size_t>> counts(gt.size());
  for (std::size_t f = 0; f < gt.size(); ++f) {
    for (const auto& g : gt[f]) {
      boxes[f].push_back(g.box);
      counts[f].push_back(g.points);
    }
  }
  return {std::move(boxes), std::move(counts)};
}

void write_frame_boxes(const std::string& path, const Sequence& s, const FrameBoxes& boxes) {
  io::write_boxes(path, io::to_records(s.manifest.frames, boxes));
}

// --- subcommands -----------------------------------------------------------

int cmd_simulate(const Common& c, const std::string& scenario_path, const std::string& out_dir) {
  const PipelineConfig cfg = resolve(c);
  ScenarioSpec spec = scenario_path.empty() ? benchmark_scenario(cfg.seed, cfg.benchmark)
                                            : io::read_scenario(scenario_path);
  if (!scenario_path.empty() && c.seed) spec.seed = *c.seed;
  const auto seq = generate_sequence(spec, cfg.threads);
  const fs::path dir(out_dir);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    io::write_cloud(dir / seq.frames[f].cloud_ref, seq.clouds[f]);
  }
  io::write_boxes(dir / "ground_truth.jsonl",
                  io::to_records(seq.frames, seq.ground_truth, &seq.point_counts));
  io::write_scenario(dir / "scenario.json", spec);
  io::SequenceManifest m;
  m.sequence_id = spec.sequence_id;
  m.frame_rate = spec.frame_rate;
  m.frames = seq.frames;
  m.annotations = "ground_truth.jsonl";
  io::write_manifest(dir / "manifest.json", m);
  spdlog::info("wrote {} frames to {}", seq.frames.size(), dir.string());
  return kOk;
}

int cmd_aggregate(const Common& c, const std::string& manifest) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  AggregateOptions opts;
  opts.voxel_size = cfg.voxel_size;
  opts.point_budget = cfg.point_budget;
  opts.z_offset = c.z_offset ? *c.z_offset : s.manifest.z_offset.value_or(cfg.z_offset);
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  const auto agg = aggregate_sequence(s.manifest.frames, io::directory_loader(s.base), opts);
  if (c.out.empty()) throw Error(Errc::config_invalid, "aggregate needs --out");
  io::write_aggregate(c.out, agg);
  spdlog::info("aggregated {} frames into {} points", agg.frame_indices.size(), agg.points.size());
  return kOk;
}

int cmd_qss(const Common& c, const std::string& manifest, const std::string& gt_path) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  const auto [boxes, counts] = ground_truth_with_counts(s, gt_path);
  const auto tracks = build_tracks(s.manifest.frames, boxes, counts);
  const double eps = cfg.effective_epsilon();
  io::Json rows = io::Json::array();
  std::string table = "object                      obs   s*      frame*  max_speed  accepted\n";
  for (const auto& t : tracks) {
    io::Json row{{"object_id", t.object_id}, {"observations", t.observations.size()}};
    try {
      const auto q = select_quasi_stationary(t);
      const double vmax = max_speed(t);
      row["s_star"] = q.score_star;
      row["frame_star"] = t.observations[q.observation].frame;
      row["max_speed"] = vmax;
      row["accepted"] = q.score_star > eps;
      char line[160];
      std::snprintf(line, sizeof line, "%-26s %5zu  %.4f  %6lld  %9.3f  %s\n", t.object_id.c_str(),
                    t.observations.size(), q.score_star,
                    static_cast<long long>(t.observations[q.observation].frame), vmax,
                    q.score_star > eps ? "yes" : "no");
      table += line;
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  const std::vector<double> bins{0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  const auto speeds = speed_statistics(tracks, bins);
  io::Json cdf;
  for (const auto& [label, values] : speeds.cdf) {
    cdf[label] = io::Json{{"objects", speeds.counts.at(label)}, {"cdf", values}};
  }
  table += "\nmin-speed CDF (m/s bins: 0 0.1 0.2 0.5 1 2 5 10)\n";
  for (const auto& [label, values] : speeds.cdf) {
    table += label;
    for (double v : values) {
      char cell[16];
      std::snprintf(cell, sizeof cell, " %.3f", v);
      table += cell;
    }
    table += '\n';
  }
  const io::Json report{{"format", "soap-qss"},
                        {"version", 1},
                        {"epsilon", eps},
                        {"tracks", rows},
                        {"speed_bins", bins},
                        {"speed_cdf", cdf}};
  emit(c, c.format == "table" ? table : report.dump(2) + "\n");
  return kOk;
}

int cmd_qst_labels(const Common& c, const std::string& manifest, const std::string& gt_path) {
  PipelineConfig cfg = resolve(c);
  if (!c.ablation) cfg.ablation = Ablation::qst;
  const Sequence s = load_sequence(manifest);
  const auto [boxes, counts] = ground_truth_with_counts(s, gt_path);
  const auto labels = policy_labels(s.manifest.frames, boxes, counts, cfg.ablation,
                                    cfg.effective_epsilon(), cfg.speed_threshold);
  if (c.out.empty()) throw Error(Errc::config_invalid, "qst-labels needs --out");
  write_frame_boxes(c.out, s, labels);
  return kOk;
}

int cmd_detect_sim(const Common& c, const std::string& manifest, const std::string& model,
                   const std::string& labels_path, const std::string& aggregate_path,
                   const std::string& detector_path, const std::string& gt_path) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  const auto& frames = s.manifest.frames;
  FrameBoxes boxes;
  std::vector<std::vector<std::size_t>> counts;
  DetectorSpec spec;
  if (model == "aggregated") {
    if (labels_path.empty() || aggregate_path.empty()) {
      throw Error(Errc::config_invalid, "--model aggregated needs --labels and --aggregate");
    }
    boxes = scene_boxes(frames, io::group_by_frame(frames, io::read_boxes(labels_path)));
    const auto agg = io::read_aggregate(aggregate_path);
    counts = aggregated_counts(frames, boxes, agg, cfg.crop, cfg.threads);
    spec = cfg.sfa_detector;
  } else {
    std::tie(boxes, counts) = ground_truth_with_counts(s, gt_path);
    spec = cfg.detector;
  }
  if (!detector_path.empty()) spec = io::read_detector(detector_path);
  const auto dets = simulate_detector(frames, boxes, counts, spec, cfg.seed, cfg.threads);
  if (c.out.empty()) throw Error(Errc::config_invalid, "detect-sim needs --out");
  write_frame_boxes(c.out, s, dets);
  return kOk;
}

int cmd_scp(const Common& c, const std::string& manifest, const std::string& detections) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  ScpConfig scp;
  scp.mu = cfg.mu;
  scp.eta = cfg.effective_eta();
  scp.nms_iou = cfg.nms_iou;
  scp.wbf_iou = cfg.wbf_iou;
  const auto boxes = io::group_by_frame(s.manifest.frames, io::read_boxes(detections));
  const auto clouds = load_clouds(s);
  const auto result = scp_pipeline(s.manifest.frames, boxes, clouds, scp, cfg.threads);
  if (c.out.empty()) throw Error(Errc::config_invalid, "scp needs --out");
  write_frame_boxes(c.out, s, result.per_frame);
  spdlog::info("scp: {} clusters, {} kept, {} global boxes", result.clusters_found,
               result.clusters_kept, result.global.size());
  return kOk;
}

int cmd_calibrate(const Common& c, const std::string& manifest, const std::string& predictions,
                  const std::string& gt_path) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  const auto pred = io::group_by_frame(s.manifest.frames, io::read_boxes(predictions));
  const auto [gt, counts] = ground_truth_with_counts(s, gt_path);
  const auto samples = calibration_samples(pred, gt, cfg.calibration_iou);
  const auto fit = fit_beta_calibration(samples);
  if (c.out.empty()) throw Error(Errc::config_invalid, "calibrate needs --out");
  io::write_calibration(c.out, fit.map);
  spdlog::info("calibration a={:.6f} b={:.6f} c={:.6f} ({} samples, {} iterations)", fit.map.a,
               fit.map.b, fit.map.c, samples.size(), fit.iterations);
  return kOk;
}

int cmd_fuse(const Common& c, const std::string& manifest, const std::string& detections,
             const std::string& scp_path, const std::string& det_map, const std::string& scp_map) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  const auto& frames = s.manifest.frames;
  SourceCalibration maps;
  if (!det_map.empty()) maps.detector = io::read_calibration(det_map);
  if (!scp_map.empty()) maps.scp = io::read_calibration(scp_map);
  const auto det = io::group_by_frame(frames, io::read_boxes(detections));
  const auto scp = io::group_by_frame(frames, io::read_boxes(scp_path));
  const auto fused = soap_pseudo_labels(det, scp, maps, cfg.wbf_iou, cfg.threads);
  if (c.out.empty()) throw Error(Errc::config_invalid, "fuse needs --out");
  write_frame_boxes(c.out, s, fused);
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& manifest, const std::string& predictions,
                 const std::string& gt_path, const std::string& subset) {
  const PipelineConfig cfg = resolve(c);
  const Sequence s = load_sequence(manifest);
  const auto pred = io::group_by_frame(s.manifest.frames, io::read_boxes(predictions));
  const auto [gt, counts] = ground_truth_with_counts(s, gt_path);
  const MotionSubset which = subset == "stationary" ? MotionSubset::stationary
                             : subset == "dynamic"  ? MotionSubset::dynamic
                                                    : MotionSubset::all;
  const auto report = bucket_report(pred, motion_subset(gt, counts, which), cfg.match, cfg.threads);
  emit(c, c.format == "table" ? format_table(report) : io::to_json(report).dump(2) + "\n");
  return kOk;
}

std::string pipeline_table(const io::Json& report) {
  std::string out = "source            subset      bucket   mAP\n";
  for (const char* source : {"detector", "stationary_stream", "soap"}) {
    for (const char* subset : {"all", "stationary", "dynamic"}) {
      for (const auto& b : report["metrics"][source][subset]["buckets"]) {
        char line[160];
        const std::string value = b["mAP"].is_null() ? "-" : fmt::format("{:.4f}", b["mAP"].get<double>());
        std::snprintf(line, sizeof line, "%-17s %-11s %-8s %s\n", source, subset,
                      b["name"].get<std::string>().c_str(), value.c_str());
        out += line;
      }
    }
  }
  return out;
}

int cmd_pipeline(const Common& c) {
  const PipelineConfig cfg = resolve(c);
  const io::Json report = run_pipeline(cfg);
  emit(c, c.format == "table" ? pipeline_table(report) : report.dump(2) + "\n");
  return kOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::config_invalid: return kConfigInvalid;
    case Errc::input_missing:
    case Errc::missing_cloud: return kInputMissing;
    default: return kStageFailure;
  }
}

std::string category_for(Errc code) {
  switch (exit_code_for(code)) {
    case kConfigInvalid: return "config-invalid";
    case kInputMissing: return "input-missing";
    default: return "stage-failure";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-labels for LiDAR sequences: aggregation, QST, SCP, fusion, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));

  Common c;
  std::string manifest, scenario, ground_truth, predictions, detections, scp_boxes, labels,
      aggregate, detector_spec, model = "few-frame", subset = "all", det_map, scp_map;
  std::function<int()> run;

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, c);
    add_tuning(s, c);
    s->add_option("--out", c.out, "Output path (stdout for reports when omitted)");
    return s;
  };
  auto need_manifest = [&](CLI::App* s) {
    s->add_option("--manifest", manifest, "Sequence manifest")->required();
  };

  auto* simulate = sub("simulate", "Generate a synthetic sequence");
  simulate->add_option("--scenario", scenario, "Scenario JSON (benchmark scene when omitted)");
  simulate->callback([&] { run = [&] { return cmd_simulate(c, scenario, c.out.empty() ? "." : c.out); }; });

  auto* agg = sub("aggregate", "Aggregate all frames into one global cloud");
  need_manifest(agg);
  agg->callback([&] { run = [&] { return cmd_aggregate(c, manifest); }; });

  auto* qss = sub("qss", "Quasi-stationary scores and speed statistics of annotated tracks");
  need_manifest(qss);
  qss->add_option("--ground-truth", ground_truth, "Annotations (manifest's when omitted)");
  qss->callback([&] { run = [&] { return cmd_qss(c, manifest, ground_truth); }; });

  auto* qst = sub("qst-labels", "Training labels from annotated tracks");
  need_manifest(qst);
  qst->add_option("--ground-truth", ground_truth, "Annotations (manifest's when omitted)");
  qst->callback([&] { run = [&] { return cmd_qst_labels(c, manifest, ground_truth); }; });

  auto* det = sub("detect-sim", "Simulated detector output");
  need_manifest(det);
  det->add_option("--model", model, "few-frame | aggregated")
      ->check(CLI::IsMember({"few-frame", "aggregated"}));
  det->add_option("--labels", labels, "Label boxes the aggregated model detects");
  det->add_option("--aggregate", aggregate, "Aggregated cloud metadata");
  det->add_option("--detector", detector_spec, "Detector spec JSON");
  det->add_option("--ground-truth", ground_truth, "Annotations (manifest's when omitted)");
  det->callback([&] {
    run = [&] {
      return cmd_detect_sim(c, manifest, model, labels, aggregate, detector_spec, ground_truth);
    };
  });

  auto* scp = sub("scp", "Spatial-consistency post-processing");
  need_manifest(scp);
  scp->add_option("--detections", detections, "Per-frame predictions")->required();
  scp->callback([&] { run = [&] { return cmd_scp(c, manifest, detections); }; });

  auto* cal = sub("calibrate", "Fit a beta calibration map");
  need_manifest(cal);
  cal->add_option("--predictions", predictions, "Per-frame predictions")->required();
  cal->add_option("--ground-truth", ground_truth, "Annotations (manifest's when omitted)");
  cal->callback([&] { run = [&] { return cmd_calibrate(c, manifest, predictions, ground_truth); }; });

  auto* fuse = sub("fuse", "Merge SCP and detector boxes");
  need_manifest(fuse);
  fuse->add_option("--detections", detections, "Few-frame detector boxes")->required();
  fuse->add_option("--scp", scp_boxes, "SCP boxes")->required();
  fuse->add_option("--detector-calibration", det_map, "Calibration for the detector boxes");
  fuse->add_option("--scp-calibration", scp_map, "Calibration for the SCP boxes");
  fuse->callback([&] {
    run = [&] { return cmd_fuse(c, manifest, detections, scp_boxes, det_map, scp_map); };
  });

  auto* eval = sub("evaluate", "AP / mAP report");
  need_manifest(eval);
  eval->add_option("--predictions", predictions, "Per-frame predictions")->required();
  eval->add_option("--ground-truth", ground_truth, "Annotations (manifest's when omitted)");
  eval->add_option("--subset", subset, "all | stationary | dynamic")
      ->check(CLI::IsMember({"all", "stationary", "dynamic"}));
  eval->callback([&] { run = [&] { return cmd_evaluate(c, manifest, predictions, ground_truth, subset); }; });

  auto* pipe = sub("pipeline", "Run the full chain on the synthetic benchmark");
  pipe->callback([&] { run = [&] { return cmd_pipeline(c); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[config-invalid]: " << e.what() << '\n';
    return kConfigInvalid;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("%^%l%$: %v");

  try {
    return run();
  } catch (const Error& e) {
    std::cerr << "error[" << category_for(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[stage-failure]: " << e.what() << '\n';
    return kStageFailure;
  }
}
