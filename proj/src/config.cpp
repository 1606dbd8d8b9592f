// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/config.hpp"

#include <cmath>
#include <set>

#include "soap/error.hpp"
#include "soap/scp.hpp"

namespace soap {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::config_invalid, what); }

// Tracks which keys of a JSON object were consumed.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) invalid(name_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const nlohmann::json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void read(const char* key, T& target) {
    if (!has(key)) return;
    try {
      target = at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      invalid(name_ + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  void read(const char* key, std::optional<T>& target) {
    if (!has(key)) return;
    if (at(key).is_null()) {
      target.reset();
      return;
    }
    T value{};
    read(key, value);
    target = value;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) invalid(name_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

Eigen::Vector3d vec3(const nlohmann::json& j, const std::string& what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    invalid(what + " must be 3 numbers");
  }
  if (v.size() != 3) invalid(what + " must be 3 numbers");
  return {v[0], v[1], v[2]};
}

template <typename Fn>
auto translate(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, e.detail());
  }
}

}  // namespace

const char* to_string(Ablation a) noexcept {
  switch (a) {
    case Ablation::naive_speed: return "naive-speed";
    case Ablation::qst: return "qst";
    case Ablation::qst_scp: return "qst+scp";
  }
  return "unknown";
}

Ablation ablation_from_string(const std::string& name) {
  if (name == "naive-speed") return Ablation::naive_speed;
  if (name == "qst") return Ablation::qst;
  if (name == "qst+scp") return Ablation::qst_scp;
  invalid("unknown ablation '" + name + "' (naive-speed | qst | qst+scp)");
}

double PipelineConfig::effective_epsilon() const noexcept {
  return epsilon.value_or(frame_rate() >= 5.0 ? 0.85 : 0.7);
}

std::size_t PipelineConfig::effective_eta() const noexcept {
  return eta.value_or(ScpConfig::for_frame_rate(frame_rate()).eta);
}

void PipelineConfig::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (threads < 1) invalid("threads must be at least 1");
  if (!(voxel_size > 0.0)) invalid("voxel_size must be positive");
  if (point_budget == 0) invalid("point_budget must be positive");
  if (!std::isfinite(z_offset)) invalid("z_offset must be finite");
  if (crop && !(crop->min.array() < crop->max.array()).all()) invalid("crop min must be below max");
  if (!fraction(effective_epsilon())) invalid("epsilon must lie in [0, 1]");
  if (!(speed_threshold >= 0.0)) invalid("speed_threshold must be non-negative");
  if (!fraction(mu) || !fraction(nms_iou) || !fraction(wbf_iou) || !fraction(calibration_iou)) {
    invalid("mu, nms_iou, wbf_iou and calibration_iou must lie in [0, 1]");
  }
  if (effective_eta() < 1) invalid("eta must be at least 1");
  if (benchmark.n_frames < 1 || !(benchmark.frame_rate > 0.0) || !(benchmark.ego_speed >= 0.0)) {
    invalid("benchmark needs frames, a positive frame rate and a non-negative speed");
  }
  translate([&] {
    match.validate();
    detector.validate();
    sfa_detector.validate();
    return 0;
  });
}

io::Json to_json(const PipelineConfig& c) {
  using io::Json;
  Json buckets = Json::array();
  for (const auto& b : c.match.buckets) {
    buckets.push_back(Json{{"name", b.name}, {"min", b.min}, {"max", b.max}});
  }
  Json crop = c.crop ? Json{{"min", Json::array({c.crop->min.x(), c.crop->min.y(), c.crop->min.z()})},
                            {"max", Json::array({c.crop->max.x(), c.crop->max.y(), c.crop->max.z()})}}
                     : Json(nullptr);
  return Json{
      {"format", "soap-config"},
      {"version", 1},
      {"seed", c.seed},
      {"ablation", to_string(c.ablation)},
      {"aggregate",
       {{"voxel_size", c.voxel_size}, {"point_budget", c.point_budget}, {"z_offset", c.z_offset},
        {"crop", crop}}},
      {"qst", {{"epsilon", c.effective_epsilon()}, {"speed_threshold", c.speed_threshold}}},
      {"scp", {{"mu", c.mu}, {"eta", c.effective_eta()}, {"nms_iou", c.nms_iou}}},
      {"fuse", {{"wbf_iou", c.wbf_iou}, {"calibration_iou", c.calibration_iou}}},
      {"evaluate",
       {{"mode", to_string(c.match.mode)},
        {"thresholds", c.match.thresholds},
        {"buckets", buckets},
        {"level1_min_points", c.match.level1_min_points},
        {"level2", c.match.level2}}},
      {"benchmark",
       {{"n_frames", c.benchmark.n_frames},
        {"frame_rate", c.benchmark.frame_rate},
        {"parked", c.benchmark.parked},
        {"dwellers", c.benchmark.dwellers},
        {"movers", c.benchmark.movers},
        {"ego_speed", c.benchmark.ego_speed}}},
      {"detector", io::to_json(c.detector)},
      {"sfa_detector", io::to_json(c.sfa_detector)}};
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  Section top(j, "config");
  if (top.has("format") && top.at("format") != "soap-config") invalid("format must be 'soap-config'");
  if (top.has("version") && top.at("version") != 1) invalid("unsupported config version");
  top.read("seed", c.seed);
  top.read("threads", c.threads);
  if (top.has("ablation")) {
    std::string name;
    top.read("ablation", name);
    c.ablation = ablation_from_string(name);
  }
  if (top.has("aggregate")) {
    Section s(top.at("aggregate"), "aggregate");
    s.read("voxel_size", c.voxel_size);
    s.read("point_budget", c.point_budget);
    s.read("z_offset", c.z_offset);
    if (s.has("crop")) {
      const auto& crop = s.at("crop");
      if (crop.is_null()) {
        c.crop.reset();
      } else {
        Section cs(crop, "aggregate.crop");
        CropBox box;
        if (cs.has("min")) box.min = vec3(cs.at("min"), "aggregate.crop.min");
        if (cs.has("max")) box.max = vec3(cs.at("max"), "aggregate.crop.max");
        cs.finish();
        c.crop = box;
      }
    }
    s.finish();
  }
  if (top.has("qst")) {
    Section s(top.at("qst"), "qst");
    s.read("epsilon", c.epsilon);
    s.read("speed_threshold", c.speed_threshold);
    s.finish();
  }
  if (top.has("scp")) {
    Section s(top.at("scp"), "scp");
    s.read("mu", c.mu);
    s.read("eta", c.eta);
    s.read("nms_iou", c.nms_iou);
    s.finish();
  }
  if (top.has("fuse")) {
    Section s(top.at("fuse"), "fuse");
    s.read("wbf_iou", c.wbf_iou);
    s.read("calibration_iou", c.calibration_iou);
    s.finish();
  }
  if (top.has("evaluate")) {
    Section s(top.at("evaluate"), "evaluate");
    if (s.has("mode")) {
      std::string mode;
      s.read("mode", mode);
      c.match.mode = translate([&] { return match_mode_from_string(mode); });
      if (c.match.mode == MatchMode::iou && !s.has("thresholds")) c.match.thresholds = {0.7};
    }
    s.read("thresholds", c.match.thresholds);
    if (s.has("buckets")) {
      c.match.buckets.clear();
      const auto& list = s.at("buckets");
      if (!list.is_array()) invalid("evaluate.buckets must be an array");
      for (const auto& item : list) {
        Section b(item, "evaluate.buckets[]");
        RangeBucket bucket;
        b.read("name", bucket.name);
        b.read("min", bucket.min);
        b.read("max", bucket.max);
        b.finish();
        c.match.buckets.push_back(bucket);
      }
    }
    s.read("level1_min_points", c.match.level1_min_points);
    s.read("level2", c.match.level2);
    s.finish();
  }
  if (top.has("benchmark")) {
    Section s(top.at("benchmark"), "benchmark");
    s.read("n_frames", c.benchmark.n_frames);
    s.read("frame_rate", c.benchmark.frame_rate);
    s.read("parked", c.benchmark.parked);
    s.read("dwellers", c.benchmark.dwellers);
    s.read("movers", c.benchmark.movers);
    s.read("ego_speed", c.benchmark.ego_speed);
    s.finish();
  }
  if (top.has("detector")) {
    c.detector = translate([&] { return io::detector_from_json(top.at("detector"), c.detector); });
  }
  if (top.has("sfa_detector")) {
    c.sfa_detector =
        translate([&] { return io::detector_from_json(top.at("sfa_detector"), c.sfa_detector); });
  }
  top.finish();
  c.validate();
  return c;
}

PipelineConfig read_config(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  return config_from_json(io::parse_json(text, Errc::config_invalid, "config '" + path.string() + "'"));
}

}  // namespace soap
