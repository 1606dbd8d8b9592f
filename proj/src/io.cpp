// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace soap::io {

// The cloud codec copies native floats; big-endian hosts would need swaps.
static_assert(std::endian::native == std::endian::little, "cloud codec assumes little-endian");

namespace {

constexpr char kCloudMagic[8] = {'S', 'O', 'A', 'P', 'P', 'C', 'D', '\0'};
constexpr std::size_t kHeaderBytes = 24;
constexpr std::size_t kRecordBytes = 16;

// Strict view of a JSON object: typed lookups plus rejection of unknown keys.
class Fields {
 public:
  Fields(const nlohmann::json& j, Errc code, std::string context)
      : j_(j), code_(code), context_(std::move(context)) {
    if (!j_.is_object()) fail("expected a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const nlohmann::json& at(const char* key) {
    if (!j_.contains(key)) fail(std::string("missing key '") + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const char* key) {
    const auto& v = at(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(std::string("key '") + key + "' has the wrong type");
    }
  }

  template <typename T>
  T get_or(const char* key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  Eigen::Vector3d vec3(const char* key) {
    const auto v = get<std::vector<double>>(key);
    if (v.size() != 3) fail(std::string("key '") + key + "' needs 3 numbers");
    return {v[0], v[1], v[2]};
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail("unknown key '" + item.key() + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(code_, context_ + ": " + what);
  }

 private:
  const nlohmann::json& j_;
  Errc code_;
  std::string context_;
  std::set<std::string> seen_;
};

void check_header(Fields& f, const char* format, std::uint32_t version) {
  if (f.get<std::string>("format") != format) f.fail(std::string("format must be '") + format + "'");
  if (f.get<std::uint32_t>("version") != version) {
    throw Error(Errc::unsupported_version, std::string(format) + ": unsupported version");
  }
}

Json vec_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json waypoints_json(std::span<const Waypoint> path) {
  Json out = Json::array();
  for (const auto& w : path) {
    out.push_back(Json{{"time", w.time}, {"position", vec_json(w.position)}, {"yaw", w.yaw}});
  }
  return out;
}

std::vector<Waypoint> waypoints_from(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array()) throw Error(Errc::invalid_spec, context + ": expected an array of waypoints");
  std::vector<Waypoint> out;
  for (const auto& item : j) {
    Fields f(item, Errc::invalid_spec, context);
    out.push_back(Waypoint{f.get<double>("time"), f.vec3("position"), f.get<double>("yaw")});
    f.finish();
  }
  return out;
}

Box box_from_fields(Fields& f) {
  Box b;
  b.label = f.get<std::string>("label");
  b.center = f.vec3("center");
  b.size = f.vec3("size");
  b.yaw = f.get<double>("yaw");
  const auto& v = f.at("velocity");
  if (!v.is_null()) {
    const auto vel = f.get<std::vector<double>>("velocity");
    if (vel.size() != 2) f.fail("key 'velocity' needs 2 numbers or null");
    b.velocity = Eigen::Vector2d(vel[0], vel[1]);
  }
  b.score = f.get<double>("score");
  if (f.has("id")) b.id = f.get<std::string>("id");
  return b;
}

}  // namespace

nlohmann::json parse_json(const std::string& text, Errc code, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(code, what + ": " + e.what());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::input_missing, "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::io_error, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_cloud(const fs::path& path, std::span<const Point> cloud) {
  std::string bytes(kHeaderBytes + kRecordBytes * cloud.size(), '\0');
  std::memcpy(bytes.data(), kCloudMagic, 8);
  const std::uint32_t version = kCloudVersion;
  std::memcpy(bytes.data() + 8, &version, 4);
  const std::uint64_t count = cloud.size();
  std::memcpy(bytes.data() + 16, &count, 8);
  char* cursor = bytes.data() + kHeaderBytes;
  for (const Point& p : cloud) {
    const float rec[4] = {static_cast<float>(p.position.x()), static_cast<float>(p.position.y()),
                          static_cast<float>(p.position.z()), static_cast<float>(p.t)};
    for (float v : rec) {
      if (!std::isfinite(v)) {
        throw Error(Errc::non_finite_values, "cloud for '" + path.string() + "' has non-finite values");
      }
    }
    std::memcpy(cursor, rec, kRecordBytes);
    cursor += kRecordBytes;
  }
  write_text(path, bytes);
}

PointCloud read_cloud(const fs::path& path) {
  const std::string bytes = read_text(path);
  const std::string name = "'" + path.string() + "'";
  if (bytes.size() < 16) throw Error(Errc::truncated_file, name + " is shorter than its header");
  if (std::memcmp(bytes.data(), kCloudMagic, 8) != 0) {
    throw Error(Errc::bad_magic, name + " is not a point cloud file");
  }
  std::uint32_t version = 0;
  std::uint32_t reserved = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&reserved, bytes.data() + 12, 4);
  if (version != kCloudVersion) {
    throw Error(Errc::unsupported_version, name + " has cloud version " + std::to_string(version));
  }
  if (reserved != 0) throw Error(Errc::bad_magic, name + " has a non-zero reserved header field");
  if (bytes.size() < kHeaderBytes) throw Error(Errc::truncated_file, name + " lacks a point count");
  std::uint64_t count = 0;
  std::memcpy(&count, bytes.data() + 16, 8);
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (count > payload / kRecordBytes) {
    throw Error(Errc::truncated_file, name + " holds fewer points than its header declares");
  }
  if (payload != count * kRecordBytes) {
    throw Error(Errc::trailing_data, name + " has bytes after the last point");
  }
  PointCloud cloud;
  cloud.reserve(count);
  const char* cursor = bytes.data() + kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, cursor += kRecordBytes) {
    float rec[4];
    std::memcpy(rec, cursor, kRecordBytes);
    for (float v : rec) {
      if (!std::isfinite(v)) {
        throw Error(Errc::non_finite_values, name + ": point " + std::to_string(i) + " is not finite");
      }
    }
    cloud.push_back(Point{Eigen::Vector3d(rec[0], rec[1], rec[2]), rec[3]});
  }
  return cloud;
}

std::string format_box_record(const BoxRecord& r) {
  const Box& b = r.box;
  Json j{{"frame", r.frame},
         {"label", b.label},
         {"center", vec_json(b.center)},
         {"size", vec_json(b.size)},
         {"yaw", b.yaw},
         {"velocity", b.velocity ? Json::array({b.velocity->x(), b.velocity->y()}) : Json(nullptr)},
         {"score", b.score}};
  if (b.id) j["id"] = *b.id;
  if (r.points) j["points"] = *r.points;
  return j.dump();
}

BoxRecord parse_box_record(const std::string& line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number);
  const auto j = parse_json(line, Errc::parse_error, where);
  Fields f(j, Errc::parse_error, where);
  BoxRecord r;
  r.frame = f.get<std::int64_t>("frame");
  r.box = box_from_fields(f);
  if (f.has("points")) r.points = f.get<std::size_t>("points");
  f.finish();
  try {
    validate_box(r.box);
  } catch (const Error& e) {
    throw Error(Errc::invariant_violation, where + ": " + e.detail());
  }
  return r;
}

void write_boxes(const fs::path& path, std::span<const BoxRecord> records) {
  std::string text;
  for (const auto& r : records) {
    validate_box(r.box);
    text += format_box_record(r);
    text += '\n';
  }
  write_text(path, text);
}

std::vector<BoxRecord> read_boxes(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<BoxRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    out.push_back(parse_box_record(line, n));
  }
  return out;
}

std::vector<BoxRecord> to_records(std::span<const FrameRecord> frames, const FrameBoxes& boxes,
                                  const std::vector<std::vector<std::size_t>>* points) {
  if (boxes.size() != frames.size() || (points && points->size() != frames.size())) {
    throw Error(Errc::frame_misalignment, "boxes must align with frames");
  }
  std::vector<BoxRecord> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t k = 0; k < boxes[f].size(); ++k) {
      BoxRecord r{frames[f].index, boxes[f][k], std::nullopt};
      if (points) r.points = (*points)[f].at(k);
      out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

template <typename Emit>
void group_records(std::span<const FrameRecord> frames, std::span<const BoxRecord> records,
                   Emit&& emit) {
  std::unordered_map<std::int64_t, std::size_t> pos;
  for (std::size_t i = 0; i < frames.size(); ++i) pos.emplace(frames[i].index, i);
  for (const auto& r : records) {
    const auto it = pos.find(r.frame);
    if (it == pos.end()) {
      throw Error(Errc::frame_misalignment,
                  "box refers to frame " + std::to_string(r.frame) + " which is not in the sequence");
    }
    emit(it->second, r);
  }
}

}  // namespace

FrameBoxes group_by_frame(std::span<const FrameRecord> frames, std::span<const BoxRecord> records) {
  FrameBoxes out(frames.size());
  group_records(frames, records, [&](std::size_t f, const BoxRecord& r) { out[f].push_back(r.box); });
  return out;
}

EvalGroundTruth group_ground_truth(std::span<const FrameRecord> frames,
                                   std::span<const BoxRecord> records) {
  EvalGroundTruth out(frames.size());
  group_records(frames, records, [&](std::size_t f, const BoxRecord& r) {
    out[f].push_back(GroundTruthBox{r.box, r.points.value_or(0), false});
  });
  return out;
}

void write_manifest(const fs::path& path, const SequenceManifest& m) {
  Json frames = Json::array();
  for (const auto& f : m.frames) {
    Json pose = Json::array();
    const auto& R = f.pose.rotation();
    const auto& t = f.pose.translation();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.push_back(R(r, c));
      pose.push_back(t[r]);
    }
    frames.push_back(
        Json{{"index", f.index}, {"timestamp", f.timestamp}, {"pose", pose}, {"cloud", f.cloud_ref}});
  }
  Json j{{"format", "soap-sequence"},
         {"version", m.version},
         {"sequence_id", m.sequence_id},
         {"frame_rate", m.frame_rate}};
  if (m.z_offset) j["z_offset"] = *m.z_offset;
  if (m.annotations) j["annotations"] = *m.annotations;
  if (m.detections) j["detections"] = *m.detections;
  j["frames"] = std::move(frames);
  write_text(path, j.dump(1) + "\n");
}

SequenceManifest read_manifest(const fs::path& path) {
  const std::string where = "manifest '" + path.string() + "'";
  const auto j = parse_json(read_text(path), Errc::parse_error, where);
  Fields f(j, Errc::parse_error, where);
  SequenceManifest m;
  check_header(f, "soap-sequence", 1);
  m.sequence_id = f.get<std::string>("sequence_id");
  m.frame_rate = f.get<double>("frame_rate");
  if (!(m.frame_rate > 0.0)) f.fail("frame_rate must be positive");
  if (f.has("z_offset")) m.z_offset = f.get<double>("z_offset");
  if (f.has("annotations")) m.annotations = f.get<std::string>("annotations");
  if (f.has("detections")) m.detections = f.get<std::string>("detections");
  const fs::path base = path.parent_path();
  const auto& frames = f.at("frames");
  if (!frames.is_array()) f.fail("'frames' must be an array");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string fwhere = where + " frame " + std::to_string(k);
    Fields ff(frames[k], Errc::parse_error, fwhere);
    FrameRecord rec;
    rec.index = ff.get<std::int64_t>("index");
    rec.timestamp = ff.get<double>("timestamp");
    const auto p = ff.get<std::vector<double>>("pose");
    if (p.size() != 12) ff.fail("pose needs 12 numbers (3x4 row-major)");
    Eigen::Matrix3d R;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) R(r, c) = p[static_cast<std::size_t>(4 * r + c)];
      t[r] = p[static_cast<std::size_t>(4 * r + 3)];
    }
    if (!R.allFinite() || !t.allFinite()) ff.fail("pose has non-finite values");
    rec.pose = Pose(R, t);
    const double err = rec.pose.orthonormality_error();
    if (err > kPoseRepairLimit || R.determinant() <= 0.0) {
      throw Error(Errc::invariant_violation, fwhere + ": pose rotation is not a rotation");
    }
    if (err > kPoseTolerance) {
      spdlog::warn("{}: pose off orthonormal by {:.3g}, re-orthonormalizing", fwhere, err);
      rec.pose = rec.pose.orthonormalized();
    }
    rec.cloud_ref = ff.get<std::string>("cloud");
    rec.sequence_id = m.sequence_id;
    ff.finish();
    if (!m.frames.empty() && rec.index <= m.frames.back().index) {
      throw Error(Errc::parse_error, fwhere + ": frame indices must increase");
    }
    if (!fs::exists(base / rec.cloud_ref)) {
      throw Error(Errc::input_missing, fwhere + ": cloud '" + rec.cloud_ref + "' not found");
    }
    m.frames.push_back(std::move(rec));
  }
  f.finish();
  for (const auto& ref : {m.annotations, m.detections}) {
    if (ref && !fs::exists(base / *ref)) {
      throw Error(Errc::input_missing, where + ": '" + *ref + "' not found");
    }
  }
  return m;
}

CloudLoader directory_loader(const fs::path& base) {
  return [base](const FrameRecord& frame) {
    const fs::path p = base / frame.cloud_ref;
    if (!fs::exists(p)) throw Error(Errc::missing_cloud, "cloud '" + p.string() + "' not found");
    return read_cloud(p);
  };
}

void write_aggregate(const fs::path& json_path, const AggregatedCloud& cloud) {
  fs::path bin = json_path;
  bin.replace_extension(".bin");
  write_cloud(bin, cloud.points);
  Json j{{"format", "soap-aggregate"},
         {"version", 1},
         {"sequence_id", cloud.source_sequence},
         {"voxel_size", cloud.voxel_size},
         {"point_budget", cloud.point_budget},
         {"frame_indices", cloud.frame_indices},
         {"cloud", bin.filename().string()}};
  write_text(json_path, j.dump(1) + "\n");
}

AggregatedCloud read_aggregate(const fs::path& json_path) {
  const std::string where = "aggregate '" + json_path.string() + "'";
  const auto j = parse_json(read_text(json_path), Errc::parse_error, where);
  Fields f(j, Errc::parse_error, where);
  check_header(f, "soap-aggregate", 1);
  AggregatedCloud out;
  out.source_sequence = f.get<std::string>("sequence_id");
  out.voxel_size = f.get<double>("voxel_size");
  out.point_budget = f.get<std::size_t>("point_budget");
  out.frame_indices = f.get<std::vector<std::int64_t>>("frame_indices");
  if (!std::is_sorted(out.frame_indices.begin(), out.frame_indices.end())) {
    f.fail("frame_indices must be sorted");
  }
  const auto cloud = f.get<std::string>("cloud");
  f.finish();
  out.points = read_cloud(json_path.parent_path() / cloud);
  return out;
}

Json to_json(const CalibrationMap& map) {
  return Json{{"format", "soap-calibration"}, {"version", 1}, {"a", map.a}, {"b", map.b}, {"c", map.c}};
}

CalibrationMap calibration_from_json(const nlohmann::json& j) {
  Fields f(j, Errc::parse_error, "calibration");
  check_header(f, "soap-calibration", 1);
  CalibrationMap m{f.get<double>("a"), f.get<double>("b"), f.get<double>("c")};
  f.finish();
  if (!(m.a >= 0.0 && m.b >= 0.0 && std::isfinite(m.a) && std::isfinite(m.b) && std::isfinite(m.c))) {
    throw Error(Errc::invariant_violation, "calibration needs finite a, b >= 0 and finite c");
  }
  return m;
}

void write_calibration(const fs::path& path, const CalibrationMap& map) {
  write_text(path, to_json(map).dump(1) + "\n");
}

CalibrationMap read_calibration(const fs::path& path) {
  return calibration_from_json(
      parse_json(read_text(path), Errc::parse_error, "calibration '" + path.string() + "'"));
}

Json to_json(const ScenarioSpec& spec) {
  const SensorSpec& s = spec.sensor;
  Json objects = Json::array();
  for (const auto& o : spec.objects) {
    objects.push_back(Json{{"id", o.id},
                           {"label", o.label},
                           {"size", vec_json(o.size)},
                           {"profile", to_string(o.profile)},
                           {"trajectory", waypoints_json(o.trajectory)}});
  }
  return Json{{"format", "soap-scenario"},
              {"version", 1},
              {"seed", spec.seed},
              {"sequence_id", spec.sequence_id},
              {"n_frames", spec.n_frames},
              {"frame_rate", spec.frame_rate},
              {"sensor",
               {{"max_range", s.max_range},
                {"azimuth_steps", s.azimuth_steps},
                {"elevation_steps", s.elevation_steps},
                {"min_elevation", s.min_elevation},
                {"max_elevation", s.max_elevation},
                {"mount_height", s.mount_height},
                {"noise_sigma", s.noise_sigma},
                {"dropout", s.dropout}}},
              {"ego_path", waypoints_json(spec.ego_path)},
              {"objects", objects}};
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  Fields f(j, Errc::invalid_spec, "scenario");
  check_header(f, "soap-scenario", 1);
  ScenarioSpec spec;
  spec.seed = f.get_or<std::uint64_t>("seed", spec.seed);
  spec.sequence_id = f.get_or<std::string>("sequence_id", spec.sequence_id);
  spec.n_frames = f.get<std::size_t>("n_frames");
  spec.frame_rate = f.get<double>("frame_rate");
  if (f.has("sensor")) {
    Fields s(f.at("sensor"), Errc::invalid_spec, "scenario sensor");
    SensorSpec& ss = spec.sensor;
    ss.max_range = s.get_or("max_range", ss.max_range);
    ss.azimuth_steps = s.get_or("azimuth_steps", ss.azimuth_steps);
    ss.elevation_steps = s.get_or("elevation_steps", ss.elevation_steps);
    ss.min_elevation = s.get_or("min_elevation", ss.min_elevation);
    ss.max_elevation = s.get_or("max_elevation", ss.max_elevation);
    ss.mount_height = s.get_or("mount_height", ss.mount_height);
    ss.noise_sigma = s.get_or("noise_sigma", ss.noise_sigma);
    ss.dropout = s.get_or("dropout", ss.dropout);
    s.finish();
  }
  spec.ego_path = waypoints_from(f.at("ego_path"), "scenario ego_path");
  if (f.has("objects")) {
    const auto& objs = f.at("objects");
    if (!objs.is_array()) f.fail("'objects' must be an array");
    for (const auto& item : objs) {
      Fields o(item, Errc::invalid_spec, "scenario object");
      ObjectSpec obj;
      obj.id = o.get<std::string>("id");
      obj.label = o.get_or<std::string>("label", obj.label);
      if (o.has("size")) obj.size = o.vec3("size");
      if (o.has("profile")) obj.profile = motion_profile_from_string(o.get<std::string>("profile"));
      obj.trajectory = waypoints_from(o.at("trajectory"), "scenario object '" + obj.id + "'");
      o.finish();
      spec.objects.push_back(std::move(obj));
    }
  }
  f.finish();
  spec.validate();
  return spec;
}

Json to_json(const DetectorSpec& d) {
  Json curve = Json::array();
  for (const auto& [points, recall] : d.recall_curve) curve.push_back(Json::array({points, recall}));
  return Json{{"recall_curve", curve},
              {"center_sigma", d.center_sigma},
              {"size_sigma", d.size_sigma},
              {"yaw_sigma", d.yaw_sigma},
              {"velocity_sigma", d.velocity_sigma},
              {"score_base", d.score_base},
              {"score_slope", d.score_slope},
              {"score_sigma", d.score_sigma},
              {"score_floor", d.score_floor},
              {"fp_rate", d.fp_rate},
              {"fp_radius", d.fp_radius},
              {"fp_scores", d.fp_scores == ScoreDistribution::beta ? "beta" : "uniform"},
              {"fp_score_lo", d.fp_score_lo},
              {"fp_score_hi", d.fp_score_hi},
              {"fp_score_alpha", d.fp_score_alpha},
              {"fp_score_beta", d.fp_score_beta},
              {"clutter_count", d.clutter_count},
              {"clutter_probability", d.clutter_probability},
              {"stream", d.stream}};
}

DetectorSpec detector_from_json(const nlohmann::json& j, const DetectorSpec& defaults) {
  Fields f(j, Errc::invalid_spec, "detector");
  DetectorSpec d = defaults;
  if (f.has("recall_curve")) {
    d.recall_curve.clear();
    for (const auto& knot : f.get<std::vector<std::vector<double>>>("recall_curve")) {
      if (knot.size() != 2) f.fail("recall_curve knots are [points, recall] pairs");
      d.recall_curve.emplace_back(knot[0], knot[1]);
    }
  }
  d.center_sigma = f.get_or("center_sigma", d.center_sigma);
  d.size_sigma = f.get_or("size_sigma", d.size_sigma);
  d.yaw_sigma = f.get_or("yaw_sigma", d.yaw_sigma);
  d.velocity_sigma = f.get_or("velocity_sigma", d.velocity_sigma);
  d.score_base = f.get_or("score_base", d.score_base);
  d.score_slope = f.get_or("score_slope", d.score_slope);
  d.score_sigma = f.get_or("score_sigma", d.score_sigma);
  d.score_floor = f.get_or("score_floor", d.score_floor);
  d.fp_rate = f.get_or("fp_rate", d.fp_rate);
  d.fp_radius = f.get_or("fp_radius", d.fp_radius);
  if (f.has("fp_scores")) {
    const auto kind = f.get<std::string>("fp_scores");
    if (kind == "uniform") {
      d.fp_scores = ScoreDistribution::uniform;
    } else if (kind == "beta") {
      d.fp_scores = ScoreDistribution::beta;
    } else {
      f.fail("fp_scores must be 'uniform' or 'beta'");
    }
  }
  d.fp_score_lo = f.get_or("fp_score_lo", d.fp_score_lo);
  d.fp_score_hi = f.get_or("fp_score_hi", d.fp_score_hi);
  d.fp_score_alpha = f.get_or("fp_score_alpha", d.fp_score_alpha);
  d.fp_score_beta = f.get_or("fp_score_beta", d.fp_score_beta);
  d.clutter_count = f.get_or("clutter_count", d.clutter_count);
  d.clutter_probability = f.get_or("clutter_probability", d.clutter_probability);
  d.stream = f.get_or("stream", d.stream);
  f.finish();
  d.validate();
  return d;
}

Json to_json(const EvalReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json buckets = Json::array();
  for (const auto& b : report.buckets) {
    Json ap = Json::array();
    for (const auto& v : b.ap) ap.push_back(opt(v));
    buckets.push_back(Json{{"name", b.name}, {"ground_truth", b.positives}, {"mAP", opt(b.mean_ap)},
                           {"AP", ap}});
  }
  return Json{{"metric", to_string(report.mode)},
              {"thresholds", report.thresholds},
              {"level", report.level},
              {"buckets", buckets}};
}

ScenarioSpec read_scenario(const fs::path& path) {
  return scenario_from_json(
      parse_json(read_text(path), Errc::invalid_spec, "scenario '" + path.string() + "'"));
}

void write_scenario(const fs::path& path, const ScenarioSpec& spec) {
  write_text(path, to_json(spec).dump(1) + "\n");
}

DetectorSpec read_detector(const fs::path& path) {
  return detector_from_json(
      parse_json(read_text(path), Errc::invalid_spec, "detector '" + path.string() + "'"));
}

}  // namespace soap::io
