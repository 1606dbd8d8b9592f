// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "soap/config.hpp"
#include "soap/error.hpp"
#include "soap/io.hpp"
#include "soap/sim.hpp"

namespace soap {
namespace {

namespace fs = std::filesystem;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

TEST(Config, DefaultsAndFrameRateProfiles) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.effective_epsilon(), 0.85);
  EXPECT_EQ(c.effective_eta(), 10u);
  c.benchmark.frame_rate = 2.0;
  EXPECT_DOUBLE_EQ(c.effective_epsilon(), 0.7);
  EXPECT_EQ(c.effective_eta(), 2u);
  c.epsilon = 0.5;
  c.eta = 4;
  EXPECT_DOUBLE_EQ(c.effective_epsilon(), 0.5);
  EXPECT_EQ(c.effective_eta(), 4u);
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.seed = 99;
  c.ablation = Ablation::naive_speed;
  c.mu = 0.4;
  c.eta = 7;
  c.benchmark.dwellers = 3;
  c.match = MatchConfig::iou_ap();
  const auto j = to_json(c);
  const PipelineConfig back = config_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.eta, std::optional<std::size_t>(7));
  EXPECT_EQ(back.benchmark.dwellers, 3u);
}

TEST(Config, PartialDocumentsOverrideDefaults) {
  const auto c = config_from_json(nlohmann::json{{"seed", 5}, {"scp", {{"mu", 0.3}}}});
  EXPECT_EQ(c.seed, 5u);
  EXPECT_DOUBLE_EQ(c.mu, 0.3);
  EXPECT_DOUBLE_EQ(c.voxel_size, PipelineConfig{}.voxel_size);
}

TEST(Config, StrictAboutKeysAndValues) {
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{{"sead", 5}}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{{"scp", {{"muu", 0.3}}}}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{{"seed", "five"}}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{{"scp", {{"mu", 1.5}}}}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{{"ablation", "magic"}}); }), Errc::config_invalid);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::array()); }), Errc::config_invalid);
}

// Runs the CLI through the shell and returns its exit status.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "soap_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static int run(const std::string& args, const std::string& log = "cli.log") {
    const std::string cmd = std::string(SOAP_CLI_PATH) + " " + args + " > " + (dir_ / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string p(const std::string& name) { return (dir_ / name).string(); }
  static std::string slurp(const std::string& name) { return io::read_text(dir_ / name); }

  static ScenarioSpec small_scene(std::size_t n_frames = 30) {
    ScenarioSpec spec;
    spec.seed = 3;
    spec.n_frames = n_frames;
    spec.ego_path = {{0.0, {0.0, 0.0, 0.0}, 0.0}, {2.9, {14.5, 0.0, 0.0}, 0.0}};
    spec.sensor.azimuth_steps = 360;
    spec.sensor.elevation_steps = 16;
    ObjectSpec parked;
    parked.id = "parked";
    parked.trajectory = {{0.0, {10.0, 6.0, kGroundClearance + 0.8}, 0.0}};
    ObjectSpec mover;
    mover.id = "mover";
    mover.profile = MotionProfile::dynamic;
    mover.trajectory = {{0.0, {0.0, -5.0, kGroundClearance + 0.8}, 0.0},
                        {2.9, {29.0, -5.0, kGroundClearance + 0.8}, 0.0}};
    spec.objects = {parked, make_dweller("dweller", {20.0, 6.0}, 0.0, 2.0, 1.0, 1.4, 1.0), mover};
    for (auto& o : spec.objects) o.trajectory = clip_trajectory(o.trajectory, 0.0, spec.duration());
    spec.ego_path = clip_trajectory(spec.ego_path, 0.0, spec.duration());
    return spec;
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("pipeline --no-such-flag"), 2);
  EXPECT_EQ(run("pipeline --mu 3"), 2);
  EXPECT_EQ(run("pipeline --ablation bogus"), 2);
  io::write_text(dir_ / "bad.json", R"({"seed": 1, "typo": 2})");
  EXPECT_EQ(run("pipeline --config " + p("bad.json"), "bad.log"), 2);
  EXPECT_NE(slurp("bad.log").find("error[config-invalid]"), std::string::npos) << slurp("bad.log");
  EXPECT_EQ(run("aggregate --manifest " + p("nowhere/manifest.json") + " --out " + p("x.json"), "miss.log"), 3);
  EXPECT_NE(slurp("miss.log").find("error[input-missing]"), std::string::npos) << slurp("miss.log");
}

TEST_F(CliTest, StageChainOnSmallScene) {
  const std::string seq = p("seq");
  io::write_scenario(dir_ / "scene.json", small_scene());
  ASSERT_EQ(run("simulate --scenario " + p("scene.json") + " --out " + seq), 0) << slurp("cli.log");
  const std::string m = " --manifest " + seq + "/manifest.json";
  ASSERT_TRUE(fs::exists(fs::path(seq) / "ground_truth.jsonl"));

  ASSERT_EQ(run("aggregate" + m + " --out " + p("agg.json")), 0) << slurp("cli.log");
  ASSERT_EQ(run("qss" + m + " --out " + p("qss.json")), 0) << slurp("cli.log");
  const auto qss = nlohmann::json::parse(slurp("qss.json"));
  EXPECT_EQ(qss["tracks"].size(), 3u);
  for (const auto& t : qss["tracks"]) {
    if (t["object_id"] == "parked") {
      EXPECT_DOUBLE_EQ(t["s_star"].get<double>(), 1.0);
    }
    if (t["object_id"] == "mover") EXPECT_FALSE(t["accepted"].get<bool>());
  }
  EXPECT_EQ(run("qss" + m + " --output-format table"), 0);
  EXPECT_NE(slurp("cli.log").find("min-speed CDF"), std::string::npos);

  ASSERT_EQ(run("qst-labels" + m + " --out " + p("labels.jsonl")), 0) << slurp("cli.log");
  ASSERT_EQ(run("detect-sim" + m + " --model aggregated --labels " + p("labels.jsonl") + " --aggregate " +
                p("agg.json") + " --out " + p("sfa.jsonl")),
            0)
      << slurp("cli.log");
  ASSERT_EQ(run("detect-sim" + m + " --model few-frame --out " + p("det.jsonl")), 0) << slurp("cli.log");
  ASSERT_EQ(run("scp" + m + " --detections " + p("sfa.jsonl") + " --out " + p("scp.jsonl")), 0) << slurp("cli.log");
  ASSERT_EQ(run("calibrate" + m + " --predictions " + p("det.jsonl") + " --out " + p("det_cal.json")), 0)
      << slurp("cli.log");
  ASSERT_EQ(run("fuse" + m + " --detections " + p("det.jsonl") + " --scp " + p("scp.jsonl") +
                " --detector-calibration " + p("det_cal.json") + " --out " + p("soap.jsonl")),
            0)
      << slurp("cli.log");
  ASSERT_EQ(run("evaluate" + m + " --predictions " + p("soap.jsonl") + " --out " + p("eval.json")), 0)
      << slurp("cli.log");
  const auto eval = nlohmann::json::parse(slurp("eval.json"));
  EXPECT_EQ(eval["buckets"][0]["name"], "overall");
  EXPECT_TRUE(eval["buckets"][0]["mAP"].is_number());
  EXPECT_EQ(run("evaluate" + m + " --predictions " + p("soap.jsonl") + " --subset stationary --output-format table"), 0);

  // Each stage's output parses as the next stage's input; a fused file can
  // be fused again and evaluated.
  EXPECT_EQ(run("fuse" + m + " --detections " + p("soap.jsonl") + " --scp " + p("scp.jsonl") + " --out " +
                p("again.jsonl")),
            0);
  // A box file that points at frames outside the sequence is a stage failure.
  io::write_text(dir_ / "stray.jsonl",
                 R"({"frame":999,"label":"car","center":[0,0,1],"size":[1.9,4.6,1.6],"yaw":0,"velocity":null,"score":0.5})"
                 "\n");
  EXPECT_EQ(run("scp" + m + " --detections " + p("stray.jsonl") + " --out " + p("s.jsonl"), "stray.log"), 4);
  EXPECT_NE(slurp("stray.log").find("error[stage-failure]"), std::string::npos) << slurp("stray.log");
}

TEST_F(CliTest, ScpWithEtaOneOnSingleFramePassesBoxesThrough) {
  const ScenarioSpec spec = small_scene(1);
  io::write_scenario(dir_ / "one.json", spec);
  const std::string seq = p("one");
  ASSERT_EQ(run("simulate --scenario " + p("one.json") + " --out " + seq), 0) << slurp("cli.log");
  const std::string m = " --manifest " + seq + "/manifest.json";
  // Ground truth doubles as the detections: every box holds its points.
  const auto gt = io::read_boxes(fs::path(seq) / "ground_truth.jsonl");
  ASSERT_FALSE(gt.empty());
  std::vector<io::BoxRecord> dets;
  for (auto r : gt) {
    r.points.reset();
    r.box.id.reset();
    dets.push_back(r);
  }
  io::write_boxes(dir_ / "one_det.jsonl", dets);
  ASSERT_EQ(run("scp" + m + " --eta 1 --mu 0.5 --detections " + p("one_det.jsonl") + " --out " + p("one_scp.jsonl")),
            0)
      << slurp("cli.log");
  const auto out = io::read_boxes(dir_ / "one_scp.jsonl");
  ASSERT_EQ(out.size(), dets.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_LT((out[k].box.center - dets[k].box.center).norm(), 1e-12);
    EXPECT_EQ(out[k].box.score, dets[k].box.score);
  }
}

}  // namespace
}  // namespace soap
