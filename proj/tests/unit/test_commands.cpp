#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lcc/commands.hpp"
#include "lcc/errors.hpp"
#include "lcc/text.hpp"

namespace lcc {
namespace {

GaConfig quick_config(std::uint64_t seed) {
  GaConfig cfg;
  cfg.population = 80;
  cfg.generations = 6;
  cfg.max_iterations = 4;
  cfg.slots = 2;
  cfg.seed = seed;
  return cfg;
}

struct Recording {
  testing::TempDir dir;
  synth::SyntheticScene scene;
  synth::SyntheticRecording rec;

  explicit Recording(std::size_t frames) {
    scene = synth::reference_scene(CameraKind::pinhole, testing::near_walk(frames), 21);
    scene.clutter.ground = true;
    scene.clutter.holder = true;
    scene.noise = {0.5, 0.002};
    rec = synth::generate(scene, 22);
    write_recording(dir.path(), scene, rec, 22);
  }
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LCC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(ImageSize, Parse) {
  const ImageSize s = parse_image_size("1024x1280");
  EXPECT_EQ(s.rows, 1024);
  EXPECT_EQ(s.cols, 1280);
  EXPECT_TRUE(s.contains({0.0, 1279.5}));
  EXPECT_FALSE(s.contains({1024.0, 0.0}));
  EXPECT_FALSE(s.contains({-0.1, 0.0}));
  EXPECT_THROW(parse_image_size("1024"), std::invalid_argument);
  EXPECT_THROW(parse_image_size("0x10"), std::invalid_argument);
}

TEST(Detect, MatchesGeneratorLedger) {
  Recording r(300);
  ASSERT_FALSE(r.rec.ledger.empty());
  DetectOptions opts;
  opts.clouds = r.dir / "clouds";
  opts.roi = r.scene.roi;
  opts.out = r.dir / "det.jsonl";
  opts.verbose = true;
  std::ostringstream log;
  const DetectSummary s = cmd_detect(opts, log);
  EXPECT_EQ(s.frames, 300u);
  EXPECT_EQ(s.detections, r.rec.ledger.size());
  EXPECT_EQ(lines_of(log.str()).size(), 300u - s.detections);
  EXPECT_NE(log.str().find("dropped: "), std::string::npos);
  const DetectionFile file = load_detections(opts.out);
  EXPECT_EQ(file.roi, r.scene.roi);
  ASSERT_EQ(file.detections.size(), r.rec.ledger.size());
  for (std::size_t k = 0; k < file.detections.size(); ++k) {
    EXPECT_EQ(file.detections[k].vertex, r.rec.ledger[k].measured_vertex);
  }
}

TEST(Detect, EmptyDirectoryAndBadFiles) {
  testing::TempDir dir;
  std::filesystem::create_directory(dir / "clouds");
  DetectOptions opts;
  opts.clouds = dir / "clouds";
  opts.roi = {-1, 1, 3, 12, -1, 1};
  opts.out = dir / "det.jsonl";
  std::ostringstream log;
  EXPECT_EQ(cmd_detect(opts, log).frames, 0u);
  EXPECT_TRUE(load_detections(opts.out).detections.empty());

  write_text_file(dir / "clouds" / "broken.csv", "x,y,z,intensity,ring,t\n1,2\n");
  try {
    cmd_detect(opts, log);
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_NE(std::string(e.what()).find("broken.csv"), std::string::npos);
  }
}

TEST(Solve, FailsBelowTheMinimum) {
  testing::TempDir dir;
  const auto fx = testing::solver_fixture(CameraKind::pinhole, 3, 0.0, 5);
  save_correspondences(dir / "c.jsonl", fx.correspondences);
  SolveOptions opts;
  opts.corr = dir / "c.jsonl";
  opts.out = dir / "calib.json";
  opts.ga = quick_config(1);
  EXPECT_THROW(cmd_solve(opts), TooFewCorrespondences);
  EXPECT_FALSE(std::filesystem::exists(opts.out));
}

TEST(Solve, SameSeedWritesIdenticalFiles) {
  testing::TempDir dir;
  const auto fx = testing::solver_fixture(CameraKind::fisheye, 30, 0.5, 6);
  save_correspondences(dir / "c.jsonl", fx.correspondences);
  SolveOptions opts;
  opts.corr = dir / "c.jsonl";
  opts.model = CameraKind::fisheye;
  opts.ga = quick_config(4);
  opts.out = dir / "a.json";
  cmd_solve(opts);
  opts.out = dir / "b.json";
  opts.ga.workers = 3;
  cmd_solve(opts);
  EXPECT_EQ(testing::slurp(dir / "a.json"), testing::slurp(dir / "b.json"));
  opts.ga.seed = 5;
  opts.out = dir / "c.json";
  cmd_solve(opts);
  EXPECT_NE(testing::slurp(dir / "a.json"), testing::slurp(dir / "c.json"));
}

TEST(Solve, CustomBoundsFile) {
  testing::TempDir dir;
  const auto fx = testing::solver_fixture(CameraKind::pinhole, 20, 0.0, 7);
  save_correspondences(dir / "c.jsonl", fx.correspondences);
  ParamBounds tight = default_bounds(CameraKind::pinhole);
  tight.lower[6] = 600;
  tight.upper[6] = 640;
  write_text_file(dir / "b.json", bounds_to_json(tight, CameraKind::pinhole).dump(2));
  SolveOptions opts;
  opts.corr = dir / "c.jsonl";
  opts.bounds = dir / "b.json";
  opts.ga = quick_config(2);
  opts.out = dir / "calib.json";
  const auto result = cmd_solve(opts);
  EXPECT_EQ(result.trace.front().bounds, tight);
  const double fx_value = std::get<PinholeIntrinsics>(result.calibration.camera).fx;
  EXPECT_GE(fx_value, 600.0);
  EXPECT_LE(fx_value, 640.0);
}

TEST(Validate, ReproducesTrainError) {
  testing::TempDir dir;
  const auto fx = testing::solver_fixture(CameraKind::pinhole, 40, 1.0, 8);
  save_correspondences(dir / "c.jsonl", fx.correspondences);
  SolveOptions solve_opts;
  solve_opts.corr = dir / "c.jsonl";
  solve_opts.ga = quick_config(3);
  solve_opts.out = dir / "calib.json";
  const CalibrationResult result = cmd_solve(solve_opts);

  ValidateOptions opts;
  opts.corr = dir / "c.jsonl";
  opts.calib = dir / "calib.json";
  opts.bins = 5;
  opts.out = dir / "report.json";
  const ValidationReport report = cmd_validate(opts);
  EXPECT_NEAR(report.mean_error_px, result.train_error_px, 1e-9);
  EXPECT_EQ(report.count, 40u);
  EXPECT_EQ(report.bins.size(), 5u);
  const auto doc = load_json_file(opts.out);
  EXPECT_EQ(doc["format"], "validate/1");
}

TEST(Validate, PerfectCalibrationHasZeroBins) {
  const auto fx = testing::solver_fixture(CameraKind::fisheye, 25, 0.0, 9);
  const ValidationReport report =
      evaluate_calibration(fx.correspondences, fx.scene.ground_truth, 4);
  EXPECT_LT(report.mean_error_px, 1e-9);
  for (const auto& b : report.bins) {
    if (b.mean_error) {
      EXPECT_LT(*b.mean_error, 1e-9);
    }
  }
}

TEST(Project, RowsMatchTheProjection) {
  testing::TempDir dir;
  LidarFrame frame;
  frame.timestamp = 2.0;
  frame.points = {{{0.0, 6.0, 0.0}, 10, 7}, {{0.0, -6.0, 0.0}, 10, 7}, {{40.0, 3.0, 0.0}, 1, 7}};
  save_cloud_file(dir / "f.csv", frame);
  CalibrationResult calib;
  calib.calibration = synth::reference_calibration(CameraKind::pinhole);
  save_calibration(dir / "calib.json", calib);

  ProjectOptions opts;
  opts.cloud = dir / "f.csv";
  opts.calib = dir / "calib.json";
  opts.out = dir / "p.csv";
  EXPECT_EQ(cmd_project(opts), 1u);
  const auto rows = lines_of(testing::slurp(opts.out));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "x,y,z,i,j,visible");
  const Pixel p = project(frame.points[0].position, calib.calibration);
  EXPECT_EQ(rows[1], "0,6,0," + format_double(p.i) + "," + format_double(p.j) + ",true");
  EXPECT_EQ(rows[2], "0,-6,0,,,false");
  EXPECT_TRUE(rows[3].ends_with(",false"));
  EXPECT_FALSE(rows[3].ends_with(",,false"));
}

TEST(Project, AxisPointLandsOnThePrincipalPoint) {
  testing::TempDir dir;
  LidarFrame frame;
  frame.points = {{{0.0, 0.0, 7.5}, 1, 0}};
  save_cloud_file(dir / "f.csv", frame);
  CalibrationResult calib;
  calib.calibration.camera = PinholeIntrinsics{600, 610, 512, 640};
  save_calibration(dir / "calib.json", calib);
  ProjectOptions opts;
  opts.cloud = dir / "f.csv";
  opts.calib = dir / "calib.json";
  opts.out = dir / "p.csv";
  EXPECT_EQ(cmd_project(opts), 1u);
  EXPECT_EQ(lines_of(testing::slurp(opts.out))[1], "0,0,7.5,512,640,true");
}

TEST(Project, SyntheticFrameRowsEqualProjectCalls) {
  Recording r(20);
  const auto cloud = r.dir / "clouds" / "frame_000010.csv";
  ProjectOptions opts;
  opts.cloud = cloud;
  opts.calib = r.dir / "ground_truth.json";
  opts.out = r.dir / "p.csv";
  opts.layout = r.scene.device.ring_layout();
  const std::size_t visible = cmd_project(opts);
  const LidarFrame frame = parse_cloud_file(cloud);
  const auto rows = lines_of(testing::slurp(opts.out));
  ASSERT_EQ(rows.size(), frame.points.size() + 1);
  const ImageSize image;
  std::size_t expected_visible = 0;
  for (std::size_t k = 0; k < frame.points.size(); ++k) {
    const auto& q = frame.points[k].position;
    std::string expected = format_double(q.x) + "," + format_double(q.y) + "," +
                           format_double(q.z) + ",";
    if (const auto px = try_project(q, r.scene.ground_truth)) {
      const bool in = image.contains(*px);
      expected_visible += in;
      expected += format_double(px->i) + "," + format_double(px->j) + (in ? ",true" : ",false");
    } else {
      expected += ",,false";
    }
    EXPECT_EQ(rows[k + 1], expected);
  }
  EXPECT_EQ(visible, expected_visible);
  EXPECT_GT(visible, 0u);
}

TEST(Synth, WritesARecordingDirectory) {
  testing::TempDir dir;
  const nlohmann::ordered_json config = {
      {"walk", {{"frames", 60}, {"y_max", 12.0}}}, {"walk_seed", 2}, {"noise", {{"pixel_sigma", 1.0}}}};
  write_text_file(dir / "scene.json", config.dump());
  SynthOptions opts;
  opts.config = dir / "scene.json";
  opts.out = dir / "rec";
  opts.seed = 3;
  const SynthSummary s = cmd_synth(opts);
  EXPECT_EQ(s.frames, 60u);
  EXPECT_EQ(list_cloud_files(dir / "rec" / "clouds").size(), 60u);
  const auto manifest = load_manifest(dir / "rec" / "manifest.csv");
  EXPECT_EQ(manifest.size(), s.camera_frames);
  EXPECT_NO_THROW(check_manifest_images(manifest, dir / "rec" / "images"));
  EXPECT_EQ(load_correspondences(dir / "rec" / "corr.jsonl").size(), s.ledger);
  EXPECT_EQ(lines_of(testing::slurp(dir / "rec" / "ledger.jsonl")).size(), s.ledger + 1);
  EXPECT_EQ(load_calibration(dir / "rec" / "ground_truth.json").calibration,
            synth::reference_calibration(CameraKind::pinhole));
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_NE(run_cli("no-such-command"), 0);
  EXPECT_EQ(run_cli("solve --corr " + (dir / "missing.jsonl").string() + " --out " +
                    (dir / "c.json").string()),
            1);
  const nlohmann::ordered_json config = {{"walk", {{"frames", 40}, {"y_max", 12.0}}}};
  write_text_file(dir / "scene.json", config.dump());
  EXPECT_EQ(run_cli("synth --config " + (dir / "scene.json").string() + " --out " +
                    (dir / "rec").string() + " --seed 4"),
            0);
  EXPECT_EQ(run_cli("detect --clouds " + (dir / "rec" / "clouds").string() +
                    " --roi=-6,6,2,13,-1.6,1.5 --out " + (dir / "det.jsonl").string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "det.jsonl"));
  EXPECT_NE(run_cli("detect --clouds " + (dir / "rec" / "clouds").string() +
                    " --roi=1,0,2,13,-1,1 --out " + (dir / "det2.jsonl").string()),
            0);
}

}  // namespace
}  // namespace lcc
