#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lcc/errors.hpp"
#include "lcc/formats.hpp"
#include "lcc/synthdata.hpp"

namespace lcc {
namespace {

LidarFrame read_text(const std::string& text, const RingLayout& layout = {}) {
  std::istringstream in(text);
  return read_cloud(in, "cloud.csv", layout);
}

std::string write_text(const LidarFrame& frame) {
  std::ostringstream out;
  write_cloud(out, frame);
  return out.str();
}

CalibrationResult sample_result(CameraKind kind) {
  const auto fx = testing::solver_fixture(kind, 20, 1.0, 31);
  GaConfig cfg;
  cfg.population = 40;
  cfg.generations = 4;
  cfg.max_iterations = 3;
  cfg.seed = 12;
  const auto report = solve(fx.correspondences.pairs(), kind, default_bounds(kind), cfg);
  return make_result(report, kind, fx.correspondences.size(), cfg);
}

TEST(CloudFile, ReadsTheDocumentedRow) {
  const LidarFrame f = read_text("x,y,z,intensity,ring,t\n1.0,2.0,3.0,55,7,12.500\n");
  ASSERT_EQ(f.points.size(), 1u);
  EXPECT_EQ(f.points[0].position, (Point3{1.0, 2.0, 3.0}));
  EXPECT_EQ(f.points[0].intensity, 55.0);
  EXPECT_EQ(f.points[0].ring, 7);
  EXPECT_EQ(f.timestamp, 12.5);
  EXPECT_EQ(write_text(f), "x,y,z,intensity,ring,t\n1,2,3,55,7,12.5\n");
}

TEST(CloudFile, ColumnsMayBeReordered) {
  const LidarFrame f = read_text("t,ring,intensity,z,y,x\n4,2,9,3,2,1\n");
  ASSERT_EQ(f.points.size(), 1u);
  EXPECT_EQ(f.points[0].position, (Point3{1, 2, 3}));
  EXPECT_EQ(f.points[0].ring, 2);
  EXPECT_EQ(f.timestamp, 4.0);
}

TEST(CloudFile, EmptyFramesKeepTheirTimestamp) {
  const LidarFrame header_only = read_text("x,y,z,intensity,ring,t\n");
  EXPECT_TRUE(header_only.points.empty());
  LidarFrame empty;
  empty.timestamp = 1600000000.25;
  const std::string text = write_text(empty);
  EXPECT_EQ(text, "x,y,z,intensity,ring,t\n# t=1600000000.25\n");
  EXPECT_EQ(read_text(text), empty);
}

TEST(CloudFile, MissingColumnIsReported) {
  try {
    read_text("x,y,intensity,ring,t\n1,2,3,4,5\n");
    FAIL() << "expected MissingColumn";
  } catch (const MissingColumn& e) {
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
  }
  EXPECT_THROW(read_text(""), MissingColumn);
  EXPECT_THROW(read_text("# only a comment\n"), MissingColumn);
}

TEST(CloudFile, MalformedRowNamesTheLine) {
  const std::string good = "x,y,z,intensity,ring,t\n1,2,3,4,5,6\n";
  for (const std::string bad : {"1,2,3,4,5\n", "1,2,zz,4,5,6\n", "1,2,nan,4,5,6\n",
                                "1,2,3,4,-1,6\n", "1,2,3,4,1.5,6\n"}) {
    try {
      read_text(good + bad);
      FAIL() << "expected MalformedRow for " << bad;
    } catch (const MalformedRow& e) {
      EXPECT_EQ(e.line(), 3u);
      EXPECT_NE(std::string(e.what()).find("cloud.csv:3"), std::string::npos);
    }
  }
}

TEST(CloudFile, MissingRingIsDerivedFromElevation) {
  const synth::DeviceSpec dev;
  const double el = dev.ring_elevation(11);
  std::ostringstream text;
  text << "x,y,z,intensity,t\n0," << 10.0 * std::cos(el) << ',' << 10.0 * std::sin(el)
       << ",1,0\n";
  const LidarFrame f = read_text(text.str(), dev.ring_layout());
  ASSERT_EQ(f.points.size(), 1u);
  EXPECT_EQ(f.points[0].ring, 11);
}

TEST(CloudFile, SyntheticFramesRoundTripExactly) {
  synth::SyntheticScene scene =
      synth::reference_scene(CameraKind::pinhole, testing::near_walk(30), 2);
  scene.clutter.ground = true;
  scene.noise.point_sigma = 0.01;
  const auto rec = synth::generate(scene, 3);
  testing::TempDir dir;
  for (std::size_t k = 0; k < rec.frames.size(); ++k) {
    const auto a = dir / ("a" + std::to_string(k) + ".csv");
    const auto b = dir / ("b" + std::to_string(k) + ".csv");
    save_cloud_file(a, rec.frames[k]);
    const LidarFrame back = parse_cloud_file(a);
    EXPECT_EQ(back, rec.frames[k]);
    save_cloud_file(b, back);
    EXPECT_EQ(testing::slurp(a), testing::slurp(b));
  }
  const auto frames = load_cloud_dir(dir.path());
  EXPECT_EQ(frames.size(), 2 * rec.frames.size());
  EXPECT_THROW(list_cloud_files(dir / "absent"), IoError);
  EXPECT_THROW(parse_cloud_file(dir / "absent.csv"), IoError);
}

TEST(Manifest, RoundTripAndErrors) {
  const std::vector<CameraFrameRef> frames{{"c0", 1.5, "c0.png"}, {"c1", 1.6, "sub/c1.png"}};
  std::ostringstream out;
  write_manifest(out, frames);
  EXPECT_EQ(out.str(), "id,timestamp,path\nc0,1.5,c0.png\nc1,1.6,sub/c1.png\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_manifest(in, "m.csv"), frames);

  auto parse = [](const std::string& text) {
    std::istringstream s(text);
    return read_manifest(s, "m.csv");
  };
  EXPECT_THROW(parse("id,path,timestamp\n"), FormatError);
  EXPECT_THROW(parse("id,timestamp,path\na,2,a.png\nb,1,b.png\n"), FormatError);
  EXPECT_THROW(parse("id,timestamp,path\na,1,a.png\na,2,b.png\n"), FormatError);
  EXPECT_THROW(parse("id,timestamp,path\na,x,a.png\n"), FormatError);
  EXPECT_THROW(parse("id,timestamp,path\n,1,a.png\n"), FormatError);
  EXPECT_THROW(parse("id,timestamp,path\na,1\n"), FormatError);

  testing::TempDir dir;
  write_text_file(dir / "c0.png", "x");
  EXPECT_THROW(check_manifest_images(frames, dir.path()), IoError);
  std::filesystem::create_directory(dir / "sub");
  write_text_file(dir / "sub" / "c1.png", "x");
  EXPECT_NO_THROW(check_manifest_images(frames, dir.path()));
}

TEST(DetectionFile, RoundTrip) {
  DetectionFile file;
  file.roi = {-1.5, 2.25, 3, 12, -1.6, 1.5};
  file.detections = {{1600000000.1, {0.1, 5.2, 0.3}, 6, 120},
                     {1600000000.3, {-0.7, 7.123456789, 0.2}, 4, 64}};
  testing::TempDir dir;
  save_detections(dir / "d.jsonl", file);
  const DetectionFile back = load_detections(dir / "d.jsonl");
  EXPECT_EQ(back, file);
  save_detections(dir / "e.jsonl", back);
  EXPECT_EQ(testing::slurp(dir / "d.jsonl"), testing::slurp(dir / "e.jsonl"));

  std::istringstream bad(R"({"format":"det/1","roi":[0,1,0,1,0,1]})"
                         "\n"
                         R"({"t":1,"vertex":[1,2],"ring_span":3,"roi_points":4})"
                         "\n");
  try {
    read_detections(bad, "d.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CalibrationFile, RoundTripBothModels) {
  for (auto kind : {CameraKind::pinhole, CameraKind::fisheye}) {
    const CalibrationResult r = sample_result(kind);
    const std::string text = write_calibration(r);
    const CalibrationResult back = read_calibration(text, "c.json");
    EXPECT_EQ(back.calibration, r.calibration);
    EXPECT_EQ(back.train_error_px, r.train_error_px);
    EXPECT_EQ(back.trace, r.trace);
    EXPECT_EQ(back.config.seed, 12u);
    EXPECT_EQ(write_calibration(back), text);
    const auto doc = nlohmann::ordered_json::parse(text);
    EXPECT_EQ(doc["format"], "calib/1");
    EXPECT_EQ(doc["model"], std::string(to_string(kind)));
    EXPECT_EQ(doc["parameters"].size(), param_count(kind));
  }
}

TEST(CalibrationFile, RejectsMismatchedParameters) {
  auto doc = calibration_to_json(sample_result(CameraKind::fisheye));
  doc["model"] = "pinhole";
  EXPECT_THROW(calibration_from_json(doc, "c.json"), ModelMismatch);
  EXPECT_THROW(read_calibration("{\"format\":\"calib/2\"}", "c.json"), FormatError);
  EXPECT_THROW(read_calibration("not json", "c.json"), FormatError);
}

TEST(BoundsFile, AcceptsDegreesAndChecksCoverage) {
  const auto defaults = default_bounds(CameraKind::pinhole);
  auto doc = bounds_to_json(defaults, CameraKind::pinhole);
  EXPECT_EQ(bounds_from_json(doc, CameraKind::pinhole, "b.json"), defaults);

  doc["bounds"][0]["lower"] = "36deg";
  doc["bounds"][0]["upper"] = "144 deg";
  const auto b = bounds_from_json(doc, CameraKind::pinhole, "b.json");
  EXPECT_NEAR(b.lower[0], 0.2 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(b.upper[0], 0.8 * std::numbers::pi, 1e-15);

  auto missing = doc;
  missing["bounds"].erase(3);
  EXPECT_THROW(bounds_from_json(missing, CameraKind::pinhole, "b.json"), FormatError);
  auto twice = doc;
  twice["bounds"].push_back(twice["bounds"][1]);
  EXPECT_THROW(bounds_from_json(twice, CameraKind::pinhole, "b.json"), FormatError);
  auto inverted = doc;
  inverted["bounds"][5]["lower"] = 2.0;
  EXPECT_THROW(bounds_from_json(inverted, CameraKind::pinhole, "b.json"), FormatError);
  auto degrees_on_offset = doc;
  degrees_on_offset["bounds"][4]["lower"] = "-10deg";
  EXPECT_THROW(bounds_from_json(degrees_on_offset, CameraKind::pinhole, "b.json"),
               FormatError);
  EXPECT_THROW(bounds_from_json(doc, CameraKind::fisheye, "b.json"), ModelMismatch);
}

TEST(ValidationReportFile, RoundTrip) {
  ValidationReport r;
  r.model = CameraKind::fisheye;
  r.count = 12;
  r.mean_error_px = 1.25;
  r.bins = {{0.0, 0.1, 7, 1.0}, {0.1, 0.2, 0, std::nullopt}, {0.2, 0.3, 5, 1.6}};
  const auto doc = report_to_json(r);
  EXPECT_TRUE(doc["bins"][1]["mean_error_px"].is_null());
  const auto back = report_from_json(doc, "r.json");
  EXPECT_EQ(report_to_json(back).dump(), doc.dump());
}

TEST(Roi, ParseAndFormat) {
  const RoiBox r = parse_roi("-1,1.5,3,12,-1.6,1.5");
  EXPECT_EQ(format_roi(r), "-1,1.5,3,12,-1.6,1.5");
  EXPECT_THROW(parse_roi("1,2,3"), std::invalid_argument);
  EXPECT_THROW(parse_roi("0,1,0,1,0,x"), std::invalid_argument);
  EXPECT_THROW(parse_roi("1,0,0,1,0,1"), std::invalid_argument);
}

}  // namespace
}  // namespace lcc
