#include "lcc/commands.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lcc/errors.hpp"
#include "lcc/text.hpp"

namespace lcc {

using nlohmann::ordered_json;

ImageSize parse_image_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw std::invalid_argument("image size must look like ROWSxCOLS, got '" +
                                text + "'");
  }
  const auto rows = parse_int(std::string_view(text).substr(0, x));
  const auto cols = parse_int(std::string_view(text).substr(x + 1));
  if (!rows || !cols || *rows < 1 || *cols < 1 || *rows > 1000000 ||
      *cols > 1000000) {
    throw std::invalid_argument("bad image size '" + text + "'");
  }
  return {static_cast<int>(*rows), static_cast<int>(*cols)};
}

CalibrationResult solve_correspondences(const CorrespondenceSet& set,
                                        CameraKind kind,
                                        const ParamBounds& bounds,
                                        const GaConfig& cfg) {
  const auto pairs = set.pairs();
  const SolveReport report = solve(pairs, kind, bounds, cfg);
  return make_result(report, kind, set.size(), cfg);
}

DetectSummary cmd_detect(const DetectOptions& opts, std::ostream& log) {
  opts.roi.validate();
  DetectionFile file;
  file.roi = opts.roi;
  DetectSummary summary;
  for (const auto& path : list_cloud_files(opts.clouds)) {
    const LidarFrame frame = parse_cloud_file(path, opts.layout);
    ++summary.frames;
    const FrameOutcome outcome = inspect_frame(frame, opts.roi, opts.detector);
    if (const auto* d = std::get_if<VertexDetection>(&outcome)) {
      file.detections.push_back(*d);
    } else if (opts.verbose) {
      const auto& drop = std::get<FrameDrop>(outcome);
      log << path.filename().string() << " t=" << format_double(frame.timestamp)
          << " dropped: " << to_string(drop.reason)
          << " (roi_points=" << drop.roi_point_count
          << " ring_span=" << drop.ring_span
          << " top_ring_points=" << drop.top_ring_count << ")\n";
    }
  }
  summary.detections = file.detections.size();
  save_detections(opts.out, file);
  return summary;
}

CalibrationResult cmd_solve(const SolveOptions& opts) {
  const CorrespondenceSet set = load_correspondences(opts.corr);
  const ParamBounds bounds =
      opts.bounds ? load_bounds(*opts.bounds, opts.model) : default_bounds(opts.model);
  CalibrationResult result = solve_correspondences(set, opts.model, bounds, opts.ga);
  save_calibration(opts.out, result);
  return result;
}

ValidationReport evaluate_calibration(const CorrespondenceSet& set,
                                      const Calibration& cal, std::size_t bins) {
  const auto pairs = set.pairs();
  ValidationReport report;
  report.model = kind_of(cal);
  report.count = pairs.size();
  report.mean_error_px = reprojection_error(pairs, cal);
  report.bins = error_by_angle(pairs, cal, bins);
  return report;
}

ValidationReport cmd_validate(const ValidateOptions& opts) {
  const CorrespondenceSet set = load_correspondences(opts.corr);
  const CalibrationResult calib = load_calibration(opts.calib);
  ValidationReport report = evaluate_calibration(set, calib.calibration, opts.bins);
  write_text_file(opts.out, report_to_json(report).dump(2) + "\n");
  return report;
}

std::size_t cmd_project(const ProjectOptions& opts) {
  const LidarFrame frame = parse_cloud_file(opts.cloud, opts.layout);
  const Calibration cal = load_calibration(opts.calib).calibration;
  std::ostringstream out;
  out << "x,y,z,i,j,visible\n";
  std::size_t visible = 0;
  for (const auto& p : frame.points) {
    const auto& q = p.position;
    out << format_double(q.x) << ',' << format_double(q.y) << ','
        << format_double(q.z) << ',';
    const auto px = try_project(q, cal);
    if (!px) {
      out << ",,false\n";
      continue;
    }
    const bool in_sensor = opts.image.contains(*px);
    visible += in_sensor ? 1 : 0;
    out << format_double(px->i) << ',' << format_double(px->j) << ','
        << (in_sensor ? "true" : "false") << '\n';
  }
  write_text_file(opts.out, out.str());
  return visible;
}

std::uint64_t pixel_noise_seed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

namespace {

std::string numbered(const char* pattern, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, k);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

}  // namespace

SynthSummary write_recording(const fs::path& out,
                             const synth::SyntheticScene& scene,
                             const synth::SyntheticRecording& rec,
                             std::uint64_t seed) {
  ensure_directory(out / "clouds");
  ensure_directory(out / "images");
  for (std::size_t k = 0; k < rec.frames.size(); ++k) {
    save_cloud_file(out / "clouds" / numbered("frame_%06zu.csv", k), rec.frames[k]);
  }
  const std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      std::to_string(scene.device.image_cols) + "\" height=\"" +
      std::to_string(scene.device.image_rows) + "\"/>\n";
  for (const auto& cam : rec.camera_frames) {
    write_text_file(out / "images" / cam.image_path, svg);
  }
  save_manifest(out / "manifest.csv", rec.camera_frames);

  CorrespondenceSet corr;
  if (!rec.ledger.empty()) {
    corr = synth::make_correspondences(rec, scene.noise.pixel_sigma,
                                       pixel_noise_seed(seed));
  }
  corr.recording = scene.name;
  corr.devices = {"synthetic-lidar", "synthetic-camera"};
  save_correspondences(out / "corr.jsonl", corr);

  std::ostringstream ledger;
  ledger << ordered_json{{"format", "ledger/1"}}.dump() << '\n';
  for (const auto& e : rec.ledger) {
    ordered_json j;
    j["frame_index"] = e.frame_index;
    j["t_lidar"] = e.lidar_timestamp;
    j["vertex"] = {e.vertex.x, e.vertex.y, e.vertex.z};
    j["measured_vertex"] = {e.measured_vertex.x, e.measured_vertex.y,
                            e.measured_vertex.z};
    j["pixel"] = {e.pixel.i, e.pixel.j};
    j["frame_id"] = e.camera_frame_id;
    j["t_camera"] = e.camera_timestamp;
    j["ring_span"] = e.ring_span;
    j["roi_points"] = e.roi_point_count;
    ledger << j.dump() << '\n';
  }
  write_text_file(out / "ledger.jsonl", ledger.str());

  CalibrationResult truth;
  truth.calibration = scene.ground_truth;
  truth.correspondence_count = rec.ledger.size();
  truth.config.seed = seed;
  write_text_file(out / "ground_truth.json", write_calibration(truth));
  write_text_file(out / "scene.json", synth::scene_to_json(scene).dump(2) + "\n");

  return {rec.frames.size(), rec.camera_frames.size(), rec.ledger.size()};
}

SynthSummary cmd_synth(const SynthOptions& opts) {
  const synth::SyntheticScene scene =
      synth::scene_from_json(load_json_file(opts.config));
  const synth::SyntheticRecording rec = synth::generate(scene, opts.seed);
  return write_recording(opts.out, scene, rec, opts.seed);
}

}  // namespace lcc
