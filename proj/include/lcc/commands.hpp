#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lcc/correspondence.hpp"
#include "lcc/formats.hpp"
#include "lcc/ga_solver.hpp"
#include "lcc/synthdata.hpp"
#include "lcc/vertex_detect.hpp"

namespace lcc {

/// Sensor extent used to decide whether a projected pixel is visible.
struct ImageSize {
  int rows = 1024;
  int cols = 1280;

  bool contains(const Pixel& p) const {
    return p.i >= 0.0 && p.i < rows && p.j >= 0.0 && p.j < cols;
  }
};

/// `ROWSxCOLS`, e.g. `1024x1280`; throws std::invalid_argument.
ImageSize parse_image_size(const std::string& text);

/// Solve on `set` and package the outcome as a calibration result. The CLI
/// and the service both go through here.
CalibrationResult solve_correspondences(const CorrespondenceSet& set,
                                        CameraKind kind,
                                        const ParamBounds& bounds,
                                        const GaConfig& cfg);

struct DetectOptions {
  fs::path clouds;
  RoiBox roi;
  fs::path out;
  bool verbose = false;
  DetectorConfig detector;
  RingLayout layout;
};

struct DetectSummary {
  std::size_t frames = 0;
  std::size_t detections = 0;
};

/// Writes the detections file; in verbose mode logs one line per dropped
/// frame with its reason.
DetectSummary cmd_detect(const DetectOptions& opts, std::ostream& log);

struct SolveOptions {
  fs::path corr;
  CameraKind model = CameraKind::pinhole;
  std::optional<fs::path> bounds;
  GaConfig ga;
  fs::path out;
};

CalibrationResult cmd_solve(const SolveOptions& opts);

struct ValidateOptions {
  fs::path corr;
  fs::path calib;
  std::size_t bins = 8;
  fs::path out;
};

ValidationReport evaluate_calibration(const CorrespondenceSet& set,
                                      const Calibration& cal, std::size_t bins);
ValidationReport cmd_validate(const ValidateOptions& opts);

struct ProjectOptions {
  fs::path cloud;
  fs::path calib;
  fs::path out;
  ImageSize image;
  RingLayout layout;
};

/// Writes `x,y,z,i,j,visible` rows; returns the number of visible points.
std::size_t cmd_project(const ProjectOptions& opts);

struct SynthOptions {
  fs::path config;
  fs::path out;
  std::uint64_t seed = 0;
};

struct SynthSummary {
  std::size_t frames = 0;
  std::size_t camera_frames = 0;
  std::size_t ledger = 0;
};

/// Writes a recording directory:
///   clouds/frame_NNNNNN.csv, images/cam_NNNNNN.svg, manifest.csv,
///   corr.jsonl (ledger pixels with the scene's pixel noise),
///   ledger.jsonl, ground_truth.json (calib/1) and scene.json.
SynthSummary write_recording(const fs::path& out,
                             const synth::SyntheticScene& scene,
                             const synth::SyntheticRecording& rec,
                             std::uint64_t seed);
SynthSummary cmd_synth(const SynthOptions& opts);

/// Seed used for annotation noise when `seed` generated the recording.
std::uint64_t pixel_noise_seed(std::uint64_t seed);

}  // namespace lcc
