#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcc/correspondence.hpp"
#include "lcc/ga_solver.hpp"
#include "lcc/projection.hpp"
#include "lcc/vertex_detect.hpp"

namespace lcc {

namespace fs = std::filesystem;

// Point clouds: one text file per frame, header `x,y,z,intensity,ring,t`.

/// Columns may come in any order; `ring` is optional and, when absent, rings
/// are derived from elevation with `layout`. An empty frame keeps its
/// timestamp in a `# t=<seconds>` line. Throws MissingColumn, MalformedRow.
LidarFrame read_cloud(std::istream& in, const std::string& source,
                      const RingLayout& layout = {});
LidarFrame parse_cloud_file(const fs::path& path, const RingLayout& layout = {});

void write_cloud(std::ostream& out, const LidarFrame& frame);
void save_cloud_file(const fs::path& path, const LidarFrame& frame);

/// Regular files with a `.csv` extension, sorted by name.
std::vector<fs::path> list_cloud_files(const fs::path& dir);

/// Parses every file of `dir` in name order.
std::vector<LidarFrame> load_cloud_dir(const fs::path& dir,
                                       const RingLayout& layout = {});

// Image manifest: header `id,timestamp,path`, paths relative to the image
// directory.

/// Throws FormatError for bad rows or timestamps that do not increase.
std::vector<CameraFrameRef> read_manifest(std::istream& in,
                                          const std::string& source);
std::vector<CameraFrameRef> load_manifest(const fs::path& path);
void write_manifest(std::ostream& out, std::span<const CameraFrameRef> frames);
void save_manifest(const fs::path& path, std::span<const CameraFrameRef> frames);

/// Throws IoError naming the first frame whose image is missing.
void check_manifest_images(std::span<const CameraFrameRef> frames,
                           const fs::path& image_root);

// Detections: a "det/1" header carrying the ROI, then one detection per line.

struct DetectionFile {
  RoiBox roi;
  std::vector<VertexDetection> detections;

  friend bool operator==(const DetectionFile&, const DetectionFile&) = default;
};

void write_detections(std::ostream& out, const DetectionFile& file);
DetectionFile read_detections(std::istream& in, const std::string& source);
void save_detections(const fs::path& path, const DetectionFile& file);
DetectionFile load_detections(const fs::path& path);

// Calibration results: a "calib/1" JSON document.

struct CalibrationResult {
  Calibration calibration;
  double train_error_px = 0.0;
  std::size_t correspondence_count = 0;
  GaConfig config;
  std::vector<IterationTrace> trace;
  std::size_t evaluations = 0;
  bool converged = false;
};

CalibrationResult make_result(const SolveReport& report, CameraKind kind,
                              std::size_t correspondence_count,
                              const GaConfig& config);

nlohmann::ordered_json calibration_to_json(const CalibrationResult& result);
/// Throws FormatError or ModelMismatch.
CalibrationResult calibration_from_json(const nlohmann::ordered_json& doc,
                                        const std::string& source);
std::string write_calibration(const CalibrationResult& result);
CalibrationResult read_calibration(const std::string& text,
                                   const std::string& source);
void save_calibration(const fs::path& path, const CalibrationResult& result);
CalibrationResult load_calibration(const fs::path& path);

// Search bounds: {"model": ..., "bounds": [{"name", "lower", "upper"}, ...]}.
// Angle limits accept strings with a "deg" suffix.

/// Every parameter of `kind` must appear exactly once.
ParamBounds bounds_from_json(const nlohmann::ordered_json& doc, CameraKind kind,
                             const std::string& source);
nlohmann::ordered_json bounds_to_json(const ParamBounds& bounds, CameraKind kind);
ParamBounds load_bounds(const fs::path& path, CameraKind kind);

// Validation report: a "validate/1" JSON document.

struct ValidationReport {
  CameraKind model = CameraKind::pinhole;
  std::size_t count = 0;
  double mean_error_px = 0.0;
  std::vector<AngleBin> bins;
};

nlohmann::ordered_json report_to_json(const ValidationReport& report);
ValidationReport report_from_json(const nlohmann::ordered_json& doc,
                                  const std::string& source);

// Generic helpers.

std::string read_text_file(const fs::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_text_file(const fs::path& path, const std::string& text);
nlohmann::ordered_json load_json_file(const fs::path& path);

/// `x0,x1,y0,y1,z0,z1`; throws std::invalid_argument.
RoiBox parse_roi(const std::string& text);
std::string format_roi(const RoiBox& roi);

}  // namespace lcc
