#include "lcc/formats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "lcc/errors.hpp"
#include "lcc/text.hpp"

namespace lcc {

using nlohmann::ordered_json;

namespace {

constexpr const char* kDetFormat = "det/1";
constexpr const char* kCalibFormat = "calib/1";
constexpr const char* kValidateFormat = "validate/1";
constexpr std::string_view kEmptyFrameTag = "# t=";

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return in;
}

template <typename Writer>
void save_via(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_text_file(path, out.str());
}

ordered_json parse_json_line(const std::string& line, const std::string& source,
                             std::size_t line_no) {
  ordered_json rec;
  try {
    rec = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(source, line_no, std::string("not a record: ") + e.what());
  }
  if (!rec.is_object()) {
    throw FormatError(source, line_no, "record is not an object");
  }
  return rec;
}

std::vector<double> numbers(const ordered_json& obj, const char* field,
                            std::size_t expected, const std::string& source,
                            std::size_t line) {
  if (!obj.contains(field) || !obj.at(field).is_array() ||
      (expected != 0 && obj.at(field).size() != expected)) {
    throw FormatError(source, line,
                      std::string("field '") + field + "' must be an array" +
                          (expected ? " of " + std::to_string(expected) : "") +
                          " of numbers");
  }
  std::vector<double> out;
  for (const auto& v : obj.at(field)) {
    if (!v.is_number()) {
      throw FormatError(source, line,
                        std::string("field '") + field + "' holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

double number(const ordered_json& obj, const char* field,
              const std::string& source, std::size_t line) {
  if (!obj.contains(field) || !obj.at(field).is_number()) {
    throw FormatError(source, line,
                      std::string("missing or non-numeric field '") + field + "'");
  }
  return obj.at(field).get<double>();
}

template <typename Int>
Int integer(const ordered_json& obj, const char* field,
            const std::string& source, std::size_t line) {
  if (!obj.contains(field) || !obj.at(field).is_number_integer()) {
    throw FormatError(source, line,
                      std::string("missing or non-integer field '") + field + "'");
  }
  if constexpr (std::is_unsigned_v<Int>) {
    if (!obj.at(field).is_number_unsigned()) {
      throw FormatError(source, line,
                        std::string("field '") + field + "' must be >= 0");
    }
  }
  return obj.at(field).get<Int>();
}

std::string string_field(const ordered_json& obj, const char* field,
                         const std::string& source, std::size_t line) {
  if (!obj.contains(field) || !obj.at(field).is_string()) {
    throw FormatError(source, line,
                      std::string("missing or non-string field '") + field + "'");
  }
  return obj.at(field).get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Generic helpers

std::string read_text_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    out << text;
    out.flush();
    if (!out) {
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot replace " + path.string() + ": " + ec.message());
  }
}

ordered_json load_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string(), 1, std::string("invalid JSON: ") + e.what());
  }
}

RoiBox parse_roi(const std::string& text) {
  const auto fields = split_fields(text, ',');
  if (fields.size() != 6) {
    throw std::invalid_argument("ROI needs six values x0,x1,y0,y1,z0,z1, got '" +
                                text + "'");
  }
  double v[6];
  for (std::size_t k = 0; k < 6; ++k) {
    const auto parsed = parse_double(fields[k]);
    if (!parsed) {
      throw std::invalid_argument("ROI value '" + std::string(fields[k]) +
                                  "' is not a number");
    }
    v[k] = *parsed;
  }
  RoiBox roi{v[0], v[1], v[2], v[3], v[4], v[5]};
  roi.validate();
  return roi;
}

std::string format_roi(const RoiBox& r) {
  return format_double(r.x_min) + "," + format_double(r.x_max) + "," +
         format_double(r.y_min) + "," + format_double(r.y_max) + "," +
         format_double(r.z_min) + "," + format_double(r.z_max);
}

// ---------------------------------------------------------------------------
// Point clouds

LidarFrame read_cloud(std::istream& in, const std::string& source,
                      const RingLayout& layout) {
  LidarFrame frame;
  std::optional<double> tagged_time;
  std::map<std::string, std::size_t> columns;
  std::size_t field_count = 0;
  bool have_header = false;
  bool have_rows = false;
  std::size_t cx = 0, cy = 0, cz = 0, ci = 0, ct = 0;
  std::optional<std::size_t> cring;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) {
      continue;
    }
    if (text.front() == '#') {
      if (text.starts_with(kEmptyFrameTag)) {
        const auto t = parse_double(text.substr(kEmptyFrameTag.size()));
        if (!t) {
          throw MalformedRow(source, line_no, "bad timestamp comment");
        }
        tagged_time = *t;
      }
      continue;
    }
    const auto fields = split_fields(text, ',');
    if (!have_header) {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        columns.emplace(std::string(trim(fields[k])), k);
      }
      for (const char* required : {"x", "y", "z", "intensity", "t"}) {
        if (!columns.contains(required)) {
          throw MissingColumn(source + ": missing column '" + required + "'");
        }
      }
      cx = columns["x"];
      cy = columns["y"];
      cz = columns["z"];
      ci = columns["intensity"];
      ct = columns["t"];
      if (const auto it = columns.find("ring"); it != columns.end()) {
        cring = it->second;
      }
      field_count = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != field_count) {
      throw MalformedRow(source, line_no,
                         "expected " + std::to_string(field_count) +
                             " fields, got " + std::to_string(fields.size()));
    }
    auto num = [&](std::size_t col, const char* name) {
      const auto v = parse_double(fields[col]);
      if (!v || !std::isfinite(*v)) {
        throw MalformedRow(source, line_no,
                           std::string("bad value for '") + name + "'");
      }
      return *v;
    };
    LidarPoint p;
    p.position = {num(cx, "x"), num(cy, "y"), num(cz, "z")};
    p.intensity = num(ci, "intensity");
    const double t = num(ct, "t");
    if (cring) {
      const auto r = parse_int(fields[*cring]);
      if (!r || *r < 0 || *r > 100000) {
        throw MalformedRow(source, line_no, "bad value for 'ring'");
      }
      p.ring = static_cast<int>(*r);
    }
    if (!have_rows) {
      frame.timestamp = t;
      have_rows = true;
    }
    frame.points.push_back(p);
  }
  if (!have_header) {
    throw MissingColumn(source + ": missing header line");
  }
  if (!have_rows && tagged_time) {
    frame.timestamp = *tagged_time;
  }
  if (!cring) {
    frame = derive_rings(std::move(frame), layout);
  }
  return frame;
}

LidarFrame parse_cloud_file(const fs::path& path, const RingLayout& layout) {
  auto in = open_input(path);
  return read_cloud(in, path.string(), layout);
}

void write_cloud(std::ostream& out, const LidarFrame& frame) {
  out << "x,y,z,intensity,ring,t\n";
  if (frame.points.empty()) {
    out << kEmptyFrameTag << format_double(frame.timestamp) << '\n';
    return;
  }
  const std::string t = format_double(frame.timestamp);
  for (const auto& p : frame.points) {
    out << format_double(p.position.x) << ',' << format_double(p.position.y)
        << ',' << format_double(p.position.z) << ','
        << format_double(p.intensity) << ',' << p.ring << ',' << t << '\n';
  }
}

void save_cloud_file(const fs::path& path, const LidarFrame& frame) {
  save_via(path, [&](std::ostream& out) { write_cloud(out, frame); });
}

std::vector<fs::path> list_cloud_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LidarFrame> load_cloud_dir(const fs::path& dir,
                                       const RingLayout& layout) {
  std::vector<LidarFrame> frames;
  for (const auto& path : list_cloud_files(dir)) {
    frames.push_back(parse_cloud_file(path, layout));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Image manifest

std::vector<CameraFrameRef> read_manifest(std::istream& in,
                                          const std::string& source) {
  std::vector<CameraFrameRef> frames;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    const auto fields = split_fields(text, ',');
    if (!have_header) {
      if (fields.size() != 3 || trim(fields[0]) != "id" ||
          trim(fields[1]) != "timestamp" || trim(fields[2]) != "path") {
        throw FormatError(source, line_no, "expected header 'id,timestamp,path'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw FormatError(source, line_no, "expected 3 fields");
    }
    CameraFrameRef ref;
    ref.id = std::string(trim(fields[0]));
    const auto t = parse_double(fields[1]);
    ref.image_path = std::string(trim(fields[2]));
    if (ref.id.empty() || ref.image_path.empty()) {
      throw FormatError(source, line_no, "empty id or path");
    }
    if (!t || !std::isfinite(*t)) {
      throw FormatError(source, line_no, "bad timestamp");
    }
    ref.timestamp = *t;
    if (!frames.empty() && !(ref.timestamp > frames.back().timestamp)) {
      throw FormatError(source, line_no, "timestamps must increase strictly");
    }
    if (!ids.insert(ref.id).second) {
      throw FormatError(source, line_no, "duplicate frame id '" + ref.id + "'");
    }
    frames.push_back(std::move(ref));
  }
  if (!have_header) {
    throw FormatError(source, line_no == 0 ? 1 : line_no, "missing header");
  }
  return frames;
}

std::vector<CameraFrameRef> load_manifest(const fs::path& path) {
  auto in = open_input(path);
  return read_manifest(in, path.string());
}

void write_manifest(std::ostream& out, std::span<const CameraFrameRef> frames) {
  out << "id,timestamp,path\n";
  for (const auto& f : frames) {
    out << f.id << ',' << format_double(f.timestamp) << ',' << f.image_path
        << '\n';
  }
}

void save_manifest(const fs::path& path, std::span<const CameraFrameRef> frames) {
  save_via(path, [&](std::ostream& out) { write_manifest(out, frames); });
}

void check_manifest_images(std::span<const CameraFrameRef> frames,
                           const fs::path& image_root) {
  for (const auto& f : frames) {
    const fs::path p = image_root / f.image_path;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
      throw IoError("image for frame '" + f.id + "' not found: " + p.string());
    }
  }
}

// ---------------------------------------------------------------------------
// Detections

void write_detections(std::ostream& out, const DetectionFile& file) {
  ordered_json header;
  header["format"] = kDetFormat;
  const auto& r = file.roi;
  header["roi"] = {r.x_min, r.x_max, r.y_min, r.y_max, r.z_min, r.z_max};
  out << header.dump() << '\n';
  for (const auto& d : file.detections) {
    ordered_json rec;
    rec["t"] = d.frame_timestamp;
    rec["vertex"] = {d.vertex.x, d.vertex.y, d.vertex.z};
    rec["ring_span"] = d.ring_span;
    rec["roi_points"] = d.roi_point_count;
    out << rec.dump() << '\n';
  }
}

DetectionFile read_detections(std::istream& in, const std::string& source) {
  DetectionFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto rec = parse_json_line(line, source, line_no);
    if (!have_header) {
      if (rec.value("format", std::string()) != kDetFormat) {
        throw FormatError(source, line_no,
                          std::string("expected header with format ") + kDetFormat);
      }
      const auto r = numbers(rec, "roi", 6, source, line_no);
      file.roi = {r[0], r[1], r[2], r[3], r[4], r[5]};
      have_header = true;
      continue;
    }
    VertexDetection d;
    d.frame_timestamp = number(rec, "t", source, line_no);
    const auto v = numbers(rec, "vertex", 3, source, line_no);
    d.vertex = {v[0], v[1], v[2]};
    d.ring_span = integer<int>(rec, "ring_span", source, line_no);
    d.roi_point_count = integer<std::size_t>(rec, "roi_points", source, line_no);
    file.detections.push_back(d);
  }
  if (!have_header) {
    throw FormatError(source, line_no == 0 ? 1 : line_no, "missing det/1 header");
  }
  return file;
}

void save_detections(const fs::path& path, const DetectionFile& file) {
  save_via(path, [&](std::ostream& out) { write_detections(out, file); });
}

DetectionFile load_detections(const fs::path& path) {
  auto in = open_input(path);
  return read_detections(in, path.string());
}

// ---------------------------------------------------------------------------
// Calibration results

CalibrationResult make_result(const SolveReport& report, CameraKind kind,
                              std::size_t correspondence_count,
                              const GaConfig& config) {
  CalibrationResult r;
  r.calibration = unpack(kind, report.best_params);
  r.train_error_px = report.best_error_px;
  r.correspondence_count = correspondence_count;
  r.config = config;
  r.trace = report.trace;
  r.evaluations = report.evaluations_count;
  r.converged = report.converged;
  return r;
}

ordered_json calibration_to_json(const CalibrationResult& result) {
  const CameraKind kind = kind_of(result.calibration);
  const auto params = pack(result.calibration);
  const auto names = param_names(kind);
  ordered_json doc;
  doc["format"] = kCalibFormat;
  doc["model"] = std::string(to_string(kind));
  ordered_json plist = ordered_json::array();
  for (std::size_t k = 0; k < params.size(); ++k) {
    plist.push_back({{"name", std::string(names[k])}, {"value", params[k]}});
  }
  doc["parameters"] = plist;
  doc["train_error_px"] = result.train_error_px;
  doc["correspondence_count"] = result.correspondence_count;
  const GaConfig& c = result.config;
  doc["config"] = {{"seed", c.seed},
                   {"slots", c.slots},
                   {"population", c.population},
                   {"generations", c.generations},
                   {"bound_scale", c.bound_scale},
                   {"max_iterations", c.max_iterations},
                   {"convergence_epsilon", c.convergence_epsilon},
                   {"tournament_size", c.tournament_size},
                   {"crossover_probability", c.crossover_probability},
                   {"blend_low", c.blend_low},
                   {"blend_high", c.blend_high},
                   {"mutation_probability", c.mutation_probability},
                   {"mutation_scale", c.mutation_scale},
                   {"elite_count", c.elite_count},
                   {"min_correspondences", c.min_correspondences}};
  doc["evaluations"] = result.evaluations;
  doc["converged"] = result.converged;
  ordered_json trace = ordered_json::array();
  for (const auto& it : result.trace) {
    trace.push_back({{"iteration", it.iteration},
                     {"best_error_px", it.best_error},
                     {"slot_errors_px", it.slot_errors},
                     {"lower", it.bounds.lower},
                     {"upper", it.bounds.upper},
                     {"half_width", it.half_width}});
  }
  doc["trace"] = trace;
  return doc;
}

CalibrationResult calibration_from_json(const ordered_json& doc,
                                        const std::string& source) {
  if (!doc.is_object() || doc.value("format", std::string()) != kCalibFormat) {
    throw FormatError(source, 1, std::string("expected format ") + kCalibFormat);
  }
  CameraKind kind;
  try {
    kind = parse_camera_kind(string_field(doc, "model", source, 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(source, 1, e.what());
  }
  const auto names = param_names(kind);
  if (!doc.contains("parameters") || !doc.at("parameters").is_array()) {
    throw FormatError(source, 1, "missing 'parameters' array");
  }
  const auto& plist = doc.at("parameters");
  if (plist.size() != names.size()) {
    throw ModelMismatch(source + ": model " + std::string(to_string(kind)) +
                        " has " + std::to_string(names.size()) +
                        " parameters, file lists " +
                        std::to_string(plist.size()));
  }
  ParamVector params;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto& entry = plist.at(k);
    if (!entry.is_object() || string_field(entry, "name", source, 1) != names[k]) {
      throw ModelMismatch(source + ": parameter " + std::to_string(k) +
                          " must be '" + std::string(names[k]) + "'");
    }
    params.push_back(number(entry, "value", source, 1));
  }
  CalibrationResult r;
  r.calibration = unpack(kind, params);
  r.train_error_px = number(doc, "train_error_px", source, 1);
  r.correspondence_count =
      integer<std::size_t>(doc, "correspondence_count", source, 1);
  if (!doc.contains("config") || !doc.at("config").is_object()) {
    throw FormatError(source, 1, "missing 'config' object");
  }
  const auto& c = doc.at("config");
  GaConfig& g = r.config;
  g.seed = integer<std::uint64_t>(c, "seed", source, 1);
  g.slots = integer<int>(c, "slots", source, 1);
  g.population = integer<int>(c, "population", source, 1);
  g.generations = integer<int>(c, "generations", source, 1);
  g.bound_scale = number(c, "bound_scale", source, 1);
  g.max_iterations = integer<int>(c, "max_iterations", source, 1);
  g.convergence_epsilon = number(c, "convergence_epsilon", source, 1);
  g.tournament_size = integer<int>(c, "tournament_size", source, 1);
  g.crossover_probability = number(c, "crossover_probability", source, 1);
  g.blend_low = number(c, "blend_low", source, 1);
  g.blend_high = number(c, "blend_high", source, 1);
  g.mutation_probability = number(c, "mutation_probability", source, 1);
  g.mutation_scale = number(c, "mutation_scale", source, 1);
  g.elite_count = integer<int>(c, "elite_count", source, 1);
  g.min_correspondences =
      integer<std::size_t>(c, "min_correspondences", source, 1);
  r.evaluations = integer<std::size_t>(doc, "evaluations", source, 1);
  if (!doc.contains("converged") || !doc.at("converged").is_boolean()) {
    throw FormatError(source, 1, "missing boolean 'converged'");
  }
  r.converged = doc.at("converged").get<bool>();
  if (!doc.contains("trace") || !doc.at("trace").is_array()) {
    throw FormatError(source, 1, "missing 'trace' array");
  }
  for (const auto& t : doc.at("trace")) {
    IterationTrace it;
    it.iteration = integer<int>(t, "iteration", source, 1);
    it.best_error = number(t, "best_error_px", source, 1);
    it.slot_errors = numbers(t, "slot_errors_px", 0, source, 1);
    it.bounds.lower = numbers(t, "lower", names.size(), source, 1);
    it.bounds.upper = numbers(t, "upper", names.size(), source, 1);
    it.half_width = numbers(t, "half_width", names.size(), source, 1);
    r.trace.push_back(std::move(it));
  }
  return r;
}

std::string write_calibration(const CalibrationResult& result) {
  return calibration_to_json(result).dump(2) + "\n";
}

CalibrationResult read_calibration(const std::string& text,
                                   const std::string& source) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(source, 1, std::string("invalid JSON: ") + e.what());
  }
  return calibration_from_json(doc, source);
}

void save_calibration(const fs::path& path, const CalibrationResult& result) {
  write_text_file(path, write_calibration(result));
}

CalibrationResult load_calibration(const fs::path& path) {
  return read_calibration(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Search bounds

ParamBounds bounds_from_json(const ordered_json& doc, CameraKind kind,
                             const std::string& source) {
  if (!doc.is_object()) {
    throw FormatError(source, 1, "bounds file must hold an object");
  }
  if (doc.contains("model")) {
    CameraKind declared;
    try {
      declared = parse_camera_kind(string_field(doc, "model", source, 1));
    } catch (const std::invalid_argument& e) {
      throw FormatError(source, 1, e.what());
    }
    if (declared != kind) {
      throw ModelMismatch(source + ": bounds are for " +
                          std::string(to_string(declared)) + ", solving " +
                          std::string(to_string(kind)));
    }
  }
  if (!doc.contains("bounds") || !doc.at("bounds").is_array()) {
    throw FormatError(source, 1, "missing 'bounds' array");
  }
  const auto names = param_names(kind);
  ParamBounds b;
  b.lower.assign(names.size(), 0.0);
  b.upper.assign(names.size(), 0.0);
  std::vector<bool> seen(names.size(), false);
  for (const auto& entry : doc.at("bounds")) {
    const std::string name = string_field(entry, "name", source, 1);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw ModelMismatch(source + ": unknown parameter '" + name + "' for " +
                          std::string(to_string(kind)));
    }
    const auto k = static_cast<std::size_t>(it - names.begin());
    if (seen[k]) {
      throw FormatError(source, 1, "parameter '" + name + "' listed twice");
    }
    seen[k] = true;
    auto limit = [&](const char* field) {
      if (!entry.contains(field)) {
        throw FormatError(source, 1, "'" + name + "' lacks '" + field + "'");
      }
      const auto& v = entry.at(field);
      if (v.is_number()) {
        return v.get<double>();
      }
      if (v.is_string()) {
        const auto parsed = k < 3 ? parse_angle(v.get<std::string>())
                                  : parse_double(v.get<std::string>());
        if (parsed) {
          return *parsed;
        }
      }
      throw FormatError(source, 1, "bad '" + std::string(field) + "' for '" +
                                       name + "'");
    };
    b.lower[k] = limit("lower");
    b.upper[k] = limit("upper");
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (!seen[k]) {
      throw FormatError(source, 1,
                        "missing bounds for '" + std::string(names[k]) + "'");
    }
  }
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(source, 1, e.what());
  }
  return b;
}

ordered_json bounds_to_json(const ParamBounds& bounds, CameraKind kind) {
  const auto names = param_names(kind);
  if (bounds.size() != names.size()) {
    throw ModelMismatch("bounds size does not match the model");
  }
  ordered_json doc;
  doc["model"] = std::string(to_string(kind));
  ordered_json list = ordered_json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    list.push_back({{"name", std::string(names[k])},
                    {"lower", bounds.lower[k]},
                    {"upper", bounds.upper[k]}});
  }
  doc["bounds"] = list;
  return doc;
}

ParamBounds load_bounds(const fs::path& path, CameraKind kind) {
  return bounds_from_json(load_json_file(path), kind, path.string());
}

// ---------------------------------------------------------------------------
// Validation report

ordered_json report_to_json(const ValidationReport& report) {
  ordered_json doc;
  doc["format"] = kValidateFormat;
  doc["model"] = std::string(to_string(report.model));
  doc["count"] = report.count;
  doc["mean_error_px"] = report.mean_error_px;
  ordered_json bins = ordered_json::array();
  for (const auto& b : report.bins) {
    ordered_json jb;
    jb["lower_rad"] = b.lower;
    jb["upper_rad"] = b.upper;
    jb["count"] = b.count;
    jb["mean_error_px"] = b.mean_error ? ordered_json(*b.mean_error) : ordered_json();
    bins.push_back(jb);
  }
  doc["bins"] = bins;
  return doc;
}

ValidationReport report_from_json(const ordered_json& doc,
                                  const std::string& source) {
  if (!doc.is_object() || doc.value("format", std::string()) != kValidateFormat) {
    throw FormatError(source, 1, std::string("expected format ") + kValidateFormat);
  }
  ValidationReport r;
  try {
    r.model = parse_camera_kind(string_field(doc, "model", source, 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(source, 1, e.what());
  }
  r.count = integer<std::size_t>(doc, "count", source, 1);
  r.mean_error_px = number(doc, "mean_error_px", source, 1);
  if (!doc.contains("bins") || !doc.at("bins").is_array()) {
    throw FormatError(source, 1, "missing 'bins' array");
  }
  for (const auto& jb : doc.at("bins")) {
    AngleBin b;
    b.lower = number(jb, "lower_rad", source, 1);
    b.upper = number(jb, "upper_rad", source, 1);
    b.count = integer<std::size_t>(jb, "count", source, 1);
    if (jb.contains("mean_error_px") && !jb.at("mean_error_px").is_null()) {
      b.mean_error = number(jb, "mean_error_px", source, 1);
    }
    r.bins.push_back(b);
  }
  return r;
}

}  // namespace lcc
