#include "lcc/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "lcc/errors.hpp"
#include "lcc/text.hpp"

namespace lcc {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kCorrFormat = "corr/1";

}  // namespace

std::optional<std::size_t> match_camera_frame(
    double t_lidar, std::span<const CameraFrameRef> frames, double max_skew) {
  if (frames.empty()) {
    return std::nullopt;
  }
  const auto it = std::lower_bound(
      frames.begin(), frames.end(), t_lidar,
      [](const CameraFrameRef& f, double t) { return f.timestamp < t; });

  std::size_t best = 0;
  if (it == frames.end()) {
    best = frames.size() - 1;
  } else if (it == frames.begin()) {
    best = 0;
  } else {
    const std::size_t after = static_cast<std::size_t>(it - frames.begin());
    const std::size_t before = after - 1;
    const double d_before = std::abs(t_lidar - frames[before].timestamp);
    const double d_after = std::abs(frames[after].timestamp - t_lidar);
    best = d_after < d_before ? after : before;
  }
  if (std::abs(frames[best].timestamp - t_lidar) > max_skew) {
    return std::nullopt;
  }
  return best;
}

CorrespondenceKey key_of(const Correspondence& c) {
  return {c.lidar_timestamp, c.camera_frame_id};
}

std::string to_string(const CorrespondenceKey& key) {
  return key.camera_frame_id + "@" + format_double(key.lidar_timestamp);
}

CorrespondenceKey parse_correspondence_key(const std::string& text) {
  const auto at = text.rfind('@');
  if (at == std::string::npos) {
    throw std::invalid_argument("correspondence key lacks '@': " + text);
  }
  const auto t = parse_double(std::string_view(text).substr(at + 1));
  if (!t) {
    throw std::invalid_argument("correspondence key has a bad timestamp: " +
                                text);
  }
  return {*t, text.substr(0, at)};
}

bool CorrespondenceSet::contains(const CorrespondenceKey& key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Correspondence& c) { return key_of(c) == key; });
}

void CorrespondenceSet::add(Correspondence c) {
  if (contains(key_of(c))) {
    throw DuplicateAnnotation("duplicate annotation " + to_string(key_of(c)));
  }
  entries_.push_back(std::move(c));
}

const Correspondence& CorrespondenceSet::add_annotation(
    const VertexDetection& detection, const CameraFrameRef& frame,
    const Pixel& pixel, double max_skew) {
  if (!std::isfinite(pixel.i) || !std::isfinite(pixel.j)) {
    throw std::invalid_argument("annotation pixel must be finite");
  }
  const double skew = std::abs(detection.frame_timestamp - frame.timestamp);
  if (skew > max_skew) {
    throw SkewExceeded("camera frame " + frame.id + " is " +
                       format_double(skew) + " s from the LiDAR frame");
  }
  add({detection.vertex, pixel, detection.frame_timestamp, frame.timestamp,
       frame.id});
  return entries_.back();
}

bool CorrespondenceSet::remove(const CorrespondenceKey& key) {
  const auto it =
      std::find_if(entries_.begin(), entries_.end(),
                   [&](const Correspondence& c) { return key_of(c) == key; });
  if (it == entries_.end()) {
    return false;
  }
  entries_.erase(it);
  return true;
}

std::vector<PointPixelPair> CorrespondenceSet::pairs() const {
  std::vector<PointPixelPair> out;
  out.reserve(entries_.size());
  for (const auto& c : entries_) {
    out.push_back({c.lidar_point, c.pixel});
  }
  return out;
}

void write_correspondences(std::ostream& out, const CorrespondenceSet& set) {
  ordered_json header;
  header["format"] = kCorrFormat;
  header["recording"] = set.recording;
  header["devices"] = set.devices;
  out << header.dump() << '\n';
  for (const auto& c : set.entries()) {
    ordered_json rec;
    rec["lidar"] = {c.lidar_point.x, c.lidar_point.y, c.lidar_point.z};
    rec["pixel"] = {c.pixel.i, c.pixel.j};
    rec["t_lidar"] = c.lidar_timestamp;
    rec["t_camera"] = c.camera_timestamp;
    rec["frame_id"] = c.camera_frame_id;
    out << rec.dump() << '\n';
  }
}

namespace {

std::vector<double> number_array(const ordered_json& rec, const char* field,
                                 std::size_t expected,
                                 const std::string& source, std::size_t line) {
  if (!rec.contains(field)) {
    throw FormatError(source, line, std::string("missing field '") + field + "'");
  }
  const auto& arr = rec.at(field);
  if (!arr.is_array() || arr.size() != expected) {
    throw FormatError(source, line,
                      std::string("field '") + field + "' must be an array of " +
                          std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw FormatError(source, line,
                        std::string("field '") + field + "' holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

double number_field(const ordered_json& rec, const char* field,
                    const std::string& source, std::size_t line) {
  if (!rec.contains(field) || !rec.at(field).is_number()) {
    throw FormatError(source, line,
                      std::string("missing or non-numeric field '") + field + "'");
  }
  return rec.at(field).get<double>();
}

}  // namespace

CorrespondenceSet read_correspondences(std::istream& in,
                                       const std::string& source) {
  CorrespondenceSet set;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(source, line_no, std::string("not a record: ") + e.what());
    }
    if (!rec.is_object()) {
      throw FormatError(source, line_no, "record is not an object");
    }
    if (!have_header) {
      if (rec.value("format", std::string()) != kCorrFormat) {
        throw FormatError(source, line_no,
                          std::string("expected header with format ") + kCorrFormat);
      }
      set.recording = rec.value("recording", std::string());
      if (rec.contains("devices")) {
        set.devices = rec.at("devices").get<std::vector<std::string>>();
      }
      have_header = true;
      continue;
    }
    const auto p = number_array(rec, "lidar", 3, source, line_no);
    const auto px = number_array(rec, "pixel", 2, source, line_no);
    Correspondence c;
    c.lidar_point = {p[0], p[1], p[2]};
    c.pixel = {px[0], px[1]};
    c.lidar_timestamp = number_field(rec, "t_lidar", source, line_no);
    c.camera_timestamp = number_field(rec, "t_camera", source, line_no);
    if (!rec.contains("frame_id") || !rec.at("frame_id").is_string()) {
      throw FormatError(source, line_no, "missing field 'frame_id'");
    }
    c.camera_frame_id = rec.at("frame_id").get<std::string>();
    try {
      set.add(std::move(c));
    } catch (const DuplicateAnnotation& e) {
      throw FormatError(source, line_no, e.what());
    }
  }
  if (!have_header) {
    throw FormatError(source, line_no == 0 ? 1 : line_no, "missing corr/1 header");
  }
  return set;
}

void save_correspondences(const std::filesystem::path& path,
                          const CorrespondenceSet& set) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    write_correspondences(out, set);
    out.flush();
    if (!out) {
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot replace " + path.string() + ": " + ec.message());
  }
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return read_correspondences(in, path.string());
}

std::pair<CorrespondenceSet, CorrespondenceSet> split(
    const CorrespondenceSet& set, double fraction, std::uint64_t seed) {
  if (set.size() < 2) {
    throw TooFew("split needs at least 2 correspondences");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
  const std::size_t n = set.size();
  const auto n_train = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * fraction)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  CorrespondenceSet train;
  CorrespondenceSet test;
  for (auto* part : {&train, &test}) {
    part->recording = set.recording;
    part->devices = set.devices;
  }
  for (std::size_t k = 0; k < n; ++k) {
    (k < n_train ? train : test).add(set.entries()[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace lcc
