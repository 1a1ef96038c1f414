#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcc/projection.hpp"
#include "lcc/vertex_detect.hpp"

namespace lcc {

inline constexpr double kDefaultMaxSkew = 0.05;  // seconds

struct CameraFrameRef {
  std::string id;
  double timestamp = 0.0;
  std::string image_path;

  friend bool operator==(const CameraFrameRef&,
                         const CameraFrameRef&) = default;
};

/// Index of the frame nearest to `t_lidar`, ties going to the earlier frame.
/// Empty when the nearest frame is more than `max_skew` away.
std::optional<std::size_t> match_camera_frame(
    double t_lidar, std::span<const CameraFrameRef> frames,
    double max_skew = kDefaultMaxSkew);

struct Correspondence {
  Point3 lidar_point;
  Pixel pixel;
  double lidar_timestamp = 0.0;
  double camera_timestamp = 0.0;
  std::string camera_frame_id;

  friend bool operator==(const Correspondence&,
                         const Correspondence&) = default;
};

/// Identity of a correspondence inside a set.
struct CorrespondenceKey {
  double lidar_timestamp = 0.0;
  std::string camera_frame_id;

  friend bool operator==(const CorrespondenceKey&,
                         const CorrespondenceKey&) = default;
  friend auto operator<=>(const CorrespondenceKey&,
                          const CorrespondenceKey&) = default;
};

CorrespondenceKey key_of(const Correspondence& c);

/// "<frame id>@<lidar timestamp>", the form used in service URLs.
std::string to_string(const CorrespondenceKey& key);
CorrespondenceKey parse_correspondence_key(const std::string& text);

class CorrespondenceSet {
 public:
  std::string recording;
  std::vector<std::string> devices;

  const std::vector<Correspondence>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const CorrespondenceKey& key) const;

  /// Appends `c`. Throws DuplicateAnnotation if its key is already present.
  void add(Correspondence c);

  /// Pairs the detected vertex with the annotated pixel on `frame`.
  /// Throws SkewExceeded, DuplicateAnnotation, or std::invalid_argument for a
  /// non-finite pixel.
  const Correspondence& add_annotation(const VertexDetection& detection,
                                       const CameraFrameRef& frame,
                                       const Pixel& pixel,
                                       double max_skew = kDefaultMaxSkew);

  /// Returns false when no entry has this key.
  bool remove(const CorrespondenceKey& key);

  std::vector<PointPixelPair> pairs() const;

  friend bool operator==(const CorrespondenceSet&,
                         const CorrespondenceSet&) = default;

 private:
  std::vector<Correspondence> entries_;
};

/// Text form: a "corr/1" header line, then one record per line.
void write_correspondences(std::ostream& out, const CorrespondenceSet& set);
CorrespondenceSet read_correspondences(std::istream& in,
                                       const std::string& source = "<stream>");

void save_correspondences(const std::filesystem::path& path,
                          const CorrespondenceSet& set);
CorrespondenceSet load_correspondences(const std::filesystem::path& path);

/// Seeded partition: ceil(n * fraction) entries for training, the rest for
/// testing; both keep the input order. Throws TooFew when n < 2.
std::pair<CorrespondenceSet, CorrespondenceSet> split(
    const CorrespondenceSet& set, double fraction, std::uint64_t seed);

}  // namespace lcc
