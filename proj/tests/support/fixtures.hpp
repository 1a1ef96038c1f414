#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lcc/correspondence.hpp"
#include "lcc/ga_solver.hpp"
#include "lcc/projection.hpp"
#include "lcc/synthdata.hpp"

namespace lcc::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

/// Walk over the near field where every board pose yields detections often.
synth::WalkSpec near_walk(std::size_t frames);

struct SolverFixture {
  synth::SyntheticScene scene;
  synth::WalkSpec walk;
  synth::SyntheticRecording recording;
  CorrespondenceSet correspondences;  // exactly `count` entries, ledger order
};

/// Generates recordings of growing length until the ledger holds `count`
/// entries, then takes the first `count` with pixel noise `pixel_sigma`.
SolverFixture solver_fixture(CameraKind kind, std::size_t count,
                             double pixel_sigma, std::uint64_t seed);

/// Mean pixel distance between `cal` and `truth` over `points`.
double projection_gap(const std::vector<Point3>& points, const Calibration& cal,
                      const Calibration& truth);

std::string slurp(const std::filesystem::path& path);

}  // namespace lcc::testing
