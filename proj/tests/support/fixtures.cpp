#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lcc::testing {

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("lcc-test-" + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

synth::WalkSpec near_walk(std::size_t frames) {
  synth::WalkSpec walk;
  walk.frames = frames;
  walk.y_max = 12.0;
  return walk;
}

SolverFixture solver_fixture(CameraKind kind, std::size_t count,
                             double pixel_sigma, std::uint64_t seed) {
  SolverFixture fx;
  std::size_t frames = count * 40 + 100;
  while (true) {
    fx.walk = near_walk(frames);
    fx.scene = synth::reference_scene(kind, fx.walk, seed);
    fx.recording = synth::generate(fx.scene, seed + 1);
    if (fx.recording.ledger.size() >= count) {
      break;
    }
    frames = frames * 3 / 2;
  }
  fx.recording.ledger.resize(count);
  fx.correspondences =
      synth::make_correspondences(fx.recording, pixel_sigma, seed + 2);
  return fx;
}

double projection_gap(const std::vector<Point3>& points, const Calibration& cal,
                      const Calibration& truth) {
  double sum = 0.0;
  for (const auto& p : points) {
    const auto a = try_project(p, cal);
    const auto b = project(p, truth);
    sum += a ? std::hypot(a->i - b.i, a->j - b.j) : kBehindCameraPenaltyPx;
  }
  return sum / static_cast<double>(points.size());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lcc::testing
