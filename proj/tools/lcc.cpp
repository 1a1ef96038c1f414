#include <csignal>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lcc/commands.hpp"
#include "lcc/errors.hpp"
#include "lcc/service.hpp"
#include "lcc/text.hpp"

namespace {

lcc::HttpService* active_service = nullptr;

void handle_signal(int) {
  if (active_service) {
    active_service->stop();
  }
}

void add_ga_flags(CLI::App* cmd, lcc::GaConfig& ga) {
  cmd->add_option("--slots", ga.slots, "GA runs per iteration")->check(CLI::PositiveNumber);
  cmd->add_option("--population", ga.population, "Individuals per GA run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--generations", ga.generations, "Generations per GA run")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--bound-scale", ga.bound_scale, "Search box shrink factor per iteration");
  cmd->add_option("--max-iterations", ga.max_iterations, "Cap on outer iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", ga.workers, "Threads running GA slots")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR to camera calibration toolbox"};
  app.require_subcommand(1);

  std::string roi_text;

  lcc::DetectOptions detect;
  auto* cmd_detect = app.add_subcommand("detect", "Find board vertices in point clouds");
  cmd_detect->add_option("--clouds", detect.clouds, "Directory of point-cloud files")
      ->required();
  cmd_detect->add_option("--roi", roi_text, "x0,x1,y0,y1,z0,z1 in meters")->required();
  cmd_detect->add_option("--out", detect.out, "Detections file to write")->required();
  cmd_detect->add_flag("-v,--verbose", detect.verbose, "Print why frames were dropped");

  lcc::SolveOptions solve;
  std::string solve_model = "pinhole";
  std::string solve_bounds;
  auto* cmd_solve = app.add_subcommand("solve", "Fit a calibration to correspondences");
  cmd_solve->add_option("--corr", solve.corr, "Correspondence file")->required();
  cmd_solve->add_option("--model", solve_model, "pinhole or fisheye")
      ->check(CLI::IsMember({"pinhole", "fisheye"}));
  cmd_solve->add_option("--bounds", solve_bounds, "Search bounds file");
  cmd_solve->add_option("--seed", solve.ga.seed, "Random seed");
  cmd_solve->add_option("--out", solve.out, "Calibration file to write")->required();
  add_ga_flags(cmd_solve, solve.ga);

  lcc::ValidateOptions validate;
  auto* cmd_validate =
      app.add_subcommand("validate", "Score a calibration on held-out correspondences");
  cmd_validate->add_option("--corr", validate.corr, "Correspondence file")->required();
  cmd_validate->add_option("--calib", validate.calib, "Calibration file")->required();
  cmd_validate->add_option("--bins", validate.bins, "Angle bins")
      ->check(CLI::PositiveNumber);
  cmd_validate->add_option("--out", validate.out, "Report file to write")->required();

  lcc::ProjectOptions project;
  std::string project_size = "1024x1280";
  auto* cmd_project = app.add_subcommand("project", "Project a point cloud into the image");
  cmd_project->add_option("--cloud", project.cloud, "Point-cloud file")->required();
  cmd_project->add_option("--calib", project.calib, "Calibration file")->required();
  cmd_project->add_option("--out", project.out, "CSV file to write")->required();
  cmd_project->add_option("--image-size", project_size, "Sensor size ROWSxCOLS");

  lcc::SynthOptions synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic recording");
  cmd_synth->add_option("--config", synth.config, "Scene configuration (JSON)")->required();
  cmd_synth->add_option("--out", synth.out, "Output directory")->required();
  cmd_synth->add_option("--seed", synth.seed, "Random seed");

  lcc::SessionConfig serve;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_size = "1024x1280";
  auto* cmd_serve = app.add_subcommand("serve", "Run the annotation service");
  cmd_serve->add_option("--clouds", serve.clouds, "Directory of point-cloud files")
      ->required();
  cmd_serve->add_option("--images", serve.images, "Image directory")->required();
  cmd_serve->add_option("--manifest", serve.manifest, "Image manifest")->required();
  cmd_serve->add_option("--roi", roi_text, "x0,x1,y0,y1,z0,z1 in meters")->required();
  cmd_serve->add_option("--port", serve_port, "TCP port")->check(CLI::Range(0, 65535));
  cmd_serve->add_option("--host", serve_host, "Listen address");
  cmd_serve->add_option("--out", serve.out, "Correspondence file (resumed if present)")
      ->required();
  cmd_serve->add_option("--image-size", serve_size, "Sensor size ROWSxCOLS");
  cmd_serve->add_option("--max-skew", serve.max_skew, "LiDAR/camera skew limit (s)");
  cmd_serve->add_option("--workers", serve.solve_workers, "Threads running GA slots")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_detect->parsed()) {
      detect.roi = lcc::parse_roi(roi_text);
      const auto s = lcc::cmd_detect(detect, std::cerr);
      std::cout << s.detections << " detections in " << s.frames << " frames\n";
    } else if (cmd_solve->parsed()) {
      solve.model = lcc::parse_camera_kind(solve_model);
      if (!solve_bounds.empty()) {
        solve.bounds = solve_bounds;
      }
      const auto r = lcc::cmd_solve(solve);
      std::cout << "train error " << lcc::format_double(r.train_error_px) << " px over "
                << r.correspondence_count << " correspondences\n";
    } else if (cmd_validate->parsed()) {
      const auto r = lcc::cmd_validate(validate);
      std::cout << "mean error " << lcc::format_double(r.mean_error_px) << " px over "
                << r.count << " correspondences\n";
    } else if (cmd_project->parsed()) {
      project.image = lcc::parse_image_size(project_size);
      const auto visible = lcc::cmd_project(project);
      std::cout << visible << " visible points\n";
    } else if (cmd_synth->parsed()) {
      const auto s = lcc::cmd_synth(synth);
      std::cout << s.frames << " LiDAR frames, " << s.camera_frames
                << " camera frames, " << s.ledger << " vertices\n";
    } else if (cmd_serve->parsed()) {
      serve.roi = lcc::parse_roi(roi_text);
      serve.image = lcc::parse_image_size(serve_size);
      lcc::Session session(serve);
      lcc::HttpService service(session);
      const int port = service.bind(serve_host, serve_port);
      std::cout << "listening on http://" << serve_host << ":" << port << std::endl;
      active_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      service.run();
      active_service = nullptr;
      session.wait_for_solve();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
