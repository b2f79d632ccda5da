// stixsim: deterministic simulator of stimulated (stiX) and relaxation (reX)
// photon generation in a quantum-dot cavity system, with sweep and
// measurement-analysis subcommands. All outputs are CSV/JSON.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stix/dynamics.hpp"
#include "stix/io.hpp"
#include "stix/sweeps.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string scheme;
  std::string preset;
  int jobs = 0;
  int n_max = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--scheme", o.scheme, "rex or stix")
      ->check(CLI::IsMember({"rex", "stix"}));
  cmd->add_option("--preset", o.preset, "table1 or experiment")
      ->check(CLI::IsMember({"table1", "experiment"}));
  cmd->add_option("--jobs", o.jobs, "worker threads for sweeps");
  cmd->add_option("--n-max", o.n_max, "Fock cutoff per mode");
}

stix::RunConfig resolve_config(const CommonOpts& o) {
  stix::RunConfig cfg;
  if (!o.config_path.empty()) {
    cfg = stix::load_run_config(o.config_path);
  }
  if (!o.preset.empty()) {
    cfg.system = (o.preset == "experiment") ? stix::SystemParams::experiment()
                                            : stix::SystemParams::table1();
  }
  if (!o.scheme.empty()) cfg.scheme = o.scheme;
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (o.n_max > 0) cfg.system.n_max = o.n_max;
  cfg.validate();
  return cfg;
}

std::string out_path(const CommonOpts& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

void write_json_file(const json& j, const std::string& path) {
  stix::write_text_file(path, j.dump(2) + "\n");
}

json base_report(const stix::RunConfig& cfg) {
  json j;
  j["schema_version"] = stix::kSchemaVersion;
  j["config"] = stix::run_config_to_json(cfg);
  return j;
}

int cmd_simulate(const CommonOpts& o) {
  const stix::RunConfig cfg = resolve_config(o);
  stix::PulseParams tpe = stix::PulseParams::tpe(cfg.tpe_area_rad, cfg.system);
  std::optional<stix::PulseParams> stim;
  if (cfg.scheme == "stix")
    stim = stix::PulseParams::stim(cfg.stim_area_rad, cfg.system);

  stix::TrajectoryRecord traj;
  stix::IntegratedMetrics metrics;
  if (cfg.mode == "qd_only") {
    traj = stix::evolve_qd_only(cfg.system, tpe, stim, cfg.integration);
    const stix::TailClosure closure(
        stix::Generator::qd_only(cfg.system, tpe, stim));
    metrics = stix::integrated_metrics(traj, cfg.system, &closure);
  } else {
    traj = stix::evolve(cfg.system, tpe, stim, cfg.integration);
    const stix::HilbertSpace space(cfg.system.n_max);
    const stix::TailClosure closure(
        stix::Generator::full_model(space, cfg.system, tpe, stim));
    metrics = stix::integrated_metrics(traj, cfg.system, &closure);
  }

  stix::write_trajectory_csv(traj, out_path(o, "trajectory.csv"));
  json summary = base_report(cfg);
  summary["scheme"] = cfg.scheme;
  summary["metrics"] = stix::metrics_to_json(metrics);
  summary["max_trace_error"] = traj.max_trace_error;
  summary["max_hermiticity_error"] = traj.max_hermiticity_error;
  summary["t_final_ps"] = traj.t_final;
  summary["early_stopped"] = traj.early_stopped;
  write_json_file(summary, out_path(o, "summary.json"));
  return 0;
}

int cmd_calibrate(const CommonOpts& o) {
  const stix::RunConfig cfg = resolve_config(o);
  const stix::CalibrationInfo cal =
      stix::calibrate_pi(cfg.system, cfg.integration);
  json report = base_report(cfg);
  report["calibration"] = stix::calibration_to_json(cal);
  write_json_file(report, out_path(o, "calibration.json"));
  std::cout << "pi_area_rad " << stix::format_double(cal.pi_area)
            << "\nhalf_pi_area_rad " << stix::format_double(cal.half_pi_area)
            << "\n";
  return 0;
}

void write_sweep_outputs(const stix::SweepResult& result,
                         const stix::RunConfig& cfg, const CommonOpts& o,
                         const std::string& stem, bool gnuplot) {
  stix::write_sweep_csv(result, out_path(o, stem + ".csv"));
  json sidecar = base_report(cfg);
  sidecar["calibration"] = stix::calibration_to_json(result.calibration);
  sidecar["scheme"] = result.scheme;
  sidecar["axis1"] = result.axis1_name;
  if (!result.axis2.empty()) sidecar["axis2"] = result.axis2_name;
  write_json_file(sidecar, out_path(o, stem + ".json"));
  if (gnuplot) {
    std::string gp = "set datafile separator ','\nset key autotitle columnhead\n"
                     "plot '" + stem + ".csv' using 1:4 with lines, "
                     "'' using 1:5 with lines\n";
    stix::write_text_file(out_path(o, stem + ".gp"), gp);
  }
}

int cmd_sweep_area(const CommonOpts& o, bool gnuplot) {
  const stix::RunConfig cfg = resolve_config(o);
  const stix::CalibrationInfo cal =
      stix::calibrate_pi(cfg.system, cfg.integration);
  const stix::Scheme scheme =
      cfg.scheme == "stix" ? stix::Scheme::stiX : stix::Scheme::reX;
  const stix::SweepResult result =
      stix::sweep_tpe_area(cfg.system, cfg.area_grid.values(), scheme, cal,
                           cfg.integration, cfg.jobs);
  write_sweep_outputs(result, cfg, o, "sweep_area", gnuplot);
  return 0;
}

int cmd_sweep_delay(const CommonOpts& o, bool gnuplot) {
  const stix::RunConfig cfg = resolve_config(o);
  const stix::SweepMode mode =
      cfg.mode == "qd_only" ? stix::SweepMode::QdOnly : stix::SweepMode::Full;
  const stix::SweepResult result =
      stix::sweep_delay(cfg.system, cfg.delay_grid.values(), cfg.tpe_area_rad,
                        mode, cfg.integration, cfg.jobs);
  write_sweep_outputs(result, cfg, o, "sweep_delay", gnuplot);
  return 0;
}

int cmd_map(const CommonOpts& o, const std::string& field) {
  const stix::RunConfig cfg = resolve_config(o);
  const stix::CalibrationInfo cal =
      stix::calibrate_pi(cfg.system, cfg.integration);
  const stix::SweepMode mode =
      cfg.mode == "qd_only" ? stix::SweepMode::QdOnly : stix::SweepMode::Full;
  const stix::SweepResult result = stix::map_area_delay(
      cfg.system, cfg.area_grid.values(), cfg.delay_grid.values(), mode, cal,
      cfg.integration, cfg.jobs);
  write_sweep_outputs(result, cfg, o, "map", false);
  stix::write_map_matrix_csv(result, field,
                             out_path(o, "map_matrix_" + field + ".csv"));
  return 0;
}

int analyze_visibility(const std::string& input, const std::string& out_dir) {
  const stix::DetectorTrace trace = stix::read_detector_trace_csv(input);
  const stix::VisibilityResult v = stix::visibility_from_trace(trace);
  json report{{"schema_version", stix::kSchemaVersion},
              {"input", input},
              {"v1", v.v1},
              {"v2", v.v2},
              {"v_mean", v.v_mean},
              {"raw_v1", v.raw_v1},
              {"raw_v2", v.raw_v2}};
  write_json_file(report, (fs::path(out_dir) / "visibility.json").string());
  std::cout << "v_mean " << stix::format_double(v.v_mean) << "\n";
  return 0;
}

int analyze_lambda(const std::string& input, double v_hom,
                   const std::string& out_dir) {
  auto cols = stix::read_csv_columns(input, 2);
  std::vector<std::pair<double, double>> points;
  for (size_t i = 0; i < cols[0].size(); ++i)
    points.emplace_back(cols[0][i], cols[1][i]);
  const stix::LambdaFit fit = stix::fit_lambda(points, v_hom);
  json report{{"schema_version", stix::kSchemaVersion},
              {"input", input},
              {"v_hom", v_hom},
              {"lambda", fit.lambda},
              {"v0", fit.v0},
              {"slope", fit.slope},
              {"residual_rms", fit.residual_rms},
              {"clamped", fit.clamped}};
  write_json_file(report, (fs::path(out_dir) / "lambda.json").string());
  std::cout << "lambda " << stix::format_double(fit.lambda) << "\n";
  return 0;
}

int analyze_blinking(const std::string& input, const std::string& out_dir) {
  const stix::CoincidenceHistogram hist = stix::read_histogram_csv(input);
  const stix::BlinkingFit fit = stix::fit_blinking(hist);
  json report{{"schema_version", stix::kSchemaVersion},
              {"input", input},
              {"a", fit.a},
              {"b", fit.b},
              {"tau_blinking_ms", fit.tau_blinking_ms},
              {"g2_lt_zero", fit.g2_lt_zero},
              {"qe", fit.qe},
              {"rms", fit.rms}};
  // 1-sigma uncertainties from the fit covariance diagonal.
  if (fit.covariance.rows() == 3)
    report["sigma"] = {{"a", std::sqrt(std::max(0.0, fit.covariance(0, 0)))},
                       {"b", std::sqrt(std::max(0.0, fit.covariance(1, 1)))},
                       {"tau_blinking_ms",
                        std::sqrt(std::max(0.0, fit.covariance(2, 2)))}};
  write_json_file(report, (fs::path(out_dir) / "blinking.json").string());
  std::cout << "qe " << stix::format_double(fit.qe) << "\n";
  return 0;
}

int analyze_g2(const std::string& input, const std::string& orthogonal,
               double spacing, double window, const std::string& out_dir) {
  const stix::CoincidenceHistogram hist = stix::read_histogram_csv(input);
  const stix::CoincidencePeaks peaks =
      stix::fit_coincidence_peaks(hist, spacing, window);
  json report{{"schema_version", stix::kSchemaVersion},
              {"input", input},
              {"center_area", peaks.center_area},
              {"side_area_mean", peaks.side_area_mean},
              {"ratio", peaks.ratio}};
  json peak_list = json::array();
  auto peak_json = [](const stix::PeakFit& p) {
    return json{{"amplitude", p.amplitude},
                {"center_ns", p.center_ns},
                {"sigma_ns", p.sigma_ns},
                {"area", p.area},
                {"ok", p.ok}};
  };
  peak_list.push_back(peak_json(peaks.center));
  for (const auto& p : peaks.side) peak_list.push_back(peak_json(p));
  report["peaks"] = peak_list;
  if (!orthogonal.empty()) {
    const stix::CoincidenceHistogram orth = stix::read_histogram_csv(orthogonal);
    const stix::CoincidencePeaks operks =
        stix::fit_coincidence_peaks(orth, spacing, window);
    report["orthogonal_ratio"] = operks.ratio;
    report["hom_visibility"] = stix::hom_visibility(peaks.ratio, operks.ratio);
  }
  write_json_file(report, (fs::path(out_dir) / "g2.json").string());
  std::cout << "ratio " << stix::format_double(peaks.ratio) << "\n";
  return 0;
}

int analyze_jones(double theta, const std::string& out_dir) {
  const Eigen::Matrix2cd j = stix::phase_shifter_jones(theta);
  json m = json::array();
  for (int r = 0; r < 2; ++r) {
    json row = json::array();
    for (int c = 0; c < 2; ++c)
      row.push_back({j(r, c).real(), j(r, c).imag()});
    m.push_back(row);
  }
  json report{{"schema_version", stix::kSchemaVersion},
              {"theta_rad", theta},
              {"matrix_re_im", m}};
  write_json_file(report, (fs::path(out_dir) / "jones.json").string());
  std::cout << report["matrix_re_im"].dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stiX/reX quantum-dot photon generation simulator"};
  app.require_subcommand(1);

  CommonOpts sim_o, cal_o, area_o, delay_o, map_o;
  bool area_gnuplot = false, delay_gnuplot = false;
  std::string map_field = "occ_calc";

  add_common(app.add_subcommand("simulate", "single run, trajectory + summary"),
             sim_o);
  add_common(app.add_subcommand("calibrate", "pulse-area calibration"), cal_o);
  CLI::App* sweep_area =
      app.add_subcommand("sweep-area", "TPE-area sweep (Fig. 3 style)");
  add_common(sweep_area, area_o);
  sweep_area->add_flag("--gnuplot", area_gnuplot, "emit a gnuplot script");
  CLI::App* sweep_delay =
      app.add_subcommand("sweep-delay", "stim-delay sweep at fixed area");
  add_common(sweep_delay, delay_o);
  sweep_delay->add_flag("--gnuplot", delay_gnuplot, "emit a gnuplot script");
  CLI::App* map_cmd = app.add_subcommand("map", "2D delay x area map");
  add_common(map_cmd, map_o);
  map_cmd->add_option("--field", map_field, "metric for the dense matrix file");

  CLI::App* analyze = app.add_subcommand("analyze", "measurement analysis");
  analyze->require_subcommand(1);
  std::string an_input, an_orth, an_out = ".";
  double an_vhom = 1.0, an_spacing = 12.5, an_window = 6.0, an_theta = 0.0;
  CLI::App* an_vis = analyze->add_subcommand("visibility", "MZI visibility");
  an_vis->add_option("--input", an_input)->required();
  an_vis->add_option("--out", an_out);
  CLI::App* an_lambda = analyze->add_subcommand("lambda", "purity-fraction fit");
  an_lambda->add_option("--input", an_input)->required();
  an_lambda->add_option("--v-hom", an_vhom, "HOM visibility");
  an_lambda->add_option("--out", an_out);
  CLI::App* an_blink = analyze->add_subcommand("blinking", "blinking / QE fit");
  an_blink->add_option("--input", an_input)->required();
  an_blink->add_option("--out", an_out);
  CLI::App* an_g2 = analyze->add_subcommand("g2", "coincidence-peak fit");
  an_g2->add_option("--input", an_input)->required();
  an_g2->add_option("--orthogonal", an_orth, "cross-polarized histogram (HOM)");
  an_g2->add_option("--spacing", an_spacing, "pulse spacing, ns");
  an_g2->add_option("--window", an_window, "fit window per peak, ns");
  an_g2->add_option("--out", an_out);
  CLI::App* an_jones = analyze->add_subcommand("jones", "phase-shifter matrix");
  an_jones->add_option("--theta", an_theta, "HWP angle, rad");
  an_jones->add_option("--out", an_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(sim_o);
    if (app.got_subcommand("calibrate")) return cmd_calibrate(cal_o);
    if (app.got_subcommand("sweep-area"))
      return cmd_sweep_area(area_o, area_gnuplot);
    if (app.got_subcommand("sweep-delay"))
      return cmd_sweep_delay(delay_o, delay_gnuplot);
    if (app.got_subcommand("map")) return cmd_map(map_o, map_field);
    if (app.got_subcommand("analyze")) {
      fs::create_directories(an_out);
      if (analyze->got_subcommand("visibility"))
        return analyze_visibility(an_input, an_out);
      if (analyze->got_subcommand("lambda"))
        return analyze_lambda(an_input, an_vhom, an_out);
      if (analyze->got_subcommand("blinking"))
        return analyze_blinking(an_input, an_out);
      if (analyze->got_subcommand("g2"))
        return analyze_g2(an_input, an_orth, an_spacing, an_window, an_out);
      if (analyze->got_subcommand("jones"))
        return analyze_jones(an_theta, an_out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
