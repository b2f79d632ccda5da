#include "stix/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stix {

namespace {

using nlohmann::json;

double series_at(const std::vector<double>& v, size_t i) {
  return i < v.size() ? v[i] : 0.0;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(scope + ": unknown field '" + it.key() + "'");
  }
}

double get_number(const json& j, const std::string& key, double fallback,
                  const std::string& scope) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw std::invalid_argument(scope + "." + key + ": expected a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, int fallback,
            const std::string& scope) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw std::invalid_argument(scope + "." + key + ": expected an integer");
  return j[key].get<int>();
}

std::string get_string(const json& j, const std::string& key,
                       const std::string& fallback, const std::string& scope) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw std::invalid_argument(scope + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

bool get_bool(const json& j, const std::string& key, bool fallback,
              const std::string& scope) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean())
    throw std::invalid_argument(scope + "." + key + ": expected a boolean");
  return j[key].get<bool>();
}

GridSpec grid_from_json(const json& j, const std::string& min_key,
                        const std::string& max_key, GridSpec fallback,
                        const std::string& scope) {
  reject_unknown_keys(j, {min_key, max_key, "points"}, scope);
  GridSpec g = fallback;
  g.min = get_number(j, min_key, fallback.min, scope);
  g.max = get_number(j, max_key, fallback.max, scope);
  g.points = get_int(j, "points", fallback.points, scope);
  return g;
}

}  // namespace

std::vector<double> GridSpec::values() const { return linspace(min, max, points); }

void RunConfig::validate() const {
  system.validate();
  if (scheme != "stix" && scheme != "rex")
    throw std::invalid_argument("scheme: must be 'stix' or 'rex'");
  if (mode != "full" && mode != "qd_only")
    throw std::invalid_argument("mode: must be 'full' or 'qd_only'");
  if (tpe_area_rad < 0)
    throw std::invalid_argument("tpe_area_rad: must be >= 0");
  if (stim_area_rad < 0)
    throw std::invalid_argument("stim_area_rad: must be >= 0");
  if (jobs < 1) throw std::invalid_argument("jobs: must be >= 1");
  for (const auto& [g, name] :
       {std::pair<const GridSpec&, const char*>{area_grid, "area_grid"},
        std::pair<const GridSpec&, const char*>{delay_grid, "delay_grid"}}) {
    if (g.points < 1)
      throw std::invalid_argument(std::string(name) + ".points: must be >= 1");
    if (g.points > 1 && g.max <= g.min)
      throw std::invalid_argument(std::string(name) + ": max must exceed min");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trajectory_csv(const TrajectoryRecord& traj,
                          const std::string& path) {
  std::ostringstream out;
  out << "t_ps,pop_g,pop_xH,pop_xV,pop_xx,ph_p00,ph_p11,ph_pnn,pnc_abs,"
         "flux_H,coh_gxH\n";
  for (size_t i = 0; i < traj.times.size(); ++i) {
    out << format_double(traj.times[i]) << ','
        << format_double(series_at(traj.pop_g, i)) << ','
        << format_double(series_at(traj.pop_xh, i)) << ','
        << format_double(series_at(traj.pop_xv, i)) << ','
        << format_double(series_at(traj.pop_xx, i)) << ','
        << format_double(series_at(traj.ph_p00, i)) << ','
        << format_double(series_at(traj.ph_p11, i)) << ','
        << format_double(series_at(traj.ph_pnn, i)) << ','
        << format_double(series_at(traj.pnc_instant, i)) << ','
        << format_double(series_at(traj.flux_h, i)) << ','
        << format_double(series_at(traj.coh_gxh, i)) << '\n';
  }
  write_text_file(path, out.str());
}

double sweep_field(const SweepRow& row, const std::string& field) {
  if (field == "occ_calc") return row.metrics.occ_calc;
  if (field == "pnc_calc") return row.metrics.pnc_calc;
  if (field == "v_calc") return row.metrics.v_calc;
  if (field == "xx_peak") return row.xx_peak;
  if (field == "xh_yield_qdonly") return row.metrics.xh_yield_qdonly;
  if (field == "pnc_qdonly") return row.metrics.pnc_qdonly;
  throw std::invalid_argument("sweep field '" + field + "' unknown");
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  const bool two_d = !result.axis2.empty();
  std::ostringstream out;
  out << result.axis1_name;
  if (two_d) out << ',' << result.axis2_name;
  out << ",area_rad,occ_calc,pnc_calc,v_calc,xx_peak,xh_yield_qdonly,"
         "pnc_qdonly\n";
  const size_t n2 = two_d ? result.axis2.size() : 1;
  for (size_t k = 0; k < result.rows.size(); ++k) {
    const SweepRow& row = result.rows[k];
    if (two_d)
      out << format_double(result.axis1[k / n2]) << ','
          << format_double(result.axis2[k % n2]);
    else
      out << format_double(result.axis1[k]);
    out << ',' << format_double(series_at(result.area_rad, k)) << ','
        << format_double(row.metrics.occ_calc) << ','
        << format_double(row.metrics.pnc_calc) << ','
        << format_double(row.metrics.v_calc) << ','
        << format_double(row.xx_peak) << ','
        << format_double(row.metrics.xh_yield_qdonly) << ','
        << format_double(row.metrics.pnc_qdonly) << '\n';
  }
  write_text_file(path, out.str());
}

void write_map_matrix_csv(const SweepResult& result, const std::string& field,
                          const std::string& path) {
  if (result.axis2.empty())
    throw std::invalid_argument("write_map_matrix_csv: result is not 2D");
  std::ostringstream out;
  out << result.axis1_name << '\\' << result.axis2_name;
  for (double a : result.axis2) out << ',' << format_double(a);
  out << '\n';
  const size_t n2 = result.axis2.size();
  for (size_t i = 0; i < result.axis1.size(); ++i) {
    out << format_double(result.axis1[i]);
    for (size_t j = 0; j < n2; ++j)
      out << ',' << format_double(sweep_field(result.rows[i * n2 + j], field));
    out << '\n';
  }
  write_text_file(path, out.str());
}

nlohmann::json system_params_to_json(const SystemParams& p) {
  return json{{"delta_cx_mev", p.delta_cx_mev},
              {"delta_xl_mev", p.delta_xl_mev},
              {"delta_stim_mev", p.delta_stim_mev},
              {"e_b_mev", p.e_b_mev},
              {"g_mev", p.g_mev},
              {"kappa_per_ps", p.kappa_per_ps},
              {"gamma_per_ps", p.gamma_per_ps},
              {"fwhm_tpe_ps", p.fwhm_tpe_ps},
              {"fwhm_stim_ps", p.fwhm_stim_ps},
              {"delay_ps", p.delay_ps},
              {"temperature_k", p.temperature_k},
              {"n_max", p.n_max},
              {"dephasing_per_ps", p.dephasing_per_ps},
              {"resonant_tpe", p.resonant_tpe}};
}

SystemParams system_params_from_json(const nlohmann::json& j) {
  const std::string scope = "system";
  reject_unknown_keys(
      j,
      {"delta_cx_mev", "delta_xl_mev", "delta_stim_mev", "e_b_mev", "g_mev",
       "kappa_per_ps", "gamma_per_ps", "fwhm_tpe_ps", "fwhm_stim_ps",
       "delay_ps", "temperature_k", "n_max", "dephasing_per_ps",
       "resonant_tpe"},
      scope);
  SystemParams p;
  p.delta_cx_mev = get_number(j, "delta_cx_mev", p.delta_cx_mev, scope);
  p.delta_xl_mev = get_number(j, "delta_xl_mev", p.delta_xl_mev, scope);
  p.delta_stim_mev = get_number(j, "delta_stim_mev", p.delta_stim_mev, scope);
  p.e_b_mev = get_number(j, "e_b_mev", p.e_b_mev, scope);
  p.g_mev = get_number(j, "g_mev", p.g_mev, scope);
  p.kappa_per_ps = get_number(j, "kappa_per_ps", p.kappa_per_ps, scope);
  p.gamma_per_ps = get_number(j, "gamma_per_ps", p.gamma_per_ps, scope);
  p.fwhm_tpe_ps = get_number(j, "fwhm_tpe_ps", p.fwhm_tpe_ps, scope);
  p.fwhm_stim_ps = get_number(j, "fwhm_stim_ps", p.fwhm_stim_ps, scope);
  p.delay_ps = get_number(j, "delay_ps", p.delay_ps, scope);
  p.temperature_k = get_number(j, "temperature_k", p.temperature_k, scope);
  p.n_max = get_int(j, "n_max", p.n_max, scope);
  p.dephasing_per_ps = get_number(j, "dephasing_per_ps", p.dephasing_per_ps, scope);
  p.resonant_tpe = get_bool(j, "resonant_tpe", p.resonant_tpe, scope);
  return p;
}

nlohmann::json calibration_to_json(const CalibrationInfo& c) {
  return json{{"pi_area_rad", c.pi_area}, {"half_pi_area_rad", c.half_pi_area}};
}

nlohmann::json metrics_to_json(const IntegratedMetrics& m) {
  return json{{"occ_calc", m.occ_calc},
              {"pnc_calc", m.pnc_calc},
              {"v_calc", m.v_calc},
              {"xh_yield_qdonly", m.xh_yield_qdonly},
              {"pnc_qdonly", m.pnc_qdonly},
              {"v_guarded", m.v_guarded}};
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  return json{
      {"schema_version", kSchemaVersion},
      {"system", system_params_to_json(c.system)},
      {"scheme", c.scheme},
      {"mode", c.mode},
      {"tpe_area_rad", c.tpe_area_rad},
      {"stim_area_rad", c.stim_area_rad},
      {"area_grid",
       {{"min_pi", c.area_grid.min},
        {"max_pi", c.area_grid.max},
        {"points", c.area_grid.points}}},
      {"delay_grid",
       {{"min_ps", c.delay_grid.min},
        {"max_ps", c.delay_grid.max},
        {"points", c.delay_grid.points}}},
      {"jobs", c.jobs},
      {"integration",
       {{"dt_pulse_ps", c.integration.dt_pulse_ps},
        {"dt_free_ps", c.integration.dt_free_ps},
        {"tail_window_ps", c.integration.tail_window_ps}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");
  reject_unknown_keys(j,
                      {"schema_version", "preset", "system", "scheme", "mode",
                       "tpe_area_rad", "stim_area_rad", "area_grid",
                       "delay_grid", "jobs", "integration"},
                      "config");
  if (j.contains("schema_version")) check_schema_version(j);

  RunConfig c;
  const std::string preset = get_string(j, "preset", "", "config");
  if (preset == "table1")
    c.system = SystemParams::table1();
  else if (preset == "experiment")
    c.system = SystemParams::experiment();
  else if (!preset.empty())
    throw std::invalid_argument(
        "config.preset: unknown preset '" + preset + "'");

  if (j.contains("system")) {
    if (!j["system"].is_object())
      throw std::invalid_argument("config.system: expected an object");
    // Preset supplies defaults; explicit system keys override them.
    json merged = system_params_to_json(c.system);
    for (auto it = j["system"].begin(); it != j["system"].end(); ++it)
      merged[it.key()] = it.value();
    c.system = system_params_from_json(merged);
  }
  c.scheme = get_string(j, "scheme", c.scheme, "config");
  c.mode = get_string(j, "mode", c.mode, "config");
  c.tpe_area_rad = get_number(j, "tpe_area_rad", c.tpe_area_rad, "config");
  c.stim_area_rad = get_number(j, "stim_area_rad", c.stim_area_rad, "config");
  if (j.contains("area_grid"))
    c.area_grid = grid_from_json(j["area_grid"], "min_pi", "max_pi",
                                 c.area_grid, "config.area_grid");
  if (j.contains("delay_grid"))
    c.delay_grid = grid_from_json(j["delay_grid"], "min_ps", "max_ps",
                                  c.delay_grid, "config.delay_grid");
  c.jobs = get_int(j, "jobs", c.jobs, "config");
  if (j.contains("integration")) {
    const json& ji = j["integration"];
    reject_unknown_keys(ji, {"dt_pulse_ps", "dt_free_ps", "tail_window_ps"},
                        "config.integration");
    c.integration.dt_pulse_ps =
        get_number(ji, "dt_pulse_ps", c.integration.dt_pulse_ps, "config.integration");
    c.integration.dt_free_ps =
        get_number(ji, "dt_free_ps", c.integration.dt_free_ps, "config.integration");
    c.integration.tail_window_ps = get_number(
        ji, "tail_window_ps", c.integration.tail_window_ps, "config.integration");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void check_schema_version(const nlohmann::json& j) {
  if (!j.contains("schema_version") || !j["schema_version"].is_string())
    throw std::invalid_argument("schema_version: missing or not a string");
  const std::string v = j["schema_version"].get<std::string>();
  const std::string ours(kSchemaVersion);
  const auto major = v.substr(0, v.find('.'));
  if (major != ours.substr(0, ours.find('.')))
    throw std::invalid_argument("schema_version: unsupported major version '" +
                                v + "' (expected " + ours + ")");
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  size_t columns) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path + ": cannot open");
  std::vector<std::vector<double>> cols(columns);
  std::string line;
  size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != columns)
      throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                  ": expected " + std::to_string(columns) +
                                  " columns, got " + std::to_string(cells.size()));
    if (!header_seen) {
      header_seen = true;  // header row: column names, not parsed
      continue;
    }
    for (size_t c = 0; c < columns; ++c) {
      try {
        size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
        cols[c].push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                    ": malformed number '" + cells[c] + "'");
      }
    }
  }
  if (!header_seen)
    throw std::invalid_argument(path + ": empty file");
  return cols;
}

DetectorTrace read_detector_trace_csv(const std::string& path) {
  auto cols = read_csv_columns(path, 3);
  DetectorTrace t;
  t.timestamps_s = std::move(cols[0]);
  t.counts_1 = std::move(cols[1]);
  t.counts_2 = std::move(cols[2]);
  return t;
}

CoincidenceHistogram read_histogram_csv(const std::string& path) {
  auto cols = read_csv_columns(path, 2);
  CoincidenceHistogram h;
  h.delay_ns = std::move(cols[0]);
  h.counts = std::move(cols[1]);
  return h;
}

}  // namespace stix
