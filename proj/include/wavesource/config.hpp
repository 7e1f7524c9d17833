#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wavesource/gain_design.hpp"
#include "wavesource/observer.hpp"
#include "wavesource/simulate.hpp"

namespace wavesource {

using Json = nlohmann::ordered_json;

namespace detail {

inline void check_keys(const Json& obj, const std::vector<std::string>& allowed,
                       const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& key : allowed)
      if (item.key() == key) known = true;
    if (!known) throw ConfigError(context + ": unknown key '" + item.key() + "'");
  }
}

inline double require_number(const Json& obj, const std::string& key,
                             const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

inline int require_int(const Json& obj, const std::string& key,
                       const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!obj[key].is_number_integer())
    throw ConfigError(context + ": '" + key + "' must be an integer");
  return obj[key].get<int>();
}

inline std::string require_string(const Json& obj, const std::string& key,
                                  const std::string& context) {
  if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
  if (!obj[key].is_string())
    throw ConfigError(context + ": '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

}  // namespace detail

/// Grid specification before resolution: n_x plus either an explicit Δt
/// or a CFL target (Δt = cfl·Δx/√c²). Δx is always length_l/(n_x+1).
struct GridSpec {
  int n_x{51};
  std::optional<double> dt;
  std::optional<double> cfl;

  Grid resolve(const PhysicalParams& p) const {
    if (dt.has_value() == cfl.has_value())
      throw ConfigError("grid: specify exactly one of 'dt' and 'cfl'");
    Grid g;
    g.n_x = n_x;
    g.dx = p.length_l / (n_x + 1);
    g.dt = dt ? *dt : (*cfl * g.dx / std::sqrt(p.c_squared));
    g.n_t = static_cast<int>(std::lround(p.t_final / g.dt));
    g.validate();
    return g;
  }
};

enum class GainSource { Template, File };

struct GainSpec {
  GainSource source{GainSource::Template};
  GainParameterization parameterization{GainParameterization::TwoScalarBlocks};
  double target_radius{0.99};
  std::string path;  // File source
};

/// One experiment per file. Unknown keys are rejected at every level.
struct ExperimentConfig {
  PhysicalParams physical;
  GridSpec grid;
  SourceProfile source;
  std::optional<std::pair<std::vector<double>, std::vector<double>>> initial_conditions;
  MeasurementSelection measurement = MeasurementSelection::full();
  std::optional<NoiseSpec> noise;
  GainSpec gain;
  std::optional<double> sigma;  // empty means auto
  std::string output_dir{"out"};
  std::optional<std::vector<MeasurementSelection>> sweep_placements;  // empty: end-anchored 1..n_x

  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  Grid resolved_grid() const { return grid.resolve(physical); }

  InitialConditions resolved_initial_conditions(int n_x) const {
    if (!initial_conditions) return InitialConditions::zero(n_x);
    const auto& [r1, r2] = *initial_conditions;
    if (static_cast<int>(r1.size()) != n_x || static_cast<int>(r2.size()) != n_x)
      throw ConfigError("initial_conditions: r1/r2 length must equal n_x");
    return {Eigen::Map<const Vector>(r1.data(), n_x),
            Eigen::Map<const Vector>(r2.data(), n_x)};
  }
};

namespace detail {

inline MeasurementSelection selection_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, {"kind", "start_index", "count"}, ctx);
  const std::string kind = require_string(j, "kind", ctx);
  if (kind == "full") {
    if (j.contains("start_index") || j.contains("count"))
      throw ConfigError(ctx + ": 'full' takes no window keys");
    return MeasurementSelection::full();
  }
  if (kind == "window")
    return MeasurementSelection::window(require_int(j, "start_index", ctx),
                                        require_int(j, "count", ctx));
  throw ConfigError(ctx + ": kind must be 'full' or 'window'");
}

inline Json selection_to_json(const MeasurementSelection& sel) {
  Json j;
  if (sel.kind == SelectionKind::Full) {
    j["kind"] = "full";
  } else {
    j["kind"] = "window";
    j["start_index"] = sel.start_index;
    j["count"] = sel.count_m;
  }
  return j;
}

inline SourceProfile source_from_json(const Json& j) {
  const std::string ctx = "source";
  const std::string profile = require_string(j, "profile", ctx);
  if (profile == "zero") {
    check_keys(j, {"profile"}, ctx);
    return SourceProfile::zero();
  }
  if (profile == "sine") {
    check_keys(j, {"profile", "amplitude", "frequency"}, ctx);
    return SourceProfile::sine(require_number(j, "amplitude", ctx),
                               require_number(j, "frequency", ctx));
  }
  if (profile == "gaussian") {
    check_keys(j, {"profile", "amplitude", "center", "width"}, ctx);
    return SourceProfile::gaussian_bump(require_number(j, "amplitude", ctx),
                                        require_number(j, "center", ctx),
                                        require_number(j, "width", ctx));
  }
  if (profile == "piecewise") {
    check_keys(j, {"profile", "breaks", "values"}, ctx);
    SourceProfile p;
    p.kind = SourceProfile::Kind::PiecewiseConstant;
    p.breaks = j.at("breaks").get<std::vector<double>>();
    p.values = j.at("values").get<std::vector<double>>();
    return p;
  }
  if (profile == "tabulated") {
    check_keys(j, {"profile", "values"}, ctx);
    SourceProfile p;
    p.kind = SourceProfile::Kind::Tabulated;
    p.values = j.at("values").get<std::vector<double>>();
    return p;
  }
  throw ConfigError("source: unknown profile '" + profile + "'");
}

inline Json source_to_json(const SourceProfile& p) {
  Json j;
  switch (p.kind) {
    case SourceProfile::Kind::Zero:
      j["profile"] = "zero";
      break;
    case SourceProfile::Kind::Sine:
      j["profile"] = "sine";
      j["amplitude"] = p.amplitude;
      j["frequency"] = p.frequency;
      break;
    case SourceProfile::Kind::GaussianBump:
      j["profile"] = "gaussian";
      j["amplitude"] = p.amplitude;
      j["center"] = p.center;
      j["width"] = p.width;
      break;
    case SourceProfile::Kind::PiecewiseConstant:
      j["profile"] = "piecewise";
      j["breaks"] = p.breaks;
      j["values"] = p.values;
      break;
    case SourceProfile::Kind::Tabulated:
      j["profile"] = "tabulated";
      j["values"] = p.values;
      break;
  }
  return j;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  using namespace detail;
  check_keys(j,
             {"physical", "grid", "source", "initial_conditions", "measurement",
              "noise", "gain", "sigma", "output_dir", "sweep"},
             "config");
  ExperimentConfig cfg;

  const Json& phys = j.at("physical");
  check_keys(phys, {"c_squared", "length_l", "t_final"}, "physical");
  cfg.physical.c_squared = require_number(phys, "c_squared", "physical");
  cfg.physical.length_l = require_number(phys, "length_l", "physical");
  cfg.physical.t_final = require_number(phys, "t_final", "physical");
  cfg.physical.validate();

  const Json& grid = j.at("grid");
  check_keys(grid, {"n_x", "dt", "cfl"}, "grid");
  cfg.grid.n_x = require_int(grid, "n_x", "grid");
  if (grid.contains("dt")) cfg.grid.dt = require_number(grid, "dt", "grid");
  if (grid.contains("cfl")) cfg.grid.cfl = require_number(grid, "cfl", "grid");
  cfg.grid.resolve(cfg.physical);  // validates now, not at run time

  cfg.source = source_from_json(j.at("source"));

  if (j.contains("initial_conditions") && !j.at("initial_conditions").is_null()) {
    const Json& ic = j.at("initial_conditions");
    check_keys(ic, {"r1", "r2"}, "initial_conditions");
    cfg.initial_conditions = {ic.at("r1").get<std::vector<double>>(),
                              ic.at("r2").get<std::vector<double>>()};
  }

  cfg.measurement = selection_from_json(j.at("measurement"), "measurement");

  if (j.contains("noise") && !j.at("noise").is_null()) {
    const Json& noise = j.at("noise");
    check_keys(noise, {"sigma_state", "sigma_meas", "seed"}, "noise");
    NoiseSpec spec;
    spec.sigma_state = require_number(noise, "sigma_state", "noise");
    spec.sigma_meas = require_number(noise, "sigma_meas", "noise");
    spec.rng_seed = noise.contains("seed") ? noise.at("seed").get<std::uint64_t>() : 0;
    spec.validate();
    cfg.noise = spec;
  }

  const Json& gain = j.at("gain");
  const std::string gain_source = require_string(gain, "source", "gain");
  if (gain_source == "template") {
    check_keys(gain, {"source", "parameterization", "target_radius"}, "gain");
    cfg.gain.source = GainSource::Template;
    const std::string param = require_string(gain, "parameterization", "gain");
    if (param == "scalar_on_diag")
      cfg.gain.parameterization = GainParameterization::ScalarOnDiag;
    else if (param == "two_scalar_blocks")
      cfg.gain.parameterization = GainParameterization::TwoScalarBlocks;
    else
      throw ConfigError("gain: unknown parameterization '" + param + "'");
    if (gain.contains("target_radius"))
      cfg.gain.target_radius = require_number(gain, "target_radius", "gain");
  } else if (gain_source == "file") {
    check_keys(gain, {"source", "path"}, "gain");
    cfg.gain.source = GainSource::File;
    cfg.gain.path = require_string(gain, "path", "gain");
  } else {
    throw ConfigError("gain: source must be 'template' or 'file'");
  }

  if (j.contains("sigma")) {
    const Json& sigma = j.at("sigma");
    if (sigma.is_string()) {
      if (sigma.get<std::string>() != "auto")
        throw ConfigError("sigma: must be 'auto' or a number");
    } else if (sigma.is_number()) {
      cfg.sigma = sigma.get<double>();
      if (!(*cfg.sigma > 0.0)) throw ConfigError("sigma: must be > 0");
    } else {
      throw ConfigError("sigma: must be 'auto' or a number");
    }
  }

  if (j.contains("output_dir"))
    cfg.output_dir = require_string(j, "output_dir", "config");

  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const Json& sweep = j.at("sweep");
    check_keys(sweep, {"placements"}, "sweep");
    const Json& placements = sweep.at("placements");
    if (placements.is_string()) {
      if (placements.get<std::string>() != "end_anchored")
        throw ConfigError("sweep: placements must be 'end_anchored' or a list");
      cfg.sweep_placements = std::vector<MeasurementSelection>{};
    } else if (placements.is_array()) {
      std::vector<MeasurementSelection> list;
      for (std::size_t i = 0; i < placements.size(); ++i) {
        try {
          list.push_back(detail::selection_from_json(placements[i], "sweep placement"));
        } catch (const ConfigError& e) {
          throw ConfigError("sweep: placement " + std::to_string(i) + ": " + e.what());
        }
      }
      cfg.sweep_placements = std::move(list);
    } else {
      throw ConfigError("sweep: placements must be 'end_anchored' or a list");
    }
  }

  return cfg;
}

inline Json ExperimentConfig::to_json() const {
  Json j;
  j["physical"] = {{"c_squared", physical.c_squared},
                   {"length_l", physical.length_l},
                   {"t_final", physical.t_final}};
  j["grid"]["n_x"] = grid.n_x;
  if (grid.dt) j["grid"]["dt"] = *grid.dt;
  if (grid.cfl) j["grid"]["cfl"] = *grid.cfl;
  j["source"] = detail::source_to_json(source);
  if (initial_conditions) {
    j["initial_conditions"] = {{"r1", initial_conditions->first},
                               {"r2", initial_conditions->second}};
  }
  j["measurement"] = detail::selection_to_json(measurement);
  if (noise) {
    j["noise"] = {{"sigma_state", noise->sigma_state},
                  {"sigma_meas", noise->sigma_meas},
                  {"seed", noise->rng_seed}};
  }
  if (gain.source == GainSource::Template) {
    j["gain"]["source"] = "template";
    j["gain"]["parameterization"] =
        gain.parameterization == GainParameterization::ScalarOnDiag
            ? "scalar_on_diag"
            : "two_scalar_blocks";
    j["gain"]["target_radius"] = gain.target_radius;
  } else {
    j["gain"]["source"] = "file";
    j["gain"]["path"] = gain.path;
  }
  j["sigma"] = sigma ? Json(*sigma) : Json("auto");
  j["output_dir"] = output_dir;
  if (sweep_placements) {
    if (sweep_placements->empty()) {
      j["sweep"]["placements"] = "end_anchored";
    } else {
      Json list = Json::array();
      for (const auto& sel : *sweep_placements)
        list.push_back(detail::selection_to_json(sel));
      j["sweep"]["placements"] = std::move(list);
    }
  }
  return j;
}

/// Everything one estimate run produces, serializable for cmd_report.
struct RunRecord {
  ExperimentConfig config;
  std::vector<double> state_error_norms;
  std::vector<double> innovation_norms;
  std::vector<double> f_hat_terminal;
  double source_rmse{0.0};
  double terminal_state_error{0.0};
  AssumptionReport assumption;
  double gain_radius{0.0};
  bool gain_stable{false};
  std::vector<double> gain_params_used;
  double sigma_used{0.0};
  double wall_seconds{0.0};

  Json to_json() const {
    Json j;
    j["config"] = config.to_json();
    j["gain"] = {{"radius", gain_radius},
                 {"stable", gain_stable},
                 {"params_used", gain_params_used}};
    j["sigma_used"] = sigma_used;
    j["assumption"] = {{"max_filter_norm", assumption.max_filter_norm},
                       {"pe_beta", assumption.pe_beta},
                       {"pe_kappa", assumption.pe_kappa},
                       {"cond1_satisfied", assumption.cond1_satisfied},
                       {"cond2_satisfied", assumption.cond2_satisfied}};
    j["metrics"] = {{"source_rmse", source_rmse},
                    {"terminal_state_error", terminal_state_error},
                    {"state_error_norms", state_error_norms},
                    {"innovation_norms", innovation_norms}};
    j["f_hat_terminal"] = f_hat_terminal;
    j["wall_seconds"] = wall_seconds;
    return j;
  }

  static RunRecord from_json(const Json& j) {
    detail::check_keys(j,
                       {"config", "gain", "sigma_used", "assumption", "metrics",
                        "f_hat_terminal", "wall_seconds"},
                       "run record");
    RunRecord rec;
    rec.config = ExperimentConfig::from_json(j.at("config"));
    rec.gain_radius = j.at("gain").at("radius").get<double>();
    rec.gain_stable = j.at("gain").at("stable").get<bool>();
    rec.gain_params_used = j.at("gain").at("params_used").get<std::vector<double>>();
    rec.sigma_used = j.at("sigma_used").get<double>();
    const Json& a = j.at("assumption");
    rec.assumption.max_filter_norm = a.at("max_filter_norm").get<double>();
    rec.assumption.pe_beta = a.at("pe_beta").get<double>();
    rec.assumption.pe_kappa = a.at("pe_kappa").get<int>();
    rec.assumption.cond1_satisfied = a.at("cond1_satisfied").get<bool>();
    rec.assumption.cond2_satisfied = a.at("cond2_satisfied").get<bool>();
    const Json& m = j.at("metrics");
    rec.source_rmse = m.at("source_rmse").get<double>();
    rec.terminal_state_error = m.at("terminal_state_error").get<double>();
    rec.state_error_norms = m.at("state_error_norms").get<std::vector<double>>();
    rec.innovation_norms = m.at("innovation_norms").get<std::vector<double>>();
    rec.f_hat_terminal = j.at("f_hat_terminal").get<std::vector<double>>();
    rec.wall_seconds = j.at("wall_seconds").get<double>();
    return rec;
  }
};

}  // namespace wavesource
