#pragma once

#include <chrono>
#include <filesystem>

#include "wavesource/analysis.hpp"
#include "wavesource/config.hpp"
#include "wavesource/gain_design.hpp"
#include "wavesource/io.hpp"
#include "wavesource/observer.hpp"
#include "wavesource/simulate.hpp"

namespace wavesource {

inline DiscreteWaveSystem system_from_config(const ExperimentConfig& cfg) {
  return assemble_system(cfg.resolved_grid(), cfg.physical, cfg.measurement);
}

/// Resolves the config's gain source: template search or CSV fixture.
inline GainDesignResult gain_from_config(const ExperimentConfig& cfg,
                                         const DiscreteWaveSystem& sys) {
  if (cfg.gain.source == GainSource::File) {
    const Matrix L = load_gain_csv(cfg.gain.path, sys.state_dim(), sys.count_m());
    return design_gain(sys, GainTemplate::from_values(L), cfg.gain.target_radius);
  }
  const GainTemplate tmpl =
      cfg.gain.parameterization == GainParameterization::ScalarOnDiag
          ? GainTemplate::scalar_on_diag(sys)
          : GainTemplate::two_scalar_blocks(sys);
  return design_gain(sys, tmpl, cfg.gain.target_radius);
}

inline int default_probe_steps(const Grid& grid) { return std::min(grid.n_t, 2000); }

/// simulate → estimate → analyze, producing the full run record.
inline RunRecord run_estimate(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteWaveSystem sys = system_from_config(cfg);
  const Grid& grid = sys.grid();

  const SourceField f_true = sample_source(cfg.source, grid);
  const InitialConditions ic = cfg.resolved_initial_conditions(grid.n_x);
  const SyntheticRun truth = simulate_forward(sys, ic, f_true, cfg.noise);

  const GainDesignResult gain = gain_from_config(cfg, sys);
  const double sigma =
      cfg.sigma ? *cfg.sigma : auto_sigma(sys, gain.L, default_probe_steps(grid));

  ObserverConfig ocfg = ObserverConfig::cold_start(sys, gain.L, sigma);
  const EstimateTrajectory traj = run_observer(sys, ocfg, truth.measurements);

  RunRecord rec;
  rec.config = cfg;
  // Estimates are recorded before processing z^j, so index j compares
  // against truth state j.
  std::vector<Vector> est(traj.xi_hat.begin(), traj.xi_hat.begin() + truth.states.size());
  rec.state_error_norms = state_error_series(truth.states, est);
  rec.innovation_norms = traj.innovation_norms;
  const Vector& f_terminal = traj.f_hat.back();
  rec.f_hat_terminal.assign(f_terminal.data(), f_terminal.data() + f_terminal.size());
  rec.source_rmse = source_rmse(f_true, SourceField(f_terminal));
  rec.terminal_state_error = rec.state_error_norms.back();
  rec.gain_radius = gain.spectral_radius;
  rec.gain_stable = gain.stable;
  rec.gain_params_used = gain.params_used;
  rec.sigma_used = sigma;

  const int kappa = std::min(100, std::max(1, grid.n_t / 2));
  rec.assumption =
      check_assumption(sys, ocfg, std::min(grid.n_t, std::max(2 * kappa, 400)), kappa);

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// End-anchored contiguous windows of every size 1..n_x.
inline std::vector<MeasurementSelection> end_anchored_placements(int n_x) {
  std::vector<MeasurementSelection> out;
  out.reserve(n_x);
  for (int m = 1; m <= n_x; ++m)
    out.push_back(MeasurementSelection::window(n_x - m, m));
  return out;
}

inline std::vector<SweepRow> run_observability(const ExperimentConfig& cfg) {
  const Grid grid = cfg.resolved_grid();
  std::vector<MeasurementSelection> placements;
  if (cfg.sweep_placements && !cfg.sweep_placements->empty())
    placements = *cfg.sweep_placements;
  else
    placements = end_anchored_placements(grid.n_x);
  const auto reports = measurement_sweep(grid, cfg.physical, placements);
  std::vector<SweepRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) rows.push_back({r.m, r.cond_W, r.rank_W});
  return rows;
}

/// cmd_simulate: truth states CSV + measurements CSV under output_dir.
inline SyntheticRun cmd_simulate(const ExperimentConfig& cfg) {
  const DiscreteWaveSystem sys = system_from_config(cfg);
  const SourceField f_true = sample_source(cfg.source, sys.grid());
  const InitialConditions ic = cfg.resolved_initial_conditions(sys.n_x());
  SyntheticRun run = simulate_forward(sys, ic, f_true, cfg.noise);

  const std::filesystem::path out_dir(cfg.output_dir);
  write_states_csv(out_dir / "states.csv", sys.grid(), run.states);
  write_measurements_csv(out_dir / "measurements.csv", sys.grid(),
                         sys.measured_nodes(), run.measurements);
  return run;
}

/// cmd_estimate: f̂ CSV, state-error CSV and the JSON run record.
inline RunRecord cmd_estimate(const ExperimentConfig& cfg) {
  RunRecord rec = run_estimate(cfg);
  const Grid grid = cfg.resolved_grid();
  const SourceField f_true = sample_source(cfg.source, grid);
  Vector f_hat = Eigen::Map<const Vector>(rec.f_hat_terminal.data(),
                                          static_cast<Eigen::Index>(rec.f_hat_terminal.size()));

  const std::filesystem::path out_dir(cfg.output_dir);
  write_source_csv(out_dir / "source.csv", grid, f_true, SourceField(f_hat));
  write_state_error_csv(out_dir / "state_error.csv", grid, rec.state_error_norms);
  auto out = open_output(out_dir / "run_record.json");
  out << rec.to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: run_record.json");
  return rec;
}

inline std::vector<SweepRow> cmd_observability(const ExperimentConfig& cfg) {
  auto rows = run_observability(cfg);
  write_sweep_csv(std::filesystem::path(cfg.output_dir) / "sweep.csv", rows);
  return rows;
}

/// cmd_report: human-readable summary of a run record file.
inline std::string cmd_report(const std::filesystem::path& record_path) {
  std::ifstream in(record_path);
  if (!in) throw IoError("cannot open run record: " + record_path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // parse_error::byte is the offset of the failure
    throw ConfigError("run record parse error at byte " + std::to_string(e.byte) +
                      " in " + record_path.string());
  }
  const RunRecord rec = RunRecord::from_json(j);

  std::ostringstream out;
  out << "run summary (" << record_path.string() << ")\n";
  if (!rec.gain_stable)
    out << "*** WARNING: observer gain is NOT stable (radius >= 1) ***\n";
  out << "  source RMSE            : " << format17(rec.source_rmse) << '\n';
  out << "  terminal state error   : " << format17(rec.terminal_state_error) << '\n';
  out << "  gain spectral radius   : " << format17(rec.gain_radius)
      << (rec.gain_stable ? "  (stable)" : "  (UNSTABLE)") << '\n';
  out << "  sigma used             : " << format17(rec.sigma_used) << '\n';
  out << "  assumption condition 1 : "
      << (rec.assumption.cond1_satisfied ? "satisfied" : "NOT satisfied")
      << "  (max filter norm " << format17(rec.assumption.max_filter_norm) << ")\n";
  out << "  assumption condition 2 : "
      << (rec.assumption.cond2_satisfied ? "satisfied" : "NOT satisfied")
      << "  (beta " << format17(rec.assumption.pe_beta) << ", kappa "
      << rec.assumption.pe_kappa << ")\n";
  out << "  wall seconds           : " << format17(rec.wall_seconds) << '\n';
  return out.str();
}

}  // namespace wavesource
