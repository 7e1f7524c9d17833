#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_helpers.hpp"
#include "wavesource/config.hpp"
#include "wavesource/experiment.hpp"
#include "wavesource/io.hpp"

using namespace wavesource;

namespace {

const char* kDeskConfig = R"({
  "physical": {"c_squared": 0.9, "length_l": 2.0, "t_final": 100.0},
  "grid": {"n_x": 51, "cfl": 0.95},
  "source": {"profile": "sine", "amplitude": 3.0, "frequency": 5.0},
  "measurement": {"kind": "full"},
  "gain": {"source": "template", "parameterization": "two_scalar_blocks", "target_radius": 0.99},
  "sigma": "auto",
  "output_dir": "out"
})";

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("config: round trip serialize -> parse -> serialize is byte-identical") {
  const auto cfg = ExperimentConfig::from_json(Json::parse(kDeskConfig));
  const std::string once = cfg.serialize();
  const auto reparsed = ExperimentConfig::from_json(Json::parse(once));
  CHECK(reparsed.serialize() == once);
}

TEST_CASE("config: round trip with all optional sections") {
  Json j = Json::parse(kDeskConfig);
  j["noise"] = {{"sigma_state", 0.007816}, {"sigma_meas", 0.01044}, {"seed", 7}};
  j["measurement"] = {{"kind", "window"}, {"start_index", 10}, {"count", 25}};
  j["sigma"] = 0.125;
  j["sweep"] = {{"placements", "end_anchored"}};
  j["initial_conditions"] = {{"r1", std::vector<double>(51, 0.5)},
                             {"r2", std::vector<double>(51, 0.0)}};
  const auto cfg = ExperimentConfig::from_json(j);
  const std::string once = cfg.serialize();
  CHECK(ExperimentConfig::from_json(Json::parse(once)).serialize() == once);
}

TEST_CASE("config: unknown keys rejected with the offending name") {
  Json j = Json::parse(kDeskConfig);
  j["grdi"] = 1;
  CHECK_THROWS_WITH_AS(static_cast<void>(ExperimentConfig::from_json(j)),
                       doctest::Contains("grdi"), ConfigError);
  Json j2 = Json::parse(kDeskConfig);
  j2["physical"]["c"] = 1.0;
  CHECK_THROWS_AS(static_cast<void>(ExperimentConfig::from_json(j2)), ConfigError);
}

TEST_CASE("config: grid requires exactly one of dt and cfl") {
  Json j = Json::parse(kDeskConfig);
  j["grid"] = {{"n_x", 51}};
  CHECK_THROWS_AS(static_cast<void>(ExperimentConfig::from_json(j)), ConfigError);
  j["grid"] = {{"n_x", 51}, {"dt", 0.01}, {"cfl", 0.95}};
  CHECK_THROWS_AS(static_cast<void>(ExperimentConfig::from_json(j)), ConfigError);
}

TEST_CASE("config: paper parameters resolve to the published grid") {
  Json j = Json::parse(kDeskConfig);
  j["grid"] = {{"n_x", 199}, {"dt", 0.01}};
  const auto cfg = ExperimentConfig::from_json(j);
  const Grid g = cfg.resolved_grid();
  CHECK(g.dx == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g.n_t == 10000);
  CHECK(g.cfl(cfg.physical) == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
}

TEST_CASE("config: invalid sweep placement names the entry") {
  Json j = Json::parse(kDeskConfig);
  j["sweep"]["placements"] = Json::array(
      {{{"kind", "full"}}, {{"kind", "sideways"}}});
  CHECK_THROWS_WITH_AS(static_cast<void>(ExperimentConfig::from_json(j)),
                       doctest::Contains("placement 1"), ConfigError);
}

TEST_CASE("format17: printing is lossless under re-parse") {
  for (double v : {0.1, 1.0 / 3.0, 1.8168e-14, 3e300, -0.007816}) {
    CHECK(std::stod(format17(v)) == v);
  }
}

TEST_CASE("csv writers: header rows and field order") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "ws_csv_test";
  auto [grid, params] = wavesource::testing::desk_setup(3, 0.95, 1.0);

  write_source_csv(dir / "source.csv", grid, SourceField(Vector::Ones(3)),
                   SourceField::zero(3));
  write_state_error_csv(dir / "state_error.csv", grid, {0.0, 1.5});
  write_sweep_csv(dir / "sweep.csv", {{1, 10.0, 6}});
  write_measurements_csv(dir / "measurements.csv", grid, {0, 1, 2},
                         {Vector::Zero(3)});

  const auto first_line = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
  };
  CHECK(first_line(dir / "source.csv") == "x,f_true,f_hat");
  CHECK(first_line(dir / "state_error.csv") == "t,err_norm");
  CHECK(first_line(dir / "sweep.csv") == "m,cond_W,rank_W");
  CHECK(first_line(dir / "measurements.csv") == "t,z_0,z_1,z_2");
  fs::remove_all(dir);
}

TEST_CASE("run record: serialize/parse round trip preserves the summary") {
  auto cfg = ExperimentConfig::from_json(Json::parse(kDeskConfig));
  cfg.grid.n_x = 9;
  cfg.physical.t_final = 3.0;
  RunRecord rec = run_estimate(cfg);
  const Json j = rec.to_json();
  const RunRecord back = RunRecord::from_json(j);
  CHECK(back.source_rmse == rec.source_rmse);
  CHECK(back.gain_radius == rec.gain_radius);
  CHECK(back.sigma_used == rec.sigma_used);
  CHECK(back.state_error_norms == rec.state_error_norms);
  CHECK(back.assumption.pe_beta == rec.assumption.pe_beta);
}

TEST_CASE("cmd_report: summary fields and unstable warning") {
  auto cfg = ExperimentConfig::from_json(Json::parse(kDeskConfig));
  cfg.grid.n_x = 9;
  cfg.physical.t_final = 3.0;
  RunRecord rec = run_estimate(cfg);

  const auto path = temp_file("ws_record.json", rec.to_json().dump(2));
  const std::string summary = cmd_report(path);
  CHECK(summary.find("source RMSE") != std::string::npos);
  CHECK(summary.find("spectral radius") != std::string::npos);
  CHECK(summary.find("condition 1") != std::string::npos);
  CHECK(summary.find("WARNING") == std::string::npos);

  rec.gain_stable = false;
  const auto path2 = temp_file("ws_record_unstable.json", rec.to_json().dump(2));
  CHECK(cmd_report(path2).find("WARNING") != std::string::npos);

  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("cmd_report: truncated file reports the byte offset") {
  const std::string full = R"({"config": {"physical")";
  const auto path = temp_file("ws_truncated.json", full);
  try {
    cmd_report(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
  std::filesystem::remove(path);
}
