#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace tvflow;
using Catch::Approx;

namespace {
json scenario(const std::string& name) { return load_config(std::filesystem::path(TVFLOW_SCENARIO_DIR) / (name + ".json")); }

std::string schema_message(const std::string& command, const json& cfg) {
  try {
    run_scenario(command, cfg, {});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Schema) return e.what();
    return std::string("wrong code: ") + std::string(to_string(e.code()));
  }
  return "no error";
}
}  // namespace

TEST_CASE("every bundled scenario runs", "[scenario]") {
  for (const auto& entry : std::filesystem::directory_iterator(TVFLOW_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().filename().string());
    const auto out = run_scenario("run", load_config(entry.path()), {});
    CHECK_FALSE(out.name.empty());
    CHECK((!out.trajectory_csv.empty() || !out.result.is_null() || !out.bounds.is_null()));
  }
}

TEST_CASE("bundled scenarios reproduce known values", "[scenario]") {
  const auto ball = run_scenario("run", scenario("ball_radial"), {});
  CHECK(ball.events["extinction_time"].get<double>() == Approx(0.5).epsilon(1e-14));
  CHECK(ball.bounds[0]["bound"].get<double>() == Approx(0.5).epsilon(1e-14));

  const auto fourth = run_scenario("run", scenario("fourth_n5"), {});
  CHECK(fourth.events["extinction_time"].get<double>() == Approx(0.02).epsilon(1e-12));
  CHECK(fourth.bounds[0]["bound"].get<double>() >= 0.02);

  const auto zero = run_scenario("run", scenario("zero_horizon"), {});
  CHECK(std::count(zero.trajectory_csv.begin(), zero.trajectory_csv.end(), '\n') == 2);

  const auto cal = run_scenario("run", scenario("calibrate_weighted"), {});
  CHECK_FALSE(cal.result["calibrable"].get<bool>());
  CHECK(cal.result["max_abs_z"].get<double>() == Approx(1.1 / (2.0 * std::sqrt(0.1))).epsilon(1e-4));
}

TEST_CASE("scenario runs are deterministic", "[scenario]") {
  for (const char* name : {"regularity_minmov", "frac_bump", "step_bump_1d"}) {
    const auto a = run_scenario("run", scenario(name), {});
    const auto b = run_scenario("run", scenario(name), {});
    CHECK(a.trajectory_csv == b.trajectory_csv);
    CHECK(a.diagnostics_csv == b.diagnostics_csv);
    CHECK(a.result.dump() == b.result.dump());
    CHECK(a.bounds.dump() == b.bounds.dump());
  }
}

TEST_CASE("schema errors name the field", "[scenario]") {
  auto cfg = scenario("ball_radial");
  cfg.erase("version");
  CHECK(schema_message("run", cfg).find("'version'") != std::string::npos);

  cfg = scenario("ball_radial");
  cfg["initial"]["R0"] = -1.0;
  CHECK(schema_message("run", cfg).find("initial.R0") != std::string::npos);

  cfg = scenario("ball_radial");
  cfg["horizon"] = "soon";
  CHECK(schema_message("run", cfg).find("'horizon'") != std::string::npos);

  cfg = scenario("ball_radial");
  cfg["bounds"][0]["kind"] = "third";
  CHECK(schema_message("run", cfg).find("bounds[0].kind") != std::string::npos);

  cfg = scenario("ball_radial");
  cfg["command"] = "evolve-5th";
  CHECK(schema_message("run", cfg).find("'command'") != std::string::npos);

  CHECK(schema_message("evolve-1d", scenario("ball_radial")).find("'initial'") != std::string::npos);
}

TEST_CASE("outputs are written under the scenario name", "[scenario]") {
  const auto dir = std::filesystem::temp_directory_path() / "tvflow_scenario_test";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(run_scenario("run", scenario("ball_radial"), {}), dir);
  CHECK(std::filesystem::exists(dir / "ball_radial.trajectory.csv"));
  CHECK(std::filesystem::exists(dir / "ball_radial.events.json"));
  CHECK(std::filesystem::exists(dir / "ball_radial.bounds.json"));
  CHECK(files.size() == 4);
  std::filesystem::remove_all(dir);
}
