#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tvflow/scenario.hpp"

namespace {

struct Outcome {
  int status = 0;
  std::string line;
};

int exit_code(tvflow::ErrorCode code) {
  switch (code) {
    case tvflow::ErrorCode::Schema: return 2;
    case tvflow::ErrorCode::InvariantViolation: return 3;
    default: return 1;
  }
}

Outcome run_one(const std::string& command, const std::string& path, const std::string& out_dir,
                const tvflow::RunOptions& opt) {
  using tvflow::json;
  try {
    json cfg = tvflow::load_config(path);
    if (cfg.is_object() && !cfg.contains("name")) cfg["name"] = std::filesystem::path(path).stem().string();
    const auto outputs = tvflow::run_scenario(command, cfg, opt);
    json files = json::array();
    for (const auto& p : tvflow::write_outputs(outputs, out_dir)) files.push_back(p.string());
    return {0, json{{"config", path}, {"status", "ok"}, {"files", files}}.dump()};
  } catch (const tvflow::Error& e) {
    const json err{{"config", path}, {"status", "error"}, {"error", {{"code", tvflow::to_string(e.code())}, {"message", e.what()}}}};
    return {exit_code(e.code()), err.dump()};
  } catch (const std::exception& e) {
    const json err{{"config", path}, {"status", "error"}, {"error", {{"code", "internal"}, {"message", e.what()}}}};
    return {1, err.dump()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total variation flow simulator"};
  app.require_subcommand(1);
  std::vector<std::string> configs;
  std::string out_dir = "out";
  unsigned jobs = 1;
  std::optional<double> tol;

  const char* commands[][2] = {
      {"evolve-1d", "exact evolution of a 1D step function"},
      {"evolve-radial", "exact evolution of a radial stack"},
      {"evolve-4th", "fourth-order ball evolution"},
      {"evolve-mm", "minimizing movements on a grid"},
      {"evolve-frac", "fractional flow on a periodic grid"},
      {"prox", "one proximal step"},
      {"calibrate", "weighted 1D calibrability"},
      {"calibrate-4th", "fourth-order ball or annulus calibrability"},
      {"bounds", "extinction-time bounds"},
      {"check-regularity", "jump and gradient monotonicity along a trajectory"},
      {"find-qstar", "critical annulus ratio"},
      {"run", "command taken from the configuration"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", configs, "scenario JSON file (repeatable)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads for multiple configs")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "tolerance override");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  tvflow::RunOptions opt;
  opt.tol = tol;
  opt.seed = tvflow::seed_from_env(0);

  std::vector<Outcome> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) results[i] = run_one(command, configs[i], out_dir, opt);
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = 0;
  for (const auto& r : results) {
    (r.status == 0 ? std::cout : std::cerr) << r.line << '\n';
    if (r.status != 0 && status == 0) status = r.status;
  }
  return status;
}
