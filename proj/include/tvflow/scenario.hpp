#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tvflow/bounds.hpp"
#include "tvflow/csv.hpp"
#include "tvflow/exact1d.hpp"
#include "tvflow/fourth.hpp"
#include "tvflow/fracflow.hpp"
#include "tvflow/json.hpp"
#include "tvflow/minmov.hpp"
#include "tvflow/radial2.hpp"
#include "tvflow/regularity.hpp"

namespace tvflow {

inline constexpr int kConfigVersion = 1;

struct RunOptions {
  /// Overrides the tolerance of commands that take one.
  std::optional<double> tol;
  /// Seed for randomly generated initial data.
  std::uint64_t seed = 0;
};

/// Reads TVFLOW_SEED, falling back to `fallback` when unset or malformed.
inline std::uint64_t seed_from_env(std::uint64_t fallback = 0) {
  const char* v = std::getenv("TVFLOW_SEED");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const auto s = std::strtoull(v, &end, 10);
  return *end == '\0' ? s : fallback;
}

/// In-memory artifacts of one scenario; empty members are not written.
struct ScenarioOutputs {
  std::string name;
  std::string trajectory_csv;
  std::string diagnostics_csv;
  json events;
  json bounds;
  json result;
};

using Datum = std::variant<StepFunction1D, RadialStack, GridSignal>;

namespace detail {

inline void check_version(const json& cfg) {
  if (!cfg.is_object()) fail(ErrorCode::Schema, "field '': configuration must be a JSON object");
  const int v = field<int>(cfg, "version");
  if (v != kConfigVersion)
    fail(ErrorCode::Schema, "field 'version': unsupported version " + std::to_string(v));
}

inline double horizon(const json& cfg) {
  if (!cfg.contains("horizon") || cfg["horizon"].is_null()) return kInf;
  const double T = field<double>(cfg, "horizon");
  if (T < 0.0) fail(ErrorCode::Schema, "field 'horizon': must be non-negative");
  return T;
}

template <class T>
T positive(const json& cfg, std::string_view key) {
  const T v = field<T>(cfg, key);
  if (!(v > T{0})) fail(ErrorCode::Schema, "field '" + std::string(key) + "': must be positive");
  return v;
}

inline StepFunction1D random_step(const json& j, std::uint64_t seed) {
  const auto k = field<std::size_t>(j, "plateaus");
  if (k < 1) fail(ErrorCode::Schema, "field 'plateaus': must be positive");
  std::mt19937_64 rng(field_or<std::uint64_t>(j, "seed", seed));
  std::uniform_real_distribution<double> val(-1.0, 1.0), len(0.1, 1.0);
  std::vector<double> values(k), lengths(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    values[i] = val(rng);
    lengths[i] = len(rng);
    total += lengths[i];
  }
  const double period = field_or<double>(j, "period", 1.0);
  for (double& l : lengths) l *= period / total;
  return StepFunction1D::from_lengths(values, lengths, 0.0);
}

Datum parse_datum(const json& j, std::uint64_t seed);

inline GridSignal sampled_grid(const json& j, std::uint64_t seed) {
  const auto nodes = field<std::size_t>(j, "nodes");
  if (nodes < 2) fail(ErrorCode::Schema, "field 'nodes': need at least 2");
  Datum src = [&] {
    try {
      return parse_datum(field<json>(j, "from"), seed);
    } catch (const Error& e) {
      rethrow_schema("from", e);
    }
  }();
  if (auto* s = std::get_if<StepFunction1D>(&src)) return sample_cell_average(*s, nodes);
  if (auto* r = std::get_if<RadialStack>(&src)) {
    const double rmax = positive<double>(j, "r_max");
    return sample_cell_average(*r, nodes, rmax, field_or<bool>(j, "pinned", true));
  }
  fail(ErrorCode::Schema, "field 'from': grid data cannot be resampled");
}

/// Initial data by "type": step, stack, grid, ball (a0 1_{B_R0} in R^n),
/// random-step (TVFLOW_SEED or "seed"), sampled (cell averages of "from").
inline Datum parse_datum(const json& j, std::uint64_t seed) {
  const auto type = field<std::string>(j, "type");
  if (type == "step") return j.get<StepFunction1D>();
  if (type == "stack") return j.get<RadialStack>();
  if (type == "grid") return j.get<GridSignal>();
  if (type == "ball")
    return RadialStack({positive<double>(j, "R0")}, {field<double>(j, "a0")}, 0.0, positive<int>(j, "n"));
  if (type == "random-step") return random_step(j, seed);
  if (type == "sampled") return sampled_grid(j, seed);
  fail(ErrorCode::Schema, "field 'type': unknown datum type '" + type + "'");
}

template <class T>
T datum_as(const json& cfg, std::string_view key, std::uint64_t seed, const char* what) {
  Datum d = [&] {
    try {
      return parse_datum(field<json>(cfg, key), seed);
    } catch (const Error& e) {
      rethrow_schema(key, e);
    }
  }();
  if (auto* v = std::get_if<T>(&d)) return std::move(*v);
  fail(ErrorCode::Schema, "field '" + std::string(key) + "': expected " + what);
}

template <class State>
json events_json(const FlowTrajectory<State>& t) {
  json j{{"events", t.events}};
  const Event* e = t.first_event(EventKind::Extinction);
  j["extinction_time"] = e ? json(e->time) : json(nullptr);
  return j;
}

template <class State>
std::string trajectory_csv(const FlowTrajectory<State>& t) {
  std::ostringstream os;
  write_trajectory_csv(os, t);
  return os.str();
}

template <class State>
std::string diagnostics_csv(const FlowTrajectory<State>& t) {
  std::ostringstream os;
  write_diagnostics_csv(os, t);
  return os.str();
}

template <class State>
std::optional<double> extinction_of(const FlowTrajectory<State>& t) {
  const Event* e = t.first_event(EventKind::Extinction);
  return e ? std::optional<double>(e->time) : std::nullopt;
}

/// Evaluates the "bounds" list of a configuration against `u0`.
inline json bound_reports(const json& cfg, const Datum& u0, std::optional<double> actual) {
  if (!cfg.contains("bounds")) return nullptr;
  const auto specs = field<std::vector<json>>(cfg, "bounds");
  json out = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const json& b = specs[i];
    const std::string key = "bounds[" + std::to_string(i) + "]";
    try {
      const auto kind = field<std::string>(b, "kind");
      BoundReport rep;
      if (kind == "second") {
        if (auto* s = std::get_if<StepFunction1D>(&u0)) rep = extinction_bound_second(*s);
        else if (auto* r = std::get_if<RadialStack>(&u0)) rep = extinction_bound_second(*r);
        else fail(ErrorCode::Schema, "field 'kind': the second-order bound needs step or stack data");
      } else if (kind == "fourth") {
        const auto* r = std::get_if<RadialStack>(&u0);
        if (!r) fail(ErrorCode::Schema, "field 'kind': the fourth-order bound needs stack data");
        const double cn = field_or<double>(b, "C_n", default_embedding_constant(r->dimension()));
        rep = extinction_bound_fourth(*r, field_or<double>(b, "p", 2.0), cn);
      } else if (kind == "periodic-fractional") {
        const auto* g = std::get_if<GridSignal>(&u0);
        if (!g) fail(ErrorCode::Schema, "field 'kind': the periodic bound needs grid data");
        rep = extinction_bound_teeper(*g, field<double>(b, "s"), field<double>(b, "p"), field<double>(b, "C_star"));
        if (actual) rep.attach_actual(*actual);
      } else if (kind == "fractional-critical") {
        const auto* g = std::get_if<GridSignal>(&u0);
        if (!g) fail(ErrorCode::Schema, "field 'kind': the critical bound needs grid data");
        const int n = field<int>(b, "n");
        const double s = field<double>(b, "s");
        rep = extinction_bound_fractional_critical(*g, n, s, field_or<double>(b, "C_ns", default_fractional_constant(n, s)));
      } else {
        fail(ErrorCode::Schema, "field 'kind': unknown bound '" + kind + "'");
      }
      out.push_back(rep);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Schema) rethrow_schema(key, e);
      out.push_back(json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}});
    }
  }
  return out;
}

// --- per-command trajectories (shared by the evolve and check-regularity commands)

inline FlowTrajectory<StepFunction1D> trajectory_1d(const json& cfg, const RunOptions& o) {
  return evolve_1d(datum_as<StepFunction1D>(cfg, "initial", o.seed, "step data"), horizon(cfg));
}

inline FlowTrajectory<RadialStack> trajectory_radial(const json& cfg, const RunOptions& o) {
  return evolve_radial(datum_as<RadialStack>(cfg, "initial", o.seed, "stack data"), horizon(cfg));
}

inline FlowTrajectory<FourthBallState> trajectory_fourth(const json& cfg, const RunOptions&) {
  const int n = positive<int>(cfg, "n");
  const double a0 = positive<double>(cfg, "a0");
  const double R0 = positive<double>(cfg, "R0");
  double T = horizon(cfg);
  if (n == 2) {
    if (std::isinf(T)) fail(ErrorCode::Schema, "field 'horizon': required for n = 2");
    return fourth_ball_ode_n2(a0, R0, T);
  }
  if (std::isinf(T)) {
    T = fourth_extinction_time(n, a0, R0);
    if (std::isinf(T)) fail(ErrorCode::Schema, "field 'horizon': required when the ball never vanishes");
  }
  return fourth_ball_trajectory(n, a0, R0, T, field_or<std::size_t>(cfg, "samples", 65));
}

inline GridSignal grid_initial(const json& cfg, const RunOptions& o) {
  return datum_as<GridSignal>(cfg, "initial", o.seed, "grid data");
}

inline FlowTrajectory<GridSignal> trajectory_mm(const json& cfg, const RunOptions& o) {
  const auto u0 = grid_initial(cfg, o);
  MinMovOptions opt;
  const auto method = field_or<std::string>(cfg, "method", "exact");
  if (method == "primal-dual") opt.method = ProxMethod::PrimalDual;
  else if (method != "exact") fail(ErrorCode::Schema, "field 'method': expected exact or primal-dual");
  opt.record_every = field_or<std::size_t>(cfg, "record_every", 1);
  if (o.tol) opt.primal_dual.gap_tol = *o.tol;
  return minimizing_movements(u0, positive<double>(cfg, "tau"), field<std::size_t>(cfg, "steps"), opt);
}

inline GridSignal mean_free(const GridSignal& u) {
  std::vector<double> v = u.samples();
  const double m = u.mean();
  for (double& x : v) x -= m;
  return u.with_samples(std::move(v));
}

inline FlowTrajectory<GridSignal> trajectory_frac(const json& cfg, const RunOptions& o) {
  auto u0 = grid_initial(cfg, o);
  if (field_or<bool>(cfg, "remove_mean", true)) u0 = mean_free(u0);
  FracFlowOptions opt;
  opt.p = field_or<double>(cfg, "p", 2.0);
  opt.record_every = field_or<std::size_t>(cfg, "record_every", 1);
  if (o.tol) opt.prox.gap_tol = *o.tol;
  return evolve_fractional(u0, field<double>(cfg, "s"), positive<double>(cfg, "tau"), field<std::size_t>(cfg, "steps"),
                           opt);
}

inline std::function<double(double)> weight_function(const json& j) {
  if (j.contains("polynomial")) {
    const auto c = field<std::vector<double>>(j, "polynomial");
    if (c.empty()) fail(ErrorCode::Schema, "field 'polynomial': needs coefficients");
    return [c](double x) {
      double v = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
      return v;
    };
  }
  fail(ErrorCode::Schema, "field 'polynomial': missing");
}

inline SampledWeight sampled_weight(const json& cfg, std::string_view key, double x0, double x1, std::size_t nodes) {
  if (!cfg.contains(key)) return SampledWeight::from_function(x0, x1, [](double) { return 1.0; }, nodes);
  const auto j = field<json>(cfg, key);
  if (j.contains("values")) {
    SampledWeight w{x0, x1, field<std::vector<double>>(j, "values")};
    if (w.values.size() != nodes) fail(ErrorCode::Schema, "field '" + std::string(key) + ".values': length must equal 'nodes'");
    return w;
  }
  try {
    return SampledWeight::from_function(x0, x1, weight_function(j), nodes);
  } catch (const Error& e) {
    rethrow_schema(key, e);
  }
}

inline Signature signature(const json& cfg, std::string_view key) { return field<Signature>(cfg, key); }

}  // namespace detail

/// Runs one command on a parsed configuration without touching the file system.
inline ScenarioOutputs run_scenario(const std::string& command_in, const json& cfg, const RunOptions& opt) {
  using namespace detail;
  check_version(cfg);
  std::string command = command_in;
  if (command == "run") {
    command = field<std::string>(cfg, "command");
    if (command == "run") fail(ErrorCode::Schema, "field 'command': must name a concrete command");
  }
  ScenarioOutputs out;
  out.name = field_or<std::string>(cfg, "name", "scenario");
  auto emit = [&out](const auto& traj) {
    out.trajectory_csv = trajectory_csv(traj);
    out.diagnostics_csv = diagnostics_csv(traj);
    out.events = events_json(traj);
  };

  if (command == "evolve-1d") {
    const auto t = trajectory_1d(cfg, opt);
    emit(t);
    out.bounds = bound_reports(cfg, t.states.front(), std::nullopt);
  } else if (command == "evolve-radial") {
    const auto t = trajectory_radial(cfg, opt);
    emit(t);
    out.bounds = bound_reports(cfg, t.states.front(), std::nullopt);
  } else if (command == "evolve-4th") {
    const auto t = trajectory_fourth(cfg, opt);
    emit(t);
    const int n = field<int>(cfg, "n");
    if (n >= 3) {
      const RadialStack ball({field<double>(cfg, "R0")}, {field<double>(cfg, "a0")}, 0.0, n);
      out.bounds = bound_reports(cfg, ball, std::nullopt);
    }
  } else if (command == "evolve-mm") {
    const auto t = trajectory_mm(cfg, opt);
    emit(t);
  } else if (command == "evolve-frac") {
    const auto t = trajectory_frac(cfg, opt);
    out.trajectory_csv = trajectory_csv(t);
    std::ostringstream os;
    write_diagnostics_csv(os, t, {"hs_norm", "tv", "dissipation_residual", "w1p_norm"}, "t");
    out.diagnostics_csv = os.str();
    out.events = events_json(t);
    out.bounds = bound_reports(cfg, t.states.front(), extinction_of(t));
    const auto d = dissipation_check(t);
    out.result = json{{"dissipation_max_relative", d.max_relative},
                      {"dissipation_integrated_relative", d.integrated_relative},
                      {"growth_envelope_ok", wminus1p_growth_check(t, field<double>(cfg, "s"), field_or<double>(cfg, "p", 2.0)).ok}};
  } else if (command == "prox") {
    const auto f = datum_as<GridSignal>(cfg, "signal", opt.seed, "grid data");
    const double lambda = positive<double>(cfg, "lambda");
    const double s = field_or<double>(cfg, "s", 0.0);
    if (cfg.contains("s")) {
      FracProxOptions po;
      if (opt.tol) po.gap_tol = *opt.tol;
      const auto r = FractionalProx(f.size(), f.spacing(), s).solve(mean_free(f), lambda, po);
      out.result = json{{"w", r.w}, {"gap", r.gap}};
    } else {
      const auto method = field_or<std::string>(cfg, "method", "exact");
      GridSignal w = f;
      if (method == "exact") {
        w = prox_tv_path(f, lambda);
      } else if (method == "primal-dual") {
        PrimalDualOptions po;
        if (opt.tol) po.gap_tol = *opt.tol;
        w = prox_tv_primal_dual(f, lambda, po).w;
      } else {
        fail(ErrorCode::Schema, "field 'method': expected exact or primal-dual");
      }
      out.result = json{{"w", w}, {"certificate", verify_subdifferential(w, f, lambda)}};
    }
  } else if (command == "calibrate") {
    const auto interval = field<std::vector<double>>(cfg, "interval");
    if (interval.size() != 2 || !(interval[1] > interval[0]))
      fail(ErrorCode::Schema, "field 'interval': expected [x0, x1] with x0 < x1");
    const auto nodes = field_or<std::size_t>(cfg, "nodes", 2049);
    const auto a = sampled_weight(cfg, "a", interval[0], interval[1], nodes);
    const auto b = sampled_weight(cfg, "b", interval[0], interval[1], nodes);
    out.result = interval_calibrable_weighted(a, b, signature(cfg, "chi"), opt.tol.value_or(field_or<double>(cfg, "tol", 1e-6)));
  } else if (command == "calibrate-4th") {
    const int n = positive<int>(cfg, "n");
    const auto chi = signature(cfg, "chi");
    if (cfg.contains("R1")) {
      const auto r = annulus_calibrable_fourth(n, positive<double>(cfg, "R0"), positive<double>(cfg, "R1"), chi,
                                               opt.tol.value_or(field_or<double>(cfg, "tol", 1e-9)));
      out.result = json{{"feasible", r.feasible}, {"profile", r.profile}};
    } else {
      if (chi.size() != 1) fail(ErrorCode::Schema, "field 'chi': a ball takes one sign");
      const auto p = fourth_ball_calibration(n, positive<double>(cfg, "R0"), chi[0]);
      out.result = json{{"feasible", p.feasible}, {"profile", p}};
    }
  } else if (command == "bounds") {
    const Datum u0 = [&] {
      try {
        return parse_datum(field<json>(cfg, "initial"), opt.seed);
      } catch (const Error& e) {
        rethrow_schema("initial", e);
      }
    }();
    if (!cfg.contains("bounds")) fail(ErrorCode::Schema, "field 'bounds': missing");
    out.bounds = bound_reports(cfg, u0, std::nullopt);
  } else if (command == "check-regularity") {
    const json ev = field<json>(cfg, "evolve");
    const auto sub = field<std::string>(ev, "command");
    const double tol = opt.tol.value_or(field_or<double>(cfg, "tol", 1e-8));
    json res;
    try {
      if (sub == "evolve-1d") {
        res["jump_monotonicity"] = check_jump_monotonicity(trajectory_1d(ev, opt), tol);
      } else if (sub == "evolve-radial") {
        res["jump_monotonicity"] = check_jump_monotonicity(trajectory_radial(ev, opt), tol);
      } else if (sub == "evolve-4th") {
        res["jump_monotonicity"] = check_jump_monotonicity(trajectory_fourth(ev, opt), tol);
      } else if (sub == "evolve-mm" || sub == "evolve-frac") {
        const auto t = sub == "evolve-mm" ? trajectory_mm(ev, opt) : trajectory_frac(ev, opt);
        res["jump_monotonicity"] = check_jump_monotonicity(t, tol);
        if (t.states.front().geometry() != GridGeometry::Radial) res["gradient_bound"] = check_gradient_bound_1d(t, tol);
      } else {
        fail(ErrorCode::Schema, "field 'command': unknown evolution '" + sub + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Schema) rethrow_schema("evolve", e);
      throw;
    }
    out.result = res;
  } else if (command == "find-qstar") {
    out.result = find_q_star(field_or<int>(cfg, "n", 2), opt.tol.value_or(field_or<double>(cfg, "tol", 1e-9)));
  } else {
    fail(ErrorCode::Schema, "field 'command': unknown command '" + command + "'");
  }
  return out;
}

/// Writes the non-empty artifacts as <name>.trajectory.csv, <name>.diagnostics.csv,
/// <name>.events.json, <name>.bounds.json and <name>.result.json; returns the paths written.
inline std::vector<std::filesystem::path> write_outputs(const ScenarioOutputs& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& suffix, const std::string& text) {
    const auto path = dir / (o.name + suffix);
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot open " + path.string());
    f << text;
    written.push_back(path);
  };
  if (!o.trajectory_csv.empty()) put(".trajectory.csv", o.trajectory_csv);
  if (!o.diagnostics_csv.empty()) put(".diagnostics.csv", o.diagnostics_csv);
  if (!o.events.is_null()) put(".events.json", o.events.dump(2) + "\n");
  if (!o.bounds.is_null()) put(".bounds.json", o.bounds.dump(2) + "\n");
  if (!o.result.is_null()) put(".result.json", o.result.dump(2) + "\n");
  return written;
}

/// Parses a configuration file; syntax errors are schema errors.
inline json load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Schema, std::string("field '': invalid JSON: ") + e.what());
  }
}

}  // namespace tvflow
