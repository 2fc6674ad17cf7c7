#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tvflow/bound_report.hpp"
#include "tvflow/core.hpp"
#include "tvflow/exact1d.hpp"
#include "tvflow/fourth.hpp"
#include "tvflow/fracflow.hpp"
#include "tvflow/minmov.hpp"
#include "tvflow/regularity.hpp"

namespace tvflow {

using json = nlohmann::json;

namespace detail {

/// Prefixes the field path of a schema error raised while parsing `key`.
[[noreturn]] inline void rethrow_schema(std::string_view key, const Error& e) {
  const std::string msg = e.what();
  const std::string tag = "field '";
  if (e.code() == ErrorCode::Schema && msg.rfind(tag, 0) == 0)
    fail(ErrorCode::Schema, tag + std::string(key) + "." + msg.substr(tag.size()));
  fail(ErrorCode::Schema, tag + std::string(key) + "': " + msg);
}

/// Reads j[key] as T; every failure becomes a schema error naming the field.
template <class T>
T field(const json& j, std::string_view key) {
  if (!j.is_object()) fail(ErrorCode::Schema, "field '" + std::string(key) + "': parent is not an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::Schema, "field '" + std::string(key) + "': missing");
  try {
    return it->template get<T>();
  } catch (const Error& e) {
    rethrow_schema(key, e);
  } catch (const json::exception&) {
    fail(ErrorCode::Schema, "field '" + std::string(key) + "': wrong type");
  }
}

template <class T>
T field_or(const json& j, std::string_view key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return field<T>(j, key);
}

/// Numbers, with null standing for an infinite value.
inline double number_or_inf(const json& j) {
  if (j.is_null()) return kInf;
  if (!j.is_number()) fail(ErrorCode::Schema, "field 'value': expected a number");
  return j.get<double>();
}

}  // namespace detail

inline std::string to_string(GridGeometry g) {
  switch (g) {
    case GridGeometry::Periodic: return "periodic";
    case GridGeometry::Neumann: return "neumann";
    case GridGeometry::Radial: return "radial";
  }
  return "unknown";
}

inline GridGeometry grid_geometry_from_string(const std::string& s) {
  if (s == "periodic") return GridGeometry::Periodic;
  if (s == "neumann") return GridGeometry::Neumann;
  if (s == "radial") return GridGeometry::Radial;
  fail(ErrorCode::Schema, "field 'geometry': unknown geometry '" + s + "'");
}

inline EventKind event_kind_from_string(const std::string& s) {
  if (s == "merge") return EventKind::Merge;
  if (s == "extinction") return EventKind::Extinction;
  if (s == "steady") return EventKind::Steady;
  fail(ErrorCode::Schema, "field 'kind': unknown event kind '" + s + "'");
}

inline void to_json(json& j, const Atom& a) { j = json{{"location", a.location}, {"size", a.size}}; }
inline void from_json(const json& j, Atom& a) {
  a.location = detail::field<double>(j, "location");
  a.size = detail::field<double>(j, "size");
}

inline void to_json(json& j, const JumpMeasure& m) { j = json{{"atoms", m.atoms}}; }
inline void from_json(const json& j, JumpMeasure& m) { m = JumpMeasure(detail::field<std::vector<Atom>>(j, "atoms")); }

inline void to_json(json& j, const Signature& s) { j = s.chi; }
inline void from_json(const json& j, Signature& s) {
  if (!j.is_array()) fail(ErrorCode::Schema, "field 'signature': expected an array of +-1");
  s = Signature(j.get<std::vector<int>>());
}

inline void to_json(json& j, const Event& e) { j = json{{"time", e.time}, {"kind", to_string(e.kind)}, {"detail", e.detail}}; }
inline void from_json(const json& j, Event& e) {
  e.time = detail::field<double>(j, "time");
  e.kind = event_kind_from_string(detail::field<std::string>(j, "kind"));
  e.detail = detail::field_or<std::string>(j, "detail", "");
}

inline void to_json(json& j, const FourthBallState& s) {
  j = json{{"t", s.t}, {"a", s.a}, {"R", s.R}, {"n", s.n}, {"tail", s.tail}, {"gap", s.gap}};
}
inline void from_json(const json& j, FourthBallState& s) {
  s.t = detail::field<double>(j, "t");
  s.a = detail::field<double>(j, "a");
  s.R = detail::field<double>(j, "R");
  s.n = detail::field<int>(j, "n");
  s.tail = detail::field_or<bool>(j, "tail", false);
  s.gap = detail::field_or<double>(j, "gap", s.a);
}

inline void to_json(json& j, const BoundReport& r) {
  j = json{{"bound", r.bound},
           {"formula", r.formula},
           {"constants", r.constants},
           {"certified_constants", r.certified_constants}};
  j["actual"] = r.actual ? json(*r.actual) : json(nullptr);
  j["slack"] = r.slack ? json(*r.slack) : json(nullptr);
}
inline void from_json(const json& j, BoundReport& r) {
  r.bound = detail::field<double>(j, "bound");
  r.formula = detail::field<std::string>(j, "formula");
  r.constants = detail::field_or<std::map<std::string, double>>(j, "constants", {});
  r.certified_constants = detail::field_or<bool>(j, "certified_constants", true);
  r.actual.reset();
  r.slack.reset();
  if (j.contains("actual") && !j["actual"].is_null()) r.actual = detail::field<double>(j, "actual");
  if (j.contains("slack") && !j["slack"].is_null()) r.slack = detail::field<double>(j, "slack");
}

inline void to_json(json& j, const RegularityViolation& v) {
  j = json{{"earlier", v.earlier}, {"later", v.later}, {"location", v.location},
           {"size", v.size},       {"bound", v.bound}, {"kind", v.kind}};
}
inline void from_json(const json& j, RegularityViolation& v) {
  v.earlier = detail::field<std::size_t>(j, "earlier");
  v.later = detail::field<std::size_t>(j, "later");
  v.location = detail::field<double>(j, "location");
  v.size = detail::field<double>(j, "size");
  v.bound = detail::field<double>(j, "bound");
  v.kind = detail::field<std::string>(j, "kind");
}

inline void to_json(json& j, const RegularityReport& r) {
  j = json{{"states", r.states}, {"violation_count", r.violation_count}, {"violations", r.violations}, {"ok", r.ok()}};
}
inline void from_json(const json& j, RegularityReport& r) {
  r.states = detail::field<std::size_t>(j, "states");
  r.violation_count = detail::field<std::size_t>(j, "violation_count");
  r.violations = detail::field<std::vector<RegularityViolation>>(j, "violations");
}

inline void to_json(json& j, const IntervalCalibration& c) {
  j = json{{"calibrable", c.calibrable}, {"lambda", c.lambda}, {"max_abs_z", c.max_abs_z}};
}

inline void to_json(json& j, const CalibrationProfile& p) {
  j = json{{"n", p.n},           {"coefficients", p.c}, {"lambda", p.lambda}, {"feasible", p.feasible},
           {"max_abs_z", p.max_abs_z}, {"r_min", p.r_min}, {"r_max", p.r_max}};
}

inline void to_json(json& j, const QStarResult& q) {
  j = json{{"q_star", q.q_star},
           {"feasible_ratio", q.feasible_ratio},
           {"infeasible_ratio", q.infeasible_ratio},
           {"iterations", q.iterations}};
}

inline void to_json(json& j, const ProxCertificate& c) {
  j = json{{"bound_violation", c.bound_violation}, {"residual", c.residual}, {"pairing_gap", c.pairing_gap}};
}

template <class State>
void to_json(json& j, const FlowTrajectory<State>& t) {
  j = json{{"times", t.times}, {"states", t.states}, {"events", t.events}, {"diagnostics", t.diagnostics}};
}

template <class State>
void from_json(const json& j, FlowTrajectory<State>& t) {
  t = FlowTrajectory<State>{};
  const auto times = detail::field<std::vector<double>>(j, "times");
  const auto states = detail::field<std::vector<State>>(j, "states");
  if (times.size() != states.size()) fail(ErrorCode::Schema, "field 'states': length differs from 'times'");
  for (std::size_t k = 0; k < times.size(); ++k) t.push(times[k], states[k]);
  t.events = detail::field_or<std::vector<Event>>(j, "events", {});
  t.diagnostics = detail::field_or<std::map<std::string, std::vector<double>>>(j, "diagnostics", {});
}

}  // namespace tvflow

namespace nlohmann {

template <>
struct adl_serializer<tvflow::StepFunction1D> {
  static void to_json(json& j, const tvflow::StepFunction1D& u) {
    j = json{{"type", "step"}, {"breakpoints", u.breakpoints()}, {"values", u.values()}, {"period", u.period()}};
  }
  /// Accepts either breakpoints + values or lengths + values (+ origin).
  static tvflow::StepFunction1D from_json(const json& j) {
    using tvflow::detail::field;
    using tvflow::detail::field_or;
    const auto values = field<std::vector<double>>(j, "values");
    try {
      if (j.contains("lengths"))
        return tvflow::StepFunction1D::from_lengths(values, field<std::vector<double>>(j, "lengths"),
                                                    field_or<double>(j, "origin", 0.0));
      return tvflow::StepFunction1D(field<std::vector<double>>(j, "breakpoints"), values,
                                    field_or<double>(j, "period", 1.0));
    } catch (const tvflow::Error& e) {
      if (e.code() == tvflow::ErrorCode::Schema) throw;
      tvflow::fail(tvflow::ErrorCode::Schema, std::string("field 'values': ") + e.what());
    }
  }
};

template <>
struct adl_serializer<tvflow::RadialStack> {
  static void to_json(json& j, const tvflow::RadialStack& u) {
    j = json{{"type", "stack"},
             {"radii", u.radii()},
             {"values", u.values()},
             {"outer", u.outer_value()},
             {"dimension", u.dimension()}};
  }
  static tvflow::RadialStack from_json(const json& j) {
    using tvflow::detail::field;
    using tvflow::detail::field_or;
    const auto radii = field<std::vector<double>>(j, "radii");
    const auto values = field<std::vector<double>>(j, "values");
    const int dim = field<int>(j, "dimension");
    try {
      return tvflow::RadialStack(radii, values, field_or<double>(j, "outer", 0.0), dim);
    } catch (const tvflow::Error& e) {
      if (e.code() == tvflow::ErrorCode::Schema) throw;
      tvflow::fail(tvflow::ErrorCode::Schema, std::string("field 'radii': ") + e.what());
    }
  }
};

template <>
struct adl_serializer<tvflow::GridSignal> {
  static void to_json(json& j, const tvflow::GridSignal& u) {
    j = json{{"type", "grid"},
             {"geometry", tvflow::to_string(u.geometry())},
             {"samples", u.samples()},
             {"spacing", u.spacing()},
             {"dimension", u.dimension()},
             {"pinned_outer", u.pinned_outer()}};
  }
  static tvflow::GridSignal from_json(const json& j) {
    using tvflow::detail::field;
    using tvflow::detail::field_or;
    const auto geometry = tvflow::grid_geometry_from_string(field<std::string>(j, "geometry"));
    auto samples = field<std::vector<double>>(j, "samples");
    const double h = field<double>(j, "spacing");
    try {
      switch (geometry) {
        case tvflow::GridGeometry::Periodic: return tvflow::GridSignal::periodic(std::move(samples), h);
        case tvflow::GridGeometry::Neumann: return tvflow::GridSignal::neumann(std::move(samples), h);
        case tvflow::GridGeometry::Radial:
          return tvflow::GridSignal::radial(std::move(samples), h, field<int>(j, "dimension"),
                                            field_or<bool>(j, "pinned_outer", false));
      }
    } catch (const tvflow::Error& e) {
      if (e.code() == tvflow::ErrorCode::Schema) throw;
      tvflow::fail(tvflow::ErrorCode::Schema, std::string("field 'samples': ") + e.what());
    }
    tvflow::fail(tvflow::ErrorCode::Schema, "field 'geometry': unsupported");
  }
};

}  // namespace nlohmann
