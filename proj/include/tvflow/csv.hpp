#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "tvflow/core.hpp"
#include "tvflow/fourth.hpp"

namespace tvflow {

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan" otherwise.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

inline void append(std::vector<std::string>& row, const std::vector<double>& xs, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) row.push_back(i < xs.size() ? format_double(xs[i]) : "");
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

template <class State, class Width>
std::size_t max_width(const FlowTrajectory<State>& t, Width w) {
  std::size_t m = 0;
  for (const auto& s : t.states) m = std::max(m, w(s));
  return m;
}

}  // namespace detail

/// One row per recorded time: time, breakpoints b0.., values v0..; short rows are padded with empty cells.
inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory<StepFunction1D>& t) {
  const std::size_t w = detail::max_width(t, [](const StepFunction1D& s) { return s.size(); });
  std::vector<std::string> head{"time"};
  for (auto& h : detail::numbered("b", w)) head.push_back(h);
  for (auto& h : detail::numbered("v", w)) head.push_back(h);
  detail::write_row(os, head);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{format_double(t.times[k])};
    detail::append(row, t.states[k].breakpoints(), w);
    detail::append(row, t.states[k].values(), w);
    detail::write_row(os, row);
  }
}

/// time, radii r0.., values v0.., outer.
inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory<RadialStack>& t) {
  const std::size_t w = detail::max_width(t, [](const RadialStack& s) { return s.size(); });
  std::vector<std::string> head{"time"};
  for (auto& h : detail::numbered("r", w)) head.push_back(h);
  for (auto& h : detail::numbered("v", w)) head.push_back(h);
  head.push_back("outer");
  detail::write_row(os, head);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{format_double(t.times[k])};
    detail::append(row, t.states[k].radii(), w);
    detail::append(row, t.states[k].values(), w);
    row.push_back(format_double(t.states[k].outer_value()));
    detail::write_row(os, row);
  }
}

inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory<FourthBallState>& t) {
  detail::write_row(os, {"t", "a", "R", "gap"});
  for (const auto& s : t.states)
    detail::write_row(os, {format_double(s.t), format_double(s.a), format_double(s.R), format_double(s.gap)});
}

/// time, u0..u{N-1}.
inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory<GridSignal>& t) {
  const std::size_t w = detail::max_width(t, [](const GridSignal& s) { return s.size(); });
  std::vector<std::string> head{"time"};
  for (auto& h : detail::numbered("u", w)) head.push_back(h);
  detail::write_row(os, head);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{format_double(t.times[k])};
    detail::append(row, t.states[k].samples(), w);
    detail::write_row(os, row);
  }
}

/// time followed by the diagnostic series in the given column order (all series must be full length).
template <class State>
void write_diagnostics_csv(std::ostream& os, const FlowTrajectory<State>& t, const std::vector<std::string>& columns,
                           const std::string& time_label = "time") {
  std::vector<std::string> head{time_label};
  for (const auto& c : columns) {
    require(t.diagnostics.count(c) && t.diagnostics.at(c).size() == t.size(), ErrorCode::InvalidArgument,
            "diagnostic series '" + c + "' is missing or incomplete");
    head.push_back(c);
  }
  detail::write_row(os, head);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{format_double(t.times[k])};
    for (const auto& c : columns) row.push_back(format_double(t.diagnostics.at(c)[k]));
    detail::write_row(os, row);
  }
}

/// All diagnostics with full-length series, in name order.
template <class State>
void write_diagnostics_csv(std::ostream& os, const FlowTrajectory<State>& t) {
  std::vector<std::string> cols;
  for (const auto& [name, series] : t.diagnostics)
    if (series.size() == t.size()) cols.push_back(name);
  write_diagnostics_csv(os, t, cols);
}

}  // namespace tvflow
