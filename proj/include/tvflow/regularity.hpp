#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tvflow/core.hpp"
#include "tvflow/fourth.hpp"

namespace tvflow {

// ---------------------------------------------------------------------------
// Jump measures

inline JumpMeasure jump_measure(const StepFunction1D& u) {
  std::vector<Atom> atoms;
  const std::size_t m = u.size();
  if (m < 2) return JumpMeasure{};
  for (std::size_t k = 0; k < m; ++k) {
    const double jump = std::abs(u.values()[k] - u.values()[(k + m - 1) % m]);
    if (jump > 0.0) atoms.push_back(Atom{u.breakpoints()[k], jump});
  }
  return JumpMeasure(std::move(atoms));
}

inline JumpMeasure jump_measure(const RadialStack& u) {
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double jump = std::abs(u.region_value(k + 1) - u.region_value(k));
    if (jump > 0.0) atoms.push_back(Atom{u.radii()[k], jump});
  }
  return JumpMeasure(std::move(atoms));
}

/// The ball profile jumps by its gap at the radius.
inline JumpMeasure jump_measure(const FourthBallState& s) {
  if (s.gap == 0.0) return JumpMeasure{};
  return JumpMeasure({Atom{s.R, std::abs(s.gap)}});
}

/// Default jump threshold on grids: 10 times the median edge difference,
/// floored at 1e-12 times the signal scale.
inline double default_jump_threshold(const GridSignal& u) {
  std::vector<double> d(u.edge_count());
  double scale = 0.0;
  for (std::size_t e = 0; e < d.size(); ++e) d[e] = std::abs(u.edge_difference(e));
  for (double v : u.samples()) scale = std::max(scale, std::abs(v));
  if (d.empty()) return 0.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return std::max(10.0 * d[d.size() / 2], 1e-12 * scale);
}

inline JumpMeasure jump_measure(const GridSignal& u, std::optional<double> threshold = std::nullopt) {
  const double thr = threshold ? *threshold : default_jump_threshold(u);
  std::vector<Atom> atoms;
  for (std::size_t e = 0; e < u.edge_count(); ++e) {
    const double jump = std::abs(u.edge_difference(e));
    if (jump > thr && jump > 0.0) atoms.push_back(Atom{u.edge_location(e), jump});
  }
  return JumpMeasure(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Reports

struct RegularityViolation {
  std::size_t earlier;
  std::size_t later;
  double location;
  double size;
  /// Earlier size at that location; zero when the location was not a jump.
  double bound;
  std::string kind;
};

struct RegularityReport {
  std::size_t states = 0;
  std::size_t violation_count = 0;
  std::vector<RegularityViolation> violations;
  bool ok() const noexcept { return violation_count == 0; }
};

namespace detail {

inline constexpr std::size_t kMaxListedViolations = 100;

inline void add_violation(RegularityReport& rep, RegularityViolation v) {
  ++rep.violation_count;
  if (rep.violations.size() < kMaxListedViolations) rep.violations.push_back(std::move(v));
}

/// Atom-based check against the running intersection of earlier jump sets.
template <class State>
RegularityReport check_atoms(const std::vector<State>& states, double tol, double location_tol) {
  RegularityReport rep;
  rep.states = states.size();
  if (states.empty()) return rep;
  struct Entry {
    Atom atom;
    std::size_t index;
  };
  std::vector<Entry> env;
  double scale = 0.0;
  for (const auto& a : jump_measure(states[0]).atoms) {
    env.push_back({a, 0});
    scale = std::max(scale, a.size);
  }
  const double size_tol = tol * (1.0 + scale);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const auto atoms = jump_measure(states[k]).atoms;
    std::vector<Entry> next;
    for (const auto& a : atoms) {
      auto it = std::find_if(env.begin(), env.end(), [&](const Entry& e) {
        return std::abs(e.atom.location - a.location) <= location_tol * (1.0 + std::abs(a.location));
      });
      if (it == env.end()) {
        add_violation(rep, {k - 1, k, a.location, a.size, 0.0, "location"});
        continue;
      }
      if (a.size > it->atom.size + size_tol) add_violation(rep, {it->index, k, a.location, a.size, it->atom.size, "size"});
      next.push_back(a.size < it->atom.size ? Entry{a, k} : *it);
    }
    env = std::move(next);
  }
  return rep;
}

/// Per-edge check of |D_e u(t2)| <= min over t1 < t2 of |D_e u(t1)| + tol;
/// only edges selected by `consider` at t2 are tested.
template <class Pred>
RegularityReport check_edges(const std::vector<GridSignal>& states, double tol, Pred consider, const char* kind) {
  RegularityReport rep;
  rep.states = states.size();
  if (states.empty()) return rep;
  const std::size_t E = states[0].edge_count();
  std::vector<double> best(E);
  std::vector<std::size_t> where(E, 0);
  double scale = 0.0;
  for (std::size_t e = 0; e < E; ++e) {
    best[e] = std::abs(states[0].edge_difference(e));
    scale = std::max(scale, best[e]);
  }
  const double abs_tol = tol * (1.0 + scale);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const auto& u = states[k];
    require(u.edge_count() == E, ErrorCode::InvalidArgument, "trajectory states must share one grid");
    for (std::size_t e = 0; e < E; ++e) {
      const double d = std::abs(u.edge_difference(e));
      if (consider(u, e, d) && d > best[e] + abs_tol)
        add_violation(rep, {where[e], k, u.edge_location(e), d, best[e], kind});
      if (d < best[e]) {
        best[e] = d;
        where[e] = k;
      }
    }
  }
  return rep;
}

}  // namespace detail

/// Jump-set inclusion and jump-size monotonicity along a trajectory: every
/// atom at a later time sits at an atom of every earlier time, no larger.
inline RegularityReport check_jump_monotonicity(const FlowTrajectory<StepFunction1D>& traj, double tol = 1e-8) {
  return detail::check_atoms(traj.states, tol, 1e-12);
}
inline RegularityReport check_jump_monotonicity(const FlowTrajectory<RadialStack>& traj, double tol = 1e-8) {
  return detail::check_atoms(traj.states, tol, 1e-12);
}
inline RegularityReport check_jump_monotonicity(const FlowTrajectory<FourthBallState>& traj, double tol = 1e-8) {
  return detail::check_atoms(traj.states, tol, 1e-12);
}

/// Grid version: edges carrying a detected jump at a later time must have had
/// at least that difference at every earlier time.
inline RegularityReport check_jump_monotonicity(const FlowTrajectory<GridSignal>& traj, double tol = 1e-8) {
  std::vector<double> thresholds;
  for (const auto& u : traj.states) thresholds.push_back(default_jump_threshold(u));
  std::size_t k = 0;
  const GridSignal* current = nullptr;
  return detail::check_edges(
      traj.states, tol,
      [&](const GridSignal& u, std::size_t, double d) {
        if (&u != current) {
          current = &u;
          k = static_cast<std::size_t>(&u - traj.states.data());
        }
        return d > thresholds[k];
      },
      "jump");
}

/// 1D pointwise gradient bound: |D_e u(t2)| <= |D_e u(t1)| + tol for every edge and t1 < t2.
inline RegularityReport check_gradient_bound_1d(const FlowTrajectory<GridSignal>& traj, double tol = 1e-8) {
  for (const auto& u : traj.states)
    require(u.geometry() != GridGeometry::Radial, ErrorCode::InvalidArgument, "gradient bound is a 1D check");
  return detail::check_edges(
      traj.states, tol, [](const GridSignal&, std::size_t, double) { return true; }, "gradient");
}

}  // namespace tvflow
