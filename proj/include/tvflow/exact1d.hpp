#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tvflow/core.hpp"

namespace tvflow {

/// Rate of change of one plateau under the second-order flow: rate = theta / length.
struct PlateauSpeed {
  int theta;
  double rate;
  friend bool operator==(const PlateauSpeed&, const PlateauSpeed&) = default;
};

/// theta = +2 on strict local minima, -2 on strict local maxima, 0 otherwise.
inline std::vector<PlateauSpeed> speeds_1d(const StepFunction1D& u) {
  const std::size_t m = u.size();
  std::vector<PlateauSpeed> out(m, PlateauSpeed{0, 0.0});
  if (m < 2) return out;
  const auto& v = u.values();
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = v[(k + m - 1) % m];
    const double next = v[(k + 1) % m];
    int theta = 0;
    if (v[k] < prev && v[k] < next)
      theta = 2;
    else if (v[k] > prev && v[k] > next)
      theta = -2;
    out[k] = PlateauSpeed{theta, theta / u.length(k)};
  }
  return out;
}

namespace detail {

/// Time until plateaus k and k+1 meet under linear motion, or nullopt.
inline std::optional<double> pair_meeting_time(const StepFunction1D& u, const std::vector<PlateauSpeed>& sp,
                                               std::size_t k) {
  const std::size_t next = (k + 1) % u.size();
  const double gap = u.values()[next] - u.values()[k];
  const double closing = sp[k].rate - sp[next].rate;
  if (gap * closing <= 0.0) return std::nullopt;
  return gap / closing;
}

}  // namespace detail

/// Smallest t > 0 at which two cyclic neighbours coincide; nullopt when steady.
inline std::optional<double> next_merge_time(const StepFunction1D& u) {
  if (u.size() < 2) return std::nullopt;
  const auto sp = speeds_1d(u);
  std::optional<double> best;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u.size() == 2 && k == 1) break;  // both interfaces join the same pair
    if (auto t = detail::pair_meeting_time(u, sp, k); t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Exact state at elapsed time dt < next merge, no canonicalization across merges.
inline StepFunction1D advance_linear(const StepFunction1D& u, double dt) {
  const auto sp = speeds_1d(u);
  std::vector<double> vals = u.values();
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += sp[k].rate * dt;
  return u.with_values(std::move(vals));
}

/// Event-driven evolution on [0, T]. T may be infinite, in which case the run
/// stops at the last merge.
///
/// States are recorded at t = 0, at every merge and at T. Diagnostics:
/// "tv" and "dissipation_rate" (d/dt of half the squared L2 distance to the mean),
/// sampled at the recorded times.
inline FlowTrajectory<StepFunction1D> evolve_1d(const StepFunction1D& u0, double T) {
  require(T >= 0.0, ErrorCode::InvalidArgument, "horizon must be non-negative");
  FlowTrajectory<StepFunction1D> traj;
  auto record = [&traj](double t, const StepFunction1D& u) {
    const auto sp = speeds_1d(u);
    double rate = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) rate += sp[k].theta * u.values()[k];
    traj.push(t, u);
    traj.diagnostics["tv"].push_back(total_variation(u));
    traj.diagnostics["dissipation_rate"].push_back(rate);
  };
  record(0.0, u0);
  StepFunction1D u = u0;
  double t = 0.0;
  while (u.size() > 1) {
    const auto dt = next_merge_time(u);
    if (!dt || t + *dt > T) break;
    const auto sp = speeds_1d(u);
    std::vector<double> vals = u.values();
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += sp[k].rate * *dt;
    // every pair meeting at this instant (up to round-off) is snapped together
    const std::size_t m = vals.size();
    std::vector<bool> joins(m, false);
    for (std::size_t k = 0; k < m; ++k) {
      if (m == 2 && k == 1) break;
      auto tk = detail::pair_meeting_time(u, sp, k);
      if (tk && *tk <= *dt * (1.0 + 1e-12) + 1e-15) joins[k] = true;
    }
    const auto lens = u.lengths();
    std::size_t start = 0;
    while (start < m && joins[(start + m - 1) % m]) ++start;
    if (start == m) {
      const double mean = u.mean();
      std::fill(vals.begin(), vals.end(), mean);
    } else {
      for (std::size_t i = 0; i < m;) {
        const std::size_t k0 = (start + i) % m;
        std::size_t len = 1;
        while (i + len < m && joins[(start + i + len - 1) % m]) ++len;
        if (len > 1) {
          double mass = 0.0, total = 0.0;
          for (std::size_t j = 0; j < len; ++j) {
            const std::size_t k = (k0 + j) % m;
            mass += vals[k] * lens[k];
            total += lens[k];
          }
          for (std::size_t j = 0; j < len; ++j) vals[(k0 + j) % m] = mass / total;
        }
        i += len;
      }
    }
    const std::size_t before = u.size();
    u = u.with_values(std::move(vals));
    t += *dt;
    record(t, u);
    const bool done = u.size() == 1;
    traj.events.push_back(Event{t, done ? EventKind::Extinction : EventKind::Merge,
                                std::to_string(before) + " -> " + std::to_string(u.size()) + " plateaus"});
  }
  if (std::isfinite(T) && T > t) record(T, advance_linear(u, T - t));
  return traj;
}

/// Exact solution at time t.
inline StepFunction1D state_at_1d(const StepFunction1D& u0, double t) { return evolve_1d(u0, t).final_state(); }

/// Time of the last merge, after which u is the constant mean.
inline double extinction_time_1d(const StepFunction1D& u0) {
  const auto traj = evolve_1d(u0, kInf);
  return traj.times.back();
}

// ---------------------------------------------------------------------------
// Weighted calibrability of an interval

/// Samples of a weight on a uniform grid over [x0, x1].
struct SampledWeight {
  double x0;
  double x1;
  std::vector<double> values;

  static SampledWeight from_function(double x0, double x1, const std::function<double(double)>& f,
                                     std::size_t nodes = 2049) {
    require(nodes >= 2 && x1 > x0, ErrorCode::InvalidArgument, "invalid sampling interval");
    SampledWeight w{x0, x1, std::vector<double>(nodes)};
    for (std::size_t i = 0; i < nodes; ++i)
      w.values[i] = f(x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nodes - 1));
    return w;
  }

  double spacing() const { return (x1 - x0) / static_cast<double>(values.size() - 1); }
};

struct IntervalCalibration {
  bool calibrable;
  double lambda;
  double max_abs_z;
  std::vector<double> z_profile;
};

/// Builds z from (a z)' = lambda b with a z = -chi_left a at x0 and chi_right a at x1
/// (trapezoidal quadrature), and tests |z| <= 1 + tol on the grid.
inline IntervalCalibration interval_calibrable_weighted(const SampledWeight& a, const SampledWeight& b,
                                                        const Signature& chi, double tol = 1e-6) {
  require(chi.size() == 2, ErrorCode::InvalidArgument, "interval signature needs two entries");
  require(a.values.size() == b.values.size() && a.values.size() >= 2, ErrorCode::InvalidArgument,
          "weights must share a grid with at least 2 nodes");
  require(a.x0 == b.x0 && a.x1 == b.x1, ErrorCode::InvalidArgument, "weights must share an interval");
  for (std::size_t i = 0; i < a.values.size(); ++i)
    require(a.values[i] > 0.0 && b.values[i] > 0.0, ErrorCode::InvalidWeight, "weights must be positive");

  const std::size_t n = a.values.size();
  const double h = a.spacing();
  std::vector<double> B(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) B[i] = B[i - 1] + 0.5 * h * (b.values[i - 1] + b.values[i]);
  const double a0 = a.values.front(), a1 = a.values.back();
  const double lambda = (chi[1] * a1 + chi[0] * a0) / B.back();

  IntervalCalibration out{true, lambda, 0.0, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.z_profile[i] = (-chi[0] * a0 + lambda * B[i]) / a.values[i];
    out.max_abs_z = std::max(out.max_abs_z, std::abs(out.z_profile[i]));
  }
  out.calibrable = out.max_abs_z <= 1.0 + tol;
  return out;
}

}  // namespace tvflow
