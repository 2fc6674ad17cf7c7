#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tvflow/core.hpp"

namespace tvflow {

struct RegionSpeed {
  std::size_t region;
  double rate;
  Signature signature;
};

/// Calibrated speed of a ball (R_in = 0, no chi_in), an annulus, or a ball
/// complement (R_out = inf, no chi_out).
inline double region_speed_radial(int n, double R_in, double R_out, std::optional<int> chi_in,
                                  std::optional<int> chi_out) {
  require(n >= 1, ErrorCode::Geometry, "dimension must be >= 1");
  auto check_sign = [](std::optional<int> c) {
    require(!c || *c == 1 || *c == -1, ErrorCode::Geometry, "signature entries must be +-1");
  };
  check_sign(chi_in);
  check_sign(chi_out);
  if (std::isinf(R_out)) {
    require(R_in > 0.0 && !chi_out && chi_in, ErrorCode::Geometry,
            "a ball complement needs R_in > 0, chi_in and no chi_out");
    return 0.0;
  }
  require(R_out > R_in && R_in >= 0.0, ErrorCode::Geometry, "need 0 <= R_in < R_out");
  require(chi_out.has_value(), ErrorCode::Geometry, "bounded regions need chi_out");
  if (R_in == 0.0) {
    require(!chi_in, ErrorCode::Geometry, "a ball has no inner boundary");
    return *chi_out * n / R_out;
  }
  require(chi_in.has_value(), ErrorCode::Geometry, "an annulus needs chi_in");
  return n * (*chi_out * std::pow(R_out, n - 1) + *chi_in * std::pow(R_in, n - 1)) /
         (std::pow(R_out, n) - std::pow(R_in, n));
}

/// One signature per region, innermost first. Ball: {chi_out}; annulus:
/// {chi_in, chi_out}; outer complement: {chi_in}. chi = sgn(neighbour - self).
inline std::vector<Signature> signatures_from_stack(const RadialStack& u) {
  std::vector<Signature> out;
  if (u.is_constant()) return out;
  const std::size_t m = u.size();
  for (std::size_t k = 0; k <= m; ++k) {
    const double v = u.region_value(k);
    std::vector<int> chi;
    if (k > 0) chi.push_back(sign(u.region_value(k - 1) - v));
    if (k < m) chi.push_back(sign(u.region_value(k + 1) - v));
    out.emplace_back(std::move(chi));
  }
  return out;
}

inline std::vector<RegionSpeed> region_speeds(const RadialStack& u) {
  std::vector<RegionSpeed> out;
  const auto sigs = signatures_from_stack(u);
  const int n = u.dimension();
  for (std::size_t k = 0; k < sigs.size(); ++k) {
    const bool outer = k == u.size();
    const double R_in = u.inner_radius(k);
    const double R_out = outer ? kInf : u.radii()[k];
    std::optional<int> chi_in, chi_out;
    if (k > 0) chi_in = sigs[k][0];
    if (!outer) chi_out = sigs[k][k > 0 ? 1 : 0];
    out.push_back(RegionSpeed{k, region_speed_radial(n, R_in, R_out, chi_in, chi_out), sigs[k]});
  }
  return out;
}

/// Event-driven evolution of a stack on [0, T] (T may be infinite).
///
/// Diagnostics "tv", and for zero outer value "l1", "l2".
inline FlowTrajectory<RadialStack> evolve_radial(const RadialStack& u0, double T) {
  require(T >= 0.0, ErrorCode::InvalidArgument, "horizon must be non-negative");
  FlowTrajectory<RadialStack> traj;
  auto record = [&traj](double t, const RadialStack& u) {
    traj.push(t, u);
    traj.diagnostics["tv"].push_back(total_variation(u));
    if (u.outer_value() == 0.0) {
      traj.diagnostics["l1"].push_back(lp_norm(u, 1.0));
      traj.diagnostics["l2"].push_back(lp_norm(u, 2.0));
    }
  };
  record(0.0, u0);
  RadialStack u = u0;
  double t = 0.0;
  while (!u.is_constant()) {
    const auto sp = region_speeds(u);
    const std::size_t m = u.size();
    std::optional<double> dt;
    std::vector<double> meet(m, kInf);
    for (std::size_t k = 0; k < m; ++k) {
      const double gap = u.region_value(k + 1) - u.region_value(k);
      const double closing = sp[k].rate - sp[k + 1].rate;
      if (gap * closing > 0.0) {
        meet[k] = gap / closing;
        if (!dt || meet[k] < *dt) dt = meet[k];
      }
    }
    if (!dt || t + *dt > T) break;
    std::vector<double> vals(m);
    for (std::size_t k = 0; k < m; ++k) vals[k] = u.values()[k] + sp[k].rate * *dt;
    // snap simultaneous meetings; a run touching the outer region takes its value
    std::vector<bool> joins(m);
    for (std::size_t k = 0; k < m; ++k) joins[k] = meet[k] <= *dt * (1.0 + 1e-12) + 1e-15;
    for (std::size_t k = 0; k < m;) {
      std::size_t len = 1;
      while (k + len - 1 < m && joins[k + len - 1]) ++len;
      if (len > 1) {
        double target;
        if (k + len - 1 == m) {
          target = u.outer_value();
        } else {
          double mass = 0.0, vol = 0.0;
          for (std::size_t j = k; j < k + len; ++j) {
            mass += vals[j] * u.region_volume(j);
            vol += u.region_volume(j);
          }
          target = mass / vol;
        }
        for (std::size_t j = k; j < std::min(k + len, m); ++j) vals[j] = target;
      }
      k += len;
    }
    const std::size_t before = m;
    u = u.with_values(std::move(vals), u.outer_value());
    t += *dt;
    record(t, u);
    EventKind kind = EventKind::Merge;
    if (u.is_constant()) kind = u.outer_value() == 0.0 ? EventKind::Extinction : EventKind::Steady;
    traj.events.push_back(Event{t, kind, std::to_string(before) + " -> " + std::to_string(u.size()) +
                                             " bounded regions"});
  }
  if (std::isfinite(T) && T > t) {
    const auto sp = region_speeds(u);
    std::vector<double> vals = u.values();
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += sp[k].rate * (T - t);
    record(T, u.with_values(std::move(vals), u.outer_value()));
  }
  return traj;
}

/// Time after which the stack equals its outer value; 0 for constant data.
inline double extinction_time_radial(const RadialStack& u0) {
  const auto traj = evolve_radial(u0, kInf);
  return traj.times.back();
}

}  // namespace tvflow
