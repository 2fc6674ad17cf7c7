#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "tvflow/bound_report.hpp"
#include "tvflow/core.hpp"
#include "tvflow/exact1d.hpp"
#include "tvflow/fourth.hpp"
#include "tvflow/radial2.hpp"
#include "tvflow/spectral.hpp"

namespace tvflow {

/// Isoperimetric constant S_n = 1 / (n omega_n^{1/n}) on R^n.
inline double sobolev_constant(int n) {
  require(n >= 2, ErrorCode::NotApplicable, "the isoperimetric constant is used for n >= 2 only");
  return 1.0 / (n * std::pow(unit_ball_volume(n), 1.0 / n));
}

/// Sharp constant of ||u||_{2n/(n-2sigma)} <= C ||(-Delta)^{sigma/2} u||_2 on R^n (0 < sigma < n/2).
inline double sharp_fractional_sobolev_constant(int n, double sigma) {
  require(sigma > 0.0 && 2.0 * sigma < n, ErrorCode::NotApplicable, "need 0 < sigma < n/2");
  const double dn = n;
  const double sq = std::pow(2.0, -2.0 * sigma) * std::pow(std::numbers::pi, -sigma) *
                    std::tgamma(0.5 * (dn - 2.0 * sigma)) / std::tgamma(0.5 * (dn + 2.0 * sigma)) *
                    std::pow(std::tgamma(dn) / std::tgamma(0.5 * dn), 2.0 * sigma / dn);
  return std::sqrt(sq);
}

/// Default C_n: the Aubin-Talenti constant of ||u||_{2n/(n-2)} <= C ||grad u||_2.
inline double default_embedding_constant(int n) {
  require(n >= 3, ErrorCode::NotApplicable, "the gradient embedding constant needs n >= 3");
  return sharp_fractional_sobolev_constant(n, 1.0);
}

/// Default C_{n,s}: sharp constant of the H^s embedding into L^{2n/(n-2s)}.
inline double default_fractional_constant(int n, double s) {
  if (s == 0.0) return 1.0;
  return sharp_fractional_sobolev_constant(n, s);
}

/// ||u||_{D^{-1}} = ||grad (-Delta)^{-1} u||_2 for a radial stack with zero outer value, n >= 3.
///
/// With M(r) the mass inside B_r, the potential gradient is M(r) / (n omega_n r^{n-1}),
/// so the squared norm is int_0^inf M(r)^2 / (n omega_n r^{n-1}) dr, evaluated piecewise.
inline double d_minus1_norm(const RadialStack& u) {
  const int n = u.dimension();
  require(n >= 3, ErrorCode::NotApplicable, "the D^{-1} norm of radial data is finite only for n >= 3");
  require(u.outer_value() == 0.0, ErrorCode::Domain, "the D^{-1} norm needs zero outer value");
  const double w = unit_ball_volume(n);
  const double area = n * w;
  const double dn = n;
  double mass = 0.0, acc = 0.0;
  double r0 = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r1 = u.radii()[k];
    const double v = u.values()[k];
    // M(r) = A + B r^n on [r0, r1]
    const double B = v * w;
    const double A = mass - B * std::pow(r0, dn);
    auto prim = [&](double r) {
      double val = A * B * r * r + B * B * std::pow(r, dn + 2.0) / (dn + 2.0);
      if (r > 0.0) val += A * A * std::pow(r, 2.0 - dn) / (2.0 - dn);
      return val;
    };
    double piece = prim(r1) - prim(r0);
    if (r0 == 0.0) piece = B * B * std::pow(r1, dn + 2.0) / (dn + 2.0);
    acc += piece / area;
    mass = A + B * std::pow(r1, dn);
    r0 = r1;
  }
  if (r0 > 0.0) acc += mass * mass / (area * (dn - 2.0) * std::pow(r0, dn - 2.0));
  return std::sqrt(std::max(acc, 0.0));
}

/// T* <= S_n ||u0||_n for stacks in R^n, n >= 2; the actual time is attached.
inline BoundReport extinction_bound_second(const RadialStack& u0) {
  const int n = u0.dimension();
  BoundReport rep;
  if (n == 1) {
    rep.formula = "second-order-l1";
    rep.bound = lp_norm(u0, 1.0);
  } else {
    const double S = sobolev_constant(n);
    rep.formula = "second-order-sobolev";
    rep.constants = {{"S_n", S}, {"n", n}};
    rep.bound = S * lp_norm(u0, static_cast<double>(n));
  }
  require(std::isfinite(rep.bound), ErrorCode::Domain, "the stack must have zero outer value");
  rep.attach_actual(extinction_time_radial(u0));
  return rep;
}

/// 1D torus: T* <= ||u0 - mean||_1.
inline BoundReport extinction_bound_second(const StepFunction1D& u0) {
  BoundReport rep;
  rep.formula = "second-order-l1";
  const double m = u0.mean();
  double acc = 0.0;
  for (std::size_t k = 0; k < u0.size(); ++k) acc += std::abs(u0.values()[k] - m) * u0.length(k);
  rep.bound = acc;
  rep.constants = {{"n", 1.0}};
  rep.attach_actual(extinction_time_1d(u0));
  return rep;
}

/// theta = ((n+2)/(2n) - 1/p) / ((n-1)/n - 1/p) of the fourth-order interpolation.
inline double fourth_order_theta(int n, double p) {
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double den = (n - 1.0) / n - ip;
  require(den != 0.0, ErrorCode::NotApplicable, "theta is undefined for 1/p = (n-1)/n");
  return ((n + 2.0) / (2.0 * n) - ip) / den;
}

/// T* <= (A_theta theta / (2 theta - 1)) ||u0||_p^{1/theta - 1} ||u0||_{D^{-1}}^{2 - 1/theta},
/// A_theta = S_n C_n^{1/theta}. For n = 4, theta = 1 and p drops out.
inline BoundReport extinction_bound_fourth(const RadialStack& u0, double p, double c_n) {
  const int n = u0.dimension();
  require(n >= 3, ErrorCode::NotApplicable, "the fourth-order bound needs n >= 3");
  require(c_n > 0.0, ErrorCode::InvalidArgument, "C_n must be positive");
  double theta = 1.0;
  if (n != 4) {
    require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
    const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
    require(ip < 3.0 / n, ErrorCode::NotApplicable, "admissibility 1/p < 3/n fails");
    theta = fourth_order_theta(n, p);
    require(theta > 0.5 && theta <= 1.0, ErrorCode::NotApplicable,
            "theta = " + std::to_string(theta) + " violates 1/2 < theta <= 1");
  }
  const double S = sobolev_constant(n);
  const double A = S * std::pow(c_n, 1.0 / theta);
  const double dm1 = d_minus1_norm(u0);
  BoundReport rep;
  rep.formula = "fourth-order";
  rep.certified_constants = false;
  rep.constants = {{"S_n", S}, {"C_n", c_n}, {"theta", theta}, {"A_theta", A}, {"n", n}};
  if (n != 4) rep.constants["p"] = p;
  if (theta == 1.0) {
    rep.bound = A * dm1;
  } else {
    rep.bound = A * theta / (2.0 * theta - 1.0) * std::pow(lp_norm(u0, p), 1.0 / theta - 1.0) *
                std::pow(dm1, 2.0 - 1.0 / theta);
  }
  if (u0.size() == 1 && u0.outer_value() == 0.0) rep.attach_actual(fourth_extinction_time(n, u0.values()[0], u0.radii()[0]));
  if (u0.size() == 0) rep.attach_actual(0.0);
  return rep;
}

/// T* <= C_{n,s} S_n ||u0||_{H^{-s}} in the critical case n = 2(s + 1).
inline BoundReport extinction_bound_fractional_critical(const GridSignal& u0, int n, double s, double c_ns) {
  require(std::abs(n - 2.0 * (s + 1.0)) <= 1e-12, ErrorCode::NotApplicable, "the relation n = 2(s + 1) fails");
  require(c_ns > 0.0, ErrorCode::InvalidArgument, "C_{n,s} must be positive");
  const double S = sobolev_constant(n);
  BoundReport rep;
  rep.formula = "fractional-critical";
  rep.constants = {{"S_n", S}, {"C_ns", c_ns}, {"s", s}, {"n", n}};
  rep.bound = c_ns * S * hs_norm(u0, -s);
  rep.certified_constants = false;
  return rep;
}

}  // namespace tvflow
