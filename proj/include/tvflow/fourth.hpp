#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "tvflow/core.hpp"

namespace tvflow {

/// u(x, t) = a 1_{B_R}; for n = 2 the exterior additionally carries the tail t / |x|^3.
struct FourthBallState {
  double t = 0.0;
  double a = 0.0;
  double R = 0.0;
  int n = 3;
  bool tail = false;
  /// a - t / R^3 for n = 2, otherwise a.
  double gap = 0.0;
  friend bool operator==(const FourthBallState&, const FourthBallState&) = default;
};

inline double fourth_ball_lp_norm(const FourthBallState& s, double p) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
  return s.a * std::pow(ball_volume(s.n, s.R), 1.0 / p);
}

/// (da/dt, dR/dt) for the ball ansatz.
inline std::pair<double, double> fourth_ball_rhs(int n, double a, double R) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(a > 0.0 && R > 0.0, ErrorCode::Domain, "ball rates need a > 0 and R > 0");
  const double da = -n * (n + 2.0) / (R * R * R);
  const double dR = -n * (n - 4.0) / (a * R * R);
  return {da, dR};
}

/// Extinction time a0 R0^3 / (n(4n - 10)) for n >= 3, infinite for n = 1.
inline double fourth_extinction_time(int n, double a0, double R0) {
  require(n >= 1 && n != 2, ErrorCode::NotApplicable, "closed form excludes n = 2");
  const double k = n * (4.0 * n - 10.0);
  return k > 0.0 ? a0 * R0 * R0 * R0 / k : kInf;
}

/// Closed-form ball state; nullopt once extinct.
inline std::optional<FourthBallState> fourth_ball_closed_form(int n, double a0, double R0, double t) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(n != 2, ErrorCode::NotApplicable, "n = 2 has no closed form; integrate the ODE instead");
  require(a0 > 0.0 && R0 > 0.0, ErrorCode::Domain, "need a0 > 0 and R0 > 0");
  require(t >= 0.0, ErrorCode::InvalidArgument, "time must be non-negative");
  const double k = n * (4.0 * n - 10.0);
  const double f = 1.0 - k * t / (a0 * R0 * R0 * R0);
  if (f <= 0.0) return std::nullopt;
  const double e = 4.0 * n - 10.0;
  FourthBallState s;
  s.t = t;
  s.n = n;
  s.a = a0 * std::pow(f, (n + 2.0) / e);
  s.R = R0 * std::pow(f, (n - 4.0) / e);
  s.gap = s.a;
  return s;
}

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_dt = 1e-6;
  std::size_t max_steps = 5'000'000;
};

/// Integrates da/dt = -8/R^3, (a - t/R^3) dR/dt = 4/R^2 with an adaptive
/// Dormand-Prince scheme, recording every accepted step.
///
/// Diagnostics: "gap", "tail" (the amplitude t of the exterior profile).
inline FlowTrajectory<FourthBallState> fourth_ball_ode_n2(double a0, double R0, double T,
                                                          const OdeOptions& opt = {}) {
  require(a0 > 0.0 && R0 > 0.0, ErrorCode::Domain, "need a0 > 0 and R0 > 0");
  require(T >= 0.0, ErrorCode::InvalidArgument, "horizon must be non-negative");
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;

  FlowTrajectory<FourthBallState> traj;
  auto push = [&traj](double t, const State& y) {
    FourthBallState s;
    s.t = t;
    s.a = y[0];
    s.R = y[1];
    s.n = 2;
    s.tail = true;
    s.gap = y[0] - t / (y[1] * y[1] * y[1]);
    require(s.gap > 0.0, ErrorCode::InvariantViolation, "gap a - t/R^3 reached zero");
    if (!traj.times.empty() && t <= traj.times.back()) return;
    traj.push(t, s);
    traj.diagnostics["gap"].push_back(s.gap);
    traj.diagnostics["tail"].push_back(t);
  };
  State y{a0, R0};
  if (T == 0.0) {
    push(0.0, y);
    return traj;
  }
  auto rhs = [](const State& x, State& dx, double t) {
    const double R3 = x[1] * x[1] * x[1];
    const double gap = x[0] - t / R3;
    if (!(gap > 0.0)) fail(ErrorCode::InvariantViolation, "gap a - t/R^3 reached zero");
    dx[0] = -8.0 / R3;
    dx[1] = 4.0 / (x[1] * x[1] * gap);
  };
  std::size_t steps = 0;
  auto observer = [&](const State& x, double t) {
    require(++steps <= opt.max_steps, ErrorCode::Convergence, "step budget exhausted");
    push(t, x);
  };
  auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, rhs, y, 0.0, T, std::min(opt.initial_dt, T), observer);
  return traj;
}

/// Closed-form samples at `samples` equispaced times in [0, T] (n != 2), with
/// an extinction event for n >= 3 when t* <= T.
inline FlowTrajectory<FourthBallState> fourth_ball_trajectory(int n, double a0, double R0, double T,
                                                              std::size_t samples = 65) {
  require(samples >= 1, ErrorCode::InvalidArgument, "need at least one sample");
  FlowTrajectory<FourthBallState> traj;
  const double tstar = fourth_extinction_time(n, a0, R0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = samples == 1 ? 0.0 : T * static_cast<double>(i) / static_cast<double>(samples - 1);
    const auto s = fourth_ball_closed_form(n, a0, R0, t);
    if (!s) break;
    traj.push(t, *s);
  }
  if (tstar <= T) traj.events.push_back(Event{tstar, EventKind::Extinction, "ball vanishes"});
  return traj;
}

/// Coefficient of the delta part driving dR/dt: -n(n-4)/R^2.
inline double jump_normal_derivative(int n, double R) {
  require(n >= 1 && n != 2, ErrorCode::NotApplicable, "exterior profile is defined for n != 2");
  require(R > 0.0, ErrorCode::Domain, "radius must be positive");
  return -n * (n - 4.0) / (R * R);
}

// ---------------------------------------------------------------------------
// Radial calibration profiles

/// z(r) = c0 r^3 + c1 r^{3-n} + c2 r + c3 r^{1-n}; for n = 2 the second basis
/// function is r log r.
struct CalibrationProfile {
  int n = 3;
  std::array<double, 4> c{};
  double lambda = 0.0;
  bool feasible = false;
  double max_abs_z = 0.0;
  double r_min = 0.0;
  double r_max = 1.0;

  /// Values, first and second derivatives of basis function j at r.
  std::array<double, 3> basis(int j, double r) const {
    auto power = [r](double k) -> std::array<double, 3> {
      return {std::pow(r, k), k * std::pow(r, k - 1.0), k * (k - 1.0) * std::pow(r, k - 2.0)};
    };
    switch (j) {
      case 0: return power(3.0);
      case 1:
        if (n == 2) return {r * std::log(r), std::log(r) + 1.0, 1.0 / r};
        return power(3.0 - n);
      case 2: return power(1.0);
      default: return power(1.0 - n);
    }
  }

  std::array<double, 3> eval(double r) const {
    std::array<double, 3> out{};
    for (int j = 0; j < 4; ++j) {
      if (c[static_cast<std::size_t>(j)] == 0.0) continue;
      const auto b = basis(j, r);
      for (int d = 0; d < 3; ++d) out[static_cast<std::size_t>(d)] += c[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(d)];
    }
    return out;
  }

  double z(double r) const { return eval(r)[0]; }
  double dz(double r) const { return eval(r)[1]; }
  double d2z(double r) const { return eval(r)[2]; }
  /// div(z(r) x/r) = z' + (n-1) z / r.
  double div(double r) const {
    const auto e = eval(r);
    return e[1] + (n - 1.0) * e[0] / r;
  }
  /// Radial derivative of div Z.
  double ddiv(double r) const {
    const auto e = eval(r);
    return e[2] + (n - 1.0) * (e[1] / r - e[0] / (r * r));
  }
};

/// c0 = -lambda * lambda_to_c0_factor(n).
inline double lambda_to_c0_factor(int n) { return n == 2 ? 1.0 / 16.0 : 1.0 / (2.0 * n * (n + 2.0)); }

namespace detail {

/// Chebyshev-Lobatto nodes on [a, b].
inline std::vector<double> chebyshev_nodes(double a, double b, std::size_t count) {
  std::vector<double> x(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double c = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(count - 1));
    x[j] = 0.5 * (a + b) - 0.5 * (b - a) * c;
  }
  return x;
}

inline void assess_feasibility(CalibrationProfile& p, double tol) {
  constexpr std::size_t kNodes = 4096;
  p.max_abs_z = 0.0;
  for (double r : chebyshev_nodes(p.r_min, p.r_max, kNodes)) p.max_abs_z = std::max(p.max_abs_z, std::abs(p.z(r)));
  bool ok = p.max_abs_z <= 1.0 + tol;
  // the endpoints are critical points with |z| = 1; z must bend back into [-1, 1]
  for (double r : {p.r_min, p.r_max}) {
    if (r <= 0.0) continue;
    const auto e = p.eval(r);
    if (std::abs(std::abs(e[0]) - 1.0) <= 1e-6) ok = ok && e[0] * e[2] <= tol / (r * r);
  }
  p.feasible = ok;
}

}  // namespace detail

/// Calibration of B_R with constant signature chi.
inline CalibrationProfile fourth_ball_calibration(int n, double R, int chi) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(R > 0.0, ErrorCode::Domain, "radius must be positive");
  require(chi == 1 || chi == -1, ErrorCode::InvalidArgument, "signature must be +-1");
  CalibrationProfile p;
  p.n = n;
  const double s = -chi;
  p.c = {s * 0.5 / (R * R * R), 0.0, -s * 1.5 / R, 0.0};
  p.lambda = chi * n * (n + 2.0) / (R * R * R);
  p.r_min = 0.0;
  p.r_max = R;
  detail::assess_feasibility(p, 1e-9);
  return p;
}

struct AnnulusCalibration {
  bool feasible;
  CalibrationProfile profile;
};

namespace detail {

/// Radial harmonic G (r^{2-n}, or log r for n = 2) around a base radius R0,
/// together with the remainder psi = G - G(R0) - G'(R0) (q - q(R0)) / q'(R0),
/// q = r^2 / (2n), which vanishes to second order at R0.
struct RadialHarmonic {
  int n;
  double R0;

  double value(double s) const { return n == 2 ? std::log(s) : std::pow(s, 2.0 - n); }
  double derivative(double s) const { return n == 2 ? 1.0 / s : (2.0 - n) * std::pow(s, 1.0 - n); }

  double psi(double s) const {
    const double x = (s - R0) / R0;
    const double m = 2.0 - n;
    const double scale = n == 2 ? 1.0 : std::pow(R0, m);
    if (std::abs(x) >= 0.05) {
      if (n == 2) return std::log1p(x) - x * (1.0 + 0.5 * x);
      return scale * (std::pow(1.0 + x, m) - 1.0 - m * x * (1.0 + 0.5 * x));
    }
    double sum = n == 2 ? -x * x : 0.5 * m * (m - 2.0) * x * x;
    double binom = 0.5 * m * (m - 1.0), xk = x * x;
    for (int k = 3; k < 60; ++k) {
      xk *= x;
      double term;
      if (n == 2) {
        term = (k % 2 == 1 ? 1.0 : -1.0) * xk / k;
      } else {
        binom *= (m - k + 1.0) / k;
        term = binom * xk;
      }
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return scale * sum;
  }

  /// psi'(s) = G'(s) - G'(R0) s / R0.
  double psi_derivative(double s) const { return derivative(s) - derivative(R0) * s / R0; }
};

}  // namespace detail

/// Calibration of the annulus R0 < |x| < R1 with signature (chi_in, chi_out).
///
/// The boundary conditions are z(R0) = -chi_in, z(R1) = chi_out and
/// div Z = chi kappa on both spheres, kappa being the mean curvature with
/// respect to the outward normal of the annulus. They are imposed on
/// D = div Z = D(R0) + alpha (q - q(R0)) + beta psi and
/// z(r) = r^{1-n} (-chi_in R0^{n-1} + int_{R0}^r s^{n-1} D ds), a form that stays
/// well conditioned for thin annuli. The monomial coefficients of the profile
/// are filled in afterwards.
inline AnnulusCalibration annulus_calibrable_fourth(int n, double R0, double R1, const Signature& chi,
                                                    double tol = 1e-9) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(R0 > 0.0 && R1 > R0, ErrorCode::Geometry, "need 0 < R0 < R1");
  require(chi.size() == 2, ErrorCode::InvalidArgument, "annulus signature needs (chi_in, chi_out)");
  const double ci = chi[0], co = chi[1];
  const double D0 = ci * (-(n - 1.0) / R0);
  const double D1 = co * ((n - 1.0) / R1);
  const detail::RadialHarmonic G{n, R0};
  auto dq = [&](double s) { return (s - R0) * (s + R0) / (2.0 * n); };
  auto weight = [&](double s) { return std::pow(s, n - 1.0); };

  // cumulative integrals of s^{n-1}, s^{n-1} (q - q0) and s^{n-1} psi on the check nodes
  constexpr std::size_t kNodes = 4096;
  const auto r = detail::chebyshev_nodes(R0, R1, kNodes);
  std::vector<double> V(kNodes, 0.0), Iq(kNodes, 0.0), Ip(kNodes, 0.0);
  static constexpr std::array<double, 4> gx{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                            0.8611363115940526};
  static constexpr std::array<double, 4> gw{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                            0.3478548451374538};
  for (std::size_t j = 1; j < kNodes; ++j) {
    const double a = r[j - 1], b = r[j], half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double v = 0.0, iq = 0.0, ip = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double s = mid + half * gx[k];
      const double w = gw[k] * half * weight(s);
      v += w;
      iq += w * dq(s);
      ip += w * G.psi(s);
    }
    V[j] = V[j - 1] + v;
    Iq[j] = Iq[j - 1] + iq;
    Ip[j] = Ip[j - 1] + ip;
  }

  // alpha dq(R1) + beta psi(R1) = D1 - D0
  // alpha Iq + beta Ipsi = chi_out R1^{n-1} + chi_in R0^{n-1} - D0 V
  const double a11 = dq(R1), a12 = G.psi(R1), b1 = D1 - D0;
  const double a21 = Iq.back(), a22 = Ip.back(), b2 = co * weight(R1) + ci * weight(R0) - D0 * V.back();
  const double det = a11 * a22 - a12 * a21;
  require(std::isfinite(det) && std::abs(det) > 0.0, ErrorCode::DegenerateGeometry,
          "annulus calibration system is singular");
  const double alpha = (b1 * a22 - a12 * b2) / det;
  const double beta = (a11 * b2 - b1 * a21) / det;
  require(std::isfinite(alpha) && std::isfinite(beta), ErrorCode::DegenerateGeometry,
          "annulus calibration system is singular");
  // D = -lambda q + A + B G with B = beta and lambda = beta G'(R0) / q'(R0) - alpha
  const double B = beta;
  const double lambda = beta * G.derivative(R0) * n / R0 - alpha;

  CalibrationProfile p;
  p.n = n;
  p.r_min = R0;
  p.r_max = R1;
  p.lambda = lambda;
  p.max_abs_z = 0.0;
  bool ok = true;
  for (std::size_t j = 0; j < kNodes; ++j) {
    const double z = (-ci * weight(R0) + D0 * V[j] + alpha * Iq[j] + beta * Ip[j]) / weight(r[j]);
    // cancellation allowance: the summands of z can exceed |z| by many orders for wide annuli
    const double mag = (weight(R0) + std::abs(D0 * V[j]) + std::abs(alpha * Iq[j]) + std::abs(beta * Ip[j])) / weight(r[j]);
    p.max_abs_z = std::max(p.max_abs_z, std::abs(z));
    ok = ok && std::abs(z) <= 1.0 + tol + 16.0 * std::numeric_limits<double>::epsilon() * mag;
  }
  // z' vanishes at both ends, so |z| <= 1 nearby needs z z'' <= 0 there
  auto second = [&](double s, double z) {
    const double dD = alpha * s / n + beta * G.psi_derivative(s);
    return dD + (n - 1.0) * z / (s * s);
  };
  ok = ok && (-ci) * second(R0, -ci) <= tol / (R0 * R0);
  ok = ok && co * second(R1, co) <= tol / (R1 * R1);
  p.feasible = ok;

  const double A = D0 + lambda * R0 * R0 / (2.0 * n) - B * G.value(R0);
  p.c[0] = -lambda * lambda_to_c0_factor(n);
  p.c[1] = 0.5 * B;
  p.c[2] = n == 2 ? 0.5 * A - 0.25 * B : A / n;
  const double H0 = n == 2 ? 0.5 * R0 * R0 * std::log(R0) - 0.25 * R0 * R0 : 0.5 * R0 * R0;
  const double F0 = -lambda * std::pow(R0, n + 2.0) / (2.0 * n * (n + 2.0)) + A * std::pow(R0, n) / n + B * H0;
  p.c[3] = -ci * weight(R0) - F0;
  return AnnulusCalibration{p.feasible, p};
}

struct QStarResult {
  double q_star;
  double feasible_ratio;
  double infeasible_ratio;
  int iterations;
};

/// Bisection on R1/R0 for the critical ratio of the n = 2 annulus with
/// signature (+1, +1). Feasibility is checked for monotonicity on a log-spaced
/// scan before bisecting and at every bisection midpoint.
inline QStarResult find_q_star(int n = 2, double tol = 1e-9) {
  require(n == 2, ErrorCode::NotApplicable, "the critical ratio exists only for n = 2");
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  const Signature chi{1, 1};
  auto feasible = [&](double q) { return annulus_calibrable_fourth(2, 1.0, q, chi).feasible; };
  const double lo0 = 1.0 + 1e-6, hi0 = 1e3;
  constexpr int kScan = 64;
  std::vector<double> qs(kScan + 1);
  std::vector<bool> fs(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    qs[static_cast<std::size_t>(i)] = lo0 * std::pow(hi0 / lo0, static_cast<double>(i) / kScan);
    fs[static_cast<std::size_t>(i)] = feasible(qs[static_cast<std::size_t>(i)]);
  }
  require(fs.front(), ErrorCode::NonMonotone, "annulus near ratio 1 is not feasible");
  require(!fs.back(), ErrorCode::NonMonotone, "annulus at ratio 1e3 is feasible");
  std::size_t switch_at = 0;
  while (fs[switch_at + 1]) ++switch_at;
  for (std::size_t i = switch_at + 1; i < fs.size(); ++i)
    require(!fs[i], ErrorCode::NonMonotone, "feasibility is not monotone in the radius ratio");
  double lo = qs[switch_at], hi = qs[switch_at + 1];
  int it = 0;
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
    ++it;
  }
  return QStarResult{0.5 * (lo + hi), lo, hi, it};
}

// ---------------------------------------------------------------------------
// Saint-Venant problem

/// Ball (inner = 0) or annulus inner < |x| < outer.
struct RadialDomain {
  double inner = 0.0;
  double outer = 1.0;
  bool is_ball() const { return inner == 0.0; }
};

struct SaintVenantSolution {
  int n;
  RadialDomain domain;
  std::vector<double> r;
  std::vector<double> w;
  /// dw/dr at the inner and outer spheres.
  double dwdr_inner;
  double dwdr_outer;
  /// Integral of w over the domain in R^n.
  double integral;
};

/// Finite-volume solution of -w'' - (n-1) w'/r = 1 with w = 0 on the boundary
/// (regularity at the centre for balls), on `cells` uniform cells.
inline SaintVenantSolution saint_venant_radial(int n, RadialDomain dom, std::size_t cells = 4096) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(dom.inner >= 0.0 && dom.outer > dom.inner, ErrorCode::Geometry, "need 0 <= inner < outer");
  require(cells >= 4, ErrorCode::InvalidArgument, "need at least 4 cells");
  const std::size_t N = cells;
  const double h = (dom.outer - dom.inner) / static_cast<double>(N);
  auto face = [&](std::size_t i) { return dom.inner + static_cast<double>(i) * h; };
  auto area = [&](double r) { return n == 1 ? 1.0 : std::pow(r, n - 1); };

  // tridiagonal system: lower a, diagonal b, upper c
  std::vector<double> a(N, 0.0), b(N, 0.0), c(N, 0.0), d(N), r(N);
  for (std::size_t i = 0; i < N; ++i) {
    r[i] = face(i) + 0.5 * h;
    d[i] = (std::pow(face(i + 1), n) - std::pow(face(i), n)) / n;
    if (i > 0) {
      const double g = area(face(i)) / h;
      a[i] = -g;
      b[i] += g;
    } else if (!dom.is_ball()) {
      b[i] += area(dom.inner) / (0.5 * h);
    }
    if (i + 1 < N) {
      const double g = area(face(i + 1)) / h;
      c[i] = -g;
      b[i] += g;
    } else {
      b[i] += area(dom.outer) / (0.5 * h);
    }
  }
  for (std::size_t i = 1; i < N; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> w(N);
  w[N - 1] = d[N - 1] / b[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) w[i] = (d[i] - c[i] * w[i + 1]) / b[i];

  SaintVenantSolution s{n, dom, r, w, 0.0, 0.0, 0.0};
  // conservative boundary fluxes; the outer one closes the global balance exactly
  const double total_source = (std::pow(dom.outer, n) - std::pow(dom.inner, n)) / n;
  const double inner_flux = dom.is_ball() ? 0.0 : area(dom.inner) * w[0] / (0.5 * h);
  s.dwdr_inner = dom.is_ball() ? 0.0 : inner_flux / area(dom.inner);
  s.dwdr_outer = (inner_flux - total_source) / area(dom.outer);
  for (std::size_t i = 0; i < N; ++i) s.integral += w[i] * shell_volume(n, face(i), face(i + 1));
  return s;
}

namespace detail {

inline double saint_venant_quotient(int n, RadialDomain dom, const Signature& chi, std::size_t cells) {
  const auto sv = saint_venant_radial(n, dom, cells);
  double num = 0.0;
  const std::size_t out = dom.is_ball() ? 0 : 1;
  const double A1 = sphere_area(n, dom.outer);
  num += A1 * chi[out] * ((n - 1.0) / dom.outer * sv.dwdr_outer + 1.0);
  if (!dom.is_ball()) {
    const double A0 = sphere_area(n, dom.inner);
    const double kappa = -(n - 1.0) / dom.inner;
    num += A0 * chi[0] * (kappa * (-sv.dwdr_inner) + 1.0);
  }
  return num / sv.integral;
}

}  // namespace detail

/// Speed of a calibrable ball or annulus from its Saint-Venant function,
/// Richardson-extrapolated over three grid levels.
inline double lambda_saint_venant(int n, RadialDomain dom, const Signature& chi, std::size_t cells = 2048) {
  require(chi.size() == (dom.is_ball() ? 1u : 2u), ErrorCode::InvalidArgument,
          "signature needs one entry per boundary sphere");
  const double q1 = detail::saint_venant_quotient(n, dom, chi, cells);
  const double q2 = detail::saint_venant_quotient(n, dom, chi, 2 * cells);
  const double q3 = detail::saint_venant_quotient(n, dom, chi, 4 * cells);
  const double d12 = q1 - q2, d23 = q2 - q3;
  if (d23 == 0.0 || d12 / d23 <= 1.0) return q3;
  const double ratio = d12 / d23;  // 2^p for an order-p error
  return q3 - d23 / (ratio - 1.0);
}

}  // namespace tvflow
