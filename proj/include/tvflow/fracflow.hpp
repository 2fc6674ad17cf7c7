#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "tvflow/bound_report.hpp"
#include "tvflow/core.hpp"
#include "tvflow/spectral.hpp"

namespace tvflow {

struct FracProxOptions {
  double gap_tol = 1e-9;
  double bound_tol = 1e-9;
  int max_active_set_iterations = 60;
  std::size_t max_admm_iterations = 200'000;
  std::size_t admm_check_every = 50;
};

struct FracProxResult {
  GridSignal w;
  /// Duality gap of (w, clipped dual field).
  double gap;
  /// Per-edge sign of the jumps of w.
  std::vector<int> pattern;
  std::size_t admm_iterations;
  int active_set_iterations;
};

/// Prox of lambda TV in the H^{-s} metric on a fixed periodic grid:
/// argmin over mean-free w of lambda sum_e |D_e w| + 1/2 (w - f)^T K (w - f),
/// K = h F^{-1} diag(|m|^{-2s}) F.
///
/// The solver guesses the jump pattern (signs of D w), solves the reduced
/// equality-constrained quadratic problem exactly, and repairs the pattern
/// from the recovered dual field until the optimality conditions hold. ADMM
/// iterations supply a fresh pattern when the repair loop stalls.
class FractionalProx {
 public:
  FractionalProx(std::size_t n, double spacing, double s)
      : n_(n), h_(spacing), s_(s), metric_(n, -s), fft_(metric_.fft()) {
    require(s >= 0.0 && s <= 1.0, ErrorCode::InvalidArgument, "order s must lie in [0, 1]");
    require(spacing > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
  }

  double order() const noexcept { return s_; }

  std::vector<double> K(const std::vector<double>& v) const {
    auto out = metric_.apply(v, 1.0);
    for (double& x : out) x *= h_;
    return out;
  }
  std::vector<double> K_inverse(const std::vector<double>& v) const {
    auto out = metric_.apply(v, -1.0);
    for (double& x : out) x /= h_;
    return out;
  }

  FracProxResult solve(const GridSignal& f_in, double lambda, const FracProxOptions& opt = {},
                       const std::vector<int>* warm_pattern = nullptr) const {
    require(f_in.geometry() == GridGeometry::Periodic && f_in.size() == n_, ErrorCode::InvalidArgument,
            "fractional prox needs a periodic grid of matching size");
    require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
    std::vector<double> f = f_in.samples();
    const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(n_);
    for (double& x : f) x -= mean;
    const auto Kf = K(f);

    std::vector<int> pattern = warm_pattern ? *warm_pattern : signs_of(f);
    int as_iter = 0;
    if (auto r = active_set(f, Kf, lambda, pattern, opt, as_iter)) return finish(f_in, std::move(*r), 0, as_iter);

    // ADMM on y = D w with adaptive penalty, polishing periodically
    const std::size_t N = n_;
    std::vector<double> d(fft_.bins());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double sn = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(N));
      d[k] = 4.0 * sn * sn;
    }
    const auto& M = metric_.multipliers();
    double rho = h_ * M[1] / d[1];
    std::vector<double> w(f), y = diff(w), mu(N, 0.0);
    const auto Kf_hat = fft_.forward(Kf);
    std::size_t it = 0;
    while (it < opt.max_admm_iterations) {
      ++it;
      std::vector<double> t(N);
      for (std::size_t e = 0; e < N; ++e) t[e] = y[e] - mu[e];
      auto rhs = fft_.forward(diff_transpose(t));
      for (std::size_t k = 0; k < rhs.size(); ++k)
        rhs[k] = k == 0 ? 0.0 : (Kf_hat[k] + rho * rhs[k]) / (h_ * M[k] + rho * d[k]);
      w = fft_.inverse(rhs);
      const auto Dw = diff(w);
      const auto y_old = y;
      double rp = 0.0, rd = 0.0;
      for (std::size_t e = 0; e < N; ++e) {
        const double v = Dw[e] + mu[e];
        y[e] = std::copysign(std::max(std::abs(v) - lambda / rho, 0.0), v);
        mu[e] += Dw[e] - y[e];
        rp += (Dw[e] - y[e]) * (Dw[e] - y[e]);
        rd += (y[e] - y_old[e]) * (y[e] - y_old[e]);
      }
      rp = std::sqrt(rp);
      rd = rho * std::sqrt(rd);
      if (it % 10 == 0) {
        double factor = 1.0;
        if (rp > 10.0 * rd) factor = 2.0;
        else if (rd > 10.0 * rp) factor = 0.5;
        if (factor != 1.0) {
          rho *= factor;
          for (double& m : mu) m /= factor;
        }
      }
      if (it % opt.admm_check_every == 0) {
        std::vector<int> pat(N);
        for (std::size_t e = 0; e < N; ++e) pat[e] = sign(y[e]);
        int extra = 0;
        if (auto r = active_set(f, Kf, lambda, pat, opt, extra)) {
          as_iter += extra;
          return finish(f_in, std::move(*r), it, as_iter);
        }
        as_iter += extra;
      }
    }
    fail(ErrorCode::Convergence, "fractional prox did not reach the duality gap after " + std::to_string(it) +
                                     " ADMM iterations");
  }

  /// Duality gap P(w) - D(clip z) with D(z) = lambda <D^T z, f> - lambda^2/2 |D^T z|^2_{K^{-1}}.
  double duality_gap(const std::vector<double>& f, const std::vector<double>& w, const std::vector<double>& z,
                     double lambda) const {
    std::vector<double> zc(z);
    for (double& v : zc) v = std::clamp(v, -1.0, 1.0);
    const auto Dtz = diff_transpose(zc);
    std::vector<double> r(n_);
    for (std::size_t i = 0; i < n_; ++i) r[i] = w[i] - f[i];
    const auto Kr = K(r);
    double primal = 0.0;
    for (std::size_t i = 0; i < n_; ++i) primal += 0.5 * r[i] * Kr[i];
    for (double v : diff(w)) primal += lambda * std::abs(v);
    const auto KiDtz = K_inverse(Dtz);
    double dual = 0.0;
    for (std::size_t i = 0; i < n_; ++i) dual += lambda * Dtz[i] * f[i] - 0.5 * lambda * lambda * Dtz[i] * KiDtz[i];
    return primal - dual;
  }

 private:
  struct Candidate {
    std::vector<double> w;
    std::vector<double> z;
    std::vector<int> pattern;
    double gap;
  };

  std::vector<double> diff(const std::vector<double>& w) const {
    std::vector<double> d(n_);
    for (std::size_t e = 0; e < n_; ++e) d[e] = w[(e + 1) % n_] - w[e];
    return d;
  }
  /// (D^T z)_i = z_{i-1} - z_i.
  std::vector<double> diff_transpose(const std::vector<double>& z) const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = z[(i + n_ - 1) % n_] - z[i];
    return out;
  }
  std::vector<int> signs_of(const std::vector<double>& f) const {
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    std::vector<int> s(n_, 0);
    const auto d = diff(f);
    for (std::size_t e = 0; e < n_; ++e)
      if (std::abs(d[e]) > 1e-12 * scale) s[e] = sign(d[e]);
    return s;
  }

  /// Exact minimizer over mean-free w with the jump pattern fixed.
  std::vector<double> reduced_solve(const std::vector<double>& Kf, double lambda, const std::vector<int>& sig) const {
    std::vector<std::size_t> J;
    for (std::size_t e = 0; e < n_; ++e)
      if (sig[e] != 0) J.push_back(e);
    std::vector<double> w(n_, 0.0);
    if (J.size() < 2) return w;
    const std::size_t k = J.size();
    // arc j covers nodes J[j-1]+1 .. J[j] (cyclically)
    std::vector<std::size_t> arc(n_);
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t i = (J[(j + k - 1) % k] + 1) % n_;
      while (true) {
        arc[i] = j;
        if (i == J[j]) break;
        i = (i + 1) % n_;
      }
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k + 1));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k + 1));
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      count[arc[i]] += 1.0;
      b(static_cast<Eigen::Index>(arc[i])) += Kf[i];
    }
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> ind(n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        if (arc[i] == j) ind[i] = 1.0;
      const auto Kind = K(ind);
      for (std::size_t i = 0; i < n_; ++i)
        A(static_cast<Eigen::Index>(arc[i]), static_cast<Eigen::Index>(j)) += Kind[i];
      const int s_in = sig[J[(j + k - 1) % k]], s_out = sig[J[j]];
      b(static_cast<Eigen::Index>(j)) -= lambda * (s_in - s_out);
      A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = count[j];
      A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = count[j];
    }
    const Eigen::VectorXd v = A.fullPivLu().solve(b);
    for (std::size_t i = 0; i < n_; ++i) w[i] = v(static_cast<Eigen::Index>(arc[i]));
    return w;
  }

  std::optional<Candidate> active_set(const std::vector<double>& f, const std::vector<double>& Kf, double lambda,
                                      std::vector<int> sig, const FracProxOptions& opt, int& iterations) const {
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    const double jump_floor = 1e-13 * (1.0 + scale);
    for (int it = 0; it < opt.max_active_set_iterations; ++it) {
      ++iterations;
      const auto w = reduced_solve(Kf, lambda, sig);
      const auto Dw = diff(w);
      // drop jumps that vanished or flipped
      bool removed = false;
      for (std::size_t e = 0; e < n_; ++e) {
        if (sig[e] != 0 && (sign(Dw[e]) != sig[e] || std::abs(Dw[e]) <= jump_floor)) {
          sig[e] = 0;
          removed = true;
        }
      }
      if (removed) continue;
      // recover z from D^T z = K(f - w)/lambda and the jump traces
      std::vector<double> r(n_);
      for (std::size_t i = 0; i < n_; ++i) r[i] = f[i] - w[i];
      const auto Kr = K(r);
      std::vector<double> S(n_);
      double acc = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        acc += Kr[i] / lambda;
        S[i] = acc;
      }
      double C = 0.0;
      std::size_t jumps = 0;
      for (std::size_t e = 0; e < n_; ++e)
        if (sig[e] != 0) {
          C += sig[e] + S[e];
          ++jumps;
        }
      if (jumps > 0) {
        C /= static_cast<double>(jumps);
      } else {
        const auto [lo, hi] = std::minmax_element(S.begin(), S.end());
        C = 0.5 * (*lo + *hi);
      }
      std::vector<double> z(n_);
      for (std::size_t e = 0; e < n_; ++e) z[e] = C - S[e];
      // add the worst bound violation of every run of violating edges
      bool added = false;
      for (std::size_t e = 0; e < n_; ++e) {
        if (sig[e] != 0 || std::abs(z[e]) <= 1.0 + opt.bound_tol) continue;
        const std::size_t prev = (e + n_ - 1) % n_;
        if (sig[prev] == 0 && std::abs(z[prev]) > 1.0 + opt.bound_tol && prev < e) continue;
        std::size_t best = e, j = e;
        while (sig[j] == 0 && std::abs(z[j]) > 1.0 + opt.bound_tol) {
          if (std::abs(z[j]) > std::abs(z[best])) best = j;
          j = (j + 1) % n_;
          if (j == e) break;
        }
        sig[best] = sign(z[best]);
        added = true;
      }
      if (added) continue;
      const double gap = duality_gap(f, w, z, lambda);
      if (gap > opt.gap_tol) return std::nullopt;
      return Candidate{w, z, sig, gap};
    }
    return std::nullopt;
  }

  FracProxResult finish(const GridSignal& f_in, Candidate c, std::size_t admm, int as_iter) const {
    return FracProxResult{f_in.with_samples(std::move(c.w)), c.gap, std::move(c.pattern), admm, as_iter};
  }

  std::size_t n_;
  double h_;
  double s_;
  SpectralOperator metric_;
  RealFft& fft_;
};

inline FracProxResult prox_tv_hs(const GridSignal& f, double lambda, double s, const FracProxOptions& opt = {}) {
  const FractionalProx P(f.size(), f.spacing(), s);
  return P.solve(f, lambda, opt);
}

// ---------------------------------------------------------------------------
// Negative Sobolev-type norms

/// Discrete W^{-1,p} norm: min_c ||W - c||_p with W_i = h sum_{j <= i} v_j the
/// cumulative antiderivative (the dual of ||D phi / h||_{p'} <= 1).
inline double wminus1p_norm(const GridSignal& v, double p) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
  const std::size_t n = v.size();
  const double h = v.spacing();
  std::vector<double> W(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += h * v[i];
    W[i] = acc;
  }
  auto norm_at = [&](double c) {
    if (std::isinf(p)) {
      double m = 0.0;
      for (double x : W) m = std::max(m, std::abs(x - c));
      return m;
    }
    double s = 0.0;
    for (double x : W) s += h * std::pow(std::abs(x - c), p);
    return std::pow(s, 1.0 / p);
  };
  const auto [lo, hi] = std::minmax_element(W.begin(), W.end());
  if (std::isinf(p)) return norm_at(0.5 * (*lo + *hi));
  if (p == 2.0) return norm_at(std::accumulate(W.begin(), W.end(), 0.0) / static_cast<double>(n));
  if (p == 1.0) {
    std::vector<double> sorted(W);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    return norm_at(sorted[n / 2]);
  }
  if (*hi - *lo == 0.0) return norm_at(*lo);
  const auto best = boost::math::tools::brent_find_minima(norm_at, *lo, *hi, 52);
  return best.second;
}

/// (-Delta)^{-s} u with symbol |m|^{-2s} (mean mode dropped).
inline GridSignal inverse_fractional_laplacian(const GridSignal& u, double s) {
  const SpectralOperator op(u.size(), -s);
  return u.with_samples(op.apply(u.samples()));
}

// ---------------------------------------------------------------------------
// Fractional flow

struct FracFlowOptions {
  /// Exponent of the W^{-1,p} growth series.
  double p = 2.0;
  std::size_t record_every = 1;
  bool stop_at_extinction = true;
  double extinction_tol = 1e-10;
  FracProxOptions prox{};
};

/// Iterated H^{-s} prox. Diagnostics per recorded iterate: "hs_norm"
/// (the H^{-s} norm), "tv", "dissipation_residual"
/// |(E_{k+1} - E_k)/tau + TV(u_{k+1})| with E = half the squared H^{-s} norm,
/// and "w1p_norm" of (-Delta)^{-s} u.
inline FlowTrajectory<GridSignal> evolve_fractional(const GridSignal& u0, double s, double tau, std::size_t steps,
                                                    const FracFlowOptions& opt = {}) {
  require(u0.geometry() == GridGeometry::Periodic, ErrorCode::InvalidArgument, "fractional flow needs a periodic grid");
  require(tau > 0.0, ErrorCode::InvalidArgument, "time step must be positive");
  double scale = 0.0;
  for (double v : u0.samples()) scale = std::max(scale, std::abs(v));
  require(std::abs(u0.mean()) <= 1e-12 * (1.0 + scale), ErrorCode::InvalidArgument,
          "fractional flow needs mean-free initial data");
  const FractionalProx P(u0.size(), u0.spacing(), s);
  const SpectralOperator inv(u0.size(), -s);
  FlowTrajectory<GridSignal> traj;
  auto energy = [&](const GridSignal& u) {
    const double v = hs_norm(u, -s, &inv.fft());
    return 0.5 * v * v;
  };
  auto record = [&](double t, const GridSignal& u, double residual) {
    traj.push(t, u);
    traj.diagnostics["hs_norm"].push_back(hs_norm(u, -s, &inv.fft()));
    traj.diagnostics["tv"].push_back(total_variation(u));
    traj.diagnostics["dissipation_residual"].push_back(residual);
    traj.diagnostics["w1p_norm"].push_back(wminus1p_norm(u.with_samples(inv.apply(u.samples())), opt.p));
  };
  auto extinct = [&](const GridSignal& u) { return lp_norm(u, kInf) < opt.extinction_tol; };
  record(0.0, u0, 0.0);
  if (extinct(u0) && opt.stop_at_extinction) return traj;
  GridSignal u = u0;
  std::vector<int> pattern;
  for (std::size_t k = 1; k <= steps; ++k) {
    auto res = P.solve(u, tau, opt.prox, pattern.empty() ? nullptr : &pattern);
    pattern = res.pattern;
    const double residual = std::abs((energy(res.w) - energy(u)) / tau + total_variation(res.w));
    u = std::move(res.w);
    const double t = tau * static_cast<double>(k);
    const bool done = extinct(u);
    if (k % opt.record_every == 0 || k == steps || done) record(t, u, residual);
    if (done) {
      traj.events.push_back(Event{t, EventKind::Extinction, "sup norm below threshold"});
      if (opt.stop_at_extinction) break;
    }
  }
  return traj;
}

struct DissipationReport {
  /// max_k residual_k / TV(u_{k+1}) over steps where TV(u_{k+1}) >= tv_floor * TV(u_0).
  double max_relative;
  /// sum_k residual_k / sum_k TV(u_{k+1}) over the same steps.
  double integrated_relative;
  std::size_t steps_used;
};

/// Energy-identity defect of a trajectory produced with record_every = 1.
inline DissipationReport dissipation_check(const FlowTrajectory<GridSignal>& traj, double tv_floor = 0.05) {
  const auto& res = traj.diagnostics.at("dissipation_residual");
  const auto& tv = traj.diagnostics.at("tv");
  DissipationReport rep{0.0, 0.0, 0};
  if (traj.size() < 2) return rep;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (tv[k] < tv_floor * tv[0] || tv[k] == 0.0) continue;
    rep.max_relative = std::max(rep.max_relative, res[k] / tv[k]);
    num += res[k];
    den += tv[k];
    ++rep.steps_used;
  }
  rep.integrated_relative = den > 0.0 ? num / den : 0.0;
  return rep;
}

struct GrowthReport {
  bool ok;
  std::vector<double> series;
  std::vector<double> envelope;
};

/// Checks ||(-Delta)^{-s} u(t)||_{W^{-1,p}} <= |T|^{1/p} t + A0 at every recorded time.
inline GrowthReport wminus1p_growth_check(const FlowTrajectory<GridSignal>& traj, double s, double p) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
  GrowthReport rep{true, {}, {}};
  if (traj.size() == 0) return rep;
  const SpectralOperator inv(traj.states[0].size(), -s);
  const double slope = std::isinf(p) ? 1.0 : std::pow(traj.states[0].extent(), 1.0 / p);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& u = traj.states[k];
    rep.series.push_back(wminus1p_norm(u.with_samples(inv.apply(u.samples())), p));
    rep.envelope.push_back(rep.series[0] + slope * traj.times[k]);
    if (rep.series[k] > rep.envelope[k] * (1.0 + 1e-12) + 1e-15) rep.ok = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Interpolation inequality and the periodic extinction bound

/// theta solving s + n/2 = (1 - theta)(2s + 1 + n/p) + theta (n - 1).
inline double interpolation_theta(int n, double s, double p) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double den = 2.0 * s + 2.0 + n * ip - n;
  require(den != 0.0, ErrorCode::NotApplicable, "scaling balance is degenerate");
  return (s + 1.0 + n * ip - 0.5 * n) / den;
}

struct InterpolationCheck {
  bool holds;
  double lhs;
  double rhs;
  /// lhs / (||(-Delta)^{-s}u||^{1-theta} TV^theta): the smallest admissible C*.
  double ratio;
  double theta;
};

/// Evaluates ||u||_{H^{-s}} <= C* ||(-Delta)^{-s} u||_{W^{-1,p}}^{1-theta} TV(u)^theta on a 1D torus.
inline InterpolationCheck interpolation_check(const GridSignal& u, double s, double p, double c_star) {
  const double theta = interpolation_theta(1, s, p);
  require(theta > 0.5 && theta <= 1.0, ErrorCode::NotApplicable, "need 1/2 < theta <= 1");
  const double lhs = hs_norm(u, -s);
  const double w = wminus1p_norm(inverse_fractional_laplacian(u, s), p);
  const double base = std::pow(w, 1.0 - theta) * std::pow(total_variation(u), theta);
  InterpolationCheck c{true, lhs, c_star * base, 0.0, theta};
  c.ratio = base > 0.0 ? lhs / base : (lhs > 0.0 ? kInf : 0.0);
  c.holds = lhs <= c.rhs * (1.0 + 1e-12) + 1e-300;
  return c;
}

/// T* <= (A0/a) ((1 + a C*^{1/theta} ||u0||^gamma / A0^gamma)^{1/gamma} - 1),
/// a = |T|^{1/p}, gamma = 2 - 1/theta, A0 the W^{-1,p} norm of (-Delta)^{-s} u0.
inline BoundReport extinction_bound_teeper(const GridSignal& u0, double s, double p, double c_star) {
  require(u0.geometry() == GridGeometry::Periodic, ErrorCode::InvalidArgument, "bound is stated on the torus");
  require(c_star > 0.0, ErrorCode::InvalidArgument, "C* must be positive");
  const double theta = interpolation_theta(1, s, p);
  require(theta > 0.5 && theta <= 1.0, ErrorCode::NotApplicable,
          "theta = " + std::to_string(theta) + " violates 1/2 < theta <= 1");
  const double gamma = 2.0 - 1.0 / theta;
  const double a = std::isinf(p) ? 1.0 : std::pow(u0.extent(), 1.0 / p);
  const double A0 = wminus1p_norm(inverse_fractional_laplacian(u0, s), p);
  const double norm = hs_norm(u0, -s);
  BoundReport rep;
  rep.formula = "periodic-fractional";
  rep.constants = {{"s", s}, {"p", p}, {"theta", theta}, {"gamma", gamma}, {"a", a}, {"A0", A0}, {"C_star", c_star}};
  rep.certified_constants = false;
  if (norm == 0.0) {
    rep.bound = 0.0;
  } else {
    const double x = a * std::pow(c_star, 1.0 / theta) * std::pow(norm / A0, gamma);
    rep.bound = (A0 / a) * (std::pow(1.0 + x, 1.0 / gamma) - 1.0);
  }
  return rep;
}

}  // namespace tvflow
