#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#include "tvflow/core.hpp"

namespace tvflow {

namespace detail {

/// Weighted graph data of a grid: node masses q (infinite for a pinned node)
/// and edges e = (tail, head) with weights c.
struct GridGraph {
  std::size_t nodes;
  std::vector<double> q;
  std::vector<double> c;
  std::vector<std::size_t> tail;
  std::vector<std::size_t> head;
  bool ring;
  std::ptrdiff_t pinned;  // -1 if none

  explicit GridGraph(const GridSignal& g)
      : nodes(g.size()), q(g.weights()), c(g.edge_weights()), ring(g.geometry() == GridGeometry::Periodic),
        pinned(g.geometry() == GridGeometry::Radial && g.pinned_outer() ? static_cast<std::ptrdiff_t>(g.size() - 1)
                                                                         : -1) {
    for (std::size_t e = 0; e < c.size(); ++e) {
      tail.push_back(e);
      head.push_back((e + 1) % nodes);
    }
  }
  bool is_pinned(std::size_t i) const { return static_cast<std::ptrdiff_t>(i) == pinned; }
};

inline double prox_objective(const GridSignal& w, const GridSignal& f, double lambda) {
  double fid = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.geometry() == GridGeometry::Radial && w.pinned_outer() && i + 1 == w.size()) continue;
    fid += 0.5 * w.weights()[i] * (w[i] - f[i]) * (w[i] - f[i]);
  }
  return lambda * total_variation(w) + fid;
}

}  // namespace detail

/// Exact minimizer of lambda * sum_e c_e |D_e w| + 1/2 sum_i q_i (w_i - f_i)^2
/// on any grid geometry.
///
/// Path following in lambda: groups of equal value move linearly in lambda and
/// only ever merge (they never split for these weights), so the solution is
/// obtained by replaying merge events in order from lambda = 0. A pinned node
/// keeps its value and absorbs every group that reaches it.
inline GridSignal prox_tv_path(const GridSignal& f, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument, "lambda must be positive");
  const detail::GridGraph G(f);
  const std::size_t n = G.nodes;

  struct Group {
    double mass = 0.0;   // sum q f
    double weight = 0.0; // sum q
    bool pinned = false;
    double pin_value = 0.0;
    std::ptrdiff_t left = -1, right = -1;
    double c_left = 0.0, c_right = 0.0;
    int sig_left = 0, sig_right = 0;  // sign of (right value - left value) across each boundary edge
    std::uint32_t stamp = 0;
    bool alive = true;
    double slope = 0.0;
    double value(double lam) const { return pinned ? pin_value : mass / weight + lam * slope; }
    void update_slope() { slope = pinned ? 0.0 : -(c_left * sig_left - c_right * sig_right) / weight; }
  };

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<Group> grp(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (G.is_pinned(i)) {
      grp[i].pinned = true;
      grp[i].pin_value = f[i];
    } else {
      grp[i].mass = G.q[i] * f[i];
      grp[i].weight = G.q[i];
    }
    if (G.ring || i > 0) {
      grp[i].left = static_cast<std::ptrdiff_t>((i + n - 1) % n);
      grp[i].c_left = G.c[(i + n - 1) % n];
    }
    if (G.ring || i + 1 < n) {
      grp[i].right = static_cast<std::ptrdiff_t>((i + 1) % n);
      grp[i].c_right = G.c[i];
    }
  }

  bool whole_ring = false;
  // merges group b (the right neighbour) into group a; returns the surviving root
  auto merge = [&](std::size_t a, std::size_t b) {
    Group& A = grp[a];
    Group& B = grp[b];
    const bool closes = static_cast<std::size_t>(A.left) == b;
    if (B.pinned && !A.pinned) {
      A.pinned = true;
      A.pin_value = B.pin_value;
    }
    A.mass += B.mass;
    A.weight += B.weight;
    A.right = B.right;
    A.c_right = B.c_right;
    A.sig_right = B.sig_right;
    B.alive = false;
    parent[b] = a;
    ++A.stamp;
    if (closes) {
      whole_ring = true;
      A.left = A.right = -1;
      A.c_left = A.c_right = 0.0;
    } else {
      if (A.right >= 0) grp[static_cast<std::size_t>(A.right)].left = static_cast<std::ptrdiff_t>(a);
    }
    A.update_slope();
    return a;
  };

  // fuse exactly equal neighbours before any slope is defined
  {
    const std::size_t edges = G.c.size();
    for (std::size_t e = 0; e < edges && !whole_ring; ++e) {
      const std::size_t a = find(G.tail[e]), b = find(G.head[e]);
      if (a == b) continue;
      const double va = grp[a].pinned ? grp[a].pin_value : grp[a].mass / grp[a].weight;
      const double vb = grp[b].pinned ? grp[b].pin_value : grp[b].mass / grp[b].weight;
      if (va == vb) merge(a, b);
    }
  }
  auto roots = [&]() {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < n; ++i)
      if (grp[i].alive) r.push_back(i);
    return r;
  };
  if (!whole_ring) {
    for (std::size_t a : roots()) {
      Group& A = grp[a];
      auto value0 = [&](std::ptrdiff_t g) {
        const Group& X = grp[static_cast<std::size_t>(g)];
        return X.pinned ? X.pin_value : X.mass / X.weight;
      };
      const double va = value0(static_cast<std::ptrdiff_t>(a));
      if (A.left >= 0) A.sig_left = sign(va - value0(A.left));
      if (A.right >= 0) A.sig_right = sign(value0(A.right) - va);
      A.update_slope();
    }
  }

  struct Candidate {
    double lam;
    std::size_t a, b;
    std::uint32_t sa, sb;
    bool operator>(const Candidate& o) const { return lam > o.lam; }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  double current = 0.0;
  auto consider = [&](std::size_t a) {
    const Group& A = grp[a];
    if (A.right < 0 || whole_ring) return;
    const auto b = static_cast<std::size_t>(A.right);
    const Group& B = grp[b];
    if (A.pinned && B.pinned) return;
    const double gap = B.value(0.0) - A.value(0.0);
    const double closing = A.slope - B.slope;
    if (closing == 0.0) return;
    double lam = gap / closing;
    if (!(lam >= current)) {
      const double vb = B.value(current), va = A.value(current);
      if (std::abs(vb - va) > 1e-13 * (1.0 + std::abs(va) + std::abs(vb))) return;
      lam = current;
    }
    heap.push(Candidate{lam, a, b, A.stamp, B.stamp});
  };
  if (!whole_ring)
    for (std::size_t a : roots()) consider(a);

  while (!heap.empty() && !whole_ring) {
    const Candidate cand = heap.top();
    if (cand.lam > lambda) break;
    heap.pop();
    const Group& A = grp[cand.a];
    const Group& B = grp[cand.b];
    if (!A.alive || !B.alive || A.stamp != cand.sa || B.stamp != cand.sb ||
        A.right != static_cast<std::ptrdiff_t>(cand.b))
      continue;
    current = cand.lam;
    const std::size_t r = merge(cand.a, cand.b);
    if (whole_ring) break;
    if (grp[r].left >= 0) consider(static_cast<std::size_t>(grp[r].left));
    consider(r);
  }

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Group& R = grp[find(i)];
    w[i] = whole_ring ? R.mass / R.weight : R.value(lambda);
  }
  return f.with_samples(std::move(w));
}

/// Exact prox on periodic or Neumann grids (unit edge weights, cell masses h).
inline GridSignal prox_tv_1d(const GridSignal& f, double lambda) {
  require(f.geometry() != GridGeometry::Radial, ErrorCode::InvalidArgument,
          "prox_tv_1d needs a periodic or Neumann grid");
  return prox_tv_path(f, lambda);
}

/// Exact prox on radial grids with shell-volume masses and sphere-area edge weights.
inline GridSignal prox_tv_radial(const GridSignal& f, double lambda) {
  require(f.geometry() == GridGeometry::Radial, ErrorCode::InvalidArgument, "prox_tv_radial needs a radial grid");
  return prox_tv_path(f, lambda);
}

struct PrimalDualOptions {
  double gap_tol = 1e-10;
  std::size_t max_iterations = 2'000'000;
  std::size_t check_every = 100;
};

struct PrimalDualResult {
  GridSignal w;
  double gap;
  std::size_t iterations;
};

/// Diagonally preconditioned primal-dual iteration for the same objective as
/// prox_tv_path; stops once the duality gap is below gap_tol.
inline PrimalDualResult prox_tv_primal_dual(const GridSignal& f, double lambda, const PrimalDualOptions& opt = {}) {
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  const detail::GridGraph G(f);
  const std::size_t n = G.nodes, m = G.c.size();
  std::vector<double> w(f.samples()), wbar(w), y(m, 0.0), dty(n, 0.0);
  std::vector<double> tau(n, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    tau[G.tail[e]] += 1.0;
    tau[G.head[e]] += 1.0;
  }
  for (double& t : tau) t = 1.0 / t;
  const double sigma = 0.5;

  auto primal = [&](const std::vector<double>& x) {
    double p = 0.0;
    for (std::size_t e = 0; e < m; ++e) p += lambda * G.c[e] * std::abs(x[G.head[e]] - x[G.tail[e]]);
    for (std::size_t i = 0; i < n; ++i)
      if (!G.is_pinned(i)) p += 0.5 * G.q[i] * (x[i] - f[i]) * (x[i] - f[i]);
    return p;
  };
  auto dual = [&]() {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = dty[i];
      d += p * f[i];
      if (!G.is_pinned(i)) d -= 0.5 * p * p / G.q[i];
    }
    return d;
  };

  double gap = kInf;
  std::size_t it = 0;
  while (it < opt.max_iterations) {
    for (std::size_t e = 0; e < m; ++e) {
      const double bound = lambda * G.c[e];
      y[e] = std::clamp(y[e] + sigma * (wbar[G.head[e]] - wbar[G.tail[e]]), -bound, bound);
    }
    std::fill(dty.begin(), dty.end(), 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      dty[G.head[e]] += y[e];
      dty[G.tail[e]] -= y[e];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double prev = w[i];
      if (G.is_pinned(i)) {
        w[i] = f[i];
      } else {
        const double v = w[i] - tau[i] * dty[i];
        w[i] = (v + tau[i] * G.q[i] * f[i]) / (1.0 + tau[i] * G.q[i]);
      }
      wbar[i] = 2.0 * w[i] - prev;
    }
    ++it;
    if (it % opt.check_every == 0) {
      gap = primal(w) - dual();
      if (gap <= opt.gap_tol) break;
    }
  }
  if (gap > opt.gap_tol) {
    gap = primal(w) - dual();
    require(gap <= opt.gap_tol, ErrorCode::Convergence,
            "primal-dual iteration stopped at duality gap " + std::to_string(gap));
  }
  return PrimalDualResult{f.with_samples(std::move(w)), gap, it};
}

// ---------------------------------------------------------------------------
// Certificates

struct ProxCertificate {
  /// Normalized dual field z_e = phi_e / c_e per edge.
  std::vector<double> z;
  /// max(0, max |z_e| - 1).
  double bound_violation = 0.0;
  /// Divergence closure and jump-edge trace mismatch.
  double residual = 0.0;
  /// |sum_e phi_e D_e w - TV(w)|.
  double pairing_gap = 0.0;

  bool passes(double tol) const { return bound_violation <= tol && residual <= tol && pairing_gap <= tol; }
};

/// Reconstructs the discrete Cahn-Hoffman field from the node balance
/// phi_i = phi_{i-1} + q_i (w_i - f_i) / lambda, with phi_e = c_e z_e.
inline ProxCertificate verify_subdifferential(const GridSignal& w, const GridSignal& f, double lambda,
                                              double jump_tol = 1e-10) {
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  require(w.size() == f.size() && w.geometry() == f.geometry(), ErrorCode::InvalidArgument,
          "w and f must live on the same grid");
  const detail::GridGraph G(w);
  const std::size_t n = G.nodes, m = G.c.size();
  double scale = 0.0;
  for (double v : f.samples()) scale = std::max(scale, std::abs(v));
  const double jtol = jump_tol * (1.0 + scale);

  std::vector<double> S(m);
  double acc = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    acc += G.q[e] * (w[e] - f[e]) / lambda;
    S[e] = acc;
  }
  ProxCertificate cert;
  double C = 0.0;
  if (G.ring) {
    cert.residual = std::abs(S[m - 1]) / (1.0 + std::abs(acc));
    std::vector<double> Cs;
    for (std::size_t e = 0; e < m; ++e) {
      const double d = w.edge_difference(e);
      if (std::abs(d) > jtol) Cs.push_back(G.c[e] * sign(d) - S[e]);
    }
    if (Cs.empty()) {
      const auto [lo, hi] = std::minmax_element(S.begin(), S.end());
      C = -0.5 * (*lo + *hi);
    } else {
      C = std::accumulate(Cs.begin(), Cs.end(), 0.0) / static_cast<double>(Cs.size());
    }
  } else if (G.pinned < 0) {
    const double closure = S[m - 1] + G.q[n - 1] * (w[n - 1] - f[n - 1]) / lambda;
    cert.residual = std::abs(closure);
  }
  cert.z.resize(m);
  double pairing = 0.0, tv = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    const double phi = C + S[e];
    cert.z[e] = phi / G.c[e];
    cert.bound_violation = std::max(cert.bound_violation, std::abs(cert.z[e]) - 1.0);
    const double d = w.edge_difference(e);
    if (std::abs(d) > jtol) cert.residual = std::max(cert.residual, std::abs(cert.z[e] - sign(d)));
    pairing += phi * d;
    tv += G.c[e] * std::abs(d);
  }
  cert.bound_violation = std::max(0.0, cert.bound_violation);
  cert.pairing_gap = std::abs(pairing - tv);
  return cert;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Exhaustive search over sign patterns of the edge differences (<= 8 nodes).
/// Each pattern fixes the groups and their values in closed form; the feasible
/// pattern with the smallest objective wins, ties going to fewer jumps.
inline GridSignal brute_force_prox_oracle(const GridSignal& f, double lambda) {
  require(f.size() <= 8, ErrorCode::InvalidArgument, "oracle is limited to 8 nodes");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be non-negative");
  require(!(f.geometry() == GridGeometry::Radial && f.pinned_outer()), ErrorCode::InvalidArgument,
          "oracle does not support pinned nodes");
  if (lambda == 0.0) return f;
  const detail::GridGraph G(f);
  const std::size_t n = G.nodes, m = G.c.size();
  std::size_t patterns = 1;
  for (std::size_t e = 0; e < m; ++e) patterns *= 3;

  double scale = 0.0;
  for (double v : f.samples()) scale = std::max(scale, std::abs(v));
  double best = kInf;
  std::size_t best_jumps = m + 1;
  std::vector<double> best_w(f.samples());
  std::vector<int> sig(m);
  std::vector<std::size_t> comp(n);
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t x = code, jumps = 0;
    for (std::size_t e = 0; e < m; ++e) {
      sig[e] = static_cast<int>(x % 3) - 1;
      x /= 3;
      jumps += sig[e] != 0;
    }
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&comp](std::size_t a) {
      while (comp[a] != a) a = comp[a];
      return a;
    };
    for (std::size_t e = 0; e < m; ++e)
      if (sig[e] == 0) comp[root(G.head[e])] = root(G.tail[e]);
    std::vector<double> mass(n, 0.0), weight(n, 0.0), push(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      mass[root(i)] += G.q[i] * f[i];
      weight[root(i)] += G.q[i];
    }
    bool ok = true;
    for (std::size_t e = 0; e < m && ok; ++e) {
      if (sig[e] == 0) continue;
      const std::size_t a = root(G.tail[e]), b = root(G.head[e]);
      if (a == b) ok = false;
      push[b] += G.c[e] * sig[e];
      push[a] -= G.c[e] * sig[e];
    }
    if (!ok) continue;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = root(i);
      w[i] = (mass[r] - lambda * push[r]) / weight[r];
    }
    for (std::size_t e = 0; e < m && ok; ++e) {
      if (sig[e] == 0) continue;
      const double d = w[G.head[e]] - w[G.tail[e]];
      if (sign(d) != sig[e] || std::abs(d) <= 1e-13 * (1.0 + scale)) ok = false;
    }
    if (!ok) continue;
    const double obj = detail::prox_objective(f.with_samples(w), f, lambda);
    const double tie = 1e-12 * (1.0 + std::abs(best));
    if (obj < best - tie || (std::abs(obj - best) <= tie && jumps < best_jumps)) {
      best = obj;
      best_jumps = jumps;
      best_w = std::move(w);
    }
  }
  return f.with_samples(std::move(best_w));
}

// ---------------------------------------------------------------------------
// Minimizing movements

enum class ProxMethod { Exact, PrimalDual };

struct MinMovOptions {
  ProxMethod method = ProxMethod::Exact;
  /// Record every k-th iterate (the first and last are always kept).
  std::size_t record_every = 1;
  /// Stop once the iterate is constant (or equal to the pinned far field).
  bool stop_at_extinction = true;
  double extinction_tol = 1e-12;
  PrimalDualOptions primal_dual{};
};

namespace detail {
inline bool is_extinct(const GridSignal& u, double tol) {
  const auto [lo, hi] = std::minmax_element(u.samples().begin(), u.samples().end());
  double scale = std::max(std::abs(*lo), std::abs(*hi));
  return *hi - *lo <= tol * (1.0 + scale);
}
inline double half_energy(const GridSignal& u) {
  double e = 0.0;
  const bool pinned = u.geometry() == GridGeometry::Radial && u.pinned_outer();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(pinned && i + 1 == u.size())) e += 0.5 * u.weights()[i] * u[i] * u[i];
  return e;
}
}  // namespace detail

/// Iterated prox with step tau. Diagnostics per recorded iterate: "tv", "l2",
/// "dissipation_residual" = |(E(u_{k+1}) - E(u_k)) / tau + TV(u_{k+1})| with
/// E = half the squared L2 norm (0 at t = 0).
inline FlowTrajectory<GridSignal> minimizing_movements(const GridSignal& u0, double tau, std::size_t steps,
                                                       const MinMovOptions& opt = {}) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "time step must be positive");
  require(opt.record_every >= 1, ErrorCode::InvalidArgument, "record_every must be >= 1");
  FlowTrajectory<GridSignal> traj;
  auto record = [&traj](double t, const GridSignal& u, double residual) {
    traj.push(t, u);
    traj.diagnostics["tv"].push_back(total_variation(u));
    traj.diagnostics["l2"].push_back(lp_norm(u, 2.0));
    traj.diagnostics["dissipation_residual"].push_back(residual);
  };
  record(0.0, u0, 0.0);
  if (detail::is_extinct(u0, opt.extinction_tol) && opt.stop_at_extinction) return traj;
  GridSignal u = u0;
  for (std::size_t k = 1; k <= steps; ++k) {
    GridSignal next = opt.method == ProxMethod::Exact ? prox_tv_path(u, tau)
                                                      : prox_tv_primal_dual(u, tau, opt.primal_dual).w;
    const double tv = total_variation(next);
    const double residual = std::abs((detail::half_energy(next) - detail::half_energy(u)) / tau + tv);
    u = std::move(next);
    const double t = tau * static_cast<double>(k);
    const bool extinct = detail::is_extinct(u, opt.extinction_tol);
    if (k % opt.record_every == 0 || k == steps || extinct) record(t, u, residual);
    if (extinct) {
      traj.events.push_back(Event{t, EventKind::Extinction, "iterate is constant"});
      if (opt.stop_at_extinction) break;
    }
  }
  return traj;
}

}  // namespace tvflow
