#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvflow/error.hpp"

namespace tvflow {

/// Absolute tolerance under which two plateau values are considered equal.
inline constexpr double kValueTol = 1e-12;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

// ---------------------------------------------------------------------------
// Geometry of balls and spheres in R^n

/// Lebesgue measure of the unit ball, pi^{n/2} / Gamma(n/2 + 1).
inline double unit_ball_volume(int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

inline double ball_volume(int n, double r) { return unit_ball_volume(n) * std::pow(r, n); }

/// Measure of the sphere of radius r (n = 1: two points).
inline double sphere_area(int n, double r) {
  return n * unit_ball_volume(n) * std::pow(r, n - 1);
}

inline double shell_volume(int n, double r0, double r1) {
  return unit_ball_volume(n) * (std::pow(r1, n) - std::pow(r0, n));
}

// ---------------------------------------------------------------------------
// StepFunction1D

/// Piecewise-constant function on the circle R / LZ.
///
/// Plateau k occupies [x_k, x_{k+1}) and the last plateau wraps around to
/// x_0 + L. Adjacent plateaus with equal values (within kValueTol) are fused
/// at construction, so the stored representation is canonical.
class StepFunction1D {
 public:
  StepFunction1D(std::vector<double> breakpoints, std::vector<double> values, double period = 1.0)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)), period_(period) {
    require(period_ > 0.0 && std::isfinite(period_), ErrorCode::InvalidArgument,
            "step function period must be positive");
    require(!values_.empty(), ErrorCode::InvalidArgument, "step function needs at least one plateau");
    require(values_.size() == breakpoints_.size(), ErrorCode::InvalidArgument,
            "breakpoints and values must have the same length");
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
      require(breakpoints_[k] >= 0.0 && breakpoints_[k] < period_, ErrorCode::InvalidArgument,
              "breakpoints must lie in [0, period)");
      require(k == 0 || breakpoints_[k] > breakpoints_[k - 1], ErrorCode::InvalidArgument,
              "breakpoints must be strictly increasing");
      require(std::isfinite(values_[k]), ErrorCode::InvalidArgument, "plateau values must be finite");
    }
    canonicalize();
  }

  /// Plateaus laid out consecutively from `origin`; the period is the total length.
  static StepFunction1D from_lengths(std::span<const double> values, std::span<const double> lengths,
                                     double origin = 0.0) {
    require(values.size() == lengths.size() && !values.empty(), ErrorCode::InvalidArgument,
            "values and lengths must be non-empty and of equal size");
    double period = 0.0;
    std::vector<double> bps;
    bps.reserve(lengths.size());
    for (double len : lengths) {
      require(len > 0.0, ErrorCode::InvalidArgument, "plateau lengths must be positive");
      bps.push_back(period);
      period += len;
    }
    require(origin >= 0.0 && origin < period, ErrorCode::InvalidArgument, "origin must lie in [0, period)");
    // rotate so breakpoints are sorted within [0, period)
    std::vector<std::pair<double, double>> pl;
    for (std::size_t k = 0; k < bps.size(); ++k) {
      double x = bps[k] + origin;
      if (x >= period) x -= period;
      pl.emplace_back(x, values[k]);
    }
    std::sort(pl.begin(), pl.end());
    std::vector<double> xs, vs;
    for (auto& [x, v] : pl) {
      xs.push_back(x);
      vs.push_back(v);
    }
    return StepFunction1D(std::move(xs), std::move(vs), period);
  }

  static StepFunction1D constant(double value, double period = 1.0) {
    return StepFunction1D({0.0}, {value}, period);
  }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double period() const noexcept { return period_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_constant() const noexcept { return values_.size() == 1; }

  double length(std::size_t k) const {
    if (size() == 1) return period_;
    const std::size_t next = (k + 1) % size();
    double len = breakpoints_[next] - breakpoints_[k];
    if (next == 0) len += period_;
    return len;
  }

  std::vector<double> lengths() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = length(k);
    return out;
  }

  /// Index of the plateau containing x (x taken modulo the period).
  std::size_t plateau_at(double x) const {
    x = std::fmod(x, period_);
    if (x < 0.0) x += period_;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it == breakpoints_.begin()) return size() - 1;
    return static_cast<std::size_t>(std::distance(breakpoints_.begin(), it) - 1);
  }

  double operator()(double x) const { return values_[plateau_at(x)]; }

  double integral() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += values_[k] * length(k);
    return s;
  }

  double mean() const { return integral() / period_; }

  /// Same breakpoints with new plateau values (re-canonicalized).
  StepFunction1D with_values(std::vector<double> values) const {
    return StepFunction1D(breakpoints_, std::move(values), period_);
  }

  friend bool operator==(const StepFunction1D&, const StepFunction1D&) = default;

 private:
  void canonicalize() {
    if (values_.size() < 2) return;
    std::vector<double> lens = lengths();
    std::vector<double> xs{breakpoints_[0]}, vs{values_[0]}, ls{lens[0]};
    for (std::size_t k = 1; k < values_.size(); ++k) {
      if (std::abs(values_[k] - vs.back()) <= kValueTol) {
        vs.back() = (vs.back() * ls.back() + values_[k] * lens[k]) / (ls.back() + lens[k]);
        ls.back() += lens[k];
      } else {
        xs.push_back(breakpoints_[k]);
        vs.push_back(values_[k]);
        ls.push_back(lens[k]);
      }
    }
    if (vs.size() > 1 && std::abs(vs.front() - vs.back()) <= kValueTol) {
      // fold the first plateau into the last one, which wraps around
      vs.back() = (vs.back() * ls.back() + vs.front() * ls.front()) / (ls.back() + ls.front());
      xs.erase(xs.begin());
      vs.erase(vs.begin());
    }
    if (vs.size() == 1) xs = {breakpoints_[0]};
    breakpoints_ = std::move(xs);
    values_ = std::move(vs);
  }

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double period_;
};

/// Visits the common refinement of two step functions with equal period:
/// visit(start, length, u_value, v_value) for every sub-interval.
template <class Visit>
void for_each_common_piece(const StepFunction1D& u, const StepFunction1D& v, Visit&& visit) {
  require(std::abs(u.period() - v.period()) <= 1e-12 * u.period(), ErrorCode::InvalidArgument,
          "step functions must share the same period");
  std::vector<double> cuts = u.breakpoints();
  cuts.insert(cuts.end(), v.breakpoints().begin(), v.breakpoints().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double L = u.period();
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = (k + 1 < cuts.size()) ? cuts[k + 1] : cuts[0] + L;
    const double mid = 0.5 * (a + b);
    visit(a, b - a, u(mid), v(mid));
  }
}

inline double lp_distance(const StepFunction1D& u, const StepFunction1D& v, double p = 2.0) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
  double acc = 0.0;
  for_each_common_piece(u, v, [&](double, double len, double a, double b) {
    if (std::isinf(p))
      acc = std::max(acc, std::abs(a - b));
    else
      acc += std::pow(std::abs(a - b), p) * len;
  });
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

/// inf over x of v(x) - u(x).
inline double min_difference(const StepFunction1D& u, const StepFunction1D& v) {
  double m = kInf;
  for_each_common_piece(u, v, [&](double, double, double a, double b) { m = std::min(m, b - a); });
  return m;
}

// ---------------------------------------------------------------------------
// RadialStack

/// Radially symmetric piecewise-constant function on R^n.
///
/// values[0] lives on the ball B_{R_0}, values[k] on the annulus
/// R_{k-1} < |x| < R_k, and outer_value outside B_{R_{m-1}}.
class RadialStack {
 public:
  RadialStack(std::vector<double> radii, std::vector<double> values, double outer_value, int dimension)
      : radii_(std::move(radii)), values_(std::move(values)), outer_(outer_value), dim_(dimension) {
    require(dim_ >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
    require(radii_.size() == values_.size(), ErrorCode::InvalidArgument,
            "a stack needs one value per radius");
    for (std::size_t k = 0; k < radii_.size(); ++k) {
      require(radii_[k] > 0.0 && std::isfinite(radii_[k]), ErrorCode::InvalidArgument,
              "radii must be positive and finite");
      require(k == 0 || radii_[k] > radii_[k - 1], ErrorCode::InvalidArgument,
              "radii must be strictly increasing");
    }
    canonicalize();
  }

  static RadialStack ball(int n, double a0, double R0) { return RadialStack({R0}, {a0}, 0.0, n); }
  static RadialStack constant(int n, double value) { return RadialStack({}, {}, value, n); }

  const std::vector<double>& radii() const noexcept { return radii_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double outer_value() const noexcept { return outer_; }
  int dimension() const noexcept { return dim_; }
  /// Number of bounded regions.
  std::size_t size() const noexcept { return values_.size(); }
  bool is_constant() const noexcept { return values_.empty(); }

  /// Value of region k; k == size() is the unbounded outer region.
  double region_value(std::size_t k) const { return k < size() ? values_[k] : outer_; }

  double inner_radius(std::size_t k) const { return k == 0 ? 0.0 : radii_[k - 1]; }

  double region_volume(std::size_t k) const {
    if (k >= size()) return kInf;
    return shell_volume(dim_, inner_radius(k), radii_[k]);
  }

  double operator()(double r) const {
    auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
    return region_value(static_cast<std::size_t>(std::distance(radii_.begin(), it)));
  }

  RadialStack with_values(std::vector<double> values, double outer_value) const {
    return RadialStack(radii_, std::move(values), outer_value, dim_);
  }

  friend bool operator==(const RadialStack&, const RadialStack&) = default;

 private:
  void canonicalize() {
    std::vector<double> rs, vs;
    std::vector<double> vols;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double vol = shell_volume(dim_, k == 0 ? 0.0 : radii_[k - 1], radii_[k]);
      if (!vs.empty() && std::abs(values_[k] - vs.back()) <= kValueTol) {
        vs.back() = (vs.back() * vols.back() + values_[k] * vol) / (vols.back() + vol);
        vols.back() += vol;
        rs.back() = radii_[k];
      } else {
        rs.push_back(radii_[k]);
        vs.push_back(values_[k]);
        vols.push_back(vol);
      }
    }
    while (!vs.empty() && std::abs(vs.back() - outer_) <= kValueTol) {
      rs.pop_back();
      vs.pop_back();
      vols.pop_back();
    }
    radii_ = std::move(rs);
    values_ = std::move(vs);
  }

  std::vector<double> radii_;
  std::vector<double> values_;
  double outer_;
  int dim_;
};

// ---------------------------------------------------------------------------
// GridSignal

enum class GridGeometry { Periodic, Neumann, Radial };

/// Cell-centred samples on a uniform grid.
///
/// Node i represents the cell [i h, (i+1) h). Edge e joins nodes e and e+1
/// (wrapping for periodic grids) and sits on the cell boundary (e+1) h.
/// Radial grids use exact shell volumes as quadrature weights and sphere
/// areas at the cell boundaries as edge weights; `pinned_outer` makes the last
/// node behave as an infinite reservoir (the far field of R^n).
class GridSignal {
 public:
  static GridSignal periodic(std::vector<double> samples, double spacing) {
    return GridSignal(std::move(samples), spacing, GridGeometry::Periodic, 1, false);
  }
  static GridSignal neumann(std::vector<double> samples, double spacing) {
    return GridSignal(std::move(samples), spacing, GridGeometry::Neumann, 1, false);
  }
  static GridSignal radial(std::vector<double> samples, double spacing, int dimension,
                           bool pinned_outer = false) {
    return GridSignal(std::move(samples), spacing, GridGeometry::Radial, dimension, pinned_outer);
  }

  GridGeometry geometry() const noexcept { return geometry_; }
  int dimension() const noexcept { return dim_; }
  bool pinned_outer() const noexcept { return pinned_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& edge_weights() const noexcept { return edge_weights_; }
  std::size_t edge_count() const noexcept { return edge_weights_.size(); }
  double extent() const noexcept { return h_ * static_cast<double>(size()); }

  double node_position(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h_; }

  double edge_location(std::size_t e) const {
    const double x = static_cast<double>(e + 1) * h_;
    return (geometry_ == GridGeometry::Periodic && e + 1 == size()) ? 0.0 : x;
  }

  /// u_{e+1} - u_e.
  double edge_difference(std::size_t e) const {
    const std::size_t next = (e + 1) % size();
    return samples_[next] - samples_[e];
  }

  double mean() const {
    double s = 0.0, w = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      s += weights_[i] * samples_[i];
      w += weights_[i];
    }
    return s / w;
  }

  GridSignal with_samples(std::vector<double> samples) const {
    require(samples.size() == samples_.size(), ErrorCode::InvalidArgument, "sample count mismatch");
    GridSignal g = *this;
    g.samples_ = std::move(samples);
    return g;
  }

  friend bool operator==(const GridSignal& a, const GridSignal& b) {
    return a.geometry_ == b.geometry_ && a.dim_ == b.dim_ && a.pinned_ == b.pinned_ && a.h_ == b.h_ &&
           a.samples_ == b.samples_;
  }

 private:
  GridSignal(std::vector<double> samples, double spacing, GridGeometry geometry, int dim, bool pinned)
      : samples_(std::move(samples)), h_(spacing), geometry_(geometry), dim_(dim), pinned_(pinned) {
    require(samples_.size() >= 2, ErrorCode::InvalidArgument, "a grid signal needs at least 2 samples");
    require(h_ > 0.0 && std::isfinite(h_), ErrorCode::InvalidArgument, "grid spacing must be positive");
    require(dim_ >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
    const std::size_t n = samples_.size();
    if (geometry_ == GridGeometry::Radial) {
      weights_.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        weights_[i] = shell_volume(dim_, static_cast<double>(i) * h_, static_cast<double>(i + 1) * h_);
      edge_weights_.resize(n - 1);
      for (std::size_t e = 0; e + 1 < n; ++e)
        edge_weights_[e] = sphere_area(dim_, static_cast<double>(e + 1) * h_);
    } else {
      weights_.assign(n, h_);
      edge_weights_.assign(geometry_ == GridGeometry::Periodic ? n : n - 1, 1.0);
    }
  }

  std::vector<double> samples_;
  double h_;
  GridGeometry geometry_;
  int dim_;
  bool pinned_;
  std::vector<double> weights_;
  std::vector<double> edge_weights_;
};

/// Exact cell averages of a step function on `nodes` periodic cells.
inline GridSignal sample_cell_average(const StepFunction1D& u, std::size_t nodes) {
  require(nodes >= 2, ErrorCode::InvalidArgument, "need at least 2 nodes");
  const double L = u.period();
  const double h = L / static_cast<double>(nodes);
  std::vector<double> acc(nodes, 0.0);
  // integrate plateau by plateau, splitting at cell boundaries
  for (std::size_t k = 0; k < u.size(); ++k) {
    double a = u.breakpoints()[k];
    double b = a + u.length(k);
    const double v = u.values()[k];
    // unwrapped cell index; advancing it every pass guarantees termination
    auto j = static_cast<std::size_t>(std::max(0.0, std::floor(a / h)));
    if (static_cast<double>(j + 1) * h <= a) ++j;
    while (a < b) {
      const double seg_end = std::min(b, static_cast<double>(j + 1) * h);
      acc[j % nodes] += v * (seg_end - a);
      a = seg_end;
      ++j;
    }
  }
  for (double& x : acc) x /= h;
  return GridSignal::periodic(std::move(acc), h);
}

/// Volume-weighted cell averages of a radial stack on [0, r_max].
inline GridSignal sample_cell_average(const RadialStack& u, std::size_t nodes, double r_max,
                                      bool pinned_outer = true) {
  require(nodes >= 2 && r_max > 0.0, ErrorCode::InvalidArgument, "invalid radial grid");
  const int n = u.dimension();
  const double h = r_max / static_cast<double>(nodes);
  std::vector<double> out(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double r0 = static_cast<double>(i) * h, r1 = static_cast<double>(i + 1) * h;
    double acc = 0.0, lo = r0;
    for (std::size_t k = 0; k <= u.size() && lo < r1; ++k) {
      const double hi = k < u.size() ? std::min(r1, u.radii()[k]) : r1;
      if (hi > lo) {
        acc += u.region_value(k) * shell_volume(n, lo, hi);
        lo = hi;
      }
    }
    out[i] = acc / shell_volume(n, r0, r1);
  }
  return GridSignal::radial(std::move(out), h, n, pinned_outer);
}

/// A periodic grid signal read as a step function (one plateau per cell).
inline StepFunction1D to_step_function(const GridSignal& g) {
  require(g.geometry() == GridGeometry::Periodic, ErrorCode::InvalidArgument,
          "only periodic grids map to step functions on the circle");
  std::vector<double> xs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) xs[i] = static_cast<double>(i) * g.spacing();
  return StepFunction1D(std::move(xs), g.samples(), g.extent());
}

// ---------------------------------------------------------------------------
// Jump measures, signatures, trajectories

struct Atom {
  double location;
  double size;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Jump part |D^j u| as a list of atoms (trace gaps, not perimeter-weighted).
struct JumpMeasure {
  std::vector<Atom> atoms;

  JumpMeasure() = default;
  explicit JumpMeasure(std::vector<Atom> a) : atoms(std::move(a)) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      require(atoms[i].size > 0.0, ErrorCode::InvalidArgument, "atom sizes must be positive");
      for (std::size_t j = 0; j < i; ++j)
        require(atoms[j].location != atoms[i].location, ErrorCode::InvalidArgument,
                "atom locations must be distinct");
    }
  }

  double total() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.size;
    return s;
  }
  bool empty() const { return atoms.empty(); }
  friend bool operator==(const JumpMeasure&, const JumpMeasure&) = default;
};

/// Boundary-component signs; chi = +1 when the neighbouring value is higher.
struct Signature {
  std::vector<int> chi;

  Signature() = default;
  Signature(std::initializer_list<int> entries) : Signature(std::vector<int>(entries)) {}
  explicit Signature(std::vector<int> entries) : chi(std::move(entries)) {
    for (int c : chi) require(c == 1 || c == -1, ErrorCode::InvalidArgument, "signature entries must be +-1");
  }
  std::size_t size() const { return chi.size(); }
  int operator[](std::size_t i) const { return chi[i]; }
  friend bool operator==(const Signature&, const Signature&) = default;
};

enum class EventKind { Merge, Extinction, Steady };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Merge: return "merge";
    case EventKind::Extinction: return "extinction";
    case EventKind::Steady: return "steady";
  }
  return "unknown";
}

struct Event {
  double time;
  EventKind kind;
  std::string detail;
  friend bool operator==(const Event&, const Event&) = default;
};

template <class State>
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Event> events;
  std::map<std::string, std::vector<double>> diagnostics;

  void push(double t, State s) {
    if (times.empty())
      require(t == 0.0, ErrorCode::InvalidArgument, "trajectories start at t = 0");
    else
      require(t > times.back(), ErrorCode::InvalidArgument, "trajectory times must increase strictly");
    times.push_back(t);
    states.push_back(std::move(s));
  }

  std::size_t size() const { return times.size(); }
  const State& final_state() const { return states.back(); }

  const Event* first_event(EventKind kind) const {
    for (const auto& e : events)
      if (e.kind == kind) return &e;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Total variation and norms

inline double total_variation(const StepFunction1D& u) {
  if (u.size() < 2) return 0.0;
  double tv = 0.0;
  const auto& v = u.values();
  for (std::size_t k = 0; k < v.size(); ++k) tv += std::abs(v[(k + 1) % v.size()] - v[k]);
  return tv;
}

/// Perimeter-weighted jump sum over the spheres |x| = R_k.
inline double total_variation(const RadialStack& u) {
  double tv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    tv += std::abs(u.region_value(k + 1) - u.region_value(k)) * sphere_area(u.dimension(), u.radii()[k]);
  return tv;
}

/// Edge-weighted discrete total variation.
inline double total_variation(const GridSignal& g) {
  double tv = 0.0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) tv += g.edge_weights()[e] * std::abs(g.edge_difference(e));
  return tv;
}

/// Step function on a bounded interval [left, right) with interior jump points.
struct IntervalStep {
  double left;
  double right;
  std::vector<double> jumps;   // interior, strictly increasing
  std::vector<double> values;  // jumps.size() + 1 entries
};

/// Lower semicontinuous weight: a continuous part plus isolated reduced point values.
struct Weight1D {
  std::function<double(double)> continuous;
  std::vector<std::pair<double, double>> point_values;

  double at(double x) const {
    for (const auto& [px, pv] : point_values)
      if (px == x) return pv;
    return continuous(x);
  }
};

/// Weighted total variation of an interval step function: sum of a(x_j)|jump_j|,
/// using the reduced point value of a where one is given.
inline double total_variation_weighted_1d(const IntervalStep& u, const Weight1D& a) {
  require(u.values.size() == u.jumps.size() + 1, ErrorCode::InvalidArgument,
          "interval step needs one more value than jumps");
  for (const auto& [px, pv] : a.point_values)
    require(pv >= 0.0, ErrorCode::InvalidWeight, "weights must be non-negative");
  double tv = 0.0;
  for (std::size_t j = 0; j < u.jumps.size(); ++j) {
    const double x = u.jumps[j];
    require(x > u.left && x < u.right, ErrorCode::InvalidArgument, "jumps must be interior");
    const double w = a.at(x);
    require(w >= 0.0, ErrorCode::InvalidWeight, "weights must be non-negative");
    tv += w * std::abs(u.values[j + 1] - u.values[j]);
  }
  return tv;
}

namespace detail {
inline void check_exponent(double p) {
  require(p >= 1.0, ErrorCode::InvalidExponent, "exponent must be >= 1");
}
}  // namespace detail

inline double lp_norm(const StepFunction1D& u, double p) {
  detail::check_exponent(p);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += std::pow(std::abs(u.values()[k]), p) * u.length(k);
  return std::pow(acc, 1.0 / p);
}

/// Exact shell-volume integral; infinite when the outer value is non-zero and p < inf.
inline double lp_norm(const RadialStack& u, double p) {
  detail::check_exponent(p);
  if (std::isinf(p)) {
    double m = std::abs(u.outer_value());
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (u.outer_value() != 0.0) return kInf;
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += std::pow(std::abs(u.values()[k]), p) * u.region_volume(k);
  return std::pow(acc, 1.0 / p);
}

inline double lp_norm(const GridSignal& g, double p) {
  detail::check_exponent(p);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : g.samples()) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.weights()[i] * std::pow(std::abs(g[i]), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace tvflow
