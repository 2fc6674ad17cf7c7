#include "support.hpp"

using namespace tvflow;
using Catch::Approx;

namespace {
GridSignal random_grid(std::mt19937_64& g, std::size_t n, bool periodic) {
  std::vector<double> v(n);
  for (double& x : v) x = tvtest::uniform(g, -1.0, 1.0);
  return periodic ? GridSignal::periodic(v, 1.0 / static_cast<double>(n)) : GridSignal::neumann(v, 1.0);
}

/// Objective value in the form it is documented for periodic and Neumann grids.
double objective(const GridSignal& w, const GridSignal& f, double lambda) {
  double fid = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) fid += 0.5 * w.spacing() * (w[i] - f[i]) * (w[i] - f[i]);
  double tv = 0.0;
  for (std::size_t e = 0; e < w.edge_count(); ++e) tv += std::abs(w.edge_difference(e));
  return lambda * tv + fid;
}
}  // namespace

TEST_CASE("three-node bump prox", "[minmov]") {
  const auto f = GridSignal::neumann({0.0, 1.0, 0.0}, 1.0);
  const auto w = prox_tv_1d(f, 0.1);
  CHECK(w[0] == Approx(0.1).epsilon(1e-14));
  CHECK(w[1] == Approx(0.8).epsilon(1e-14));
  CHECK(w[2] == Approx(0.1).epsilon(1e-14));
  const auto o = brute_force_prox_oracle(f, 0.1);
  CHECK(tvtest::max_abs_diff(o.samples(), w.samples()) < 1e-12);
  const auto c = verify_subdifferential(w, f, 0.1);
  CHECK(c.passes(1e-10));
}

TEST_CASE("prox limits", "[minmov]") {
  auto g = tvtest::rng(41);
  const auto f = random_grid(g, 40, true);
  const auto big = prox_tv_1d(f, 1e3);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(big[i] == Approx(f.mean()).margin(1e-12));
  const auto tiny = prox_tv_1d(f, 1e-15);
  CHECK(tvtest::max_abs_diff(tiny.samples(), f.samples()) < 1e-12);
  const auto c = GridSignal::periodic(std::vector<double>(16, 0.3), 0.1);
  CHECK(prox_tv_1d(c, 0.5).samples() == c.samples());
  CHECK_THROWS_AS(prox_tv_1d(f, 0.0), Error);
}

TEST_CASE("monotone chain: end plateaus move inward by lambda over h", "[minmov]") {
  const auto f = GridSignal::neumann({0.0, 1.0, 2.0, 3.0}, 1.0);
  const auto w = brute_force_prox_oracle(f, 0.2);
  CHECK(w[0] == Approx(0.2));
  CHECK(w[1] == Approx(1.0));
  CHECK(w[2] == Approx(2.0));
  CHECK(w[3] == Approx(2.8));
  CHECK(brute_force_prox_oracle(f, 0.0).samples() == f.samples());
}

TEST_CASE("exact prox matches the oracle and certifies", "[minmov]") {
  auto g = tvtest::rng(42);
  for (int t = 0; t < 120; ++t) {
    const bool periodic = t % 2 == 0;
    const auto f = random_grid(g, 2 + t % 7, periodic);
    const double lambda = std::pow(10.0, tvtest::uniform(g, -3.0, 1.0));
    const auto w = prox_tv_1d(f, lambda);
    const auto o = brute_force_prox_oracle(f, lambda);
    CHECK(tvtest::max_abs_diff(w.samples(), o.samples()) < 1e-8);
    CHECK(verify_subdifferential(w, f, lambda).passes(1e-8));
    CHECK(w.mean() == Approx(f.mean()).margin(1e-13));
  }
}

TEST_CASE("primal-dual iteration agrees with the exact prox", "[minmov]") {
  auto g = tvtest::rng(43);
  for (int t = 0; t < 6; ++t) {
    const auto f = random_grid(g, 32, t % 2 == 0);
    const double lambda = 0.05 * (t + 1);
    const auto pd = prox_tv_primal_dual(f, lambda);
    const auto w = prox_tv_1d(f, lambda);
    CHECK(objective(pd.w, f, lambda) - objective(w, f, lambda) <= 1e-8);
    CHECK(tvtest::max_abs_diff(pd.w.samples(), w.samples()) < 1e-4);
  }
}

TEST_CASE("prox is non-expansive and shrinks every edge difference", "[minmov]") {
  auto g = tvtest::rng(44);
  for (int t = 0; t < 40; ++t) {
    const auto f = random_grid(g, 24, true);
    const auto h = random_grid(g, 24, true);
    const double lambda = tvtest::uniform(g, 0.001, 0.2);
    const auto wf = prox_tv_1d(f, lambda), wh = prox_tv_1d(h, lambda);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < 24; ++i) {
      lhs += (wf[i] - wh[i]) * (wf[i] - wh[i]);
      rhs += (f[i] - h[i]) * (f[i] - h[i]);
    }
    CHECK(lhs <= rhs * (1 + 1e-12));
    for (std::size_t e = 0; e < 24; ++e) CHECK(std::abs(wf.edge_difference(e)) <= std::abs(f.edge_difference(e)) + 1e-12);
  }
}

TEST_CASE("certificates reject non-minimizers", "[minmov]") {
  const auto f = GridSignal::periodic({0.0, 1.0, 0.5, -0.2}, 0.25);
  CHECK_FALSE(verify_subdifferential(f, f, 1.0).passes(1e-8));
  const auto c = GridSignal::periodic(std::vector<double>(5, 2.0), 0.2);
  const auto cert = verify_subdifferential(c, c, 0.7);
  CHECK(cert.bound_violation == 0.0);
  CHECK(cert.residual == 0.0);
  CHECK(cert.pairing_gap == 0.0);
}

TEST_CASE("radial prox in one dimension reduces to the chain prox", "[minmov]") {
  auto g = tvtest::rng(45);
  std::vector<double> v(30);
  for (double& x : v) x = tvtest::uniform(g, -1.0, 1.0);
  const auto r = prox_tv_radial(GridSignal::radial(v, 0.1, 1, false), 0.03);
  const auto c = prox_tv_1d(GridSignal::neumann(v, 0.1), 0.03);
  CHECK(tvtest::max_abs_diff(r.samples(), c.samples()) < 1e-12);
  const auto flat = GridSignal::radial(std::vector<double>(10, 1.0), 0.1, 3, false);
  CHECK(prox_tv_radial(flat, 0.2).samples() == flat.samples());
}

TEST_CASE("radial prox agrees with the primal-dual method", "[minmov]") {
  const auto f = sample_cell_average(RadialStack({1.0, 1.5}, {1.0, -0.5}, 0.0, 3), 60, 3.0, true);
  const auto w = prox_tv_radial(f, 0.05);
  const auto pd = prox_tv_primal_dual(f, 0.05);
  CHECK(tvtest::max_abs_diff(w.samples(), pd.w.samples()) < 1e-4);
  CHECK(verify_subdifferential(w, f, 0.05).passes(1e-8));
}

TEST_CASE("disk plateau decays at the Cheeger speed", "[minmov]") {
  const double lambda = 1e-3;
  const auto f = sample_cell_average(RadialStack({1.0}, {1.0}, 0.0, 2), 500, 2.0, true);
  const auto w = prox_tv_radial(f, lambda);
  CHECK(w[10] == Approx(1.0 - 2.0 * lambda).margin(1e-4));
}

TEST_CASE("minimizing movements on a disk vanish near the exact time", "[minmov]") {
  const auto u0 = sample_cell_average(RadialStack({1.0}, {1.0}, 0.0, 2), 400, 3.0, true);
  const auto t = minimizing_movements(u0, 1e-3, 2000);
  const Event* e = t.first_event(EventKind::Extinction);
  REQUIRE(e);
  CHECK(std::abs(e->time - 0.5) <= 0.02);
}

TEST_CASE("minimizing movements on a bump track the exact plateau speed", "[minmov]") {
  const auto exact = StepFunction1D::from_lengths(std::vector<double>{0.0, 1.0}, std::vector<double>{0.75, 0.25});
  const auto t = minimizing_movements(sample_cell_average(exact, 512), 1e-4, 400);
  const double top = t.final_state()[448];
  const double rate = (top - 1.0) / t.times.back();
  CHECK(rate == Approx(-8.0).epsilon(0.02));
  // energy inequality per step
  const auto& tv = t.diagnostics.at("tv");
  for (std::size_t k = 1; k < t.size(); ++k) {
    CHECK(tv[k] <= tv[k - 1] + 1e-12);
    double d2 = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
      const double d = t.states[k][i] - t.states[k - 1][i];
      d2 += d * d / 512.0;
    }
    CHECK(0.5 * d2 <= 1e-4 * (tv[k - 1] - tv[k]) * (1 + 1e-9) + 1e-15);
  }
  const auto c = minimizing_movements(GridSignal::periodic(std::vector<double>(8, 1.0), 0.125), 0.1, 5);
  CHECK(c.final_state().samples() == std::vector<double>(8, 1.0));
}
