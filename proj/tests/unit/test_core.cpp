#include "support.hpp"

using namespace tvflow;
using Catch::Approx;

TEST_CASE("unit ball volumes match elementary values", "[core]") {
  CHECK(unit_ball_volume(1) == Approx(2.0).epsilon(1e-15));
  CHECK(unit_ball_volume(2) == Approx(M_PI).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == Approx(4.0 * M_PI / 3.0).epsilon(1e-15));
  CHECK(unit_ball_volume(4) == Approx(M_PI * M_PI / 2.0).epsilon(1e-15));
  CHECK(sphere_area(3, 2.0) == Approx(16.0 * M_PI).epsilon(1e-15));
  CHECK(shell_volume(2, 1.0, 2.0) == Approx(3.0 * M_PI).epsilon(1e-15));
}

TEST_CASE("step functions are stored canonically", "[core]") {
  const StepFunction1D u({0.0, 0.25, 0.5}, {1.0, 1.0, 2.0});
  REQUIRE(u.size() == 2);
  CHECK(u.values()[0] == 1.0);
  CHECK(u.length(0) == Approx(0.5));
  // the wrap-around plateau merges with the first one
  const StepFunction1D w({0.0, 0.5, 0.75}, {3.0, 1.0, 3.0});
  CHECK(w.size() == 2);
  CHECK(w.integral() == Approx(3.0 * 0.75 + 0.25));
  CHECK_THROWS_AS(StepFunction1D({0.5, 0.25}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(StepFunction1D({0.0, 1.5}, {1.0, 2.0}), Error);
}

TEST_CASE("total variation of step functions and stacks", "[core]") {
  CHECK(total_variation(StepFunction1D::constant(3.0)) == 0.0);
  const auto bump = StepFunction1D::from_lengths(std::vector<double>{0.0, 1.0}, std::vector<double>{0.75, 0.25});
  CHECK(total_variation(bump) == Approx(2.0).epsilon(1e-15));
  const RadialStack disk({1.0}, {1.0}, 0.0, 2);
  CHECK(total_variation(disk) == Approx(2.0 * M_PI).epsilon(1e-15));
  const RadialStack two({1.0, 2.0}, {2.0, 1.0}, 0.0, 3);
  CHECK(total_variation(two) == Approx(4.0 * M_PI * 1.0 + 4.0 * M_PI * 4.0).epsilon(1e-14));
}

TEST_CASE("total variation is shift invariant and equals the jump mass", "[core]") {
  auto g = tvtest::rng(1);
  for (int trial = 0; trial < 25; ++trial) {
    const auto u = tvtest::random_step(g, 2 + trial % 7);
    std::vector<double> shifted = u.values();
    for (double& v : shifted) v += 0.37;
    CHECK(total_variation(u.with_values(shifted)) == Approx(total_variation(u)).epsilon(1e-13));
    CHECK(jump_measure(u).total() == Approx(total_variation(u)).epsilon(1e-13));
  }
  const RadialStack s({0.5, 1.0, 2.0}, {1.0, -1.0, 0.5}, 0.0, 3);
  double weighted = 0.0;
  for (const auto& a : jump_measure(s).atoms) weighted += a.size * sphere_area(3, a.location);
  CHECK(weighted == Approx(total_variation(s)).epsilon(1e-14));
}

TEST_CASE("weighted 1D total variation uses reduced point values", "[core]") {
  const IntervalStep u{-1.0, 1.0, {0.0}, {-1.0, 1.0}};
  const Weight1D one{[](double) { return 1.0; }, {}};
  const Weight1D reduced{[](double) { return 1.0; }, {{0.0, 0.5}}};
  CHECK(total_variation_weighted_1d(u, reduced) == Approx(1.0));
  CHECK(total_variation_weighted_1d(u, one) == Approx(2.0));
  CHECK(total_variation_weighted_1d(IntervalStep{-1.0, 1.0, {}, {4.0}}, reduced) == 0.0);
  const Weight1D negative{[](double) { return 1.0; }, {{0.0, -0.1}}};
  try {
    total_variation_weighted_1d(u, negative);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidWeight);
  }
}

TEST_CASE("Lp norms of exact types", "[core]") {
  const auto bump = StepFunction1D::from_lengths(std::vector<double>{0.0, 1.0}, std::vector<double>{0.75, 0.25});
  CHECK(lp_norm(bump, 1.0) == Approx(0.25));
  CHECK(lp_norm(bump, kInf) == 1.0);
  const RadialStack disk({1.0}, {1.0}, 0.0, 2);
  CHECK(lp_norm(disk, 2.0) == Approx(std::sqrt(M_PI)).epsilon(1e-15));
  CHECK(lp_norm(RadialStack({1.0}, {-3.0}, 0.0, 4), kInf) == 3.0);
  try {
    lp_norm(bump, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidExponent);
  }
  // absolute homogeneity
  auto g = tvtest::rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto u = tvtest::random_step(g, 5);
    const double c = tvtest::uniform(g, -3.0, 3.0);
    std::vector<double> scaled = u.values();
    for (double& v : scaled) v *= c;
    for (double p : {1.0, 2.0, 3.5, kInf})
      CHECK(lp_norm(u.with_values(scaled), p) == Approx(std::abs(c) * lp_norm(u, p)).epsilon(1e-13));
  }
}

TEST_CASE("radial grids integrate balls exactly", "[core]") {
  const RadialStack disk({1.0}, {1.0}, 0.0, 3);
  const auto g = sample_cell_average(disk, 64, 2.0, false);
  double vol = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    vol += g.weights()[i];
    mass += g.weights()[i] * g[i];
  }
  CHECK(vol == Approx(ball_volume(3, 2.0)).epsilon(1e-13));
  CHECK(mass == Approx(ball_volume(3, 1.0)).epsilon(1e-13));
  // edge weights are sphere areas at cell boundaries
  CHECK(g.edge_weights()[0] == Approx(sphere_area(3, g.spacing())).epsilon(1e-14));
}

TEST_CASE("cell averages of step functions conserve the integral", "[core]") {
  const StepFunction1D u({0.1, 0.33}, {2.0, -1.0});
  const auto g = sample_cell_average(u, 100);
  CHECK(g.mean() == Approx(u.mean()).margin(1e-14));
  CHECK(g[50] == Approx(-1.0).margin(1e-14));
}

TEST_CASE("trajectories enforce strictly increasing times from zero", "[core]") {
  FlowTrajectory<StepFunction1D> t;
  CHECK_THROWS_AS(t.push(0.5, StepFunction1D::constant(0.0)), Error);
  t.push(0.0, StepFunction1D::constant(0.0));
  CHECK_THROWS_AS(t.push(0.0, StepFunction1D::constant(0.0)), Error);
  t.push(1.0, StepFunction1D::constant(0.0));
  CHECK(t.size() == 2);
}

TEST_CASE("signatures and jump measures validate entries", "[core]") {
  CHECK_THROWS_AS(Signature({1, 0}), Error);
  CHECK_THROWS_AS(JumpMeasure({Atom{0.1, 0.0}}), Error);
  CHECK_THROWS_AS(JumpMeasure({Atom{0.1, 1.0}, Atom{0.1, 2.0}}), Error);
}
