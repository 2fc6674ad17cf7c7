#include "support.hpp"

using namespace tvflow;
using Catch::Approx;

TEST_CASE("closed-form ball states", "[fourth]") {
  const auto s = fourth_ball_closed_form(5, 1.0, 1.0, 0.01);
  REQUIRE(s);
  CHECK(s->a == Approx(std::pow(0.5, 0.7)).epsilon(1e-14));
  CHECK(s->R == Approx(std::pow(0.5, 0.1)).epsilon(1e-14));
  CHECK(fourth_extinction_time(5, 1.0, 1.0) == Approx(0.02).epsilon(1e-15));
  CHECK_FALSE(fourth_ball_closed_form(5, 1.0, 1.0, 0.02));
  for (double t : {0.0, 0.01, 0.03}) CHECK(fourth_ball_closed_form(4, 2.0, 1.3, t)->R == 1.3);
  const auto one = fourth_ball_closed_form(1, 1.0, 1.0, 4.0);
  CHECK(one->a == Approx(0.2).epsilon(1e-14));
  CHECK(one->R == Approx(5.0).epsilon(1e-14));
  CHECK(std::isinf(fourth_extinction_time(1, 1.0, 1.0)));
  try {
    fourth_ball_closed_form(2, 1.0, 1.0, 0.1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotApplicable);
  }
}

TEST_CASE("ball rates and the conserved combination", "[fourth]") {
  const auto [da, dR] = fourth_ball_rhs(3, 1.0, 1.0);
  CHECK(da == Approx(-15.0));
  CHECK(dR == Approx(3.0));
  CHECK(fourth_ball_rhs(4, 0.3, 2.1).second == 0.0);
  const auto [da5, dR5] = fourth_ball_rhs(5, 1.0, 1.0);
  CHECK(3.0 * dR5 + da5 == Approx(-50.0));
  CHECK_THROWS_AS(fourth_ball_rhs(3, -1.0, 1.0), Error);
  CHECK_THROWS_AS(fourth_ball_rhs(3, 1.0, 0.0), Error);
}

TEST_CASE("closed form solves the ball ODE", "[fourth]") {
  auto g = tvtest::rng(31);
  for (int n : {1, 3, 4, 5, 6}) {
    for (int k = 0; k < 4; ++k) {
      const double a0 = tvtest::uniform(g, 0.5, 2.0), R0 = tvtest::uniform(g, 0.5, 2.0);
      const double T = n == 1 ? 1.0 : fourth_extinction_time(n, a0, R0);
      const double t = tvtest::uniform(g, 0.1, 0.8) * T;
      const double h = 1e-6 * T;
      const auto p = *fourth_ball_closed_form(n, a0, R0, t + h);
      const auto m = *fourth_ball_closed_form(n, a0, R0, t - h);
      const auto c = *fourth_ball_closed_form(n, a0, R0, t);
      const auto [da, dR] = fourth_ball_rhs(n, c.a, c.R);
      CHECK((p.a - m.a) / (2 * h) == Approx(da).epsilon(1e-6));
      if (n != 4) CHECK((p.R - m.R) / (2 * h) == Approx(dR).epsilon(1e-6));
      // Lp norms are non-increasing along the trajectory
      for (double q : {1.0, 2.0, 5.0}) CHECK(fourth_ball_lp_norm(p, q) <= fourth_ball_lp_norm(c, q) * (1 + 1e-12));
    }
  }
}

TEST_CASE("two-dimensional ball ODE keeps a positive gap", "[fourth]") {
  const auto t = fourth_ball_ode_n2(1.0, 1.0, 50.0);
  REQUIRE(t.size() > 2);
  for (std::size_t k = 1; k < t.size(); ++k) {
    CHECK(t.states[k].a < t.states[k - 1].a);
    CHECK(t.states[k].R > t.states[k - 1].R);
    CHECK(t.states[k].gap > 0.0);
  }
  CHECK(t.events.empty());
  const auto z = fourth_ball_ode_n2(1.3, 0.7, 0.0);
  REQUIRE(z.size() == 1);
  CHECK(z.states[0].a == 1.3);
  CHECK(z.states[0].R == 0.7);
  // fixed-step classical RK4 on the same system as an independent reference
  double a = 1.0, R = 1.0, tt = 0.0;
  auto f = [](double t, double x, double r) {
    const double r3 = r * r * r;
    return std::pair<double, double>{-8.0 / r3, 4.0 / (r * r * (x - t / r3))};
  };
  const double h = 1e-4;
  for (int k = 0; k < 10000; ++k) {
    const auto k1 = f(tt, a, R);
    const auto k2 = f(tt + h / 2, a + h / 2 * k1.first, R + h / 2 * k1.second);
    const auto k3 = f(tt + h / 2, a + h / 2 * k2.first, R + h / 2 * k2.second);
    const auto k4 = f(tt + h, a + h * k3.first, R + h * k3.second);
    a += h / 6 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
    R += h / 6 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
    tt += h;
  }
  const auto fine = fourth_ball_ode_n2(1.0, 1.0, 1.0);
  CHECK(fine.times.back() == 1.0);
  CHECK(fine.final_state().a == Approx(a).epsilon(1e-7));
  CHECK(fine.final_state().R == Approx(R).epsilon(1e-7));
}

TEST_CASE("ball calibration profiles", "[fourth]") {
  const auto p = fourth_ball_calibration(3, 1.0, -1);
  CHECK(p.lambda == Approx(-15.0));
  CHECK(p.z(1.0) == Approx(-1.0).epsilon(1e-14));
  CHECK(p.dz(1.0) == Approx(0.0).margin(1e-14));
  CHECK(p.feasible);
  CHECK(p.max_abs_z == Approx(1.0).epsilon(1e-12));
  CHECK(fourth_ball_calibration(5, 2.0, -1).lambda == Approx(-35.0 / 8.0));
  CHECK(fourth_ball_calibration(5, 2.0, 1).lambda == Approx(35.0 / 8.0));
  // c0 = -lambda / (2 n (n + 2))
  CHECK(p.c[0] == Approx(-p.lambda / 30.0));
  // boundary condition on div Z: (n - 1)/R times the boundary sign
  CHECK(p.div(1.0) == Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("jump normal derivative", "[fourth]") {
  CHECK(jump_normal_derivative(4, 1.7) == 0.0);
  CHECK(jump_normal_derivative(3, 1.0) == Approx(3.0));
  CHECK(jump_normal_derivative(5, 2.0) == Approx(-1.25));
}

TEST_CASE("Saint-Venant torsion function", "[fourth]") {
  const auto sv = saint_venant_radial(3, RadialDomain{0.0, 1.0}, 1024);
  CHECK(sv.w.front() == Approx(1.0 / 6.0).epsilon(1e-5));
  CHECK(sv.w.back() == Approx(0.0).margin(1e-3));
  for (std::size_t i = 0; i < sv.w.size(); i += 37)
    CHECK(sv.w[i] == Approx((1.0 - sv.r[i] * sv.r[i]) / 6.0).margin(1e-5));
  const auto ann = saint_venant_radial(3, RadialDomain{1.0, 2.0}, 1024);
  for (std::size_t i = 1; i + 1 < ann.w.size(); ++i) CHECK(ann.w[i] > 0.0);
}

TEST_CASE("Saint-Venant speeds reproduce the ball closed form", "[fourth]") {
  CHECK(lambda_saint_venant(3, RadialDomain{0.0, 1.0}, Signature{-1}) == Approx(-15.0).epsilon(1e-8));
  CHECK(lambda_saint_venant(5, RadialDomain{0.0, 1.0}, Signature{-1}) == Approx(-35.0).epsilon(1e-8));
  CHECK(lambda_saint_venant(5, RadialDomain{0.0, 1.0}, Signature{1}) == Approx(35.0).epsilon(1e-8));
}

TEST_CASE("annulus calibrability", "[fourth]") {
  for (double q : {1.01, 2.0, 10.0, 100.0, 421.697, 841.4}) CHECK(annulus_calibrable_fourth(3, 1.0, q, Signature{1, 1}).feasible);
  CHECK(annulus_calibrable_fourth(2, 1.0, 1.05, Signature{1, 1}).feasible);
  CHECK_FALSE(annulus_calibrable_fourth(2, 1.0, 100.0, Signature{1, 1}).feasible);
  // the Saint-Venant quotient gives the same speed for an annulus
  const auto r = annulus_calibrable_fourth(3, 1.0, 2.0, Signature{1, 1});
  CHECK(r.profile.lambda == Approx(lambda_saint_venant(3, RadialDomain{1.0, 2.0}, Signature{1, 1})).epsilon(1e-6));
  CHECK(r.profile.z(1.0) == Approx(-1.0).epsilon(1e-9));
  CHECK(r.profile.z(2.0) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("critical ratio for the planar annulus", "[fourth]") {
  const auto q = find_q_star(2, 1e-9);
  CHECK(q.q_star > 1.0);
  CHECK(annulus_calibrable_fourth(2, 1.0, q.q_star * (1 - 1e-6), Signature{1, 1}).feasible);
  CHECK_FALSE(annulus_calibrable_fourth(2, 1.0, q.q_star * (1 + 1e-6), Signature{1, 1}).feasible);
  try {
    find_q_star(3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotApplicable);
  }
}
