#include <sstream>

#include "support.hpp"

using namespace tvflow;

namespace {
template <class T>
T round_trip(const T& x) {
  return json::parse(json(x).dump()).get<T>();
}
}  // namespace

TEST_CASE("shortest round-trip number formatting", "[io]") {
  auto g = tvtest::rng(81);
  for (int k = 0; k < 2000; ++k) {
    const double x = tvtest::uniform(g, -1.0, 1.0) * std::pow(10.0, tvtest::uniform(g, -300.0, 300.0));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("state types round-trip through JSON", "[io]") {
  auto g = tvtest::rng(82);
  const auto step = tvtest::random_step(g, 6);
  CHECK(round_trip(step) == step);
  const RadialStack stack({0.3, 0.9}, {1.0 / 3.0, -2.0}, 0.25, 4);
  CHECK(round_trip(stack) == stack);
  for (const auto& grid : {GridSignal::periodic({0.1, 0.2, 0.3}, 1.0 / 3.0), GridSignal::neumann({1.0, 2.0}, 0.5),
                           GridSignal::radial({1.0, 0.5, 0.0}, 0.1, 3, true)})
    CHECK(round_trip(grid) == grid);
  const FourthBallState fs{0.01, 0.7, 1.3, 2, true, 0.69};
  CHECK(round_trip(fs) == fs);
  const Signature sig{{1, -1}};
  CHECK(round_trip(sig) == sig);
  const JumpMeasure jm({Atom{0.25, 1.0}, Atom{0.5, 0.125}});
  CHECK(round_trip(jm) == jm);
  const Event ev{0.125, EventKind::Merge, "3 -> 2 plateaus"};
  CHECK(round_trip(ev) == ev);
}

TEST_CASE("reports and trajectories round-trip through JSON", "[io]") {
  auto rep = extinction_bound_second(RadialStack::ball(3, 1.0, 2.0));
  const auto back = round_trip(rep);
  CHECK(back.bound == rep.bound);
  CHECK(back.formula == rep.formula);
  CHECK(back.constants == rep.constants);
  CHECK(back.actual == rep.actual);
  CHECK(back.slack == rep.slack);
  CHECK(back.certified_constants == rep.certified_constants);
  BoundReport bare;
  bare.bound = 2.0;
  bare.formula = "x";
  CHECK_FALSE(round_trip(bare).actual);

  RegularityReport rr;
  rr.states = 3;
  rr.violation_count = 1;
  rr.violations.push_back({0, 2, 0.5, 1.5, 1.0, "size"});
  const auto rb = round_trip(rr);
  CHECK(rb.states == 3);
  CHECK(rb.violation_count == 1);
  REQUIRE(rb.violations.size() == 1);
  CHECK(rb.violations[0].kind == "size");
  CHECK(rb.violations[0].bound == 1.0);

  auto g = tvtest::rng(83);
  const auto traj = evolve_1d(tvtest::random_step(g, 5), kInf);
  const auto tb = round_trip(traj);
  CHECK(tb.times == traj.times);
  CHECK(tb.states == traj.states);
  CHECK(tb.events == traj.events);
  CHECK(tb.diagnostics == traj.diagnostics);
}

TEST_CASE("malformed JSON names the offending field", "[io]") {
  try {
    json::parse(R"({"type":"stack","radii":[1.0],"values":"x","dimension":2})").get<RadialStack>();
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    CHECK(std::string(e.what()).find("values") != std::string::npos);
  }
  try {
    json::parse(R"({"type":"stack","radii":[2.0, 1.0],"values":[1, 2],"dimension":2})").get<RadialStack>();
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    CHECK(std::string(e.what()).find("radii") != std::string::npos);
  }
}

TEST_CASE("trajectory and diagnostics CSV layout", "[io]") {
  const auto traj = evolve_1d(StepFunction1D::from_lengths(std::vector<double>{0.0, 1.0, 0.5},
                                                           std::vector<double>{0.5, 0.25, 0.25}),
                              kInf);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string head, line;
  std::getline(is, head);
  CHECK(head == "time,b0,b1,b2,v0,v1,v2");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == traj.size());

  std::ostringstream ds;
  write_diagnostics_csv(ds, traj);
  std::istringstream dis(ds.str());
  std::getline(dis, head);
  CHECK(head.rfind("time,", 0) == 0);
  CHECK(head.find("tv") != std::string::npos);
}
