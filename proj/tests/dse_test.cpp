#include <doctest.h>

#include <sstream>

#include "edagent/dse/dse.hpp"
#include "edagent/flowsim/flowsim.hpp"

using namespace edagent::dse;
namespace fs = edagent::flowsim;

TEST_CASE("axis values follow the indexed progression") {
  CHECK(axis_values("u", {60, 85, 5}) == std::vector<double>{60, 65, 70, 75, 80, 85});
  CHECK(axis_values("u", {60, 87, 5}) == std::vector<double>{60, 65, 70, 75, 80, 85});
  CHECK(axis_values("x", {3, 3, 1}) == std::vector<double>{3});

  // 0.55 + 9*0.05 lands a hair off 1.0; it is inside tolerance and snapped.
  const auto d = axis_values("density", {0.55, 1.0, 0.05});
  REQUIRE(d.size() == 10);
  CHECK(d.back() == 1.0);
  CHECK(d[3] == 0.55 + 3 * 0.05);

  CHECK_THROWS_AS(axis_values("a", {2, 1, 1}), EmptyAxis);
  CHECK_THROWS_AS(axis_values("a", {0, 1, 0}), EmptyAxis);
  CHECK_THROWS_AS(axis_values("a", {0, 1, -1}), EmptyAxis);
}

TEST_CASE("grid nests axes in declaration order") {
  const ParamSpace space{{"a", {0, 1, 1}}, {"b", {0, 1, 1}}};
  const Grid g = enumerate_grid(space);
  REQUIRE(g.size() == 4);
  const std::vector<std::pair<double, double>> expected = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const ParamPoint p = g.point(i);
    CHECK(p[0].first == "a");
    CHECK(p[1].first == "b");
    CHECK(p[0].second == expected[i].first);
    CHECK(p[1].second == expected[i].second);
  }
  CHECK_THROWS_AS(enumerate_grid(ParamSpace{}), InvalidSpace);
  CHECK_THROWS_AS((ParamSpace{{"a", {0, 1, 1}}, {"a", {0, 2, 1}}}), InvalidSpace);
  try {
    (void)enumerate_grid(ParamSpace{{"a", {0, 1, 1}}, {"b", {5, 1, 1}}});
    FAIL("expected EmptyAxis");
  } catch (const EmptyAxis& e) {
    CHECK(e.name() == "b");
  }
}

TEST_CASE("grid sizes of the case-study spaces") {
  const ParamSpace custom{{"core_utilization", {60, 85, 5}},
                          {"density", {0.55, 1, 0.05}},
                          {"tns_end_percent", {30, 60, 5}}};
  CHECK(enumerate_grid(custom).size() == 6 * 10 * 7);

  const ParamSpace wide{{"core_utilization", {60, 90, 5}},   {"core_aspect_ratio", {0.8, 1.2, 0.1}},
                        {"core_margins", {8, 12, 1}},        {"macro_place_halo", {5, 9, 1}},
                        {"macro_place_channel", {7, 11, 1}}, {"density", {0.6, 0.9, 0.05}},
                        {"tns_end_percent", {30, 50, 5}}};
  CHECK(enumerate_grid(wide).size() == 7u * 5 * 5 * 5 * 5 * 7 * 5);
}

TEST_CASE("tune finds the on-grid parabola vertex") {
  const ParamSpace space{{"u", {60, 80, 5}}};
  const TuneResult r = tune([](const ParamPoint& p) { return (p[0].second - 70) * (p[0].second - 70); },
                            space);
  CHECK(r.best.params[0].second == 70);
  CHECK(*r.best.objective == 0.0);
  CHECK(r.evaluations == 5);
  CHECK(r.trials.size() == 5);
  CHECK(r.best_index == 2);
}

TEST_CASE("tune records failures and keeps searching") {
  const ParamSpace space{{"x", {0, 4, 1}}};
  const TuneResult r = tune(
      [](const ParamPoint& p) {
        if (p[0].second < 2) throw TrialFault("flow failed");
        return p[0].second;
      },
      space);
  CHECK(r.best.params[0].second == 2);
  CHECK_FALSE(r.trials[0].ok);
  CHECK_FALSE(r.trials[0].objective.has_value());
  CHECK(*r.trials[0].fault == "flow failed");

  CHECK_THROWS_AS(tune([](const ParamPoint&) -> double { throw TrialFault("no"); }, space),
                  NoSuccessfulTrial);
  CHECK_THROWS_AS(tune([](const ParamPoint&) { return std::nan(""); }, space), NoSuccessfulTrial);
  // Other exceptions abort the search.
  CHECK_THROWS_AS(tune([](const ParamPoint&) -> double { throw std::logic_error("bug"); }, space),
                  std::logic_error);
}

TEST_CASE("tune ties keep the earliest trial and budgets cap evaluations") {
  const ParamSpace space{{"x", {0, 9, 1}}};
  const TuneResult r = tune([](const ParamPoint& p) { return p[0].second >= 3 ? 1.0 : 2.0; }, space);
  CHECK(r.best_index == 3);
  const TuneResult capped = tune([](const ParamPoint& p) { return -p[0].second; }, space, 4);
  CHECK(capped.evaluations == 4);
  CHECK(capped.best.params[0].second == 3);
}

TEST_CASE("parallel tune preserves trial order") {
  const ParamSpace space{{"a", {0, 10, 1}}, {"b", {0, 1, 0.1}}};
  auto f = [](const ParamPoint& p) {
    if (p[0].second == 4) throw TrialFault("skip");
    return std::sin(p[0].second * 3.1 + p[1].second);
  };
  const TuneResult seq = tune(f, space);
  const TuneResult par = tune_parallel(f, space, 4);
  REQUIRE(seq.trials.size() == par.trials.size());
  CHECK(seq.best_index == par.best_index);
  for (std::size_t i = 0; i < seq.trials.size(); ++i) {
    CHECK(seq.trials[i].params == par.trials[i].params);
    CHECK(seq.trials[i].objective == par.trials[i].objective);
  }
}

TEST_CASE("power*area tuning beats the defaults on gcd") {
  const auto& cat = fs::Catalog::builtin();
  const auto& design = cat.design("gcd");
  const auto& platform = cat.platform("sky130");
  auto objective = [&](double u, double d, double p) {
    const auto m = fs::evaluate_cost_model(design, platform, {0.74, u, d, p});
    return m.power * m.area;
  };
  // Brute force over the 7x7x5 grid with plain loops.
  double brute = std::numeric_limits<double>::infinity();
  for (int iu = 0; iu < 7; ++iu)
    for (int id = 0; id < 7; ++id)
      for (int ip = 0; ip < 5; ++ip) {
        double d = 0.6 + id * 0.05;
        if (id == 6) d = 0.9;
        brute = std::min(brute, objective(60 + 5 * iu, d, 30 + 5 * ip));
      }

  const ParamSpace space{{"core_utilization", {60, 90, 5}},
                         {"density", {0.6, 0.9, 0.05}},
                         {"tns_end_percent", {30, 50, 5}}};
  const TuneResult r = tune(
      [&](const ParamPoint& p) { return objective(p[0].second, p[1].second, p[2].second); }, space);
  CHECK(r.evaluations == 245);
  CHECK(*r.best.objective == brute);
  CHECK(*r.best.objective < objective(70, 0.7, 50));
  for (const Trial& t : r.trials) CHECK(*r.best.objective <= *t.objective);
}

TEST_CASE("trial trace exports as csv") {
  const ParamSpace space{{"a", {0, 1, 1}}, {"b", {0.5, 0.5, 1}}};
  const TuneResult r = tune(
      [](const ParamPoint& p) {
        if (p[0].second == 1) throw TrialFault("x");
        return 2.5;
      },
      space);
  std::ostringstream os;
  write_trials_csv(os, space, r);
  CHECK(os.str() == "trial,a,b,objective,ok\n0,0,0.5,2.5,true\n1,1,0.5,,false\n");
}
