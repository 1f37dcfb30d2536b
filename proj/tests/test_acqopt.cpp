#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "asybo/minimize.hpp"
#include "oracles.hpp"

using namespace asybo;

namespace {

Box unit_box(int d) { return Box(Vector::Zero(d), Vector::Ones(d)); }

MinimizeSpec base_spec(int d, int budget = 2000, std::uint64_t seed = 0) {
  MinimizeSpec s;
  s.bounds = unit_box(d);
  s.max_evals = budget;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("finds an interior quadratic minimum") {
  auto f = [](const Vector& x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  const auto r = minimize(f, base_spec(1));
  CHECK(std::abs(r.x[0] - 0.3) < 1e-4);
  CHECK(r.value < 1e-8);
  CHECK(r.evaluations <= 2000);
}

TEST_CASE("finds a separable minimum in three dimensions") {
  Vector target(3);
  target << 0.2, 0.6, 0.9;
  auto f = [&](const Vector& x) { return (x - target).squaredNorm(); };
  const auto r = minimize(f, base_spec(3, 4000, 3));
  CHECK((r.x - target).norm() < 1e-3);
}

TEST_CASE("boundary minima are reachable") {
  auto f = [](const Vector& x) { return x[0]; };
  const auto r = minimize(f, base_spec(1, 1000, 1));
  CHECK(std::abs(r.x[0]) < 1e-6);
  CHECK(r.x[0] >= 0.0);
}

TEST_CASE("every evaluation stays inside the box") {
  Box box(Vector::Constant(2, -1.0), Vector::Constant(2, 2.0));
  MinimizeSpec s;
  s.bounds = box;
  s.max_evals = 800;
  s.incumbent = Vector::Constant(2, 50.0);  // far outside; must be clipped
  bool violated = false;
  auto f = [&](const Vector& x) {
    if (!box.contains(x, 1e-12)) violated = true;
    return std::sin(3.0 * x[0]) + x[1] * x[1];
  };
  const auto r = minimize(f, s);
  CHECK_FALSE(violated);
  CHECK(box.contains(r.x, 1e-12));
}

TEST_CASE("a constant objective is handled") {
  auto f = [](const Vector&) { return 4.2; };
  const auto r = minimize(f, base_spec(2, 500, 9));
  CHECK(r.value == 4.2);
  CHECK(unit_box(2).contains(r.x));
}

TEST_CASE("the result never loses to a start point") {
  // With the budget equal to the number of starts there is no room to
  // descend: the result must be exactly the best seed.
  std::mt19937_64 check_rng(0);
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL}) {
    auto f = [](const Vector& x) { return std::cos(9.0 * x[0]) + 0.3 * x[0]; };

    MinimizeSpec tight = base_spec(1, 8, seed);
    tight.n_starts = 8;
    const auto seeds_only = minimize(f, tight);
    CHECK(seeds_only.evaluations == 8);

    MinimizeSpec roomy = base_spec(1, 400, seed);
    roomy.n_starts = 8;
    const auto refined = minimize(f, roomy);
    CHECK(refined.value <= seeds_only.value);
  }
  (void)check_rng;
}

TEST_CASE("an incumbent start can only help") {
  auto f = [](const Vector& x) { return (x[0] - 0.123456) * (x[0] - 0.123456); };
  MinimizeSpec s = base_spec(1, 9, 5);
  s.n_starts = 8;
  s.incumbent = Vector::Constant(1, 0.123456);  // exact minimum as a seed
  const auto r = minimize(f, s);
  CHECK(r.value == 0.0);
  CHECK(r.x[0] == 0.123456);
}

TEST_CASE("deterministic for a fixed seed") {
  auto f = [](const Vector& x) { return std::sin(11.0 * x[0]) * std::cos(7.0 * x[1]); };
  const auto a = minimize(f, base_spec(2, 600, 77));
  const auto b = minimize(f, base_spec(2, 600, 77));
  CHECK(a.x[0] == b.x[0]);
  CHECK(a.x[1] == b.x[1]);
  CHECK(a.value == b.value);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("evaluation budget is an absolute cap") {
  int count = 0;
  auto f = [&](const Vector& x) {
    ++count;
    return x.squaredNorm();
  };
  MinimizeSpec s = base_spec(2, 137, 3);
  const auto r = minimize(f, s);
  CHECK(count <= 137);
  CHECK(r.evaluations == count);
}

TEST_CASE("one local minimum is reported per start") {
  auto f = [](const Vector& x) { return std::cos(9.0 * x[0]); };
  MinimizeSpec s = base_spec(1, 500, 11);
  s.n_starts = 6;
  const auto r = minimize(f, s);
  CHECK(r.local_minima.size() == 6);

  s.incumbent = Vector::Constant(1, 0.5);
  const auto r2 = minimize(f, s);
  CHECK(r2.local_minima.size() == 7);
  for (const auto& [x, v] : r2.local_minima) {
    CHECK(unit_box(1).contains(x));
    CHECK(v >= r2.value);
  }
}

TEST_CASE("multimodal objective matches a dense grid") {
  auto scalar = [](double x) { return std::sin(13.0 * x) * std::sin(1.0 + 27.0 * x) + x; };
  auto f = [&](const Vector& x) { return scalar(x[0]); };
  MinimizeSpec s = base_spec(1, 3000, 13);
  s.n_starts = 20;  // enough stratified starts to cover every basin
  const auto r = minimize(f, s);
  const double gx = oracle::grid_argmin(scalar, 0.0, 1.0, 20001);
  CHECK(r.value <= scalar(gx) + 1e-4);
}

TEST_CASE("non-finite objectives raise with the offending point") {
  auto f = [](const Vector& x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  bool threw = false;
  try {
    minimize(f, base_spec(1, 200, 2));
  } catch (const ObjectiveEvaluationError& e) {
    threw = true;
    CHECK(e.point().size() == 1);
    CHECK(e.point()[0] > 0.5);
  }
  CHECK(threw);
}

TEST_CASE("spec validation") {
  MinimizeSpec s = base_spec(2);
  s.n_starts = 0;
  CHECK(s.resolved_starts() == 16);
  s.n_starts = 5;
  CHECK(s.resolved_starts() == 5);

  s.max_evals = 4;  // below one eval per start
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.max_evals = 100;
  s.tol = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.tol = 1e-9;
  s.n_starts = -1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
