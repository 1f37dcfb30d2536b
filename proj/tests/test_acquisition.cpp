#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "asybo/acquisition.hpp"
#include "oracles.hpp"

using namespace asybo;

namespace {

GpState tiny_gp(double scale = 0.3) {
  Matrix X(5, 1);
  X << 0.05, 0.3, 0.5, 0.7, 0.95;
  Vector y(5);
  y << 0.8, 0.1, -0.4, 0.3, 0.9;
  KernelSpec k;
  k.family = KernelFamily::SquaredExponential;
  k.dim = 1;
  k.length_scale = Vector::Constant(1, scale);
  return gp_fit(X, y, k, 1e-10);
}

}  // namespace

TEST_CASE("lower confidence bound closed form") {
  CHECK(lower_confidence_bound(1.0, 0.5, 2.0) == 0.0);
  CHECK(lower_confidence_bound(0.3, 0.0, 5.0) == 0.3);
  CHECK(lower_confidence_bound(-1.0, 2.0, 1.5) == -4.0);
  CHECK_THROWS_AS(lower_confidence_bound(0.0, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(lower_confidence_bound(0.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("improvement acquisitions vanish exactly at zero spread") {
  CHECK(expected_improvement(0.3, 0.0, 0.5) == 0.0);
  CHECK(probability_of_improvement(0.3, 0.0, 0.5) == 0.0);
  // Even when the mean beats the incumbent: certainty means nothing to gain.
  CHECK(expected_improvement(-5.0, 0.0, 0.5) == 0.0);
  CHECK(probability_of_improvement(-5.0, 0.0, 0.5) == 0.0);

  AcquisitionSpec ei;
  ei.kind = AcquisitionKind::ExpectedImprovement;
  ei.f_min = 0.5;
  CHECK(acq_eval(ei, -5.0, 0.0, 0.0) == 0.0);
  AcquisitionSpec pi;
  pi.kind = AcquisitionKind::ProbabilityOfImprovement;
  pi.f_min = 0.5;
  CHECK(acq_eval(pi, -5.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("expected improvement at the incumbent mean") {
  // mean == f_min, unit sd: EI is the standard normal density at zero.
  CHECK(expected_improvement(1.0, 1.0, 1.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-13));
}

TEST_CASE("improvement values match quadrature") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> mean_d(-3.0, 3.0);
  std::uniform_real_distribution<double> sd_d(0.05, 2.5);
  for (int t = 0; t < 300; ++t) {
    const double mean = mean_d(rng);
    const double sd = sd_d(rng);
    const double f_min = mean_d(rng);
    CHECK(std::abs(expected_improvement(mean, sd, f_min) -
                   oracle::expected_improvement(f_min, mean, sd)) < 1e-6);
    CHECK(std::abs(probability_of_improvement(mean, sd, f_min) -
                   oracle::probability_of_improvement(f_min, mean, sd)) < 1e-6);
  }
}

TEST_CASE("improvement ranges") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_real_distribution<double> sd_d(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const double ei = expected_improvement(u(rng), sd_d(rng), u(rng));
    const double pi = probability_of_improvement(u(rng), sd_d(rng), u(rng));
    CHECK(ei >= 0.0);
    CHECK(pi >= 0.0);
    CHECK(pi <= 1.0);
  }
}

TEST_CASE("kappa schedule decays geometrically") {
  const auto s = KappaSchedule::annealing(3.0, 0.9);
  CHECK(next_kappa(s, 0) == 3.0);
  CHECK(next_kappa(s, 1) == doctest::Approx(2.7).epsilon(1e-14));
  CHECK(next_kappa(s, 2) == doctest::Approx(2.43).epsilon(1e-14));
  CHECK_THROWS_AS(next_kappa(s, -1), std::invalid_argument);

  const auto c = KappaSchedule::constant(1.7);
  CHECK(next_kappa(c, 0) == 1.7);
  CHECK(next_kappa(c, 50) == 1.7);

  KappaSchedule bad{2.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.decay = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {-1.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("batch slots fan kappa geometrically around the schedule") {
  CHECK(fan_kappa(2.0, 0) == 2.0);
  CHECK(fan_kappa(2.0, 1) == 1.0);
  CHECK(fan_kappa(2.0, 2) == 4.0);
  CHECK(fan_kappa(2.0, 3) == 0.5);
  CHECK(fan_kappa(2.0, 4) == 8.0);
  CHECK(fan_kappa(2.0, 5) == 0.25);
  CHECK(fan_kappa(2.0, 6) == 10.0);  // 16 clipped to the cap
  CHECK(fan_kappa(0.0, 3) == 0.0);
  CHECK_THROWS_AS(fan_kappa(2.0, -1), std::invalid_argument);
  CHECK_THROWS_AS(fan_kappa(-2.0, 1), std::invalid_argument);
}

TEST_CASE("larger kappa never raises the bound") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> sd_d(0.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const double mean = u(rng);
    const double sd = sd_d(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double kappa : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double v = lower_confidence_bound(mean, sd, kappa);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("negative kappa is rejected for every kind") {
  for (auto kind : {AcquisitionKind::LowerConfidenceBound, AcquisitionKind::ExpectedImprovement,
                    AcquisitionKind::ProbabilityOfImprovement, AcquisitionKind::PureExploration}) {
    AcquisitionSpec spec;
    spec.kind = kind;
    spec.f_min = 0.0;
    CHECK_THROWS_AS(acq_eval(spec, 0.0, 1.0, -1e-9), std::invalid_argument);
  }
}

TEST_CASE("prediction overload takes the standard deviation") {
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::PureExploration;
  Prediction p;
  p.mean = 3.0;
  p.variance = 4.0;
  p.variance_unclamped = 4.0;
  CHECK(acq_eval(spec, p, 0.0) == -2.0);
}

TEST_CASE("acquisition kind names round-trip") {
  for (auto kind : {AcquisitionKind::LowerConfidenceBound, AcquisitionKind::ExpectedImprovement,
                    AcquisitionKind::ProbabilityOfImprovement, AcquisitionKind::PureExploration})
    CHECK(acquisition_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(acquisition_kind_from_string("ucb"), std::invalid_argument);
}

TEST_CASE("infill batch returns distinct in-bounds points") {
  const auto gp = tiny_gp();
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::LowerConfidenceBound;
  spec.schedule = KappaSchedule::annealing(2.0, 0.96);
  SearchConfig search;
  search.max_evals = 400;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));

  const auto batch = select_infill(gp, spec, search, 4, bounds, 3, 99);
  REQUIRE(batch.picks.size() == 4);
  const double kappa_base = next_kappa(spec.schedule, 3);
  for (int i = 0; i < 4; ++i) {
    const auto& p = batch.picks[static_cast<std::size_t>(i)];
    CHECK(bounds.contains(p.x));
    CHECK(p.kappa == fan_kappa(kappa_base, i));
    for (int j = 0; j < i; ++j)
      CHECK((p.x - batch.picks[static_cast<std::size_t>(j)].x).norm() >= spec.dedup_radius);
    for (Eigen::Index r = 0; r < gp.X.rows(); ++r)
      CHECK((p.x - gp.X.row(r).transpose()).norm() >= spec.dedup_radius);
  }
}

TEST_CASE("infill is deterministic in seed and iteration") {
  const auto gp = tiny_gp();
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::ExpectedImprovement;
  spec.f_min = gp.y.minCoeff();
  SearchConfig search;
  search.max_evals = 300;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));

  const auto a = select_infill(gp, spec, search, 3, bounds, 2, 1234);
  const auto b = select_infill(gp, spec, search, 3, bounds, 2, 1234);
  REQUIRE(a.picks.size() == b.picks.size());
  for (std::size_t i = 0; i < a.picks.size(); ++i) {
    CHECK(a.picks[i].x[0] == b.picks[i].x[0]);
    CHECK(a.picks[i].acq == b.picks[i].acq);
  }

  const auto c = select_infill(gp, spec, search, 3, bounds, 2, 4321);
  bool any_differs = false;
  for (std::size_t i = 0; i < a.picks.size(); ++i)
    if (a.picks[i].x[0] != c.picks[i].x[0]) any_differs = true;
  CHECK(any_differs);
}

TEST_CASE("zero kappa reduces to posterior mean minimization") {
  const auto gp = tiny_gp();
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::LowerConfidenceBound;
  spec.schedule = KappaSchedule::constant(0.0);
  SearchConfig search;
  search.max_evals = 600;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));

  const auto batch = select_infill(gp, spec, search, 1, bounds, 0, 7);
  const double picked = acq_eval(spec, gp_predict(gp, batch.picks[0].x), 0.0);
  const double grid_best = [&] {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
      const Vector x = Vector::Constant(1, i / 1000.0);
      best = std::min(best, gp_predict(gp, x).mean);
    }
    return best;
  }();
  CHECK(picked <= grid_best + 1e-4);
}

TEST_CASE("pure exploration chases the posterior spread") {
  const auto gp = tiny_gp();
  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::PureExploration;
  SearchConfig search;
  search.max_evals = 600;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));

  const auto batch = select_infill(gp, spec, search, 1, bounds, 0, 11);
  const auto pred = gp_predict(gp, batch.picks[0].x);
  CHECK(batch.picks[0].acq == doctest::Approx(-std::sqrt(pred.variance)).epsilon(1e-12));
  // The picked spread must rival the best seen on a dense grid.
  double grid_best = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const Vector x = Vector::Constant(1, i / 1000.0);
    grid_best = std::max(grid_best, std::sqrt(gp_predict(gp, x).variance));
  }
  CHECK(std::sqrt(pred.variance) >= grid_best - 1e-3);
}

TEST_CASE("collisions with exclusions are resolved") {
  // A descending mean pins the unexcluded minimizer at the left edge; exclude
  // it and the slot must settle at least the dedup radius away.
  Matrix X(3, 1);
  X << 0.2, 0.5, 0.8;
  Vector y(3);
  y << -1.0, 0.0, 1.0;
  KernelSpec k;
  k.family = KernelFamily::SquaredExponential;
  k.dim = 1;
  k.length_scale = Vector::Constant(1, 0.4);
  const auto gp = gp_fit(X, y, k, 1e-10);

  AcquisitionSpec spec;
  spec.kind = AcquisitionKind::LowerConfidenceBound;
  spec.schedule = KappaSchedule::constant(0.0);
  SearchConfig search;
  search.max_evals = 400;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));

  const auto free_pick = select_infill(gp, spec, search, 1, bounds, 0, 5);
  const Vector blocked = free_pick.picks[0].x;
  const auto batch =
      select_infill(gp, spec, search, 1, bounds, 0, 5, std::vector<Vector>{blocked});
  CHECK((batch.picks[0].x - blocked).norm() >= spec.dedup_radius);
  CHECK(bounds.contains(batch.picks[0].x));
}

TEST_CASE("invalid batch requests are rejected") {
  const auto gp = tiny_gp();
  AcquisitionSpec spec;
  SearchConfig search;
  const Box bounds(Vector::Zero(1), Vector::Ones(1));
  CHECK_THROWS_AS(select_infill(gp, spec, search, 0, bounds, 0, 1), std::invalid_argument);
  const Box wrong(Vector::Zero(2), Vector::Ones(2));
  CHECK_THROWS_AS(select_infill(gp, spec, search, 1, wrong, 0, 1), std::invalid_argument);
}
