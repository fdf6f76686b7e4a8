#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mdelab/superposition.hpp"
#include "mdelab/transport.hpp"

using namespace mdelab;

namespace {

DiscreteMeasure m1(std::vector<double> x, std::vector<double> w) { return make_measure(x, w); }

LiftedMeasure lift1(std::vector<double> x, std::vector<double> v, std::vector<double> w) {
  const auto n = static_cast<Eigen::Index>(x.size());
  return make_lifted(Eigen::Map<const Eigen::RowVectorXd>(x.data(), n),
                     Eigen::Map<const Eigen::RowVectorXd>(v.data(), n),
                     Eigen::Map<const Eigen::VectorXd>(w.data(), n));
}

Curve curve(double w, std::vector<double> knots) {
  Curve c;
  c.weight = w;
  c.knots = Eigen::Map<const Eigen::RowVectorXd>(knots.data(), static_cast<Eigen::Index>(knots.size()));
  return c;
}

MeasurePath run(SchemeKind k, const PvfSpec& spec, const DiscreteMeasure& mu0, int N, double T = 1.0) {
  SchemeConfig cfg;
  cfg.scheme = k;
  cfg.grid = GridSpec::standard(N, T);
  return run_scheme(spec, mu0, cfg);
}

PvfSpec binomial_spec() { return constant_fiber_pvf(m1({-1, 1}, {1, 1})); }

}  // namespace

TEST_CASE("segment ensembles") {
  const auto one = segment_ensemble(lift1({0}, {1}, {1}), 0.0, 1.0);
  REQUIRE(one.segments.size() == 1);
  CHECK(one.segments[0].weight == 1.0);
  const auto eta = as_trajectories(one);
  CHECK(eta.curves[0].knots(0, 1) == 1.0);

  const auto two = segment_ensemble(lift1({0, 0}, {1, -1}, {0.5, 0.5}), 0.0, 1.0);
  CHECK(two.segments.size() == 2);
  CHECK_THROWS_AS(segment_ensemble(lift1({0}, {1}, {1}), 1.0, 1.0), Error);

  const auto las = run(SchemeKind::LAS, binomial_spec(), dirac(0.0), 2);
  CHECK(las.interp[1].size() == 4);
}

TEST_CASE("concat_merge") {
  TrajectoryEnsemble head;
  head.times = {0.0, 1.0};
  SegmentEnsemble tail{1.0, 2.0, {}};

  SUBCASE("single curve and segment") {
    head.curves = {curve(1.0, {0, 0})};
    tail.segments = {{1.0, Point::Constant(1, 0.0), Point::Constant(1, 2.0)}};
    const auto eta = concat_merge(head, tail, dirac(0.0));
    REQUIRE(eta.curves.size() == 1);
    CHECK(eta.curves[0].knots(0, 2) == 2.0);
    CHECK(eta.times.size() == 3);
  }
  SUBCASE("distinct endpoints give no cross terms") {
    head.curves = {curve(0.5, {0, -1}), curve(0.5, {0, 1})};
    tail.segments = {{0.5, Point::Constant(1, -1.0), Point::Constant(1, -1.0)},
                     {0.5, Point::Constant(1, 1.0), Point::Constant(1, 1.0)}};
    const auto eta = concat_merge(head, tail, m1({-1, 1}, {1, 1}));
    REQUIRE(eta.curves.size() == 2);
    for (const auto& c : eta.curves) CHECK(c.knots(0, 2) == 2.0 * c.knots(0, 1));
  }
  SUBCASE("shared endpoint gives the full product") {
    head.curves = {curve(0.5, {-1, 0}), curve(0.5, {1, 0})};
    tail.segments = {{0.5, Point::Constant(1, 0.0), Point::Constant(1, -1.0)},
                     {0.5, Point::Constant(1, 0.0), Point::Constant(1, 1.0)}};
    const auto eta = concat_merge(head, tail, dirac(0.0));
    REQUIRE(eta.curves.size() == 4);
    for (const auto& c : eta.curves) CHECK(c.weight == doctest::Approx(0.25));
  }
  SUBCASE("mismatched joint") {
    head.curves = {curve(1.0, {0, 0})};
    tail.segments = {{1.0, Point::Constant(1, 0.0), Point::Constant(1, 2.0)}};
    try {
      concat_merge(head, tail, dirac(0.5));
      FAIL("expected EndpointMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EndpointMismatch);
    }
  }
}

TEST_CASE("representations of the worked examples") {
  {
    const auto eta = build_representation(run(SchemeKind::MeanVelocity, splitting_pvf(), dirac(0.3), 5));
    REQUIRE(eta.curves.size() == 1);
    CHECK(eta.curves[0].knots.cwiseAbs().maxCoeff() == doctest::Approx(0.3));
  }
  {
    const auto eta = build_representation(run(SchemeKind::LAS, splitting_pvf(), dirac(0.0), 2));
    REQUIRE(eta.curves.size() == 2);
    for (const auto& c : eta.curves) {
      CHECK(c.weight == doctest::Approx(0.5));
      CHECK(std::abs(c.knots(0, 2)) == doctest::Approx(1.0));
    }
    CHECK(approx_equal(evaluate_pushforward(eta, 0.5), m1({-0.5, 0.5}, {1, 1})));
  }
  {
    const auto eta = build_representation(run(SchemeKind::LAS, binomial_spec(), dirac(0.0), 2));
    REQUIRE(eta.curves.size() == 4);
    for (const auto& c : eta.curves) CHECK(c.weight == doctest::Approx(0.25));
    CHECK(approx_equal(evaluate_pushforward(eta, 1.0), m1({-1, 0, 1}, {1, 2, 1})));
  }
  for (const int N : {3, 6, 9}) {
    const auto eta = build_representation(run(SchemeKind::LAS, binomial_spec(), dirac(0.0), N));
    CHECK(eta.curves.size() == (std::size_t{1} << N));
    CHECK(eta.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("representation reproduces the path at nodes and midpoints") {
  const std::vector<std::pair<PvfSpec, DiscreteMeasure>> cases = {
      {splitting_pvf(), dirac(0.0)},
      {splitting_pvf(), uniform_1d(0, 1, 16)},
      {binomial_spec(), dirac(0.0)},
      {graph_pvf("peano"), dirac(-1.0)}};
  for (const auto& [spec, mu0] : cases)
    for (const auto k : {SchemeKind::LAS, SchemeKind::Lagrangian, SchemeKind::MeanVelocity}) {
      const auto path = run(k, spec, mu0, 6, 1.5);
      const auto eta = build_representation(path);
      for (std::size_t i = 0; i < path.times.size(); ++i) {
        CHECK(w1_distance(evaluate_pushforward(eta, path.times[i]), path.measures[i]) <= 1e-9);
        if (i + 1 < path.times.size()) {
          const double mid = 0.5 * (path.times[i] + path.times[i + 1]);
          CHECK(w1_distance(evaluate_pushforward(eta, mid), interpolate_at(path, mid)) <= 1e-9);
        }
      }
    }
}

TEST_CASE("fiber barycenter condition") {
  {
    const auto eta = build_representation(run(SchemeKind::Lagrangian, splitting_pvf(), dirac(0.0), 4));
    const auto r = verify_fiber_barycenter(eta, splitting_pvf(), 0.0);
    CHECK(r.max_defect <= 1e-12);
    CHECK(r.convention == "right-derivative");
    for (std::size_t k = 0; k + 1 < eta.times.size(); ++k)
      CHECK(verify_fiber_barycenter(eta, splitting_pvf(), eta.times[k]).max_defect <= 1e-9);
    CHECK_THROWS_AS(verify_fiber_barycenter(eta, splitting_pvf(), 1.0), Error);
    CHECK_THROWS_AS(verify_fiber_barycenter(eta, splitting_pvf(), 0.1), Error);
  }
  {
    const auto spec = graph_pvf("linear", {{"slope", 0.7}});
    const auto eta = build_representation(run(SchemeKind::Lagrangian, spec, uniform_1d(-1, 1, 5), 5));
    for (std::size_t k = 0; k + 1 < eta.times.size(); ++k)
      CHECK(verify_fiber_barycenter(eta, spec, eta.times[k]).max_defect <= 1e-12);
  }
  {
    SchemeConfig cfg;
    cfg.scheme = SchemeKind::LAS;
    cfg.grid = GridSpec::unit_step(1, 3.0);
    const auto eta = build_representation(las_run(graph_pvf("peano"), dirac(-1.0), cfg));
    const auto r = verify_fiber_barycenter(eta, graph_pvf("peano"), 2.0);
    CHECK(r.max_defect == doctest::Approx(2 * std::sqrt(3.0) - 3).epsilon(1e-12));
    CHECK(r.max_defect <= cfg.grid.dv);
  }
}

TEST_CASE("slopes respect the sublinearity bound") {
  const auto path = run(SchemeKind::Lagrangian, binomial_spec(), uniform_1d(-0.5, 0.5, 4), 5);
  const auto eta = build_representation(path);
  double K = 0;
  for (const double r : path.support_radii()) K = std::max(K, r);
  CHECK(max_speed(eta) <= sublinearity_bound(binomial_spec(), path.measures) * (1 + K) + 1e-12);
}

TEST_CASE("pushforward range and json round trip") {
  const auto eta = build_representation(run(SchemeKind::LAS, binomial_spec(), dirac(0.0), 3));
  CHECK_THROWS_AS(evaluate_pushforward(eta, 1.2), Error);
  const auto back = trajectories_from_json(trajectories_to_json(eta));
  REQUIRE(back.curves.size() == eta.curves.size());
  for (const double t : {0.0, 0.2, 0.5, 1.0})
    CHECK(approx_equal(evaluate_pushforward(back, t), evaluate_pushforward(eta, t), 0.0, 0.0));
  CHECK_THROWS_AS(trajectories_from_json({{"times", {0, 1}}, {"curves", {{{"weight", 1}, {"knots", {{0}}}}}}}), Error);
}

TEST_CASE("pruned paths are rejected") {
  SchemeConfig cfg;
  cfg.scheme = SchemeKind::Lagrangian;
  cfg.grid = GridSpec::standard(10, 1.0);
  cfg.prune_floor = 1e-6;
  const auto spec = constant_fiber_pvf(m1({-1, std::sqrt(2.0)}, {0.999, 0.001}));
  const auto path = lagrangian_run(spec, dirac(0.0), cfg);
  REQUIRE(path.pruned_mass > 0);
  CHECK_THROWS_AS(build_representation(path), Error);
}

TEST_CASE("curve cap") {
  try {
    build_representation(run(SchemeKind::LAS, binomial_spec(), dirac(0.0), 8), 100);
    FAIL("expected SupportBlowup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportBlowup);
  }
}
