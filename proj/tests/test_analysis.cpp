#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "mdelab/analysis.hpp"
#include "mdelab/transport.hpp"
#include "oracles.hpp"

using namespace mdelab;

namespace {

DiscreteMeasure m1(std::vector<double> x, std::vector<double> w) { return make_measure(x, w); }

MeasurePath run(SchemeKind k, const PvfSpec& spec, const DiscreteMeasure& mu0, int N, double T = 1.0) {
  SchemeConfig cfg;
  cfg.scheme = k;
  cfg.grid = GridSpec::standard(N, T);
  return run_scheme(spec, mu0, cfg);
}

PvfSpec binomial_spec() { return constant_fiber_pvf(m1({-1, 1}, {1, 1})); }

DiscreteMeasure split_pair(double t) { return t == 0.0 ? dirac(0.0) : m1({-t, t}, {1, 1}); }

// The splitting path with atoms moving at twice the right speed.
MeasurePath double_speed_path(int N) {
  auto path = run(SchemeKind::Lagrangian, splitting_pvf(), dirac(0.0), N);
  for (std::size_t k = 0; k < path.times.size(); ++k) path.measures[k] = split_pair(2 * path.times[k]);
  return path;
}

}  // namespace

TEST_CASE("test function value and gradient") {
  TestFunction f{Point::Constant(1, 0.5), 2.0};
  CHECK(f.value(Point::Constant(1, 0.5)) == 1.0);
  CHECK(f.value(Point::Constant(1, 3.0)) == 0.0);
  CHECK(f.gradient(Point::Constant(1, -2.0)).norm() == 0.0);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 3;
    TestFunction g{oracle::random_points(rng, d, 1, -0.5, 0.5).col(0), 0.8 + 0.01 * trial};
    const Point x = oracle::random_points(rng, d, 1, -1, 1).col(0);
    const Point grad = g.gradient(x);
    const double h = 1e-6 * g.radius;
    for (int a = 0; a < d; ++a) {
      Point xp = x, xm = x;
      xp(a) += h;
      xm(a) -= h;
      const double fd = (g.value(xp) - g.value(xm)) / (2 * h);
      CHECK(std::abs(fd - grad(a)) <= 1e-6 * std::max(1.0, std::abs(grad(a))));
    }
    CHECK(grad.norm() <= 6.0 / g.radius);
  }
}

TEST_CASE("default family covers the support hull") {
  const auto path = run(SchemeKind::Lagrangian, splitting_pvf(), dirac(0.0), 4);
  const auto fam = default_family(path);
  REQUIRE(fam.size() == 9);
  CHECK(fam.front().center(0) == doctest::Approx(-1.2));
  CHECK(fam.back().center(0) == doctest::Approx(1.2));
  CHECK(fam.front().radius == doctest::Approx(2.4));
  const auto still = run(SchemeKind::MeanVelocity, splitting_pvf(), dirac(0.0), 4);
  CHECK(default_family(still).front().radius > 0.0);
}

TEST_CASE("residual: stationary binomial path has no defect") {
  const auto path = run(SchemeKind::MeanVelocity, binomial_spec(), dirac(0.0), 16);
  const auto fam = default_family(path);
  const auto r = residual(path, binomial_spec(), fam);
  CHECK(r.max_defect <= 1e-12);
  CHECK(r.defects.rows() == 9);
  CHECK(r.defects.cols() == 17);
}

TEST_CASE("residual: splitting path is consistent, wrong speed is not") {
  std::vector<double> defects;
  const auto ref_path = run(SchemeKind::Lagrangian, splitting_pvf(), dirac(0.0), 8);
  const auto fam = default_family(ref_path);
  for (const int N : {8, 16, 32, 64}) {
    defects.push_back(residual(run(SchemeKind::Lagrangian, splitting_pvf(), dirac(0.0), N), splitting_pvf(), fam)
                          .max_defect);
  }
  for (std::size_t i = 1; i < defects.size(); ++i) CHECK(defects[i] <= 1.5 * defects[i - 1] / 2);
  const double wrong = residual(double_speed_path(64), splitting_pvf(), fam).max_defect;
  CHECK(wrong >= 5 * defects.back());
  CHECK(wrong > 0.05);
}

TEST_CASE("residual csv and json") {
  const auto path = run(SchemeKind::LAS, splitting_pvf(), dirac(0.0), 2);
  const std::vector<TestFunction> fam = {{Point::Constant(1, 0.0), 1.5}};
  const auto r = residual(path, splitting_pvf(), fam);
  std::ostringstream os;
  write_residual_csv(os, r);
  CHECK(os.str().rfind("function,t,defect\n0,0,0\n", 0) == 0);
  const auto j = residual_to_json(r);
  CHECK(j.at("dt") == 0.5);
  CHECK(j.at("functions").size() == 1);
}

TEST_CASE("convergence against closed forms") {
  const std::vector<int> Ns = {4, 8, 16};
  const ClosedForm pair = split_pair;
  const auto las = convergence_study(splitting_pvf(), dirac(0.0), SchemeKind::LAS, Ns, 1.0, pair);
  REQUIRE(las.rows.size() == 3);
  for (const auto& row : las.rows) CHECK(row.error <= 1.0 / (row.N * row.N) + 1e-12);

  const ClosedForm origin = [](double) { return dirac(0.0); };
  const auto mv = convergence_study(splitting_pvf(), dirac(0.0), SchemeKind::MeanVelocity, Ns, 1.0, origin);
  for (const auto& row : mv.rows) CHECK(row.error == 0.0);

  const std::vector<int> bN = {4, 16, 64};
  const auto bin = convergence_study(binomial_spec(), dirac(0.0), SchemeKind::LAS, bN, 1.0, origin);
  for (const auto& row : bin.rows) {
    CHECK(row.error <= 1.0 / std::sqrt(row.N) + 1e-12);
  }
  // The coarsest grid has nodes k/4; the error there is the largest node gap.
  CHECK(bin.rows[2].error <= bin.rows[1].error + 1e-12);
  CHECK(bin.rows[1].error <= bin.rows[0].error + 1e-12);
}

TEST_CASE("convergence without a reference reports consecutive gaps") {
  const std::vector<int> Ns = {4, 8, 16};
  const auto t = convergence_study(binomial_spec(), dirac(0.0), SchemeKind::Lagrangian, Ns, 1.0);
  CHECK(t.successive);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].N == 4);
  std::ostringstream csv, dat;
  write_convergence_csv(csv, t);
  write_convergence_dat(dat, t);
  CHECK(csv.str().rfind("N,dt,error\n4,0.25,", 0) == 0);
  CHECK(dat.str().rfind("# N error\n4 ", 0) == 0);
  CHECK(convergence_to_json(t).at("mode") == "successive");
}

TEST_CASE("convergence against a fine run") {
  const std::vector<int> Ns = {2, 4, 8};
  const auto fine = run(SchemeKind::Lagrangian, binomial_spec(), dirac(0.0), 64);
  const auto t = convergence_study(binomial_spec(), dirac(0.0), SchemeKind::LAS, Ns, 1.0, fine);
  REQUIRE(t.rows.size() == 3);
  CHECK_FALSE(t.successive);
}

TEST_CASE("scheme comparison") {
  {
    const auto t = scheme_compare(splitting_pvf(), dirac(0.0), 8, 1.0);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.gap(SchemeKind::LAS, SchemeKind::Lagrangian) <= 1e-12);
    CHECK(t.gap(SchemeKind::MeanVelocity, SchemeKind::LAS) == doctest::Approx(1.0));
    CHECK(t.rows[1].t_at_max == doctest::Approx(1.0));
  }
  {
    const auto spec = graph_pvf("linear", {{"slope", -1.0}, {"offset", 0.5}});
    for (const int N : {4, 16}) {
      const auto t = scheme_compare(spec, uniform_1d(-1, 1, 5), N, 1.0);
      const auto g = GridSpec::standard(N, 1.0);
      for (const auto& row : t.rows) CHECK(row.gap <= g.dx + g.dv * g.T + 1e-12);
    }
  }
  double last = 1e9;
  for (const int N : {4, 8, 16, 32}) {
    const double gap = scheme_compare(binomial_spec(), dirac(0.0), N, 1.0).gap(SchemeKind::LAS, SchemeKind::MeanVelocity);
    CHECK(gap <= last + 1e-12);
    last = gap;
  }
  std::ostringstream os;
  write_compare_csv(os, scheme_compare(splitting_pvf(), dirac(0.0), 2, 1.0));
  CHECK(os.str() == "first,second,gap,t_at_max\nlas,lagrangian,0,0\nlas,mean-velocity,1,1\nlagrangian,mean-velocity,1,1\n");
}
