#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "mdelab/transport.hpp"
#include "oracles.hpp"

using namespace mdelab;

namespace {

oracle::Atoms1d atoms_of(const DiscreteMeasure& mu) {
  oracle::Atoms1d out;
  for (Eigen::Index i = 0; i < mu.size(); ++i) out.emplace_back(mu.atom(i)(0), mu.weight(i));
  return out;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int d, int n) {
  return make_measure(oracle::random_points(rng, d, n), oracle::random_weights(rng, n));
}

LiftedMeasure lifted(double x, double v) {
  return make_lifted(PointSet::Constant(1, 1, x), PointSet::Constant(1, 1, v), Eigen::VectorXd::Ones(1));
}

}  // namespace

TEST_CASE("lp_solve small cases") {
  {
    const auto r = lp_solve(Eigen::MatrixXd::Constant(1, 1, 2.5), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
    CHECK(r.value == doctest::Approx(2.5));
    CHECK(r.plan.mass(0, 0) == doctest::Approx(1.0));
  }
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, 1, 0;
  CHECK(lp_solve(c, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5)).value == doctest::Approx(0.0));
  CHECK(lp_solve(c, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)).value == doctest::Approx(1.0));
}

TEST_CASE("lp_solve matches vertex enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int m = 1 + trial % 3, n = 1 + (trial / 3) % 3;
    Eigen::MatrixXd cost(m, n);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
    const Eigen::VectorXd a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
    const auto r = lp_solve(cost, a, b);
    CHECK(r.value == doctest::Approx(oracle::transport_by_enumeration(cost, a, b)).epsilon(1e-8));
    CHECK((r.plan.mass.rowwise().sum() - a).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((r.plan.mass.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.plan.mass.minCoeff() >= -1e-12);
  }
}

TEST_CASE("lp_solve with a side constraint matches vertex enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 2, n = 2 + (trial / 2) % 2;
    Eigen::MatrixXd cost(m, n), side(m, n);
    for (Eigen::Index i = 0; i < cost.size(); ++i) {
      cost.data()[i] = u(rng);
      side.data()[i] = u(rng);
    }
    const Eigen::VectorXd a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
    const double unconstrained = lp_solve(side, a, b).value;
    const double bound = unconstrained + 0.2 * u(rng);
    const auto r = lp_solve(cost, a, b, ExtraConstraint{side, bound});
    CHECK(r.value == doctest::Approx(oracle::transport_by_enumeration(cost, a, b, &side, bound)).epsilon(1e-8));
    CHECK((side.array() * r.plan.mass.array()).sum() <= bound + 1e-9);
  }
}

TEST_CASE("lp_solve reports infeasible side constraints") {
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, 1, 0;
  try {
    lp_solve(c, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5), ExtraConstraint{Eigen::MatrixXd::Ones(2, 2), 0.5});
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}

TEST_CASE("w1 basic values") {
  CHECK(w1_distance(dirac(0.0), dirac(1.0)) == doctest::Approx(1.0));
  const auto mu = make_measure(std::vector<double>{-1, 0.3, 2}, std::vector<double>{1, 2, 3});
  CHECK(w1_distance(mu, mu) == 0.0);
  CHECK(w1_distance(make_measure(std::vector<double>{0, 2}, std::vector<double>{1, 1}), dirac(1.0)) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(w1_distance(dirac(0.0), dirac(Point::Zero(2))), Error);
}

TEST_CASE("quantile w1 agrees with the cdf integral and the LP") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_measure(rng, 1, 1 + trial % 20), b = random_measure(rng, 1, 1 + (trial * 7) % 20);
    const double q = w1_quantile(a, b);
    CHECK(q == doctest::Approx(oracle::w1_cdf(atoms_of(a), atoms_of(b))).epsilon(1e-10));
    CHECK(std::abs(q - w1_lp(a, b)) <= 1e-8);
  }
}

TEST_CASE("w1 metric properties in two dimensions") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_measure(rng, 2, 1 + trial % 8), b = random_measure(rng, 2, 2 + trial % 5),
               c = random_measure(rng, 2, 1 + trial % 6);
    const double ab = w1_distance(a, b), ba = w1_distance(b, a);
    CHECK(std::abs(ab - ba) <= 1e-8);
    CHECK(ab <= w1_distance(a, c) + w1_distance(c, b) + 1e-8);
    CHECK(ab > 0.0);
  }
  PointSet p(2, 1), q(2, 1);
  p << 0, 0;
  q << 3, 4;
  CHECK(w1_distance(dirac(Point(p.col(0))), dirac(Point(q.col(0)))) == doctest::Approx(5.0));
}

TEST_CASE("Kantorovich-Rubinstein lower bound with 1-Lipschitz bumps") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_measure(rng, 1, 6), b = random_measure(rng, 1, 9);
    const double r = 1.5, c = -1.0 + 0.07 * trial;
    // (1 - q)^3 with q = (x - c)^2 / r^2 has slope at most 1.72 / r; scale to 1-Lipschitz.
    auto f = [&](double x) {
      const double qq = (x - c) * (x - c) / (r * r);
      return qq >= 1 ? 0.0 : std::pow(1 - qq, 3) * r / 1.72;
    };
    double fa = 0, fb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) fa += f(a.atom(i)(0)) * a.weight(i);
    for (Eigen::Index i = 0; i < b.size(); ++i) fb += f(b.atom(i)(0)) * b.weight(i);
    CHECK(std::abs(fa - fb) <= w1_distance(a, b) + 1e-8);
  }
}

TEST_CASE("lifted w1 uses the sum metric") {
  CHECK(lifted_w1(lifted(0, 0), lifted(1, 0)) == doctest::Approx(1.0));
  CHECK(lifted_w1(lifted(0, 0), lifted(1, 2)) == doctest::Approx(3.0));
  CHECK(lifted_w1(lifted(0.5, -1), lifted(0.5, -1)) == doctest::Approx(0.0));
}

TEST_CASE("fiber pseudo-metric examples") {
  const auto V = make_lifted(PointSet::Zero(1, 2), (PointSet(1, 2) << -1, 1).finished(), Eigen::Vector2d(0.5, 0.5));
  CHECK(fiber_pseudometric(V, V) == doctest::Approx(0.0));
  CHECK(fiber_pseudometric(lifted(0, 0.25), lifted(0, 2)) == doctest::Approx(1.75));
  CHECK(fiber_pseudometric(lifted(0, 5), lifted(1, 5)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fiber pseudo-metric matches two-stage enumeration") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + trial % 3, n = 1 + (trial / 3) % 3;
    const auto A = make_lifted(oracle::random_points(rng, 1, m), oracle::random_points(rng, 1, m),
                               oracle::random_weights(rng, m));
    const auto B = make_lifted(oracle::random_points(rng, 1, n), oracle::random_points(rng, 1, n),
                               oracle::random_weights(rng, n));
    Eigen::MatrixXd cx(A.size(), B.size()), cv(A.size(), B.size());
    for (Eigen::Index i = 0; i < A.size(); ++i)
      for (Eigen::Index j = 0; j < B.size(); ++j) {
        cx(i, j) = std::abs(A.position(i)(0) - B.position(j)(0));
        cv(i, j) = std::abs(A.velocity(i)(0) - B.velocity(j)(0));
      }
    const double wstar = oracle::transport_by_enumeration(cx, A.weights(), B.weights());
    const double expected =
        oracle::transport_by_enumeration(cv, A.weights(), B.weights(), &cx, wstar + 1e-9 * (1 + wstar));
    CHECK(fiber_pseudometric(A, B) == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("lifted inequality W_TR <= fiber + base") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 10, n = 1 + (trial * 3) % 10;
    const int d = 1 + trial % 2;
    const auto A = make_lifted(oracle::random_points(rng, d, m), oracle::random_points(rng, d, m),
                               oracle::random_weights(rng, m));
    const auto B = make_lifted(oracle::random_points(rng, d, n), oracle::random_points(rng, d, n),
                               oracle::random_weights(rng, n));
    CHECK(lifted_w1(A, B) <= fiber_pseudometric(A, B) + w1_distance(base_of(A), base_of(B)) + 1e-7);
    CHECK(fiber_pseudometric(A, B) >= -1e-12);
  }
}

TEST_CASE("plan csv") {
  TransportPlan p{Eigen::MatrixXd::Zero(2, 2)};
  p.mass(0, 1) = 0.25;
  p.mass(1, 0) = 0.75;
  std::ostringstream os;
  write_plan_csv(os, p);
  CHECK(os.str() == "i,j,mass\n0,1,0.25\n1,0,0.75\n");
}
