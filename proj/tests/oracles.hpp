#pragma once

// Reference computations used by the tests. None of them call into the
// library's transport or scheme code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Atoms1d = std::vector<std::pair<double, double>>;  // (position, weight)

/// W1 in one dimension as the integral of |F - G| over the merged support.
inline double w1_cdf(Atoms1d a, Atoms1d b) {
  std::vector<std::pair<double, double>> events;
  for (const auto& [x, w] : a) events.emplace_back(x, w);
  for (const auto& [x, w] : b) events.emplace_back(x, -w);
  std::sort(events.begin(), events.end());
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    diff += events[i].second;
    total += std::abs(diff) * (events[i + 1].first - events[i].first);
  }
  return total;
}

/// min c.x subject to A x = b, x >= 0, by enumerating every basis of size
/// rank(A). Returns +inf when infeasible. Only for tiny problems.
inline double lp_vertex_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& c) {
  const int q = static_cast<int>(A.cols());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-10);
  const int r = static_cast<int>(lu.rank());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    Eigen::MatrixXd As(A.rows(), r);
    for (int i = 0; i < r; ++i) As.col(i) = A.col(pick[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> sub(As);
    sub.setThreshold(1e-10);
    if (sub.rank() == r) {
      const Eigen::VectorXd xs = As.colPivHouseholderQr().solve(b);
      if ((As * xs - b).cwiseAbs().maxCoeff() < 1e-9 && xs.minCoeff() > -1e-12) {
        double v = 0.0;
        for (int i = 0; i < r; ++i) v += c(pick[static_cast<std::size_t>(i)]) * xs(i);
        best = std::min(best, v);
      }
    }
    int k = r - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == q - r + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int i = k + 1; i < r; ++i) pick[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i) - 1] + 1;
  }
  return best;
}

/// Transportation problem as a standard-form LP: variables plan(i, j)
/// stored row-major, then an optional slack for `extra . plan <= bound`.
inline double transport_by_enumeration(const Eigen::MatrixXd& cost, const Eigen::VectorXd& rows,
                                       const Eigen::VectorXd& cols,
                                       const Eigen::MatrixXd* extra = nullptr, double bound = 0.0) {
  const auto m = cost.rows();
  const auto n = cost.cols();
  const auto vars = m * n + (extra ? 1 : 0);
  const auto cons = m + n + (extra ? 1 : 0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(cons, vars);
  Eigen::VectorXd b(cons), c = Eigen::VectorXd::Zero(vars);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(m + j, i * n + j) = 1.0;
      c(i * n + j) = cost(i, j);
      if (extra) A(m + n, i * n + j) = (*extra)(i, j);
    }
  b.head(m) = rows;
  b.segment(m, n) = cols;
  if (extra) {
    A(m + n, m * n) = 1.0;
    b(m + n) = bound;
  }
  return lp_vertex_enumeration(A, b, c);
}

/// E|S_N| / N for S_N a sum of N independent fair +-1 steps.
inline double binomial_mad(int N) {
  double acc = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double log_p = std::lgamma(N + 1.0) - std::lgamma(i + 1.0) - std::lgamma(N - i + 1.0) -
                         N * std::log(2.0);
    acc += std::exp(log_p) * std::abs(2.0 * i - N);
  }
  return acc / N;
}

/// C(k, i) 2^-k by Pascal's triangle.
inline std::vector<double> binomial_row(int k) {
  std::vector<double> row{1.0};
  for (int s = 0; s < k; ++s) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      next[i] += 0.5 * row[i];
      next[i + 1] += 0.5 * row[i];
    }
    row = std::move(next);
  }
  return row;
}

/// Random weights in (0.05, 1], normalized.
inline Eigen::VectorXd random_weights(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = u(rng);
  return w / w.sum();
}

inline Eigen::MatrixXd random_points(std::mt19937_64& rng, int dim, int n, double lo = -2.0,
                                     double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(dim, n);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

}  // namespace oracle
