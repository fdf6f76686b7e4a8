#include "mdelab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "mdelab/format.hpp"

namespace mdelab {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-12;
constexpr double kPhaseOneTol = 1e-9;

// Dense tableau for  min c.x  s.t.  A x = b, x >= 0  with b >= 0.
// Columns: structural variables, then one artificial per row, then rhs.
// The last row holds reduced costs and -objective.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : rows_(a.rows()), structural_(a.cols()) {
    table_ = Eigen::MatrixXd::Zero(rows_ + 1, structural_ + rows_ + 1);
    table_.topLeftCorner(rows_, structural_) = a;
    table_.block(0, structural_, rows_, rows_).setIdentity();
    table_.topRightCorner(rows_, 1) = b;
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Eigen::Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = structural_ + i;
    active_.assign(static_cast<std::size_t>(rows_), true);
  }

  // Phase one: minimize the sum of artificials.
  void start_phase_one() {
    table_.row(rows_).setZero();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      table_.row(rows_).head(structural_) -= table_.row(i).head(structural_);
      table_(rows_, rhs()) -= table_(i, rhs());
    }
  }

  double phase_one_objective() const { return -table_(rows_, rhs()); }

  // Pivots remaining (degenerate) artificials out of the basis; rows where
  // that is impossible are linearly redundant and are deactivated.
  void expel_artificials() {
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < structural_) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < structural_; ++j) {
        if (std::abs(table_(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0)
        pivot(r, col);
      else
        active_[static_cast<std::size_t>(r)] = false;
    }
  }

  void start_phase_two(const Eigen::VectorXd& costs) {
    table_.row(rows_).setZero();
    table_.row(rows_).head(structural_) = costs.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const Eigen::Index bv = basis_[static_cast<std::size_t>(i)];
      const double cb = bv < structural_ ? costs(bv) : 0.0;
      if (cb != 0.0) table_.row(rows_) -= cb * table_.row(i);
    }
  }

  // Runs Bland's rule until optimal. Only structural columns may enter when
  // `structural_only` is set. Returns the number of pivots.
  int optimize(bool structural_only, int cap) {
    const Eigen::Index last = structural_only ? structural_ : structural_ + rows_;
    int iterations = 0;
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < last; ++j) {
        if (table_(rows_, j) < -kReducedCostEps && !is_basic(j)) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return iterations;
      if (iterations >= cap)
        throw Error(ErrorCode::IterationCap,
                    "simplex exceeded " + std::to_string(cap) + " iterations");

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double a = table_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = std::max(table_(i, rhs()), 0.0) / a;
        if (leave < 0 || ratio < best - 1e-14) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-14 &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      // Feasible transportation problems are bounded below by zero cost.
      if (leave < 0) throw Error(ErrorCode::LpFailure, "unbounded direction in transport LP");
      pivot(leave, enter);
      ++iterations;
    }
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(structural_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const Eigen::Index bv = basis_[static_cast<std::size_t>(i)];
      if (bv < structural_) x(bv) = std::max(table_(i, rhs()), 0.0);
    }
    return x;
  }

 private:
  Eigen::Index rhs() const { return structural_ + rows_; }

  bool is_basic(Eigen::Index j) const {
    for (Eigen::Index i = 0; i < rows_; ++i)
      if (active_[static_cast<std::size_t>(i)] && basis_[static_cast<std::size_t>(i)] == j)
        return true;
    return false;
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    table_.row(r) /= table_(r, c);
    const Eigen::RowVectorXd pivot_row = table_.row(r);
    Eigen::VectorXd factors = table_.col(c);
    factors(r) = 0.0;
    table_.noalias() -= factors * pivot_row;
    table_(r, c) = 1.0;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  Eigen::Index rows_;
  Eigen::Index structural_;
  Eigen::MatrixXd table_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

void check_marginal(const Eigen::VectorXd& m, const char* which) {
  if (m.size() == 0) throw Error(ErrorCode::InvalidArgument, std::string(which) + " is empty");
  if ((m.array() < 0.0).any() || !m.allFinite())
    throw Error(ErrorCode::InvalidArgument, std::string(which) + " has invalid entries");
  if (std::abs(m.sum() - 1.0) > kMassTol)
    throw Error(ErrorCode::InvalidArgument, std::string(which) + " does not sum to 1");
}

}  // namespace

LpResult lp_solve(const Eigen::MatrixXd& costs, const Eigen::VectorXd& row_marginals,
                  const Eigen::VectorXd& col_marginals,
                  const std::optional<ExtraConstraint>& extra) {
  check_marginal(row_marginals, "row marginal");
  check_marginal(col_marginals, "column marginal");
  const Eigen::Index m = row_marginals.size();
  const Eigen::Index n = col_marginals.size();
  if (costs.rows() != m || costs.cols() != n)
    throw Error(ErrorCode::DimMismatch, "cost matrix shape does not match marginals");
  if (!costs.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite cost");
  if (extra && (extra->coeffs.rows() != m || extra->coeffs.cols() != n))
    throw Error(ErrorCode::DimMismatch, "extra constraint shape does not match marginals");

  // Variable (i, j) lives in column i * n + j; the slack of the extra
  // constraint, when present, is the last structural column.
  const Eigen::Index vars = m * n + (extra ? 1 : 0);
  const Eigen::Index cons = m + n + (extra ? 1 : 0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cons, vars);
  Eigen::VectorXd b(cons);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, i * n + j) = 1.0;
      a(m + j, i * n + j) = 1.0;
      c(i * n + j) = costs(i, j);
    }
  }
  // Marginals may disagree in total mass by up to kMassTol; rescale both to
  // exactly one so phase one can reach zero.
  b.head(m) = row_marginals / row_marginals.sum();
  b.segment(m, n) = col_marginals / col_marginals.sum();
  if (extra) {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(m + n, i * n + j) = extra->coeffs(i, j);
    a(m + n, m * n) = 1.0;
    b(m + n) = extra->bound;
    if (b(m + n) < 0.0) {
      a.row(m + n) *= -1.0;
      b(m + n) *= -1.0;
    }
  }

  const int cap = static_cast<int>(10 * m * n);
  Tableau tableau(a, b);
  tableau.start_phase_one();
  int iterations = tableau.optimize(false, cap);
  if (tableau.phase_one_objective() > kPhaseOneTol)
    throw Error(ErrorCode::Infeasible, "transport LP has no feasible plan");
  tableau.expel_artificials();
  tableau.start_phase_two(c);
  iterations += tableau.optimize(true, cap);

  const Eigen::VectorXd x = tableau.solution();
  LpResult result;
  result.plan.mass.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) result.plan.mass(i, j) = x(i * n + j);
  result.value = (result.plan.mass.array() * costs.array()).sum();
  result.iterations = iterations;
  return result;
}

Eigen::MatrixXd euclidean_costs(const PointSet& a, const PointSet& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::DimMismatch, "point dimensions differ");
  Eigen::MatrixXd costs(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) costs(i, j) = (a.col(i) - b.col(j)).norm();
  return costs;
}

double w1_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw Error(ErrorCode::DimMismatch, "quantile W1 needs one-dimensional measures");
  // Walk both quantile functions over [0, 1]; atoms are sorted ascending.
  Eigen::Index i = 0, j = 0;
  double left_i = mu.weight(0), left_j = nu.weight(0);
  double total = 0.0;
  while (i < mu.size() && j < nu.size()) {
    const double step = std::min(left_i, left_j);
    total += step * std::abs(mu.atom(i)(0) - nu.atom(j)(0));
    left_i -= step;
    left_j -= step;
    if (left_i <= 0.0 && ++i < mu.size()) left_i = mu.weight(i);
    if (left_j <= 0.0 && ++j < nu.size()) left_j = nu.weight(j);
  }
  return total;
}

double w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimMismatch, "W1: dimensions differ");
  return lp_solve(euclidean_costs(mu.atoms(), nu.atoms()), mu.weights(), nu.weights()).value;
}

double w1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimMismatch, "W1: dimensions differ");
  if (mu.dim() == 1) return w1_quantile(mu, nu);
  return w1_lp(mu, nu);
}

double lifted_w1(const LiftedMeasure& a, const LiftedMeasure& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "lifted W1: dimensions differ");
  const Eigen::MatrixXd costs =
      euclidean_costs(a.positions(), b.positions()) + euclidean_costs(a.velocities(), b.velocities());
  return lp_solve(costs, a.weights(), b.weights()).value;
}

double fiber_pseudometric(const LiftedMeasure& a, const LiftedMeasure& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "fiber pseudo-metric: dimensions differ");
  const Eigen::MatrixXd position_costs = euclidean_costs(a.positions(), b.positions());
  const Eigen::MatrixXd velocity_costs = euclidean_costs(a.velocities(), b.velocities());
  const double optimal = lp_solve(position_costs, a.weights(), b.weights()).value;
  const ExtraConstraint on_optimal_face{position_costs, optimal + 1e-9 * (1.0 + optimal)};
  return lp_solve(velocity_costs, a.weights(), b.weights(), on_optimal_face).value;
}

void write_plan_csv(std::ostream& os, const TransportPlan& plan, double min_mass) {
  os << "i,j,mass\n";
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
      if (plan.mass(i, j) > min_mass) os << i << ',' << j << ',' << fmt17(plan.mass(i, j)) << '\n';
}

}  // namespace mdelab
