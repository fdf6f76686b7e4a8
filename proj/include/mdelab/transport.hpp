#pragma once

// Wasserstein-1 distances between atomic measures. One-dimensional measures
// go through the quantile formula; everything else is solved as a dense
// transportation LP.

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>

#include "mdelab/measure.hpp"

namespace mdelab {

/// Coupling between the atoms of two measures; mass(i, j) is moved from
/// atom i of the first measure to atom j of the second.
struct TransportPlan {
  Eigen::MatrixXd mass;

  Eigen::Index rows() const noexcept { return mass.rows(); }
  Eigen::Index cols() const noexcept { return mass.cols(); }
};

/// Optional side constraint sum_ij coeffs(i,j) * plan(i,j) <= bound.
struct ExtraConstraint {
  Eigen::MatrixXd coeffs;
  double bound = 0.0;
};

struct LpResult {
  TransportPlan plan;
  double value = 0.0;
  int iterations = 0;
};

/// Minimizes <costs, plan> over couplings with the given marginals (and the
/// optional extra inequality). Dense two-phase primal simplex with Bland's
/// rule; iteration cap 10 * m * n.
///
/// Throws Infeasible when the extra constraint cannot be met, IterationCap
/// when the cap is hit, InvalidArgument for malformed input.
LpResult lp_solve(const Eigen::MatrixXd& costs, const Eigen::VectorXd& row_marginals,
                  const Eigen::VectorXd& col_marginals,
                  const std::optional<ExtraConstraint>& extra = std::nullopt);

/// Euclidean ground-cost matrix between the atoms of two point sets.
Eigen::MatrixXd euclidean_costs(const PointSet& a, const PointSet& b);

/// W1 with Euclidean ground metric; exact quantile integral in 1-D, LP above.
double w1_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// W1 through the quantile functions (1-D only).
double w1_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// W1 through the transportation LP, any dimension.
double w1_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// W1 on TR^d with ground metric |x - y| + |v - w|.
double lifted_w1(const LiftedMeasure& a, const LiftedMeasure& b);

/// Fiber pseudo-metric: minimal mean velocity displacement among couplings
/// of the lifted measures whose position part is an optimal plan between
/// the bases. Stage one finds the optimal position cost W*; stage two
/// minimizes sum T |v - w| subject to sum T |x - y| <= W* + 1e-9 (1 + W*).
/// Not a metric: it vanishes whenever the fibers can be matched for free.
double fiber_pseudometric(const LiftedMeasure& a, const LiftedMeasure& b);

/// Plan export, one `i,j,mass` row per positive entry.
void write_plan_csv(std::ostream& os, const TransportPlan& plan, double min_mass = 0.0);

}  // namespace mdelab
