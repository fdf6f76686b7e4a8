#pragma once

// Finitely supported probability measures on R^d and on the tangent bundle
// R^d x R^d, plus the algebra the schemes are written in: pushforward,
// convolution, scalar product and disintegration along the position axis.

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mdelab/error.hpp"

namespace mdelab {

using Point = Eigen::VectorXd;
/// Atoms stored column-wise: `dim x n`.
using PointSet = Eigen::MatrixXd;

/// Per-coordinate duplicate tolerance of the canonical form.
inline constexpr double kCanonicalTol = 1e-12;
/// Atoms lighter than this are dropped (and the rest renormalized).
inline constexpr double kWeightFloor = 1e-15;
/// Allowed deviation of the total mass from 1.
inline constexpr double kMassTol = 1e-9;

class DiscreteMeasure;
class LiftedMeasure;

namespace detail {
DiscreteMeasure assemble_measure(PointSet atoms, Eigen::VectorXd weights);
LiftedMeasure assemble_lifted(PointSet positions, PointSet velocities, Eigen::VectorXd weights);
}  // namespace detail

/// Probability measure with finitely many atoms in canonical form: atoms are
/// lexicographically sorted, pairwise farther apart than the canonical
/// tolerance, and carry strictly positive weights summing to one.
///
/// Instances are immutable values; only the factory functions below create
/// non-empty ones.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  Eigen::Index dim() const noexcept { return atoms_.rows(); }
  Eigen::Index size() const noexcept { return atoms_.cols(); }
  bool empty() const noexcept { return atoms_.cols() == 0; }

  const PointSet& atoms() const noexcept { return atoms_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  auto atom(Eigen::Index i) const { return atoms_.col(i); }
  double weight(Eigen::Index i) const { return weights_(i); }
  double total_mass() const { return weights_.sum(); }

 private:
  friend DiscreteMeasure detail::assemble_measure(PointSet, Eigen::VectorXd);

  PointSet atoms_;
  Eigen::VectorXd weights_;
};

/// Probability measure on TR^d = R^d x R^d; atom i is the pair
/// (position(i), velocity(i)). Canonical form is taken on the stacked
/// coordinates (x, v).
class LiftedMeasure {
 public:
  LiftedMeasure() = default;

  Eigen::Index dim() const noexcept { return positions_.rows(); }
  Eigen::Index size() const noexcept { return positions_.cols(); }
  bool empty() const noexcept { return positions_.cols() == 0; }

  const PointSet& positions() const noexcept { return positions_; }
  const PointSet& velocities() const noexcept { return velocities_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  auto position(Eigen::Index i) const { return positions_.col(i); }
  auto velocity(Eigen::Index i) const { return velocities_.col(i); }
  double weight(Eigen::Index i) const { return weights_(i); }

 private:
  friend LiftedMeasure detail::assemble_lifted(PointSet, PointSet, Eigen::VectorXd);

  PointSet positions_;
  PointSet velocities_;
  Eigen::VectorXd weights_;
};

/// Base measure plus one velocity law per base atom (fibers[i] sits over
/// base.atom(i)).
struct Disintegration {
  DiscreteMeasure base;
  std::vector<DiscreteMeasure> fibers;
};

/// Builds a canonical measure: weights are renormalized, atoms within
/// `tol` (l-infinity) are coalesced, dust below kWeightFloor is dropped.
/// Throws EmptyInput (no atoms or zero mass), NegativeWeight, DimMismatch.
DiscreteMeasure make_measure(const PointSet& points, const Eigen::VectorXd& weights,
                             double tol = kCanonicalTol);
DiscreteMeasure make_measure(std::span<const double> points_1d, std::span<const double> weights,
                             double tol = kCanonicalTol);
DiscreteMeasure dirac(const Point& x);
DiscreteMeasure dirac(double x);
/// M-point quantile discretization of the uniform law on [a, b]: cell
/// midpoints a + (i + 1/2)(b - a)/M, each with weight 1/M.
DiscreteMeasure uniform_1d(double a, double b, int atoms);

LiftedMeasure make_lifted(const PointSet& positions, const PointSet& velocities,
                          const Eigen::VectorXd& weights, double tol = kCanonicalTol);

/// Greedy lexicographic merge: atoms within `tol` (l-infinity) of an earlier
/// group representative join that group; the representative keeps its
/// coordinates and collects the weight.
DiscreteMeasure coalesce(const DiscreteMeasure& mu, double tol);

/// Pushforward f#mu for a point map f: R^d -> R^k.
template <class Map>
DiscreteMeasure push_forward(const DiscreteMeasure& mu, Map&& f) {
  if (mu.empty()) throw Error(ErrorCode::EmptyInput, "push_forward of an empty measure");
  Point first = f(Point(mu.atom(0)));
  PointSet image(first.size(), mu.size());
  image.col(0) = first;
  for (Eigen::Index i = 1; i < mu.size(); ++i) {
    Point y = f(Point(mu.atom(i)));
    if (y.size() != first.size())
      throw Error(ErrorCode::DimMismatch, "push_forward map changed output dimension");
    image.col(i) = y;
  }
  return make_measure(image, mu.weights());
}

/// <mu, f> = sum_i f(x_i) w_i
template <class Fn>
double integrate(const DiscreteMeasure& mu, Fn&& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) acc += f(Point(mu.atom(i))) * mu.weight(i);
  return acc;
}

/// mu (+) nu: law of X + Y for independent X ~ mu, Y ~ nu.
DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// a . mu: pushforward under x -> a x.
DiscreteMeasure scale_product(double a, const DiscreteMeasure& mu);
/// Largest Euclidean norm over the support.
double support_radius(const DiscreteMeasure& mu);

/// pi^1 # V
DiscreteMeasure base_of(const LiftedMeasure& lifted);
Disintegration disintegrate(const LiftedMeasure& lifted);
/// base (x) fibers: weight base_i * fiber_i(v) at (x_i, v).
LiftedMeasure recombine(const Disintegration& parts);
/// mu (x) omega: the same velocity law over every base atom.
LiftedMeasure product_measure(const DiscreteMeasure& mu, const DiscreteMeasure& omega);

/// Index of the atom of `mu` within `tol` (l-infinity) of `x`, or -1.
Eigen::Index find_atom(const DiscreteMeasure& mu, const Eigen::Ref<const Eigen::VectorXd>& x,
                       double tol = kCanonicalTol);

/// Atom-by-atom comparison of canonical measures.
bool approx_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double coord_tol = 1e-12,
                  double weight_tol = 1e-12);
bool approx_equal(const LiftedMeasure& a, const LiftedMeasure& b, double coord_tol = 1e-12,
                  double weight_tol = 1e-12);

/// CSV atom dump, header `t,x1..xd,weight`, 17 significant digits.
void write_atoms_csv_header(std::ostream& os, Eigen::Index dim);
void write_atoms_csv_rows(std::ostream& os, double t, const DiscreteMeasure& mu);

namespace detail {

/// Sorts columns lexicographically and returns, for each column in the
/// sorted order, the index of its coalescing group. Groups are numbered in
/// order of appearance. `sorted` receives the column permutation.
std::vector<Eigen::Index> coalesce_groups(const PointSet& points, double tol,
                                          std::vector<Eigen::Index>& sorted);

}  // namespace detail

}  // namespace mdelab
