#include "mdelab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mdelab/format.hpp"

namespace mdelab {

namespace {

double linf_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

void validate_weights(const Eigen::VectorXd& weights) {
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights(i))) throw Error(ErrorCode::InvalidArgument, "non-finite weight");
    if (weights(i) < 0.0)
      throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(i) + " is negative");
  }
}

// Shared canonicalization for plain and stacked (x, v) coordinates.
std::pair<PointSet, Eigen::VectorXd> canonicalize(const PointSet& points,
                                                  const Eigen::VectorXd& weights, double tol) {
  if (points.cols() == 0) throw Error(ErrorCode::EmptyInput, "measure has no atoms");
  if (points.rows() == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (points.cols() != weights.size())
    throw Error(ErrorCode::DimMismatch, "points and weights differ in length");
  if (!points.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "coalescing tolerance must be >= 0");
  validate_weights(weights);
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyInput, "measure has zero total mass");

  std::vector<Eigen::Index> order;
  const auto groups = detail::coalesce_groups(points, tol, order);
  const Eigen::Index n_groups =
      groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;

  PointSet atoms(points.rows(), n_groups);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n_groups);
  std::vector<bool> seen(static_cast<std::size_t>(n_groups), false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Eigen::Index g = groups[k];
    if (!seen[static_cast<std::size_t>(g)]) {
      atoms.col(g) = points.col(order[k]);
      seen[static_cast<std::size_t>(g)] = true;
    }
    mass(g) += weights(order[k]) / total;
  }

  // dust removal
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(n_groups));
  for (Eigen::Index g = 0; g < n_groups; ++g)
    if (mass(g) >= kWeightFloor) keep.push_back(g);
  if (keep.size() == static_cast<std::size_t>(n_groups)) return {std::move(atoms), std::move(mass)};

  PointSet kept_atoms(points.rows(), static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd kept_mass(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept_atoms.col(static_cast<Eigen::Index>(k)) = atoms.col(keep[k]);
    kept_mass(static_cast<Eigen::Index>(k)) = mass(keep[k]);
  }
  kept_mass /= kept_mass.sum();
  return {std::move(kept_atoms), std::move(kept_mass)};
}

}  // namespace

namespace detail {

std::vector<Eigen::Index> coalesce_groups(const PointSet& points, double tol,
                                          std::vector<Eigen::Index>& sorted) {
  const Eigen::Index n = points.cols();
  const Eigen::Index d = points.rows();
  sorted.resize(static_cast<std::size_t>(n));
  std::iota(sorted.begin(), sorted.end(), Eigen::Index{0});
  std::stable_sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double* pa = points.col(a).data();
    const double* pb = points.col(b).data();
    return std::lexicographical_compare(pa, pa + d, pb, pb + d);
  });

  // Representatives are visited in sorted order, so their first coordinates
  // are nondecreasing and the candidates for a point p are those with
  // first coordinate in [p0 - tol, p0].
  std::vector<Eigen::Index> reps;
  std::vector<double> rep_first;
  std::vector<Eigen::Index> groups(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto p = points.col(sorted[static_cast<std::size_t>(k)]);
    const auto lo = std::lower_bound(rep_first.begin(), rep_first.end(), p(0) - tol);
    Eigen::Index group = -1;
    for (auto it = lo; it != rep_first.end(); ++it) {
      const auto r = static_cast<std::size_t>(it - rep_first.begin());
      if (linf_distance(points.col(reps[r]), p) <= tol) {
        group = static_cast<Eigen::Index>(r);
        break;
      }
    }
    if (group < 0) {
      group = static_cast<Eigen::Index>(reps.size());
      reps.push_back(sorted[static_cast<std::size_t>(k)]);
      rep_first.push_back(p(0));
    }
    groups[static_cast<std::size_t>(k)] = group;
  }
  return groups;
}

DiscreteMeasure assemble_measure(PointSet atoms, Eigen::VectorXd weights) {
  DiscreteMeasure mu;
  mu.atoms_ = std::move(atoms);
  mu.weights_ = std::move(weights);
  return mu;
}

LiftedMeasure assemble_lifted(PointSet positions, PointSet velocities, Eigen::VectorXd weights) {
  LiftedMeasure lifted;
  lifted.positions_ = std::move(positions);
  lifted.velocities_ = std::move(velocities);
  lifted.weights_ = std::move(weights);
  return lifted;
}

}  // namespace detail

DiscreteMeasure make_measure(const PointSet& points, const Eigen::VectorXd& weights, double tol) {
  auto [atoms, mass] = canonicalize(points, weights, tol);
  return detail::assemble_measure(std::move(atoms), std::move(mass));
}

DiscreteMeasure make_measure(std::span<const double> points_1d, std::span<const double> weights,
                             double tol) {
  if (points_1d.size() != weights.size())
    throw Error(ErrorCode::DimMismatch, "points and weights differ in length");
  const auto n = static_cast<Eigen::Index>(points_1d.size());
  PointSet pts(1, n);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(0, i) = points_1d[static_cast<std::size_t>(i)];
    w(i) = weights[static_cast<std::size_t>(i)];
  }
  return make_measure(pts, w, tol);
}

DiscreteMeasure dirac(const Point& x) {
  return make_measure(PointSet(x), Eigen::VectorXd::Ones(1));
}

DiscreteMeasure dirac(double x) { return dirac(Point::Constant(1, x)); }

DiscreteMeasure uniform_1d(double a, double b, int atoms) {
  if (atoms < 1) throw Error(ErrorCode::InvalidArgument, "uniform_1d needs at least one atom");
  if (!(b > a)) throw Error(ErrorCode::InvalidArgument, "uniform_1d needs a < b");
  PointSet pts(1, atoms);
  const double h = (b - a) / atoms;
  for (int i = 0; i < atoms; ++i) pts(0, i) = a + (i + 0.5) * h;
  return make_measure(pts, Eigen::VectorXd::Constant(atoms, 1.0 / atoms));
}

LiftedMeasure make_lifted(const PointSet& positions, const PointSet& velocities,
                          const Eigen::VectorXd& weights, double tol) {
  if (positions.rows() != velocities.rows() || positions.cols() != velocities.cols())
    throw Error(ErrorCode::DimMismatch, "positions and velocities differ in shape");
  const Eigen::Index d = positions.rows();
  PointSet stacked(2 * d, positions.cols());
  stacked.topRows(d) = positions;
  stacked.bottomRows(d) = velocities;
  auto [atoms, mass] = canonicalize(stacked, weights, tol);
  return detail::assemble_lifted(atoms.topRows(d), atoms.bottomRows(d), std::move(mass));
}

DiscreteMeasure coalesce(const DiscreteMeasure& mu, double tol) {
  return make_measure(mu.atoms(), mu.weights(), tol);
}

DiscreteMeasure convolve(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimMismatch, "convolve: dimensions differ");
  const Eigen::Index n = mu.size() * nu.size();
  PointSet pts(mu.dim(), n);
  Eigen::VectorXd w(n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (Eigen::Index j = 0; j < nu.size(); ++j, ++k) {
      pts.col(k) = mu.atom(i) + nu.atom(j);
      w(k) = mu.weight(i) * nu.weight(j);
    }
  }
  return make_measure(pts, w);
}

DiscreteMeasure scale_product(double a, const DiscreteMeasure& mu) {
  return make_measure(a * mu.atoms(), mu.weights());
}

double support_radius(const DiscreteMeasure& mu) {
  if (mu.empty()) return 0.0;
  return mu.atoms().colwise().norm().maxCoeff();
}

DiscreteMeasure base_of(const LiftedMeasure& lifted) {
  return make_measure(lifted.positions(), lifted.weights());
}

Disintegration disintegrate(const LiftedMeasure& lifted) {
  if (lifted.empty()) throw Error(ErrorCode::EmptyInput, "disintegrate of an empty measure");
  std::vector<Eigen::Index> order;
  const auto groups = detail::coalesce_groups(lifted.positions(), kCanonicalTol, order);
  const Eigen::Index n_groups = *std::max_element(groups.begin(), groups.end()) + 1;

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_groups));
  for (std::size_t k = 0; k < order.size(); ++k)
    members[static_cast<std::size_t>(groups[k])].push_back(order[k]);

  const Eigen::Index d = lifted.dim();
  PointSet base_atoms(d, n_groups);
  Eigen::VectorXd base_mass(n_groups);
  std::vector<DiscreteMeasure> fibers;
  fibers.reserve(members.size());
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    const auto& idx = members[static_cast<std::size_t>(g)];
    base_atoms.col(g) = lifted.position(idx.front());
    PointSet v(d, static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      v.col(static_cast<Eigen::Index>(k)) = lifted.velocity(idx[k]);
      w(static_cast<Eigen::Index>(k)) = lifted.weight(idx[k]);
    }
    base_mass(g) = w.sum();
    fibers.push_back(make_measure(v, w));
  }
  // The groups are already canonical (sorted, separated), so the base is
  // assembled directly to keep fibers aligned with base atoms.
  return {detail::assemble_measure(std::move(base_atoms), std::move(base_mass)),
          std::move(fibers)};
}

LiftedMeasure recombine(const Disintegration& parts) {
  const auto& base = parts.base;
  if (static_cast<Eigen::Index>(parts.fibers.size()) != base.size())
    throw Error(ErrorCode::DimMismatch, "one fiber per base atom is required");
  Eigen::Index n = 0;
  for (const auto& f : parts.fibers) {
    if (f.dim() != base.dim()) throw Error(ErrorCode::DimMismatch, "fiber dimension differs");
    n += f.size();
  }
  PointSet x(base.dim(), n), v(base.dim(), n);
  Eigen::VectorXd w(n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const auto& fiber = parts.fibers[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < fiber.size(); ++j, ++k) {
      x.col(k) = base.atom(i);
      v.col(k) = fiber.atom(j);
      w(k) = base.weight(i) * fiber.weight(j);
    }
  }
  return make_lifted(x, v, w);
}

LiftedMeasure product_measure(const DiscreteMeasure& mu, const DiscreteMeasure& omega) {
  return recombine({mu, std::vector<DiscreteMeasure>(static_cast<std::size_t>(mu.size()), omega)});
}

Eigen::Index find_atom(const DiscreteMeasure& mu, const Eigen::Ref<const Eigen::VectorXd>& x,
                       double tol) {
  if (x.size() != mu.dim()) throw Error(ErrorCode::DimMismatch, "find_atom: dimensions differ");
  // Atoms are sorted by first coordinate, so only a window needs scanning.
  Eigen::Index lo = 0, hi = mu.size();
  while (lo < hi) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (mu.atom(mid)(0) < x(0) - tol)
      lo = mid + 1;
    else
      hi = mid;
  }
  for (Eigen::Index i = lo; i < mu.size() && mu.atom(i)(0) <= x(0) + tol; ++i)
    if (linf_distance(mu.atom(i), x) <= tol) return i;
  return -1;
}

bool approx_equal(const DiscreteMeasure& a, const DiscreteMeasure& b, double coord_tol,
                  double weight_tol) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (linf_distance(a.atom(i), b.atom(i)) > coord_tol) return false;
    if (std::abs(a.weight(i) - b.weight(i)) > weight_tol) return false;
  }
  return true;
}

bool approx_equal(const LiftedMeasure& a, const LiftedMeasure& b, double coord_tol,
                  double weight_tol) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (linf_distance(a.position(i), b.position(i)) > coord_tol) return false;
    if (linf_distance(a.velocity(i), b.velocity(i)) > coord_tol) return false;
    if (std::abs(a.weight(i) - b.weight(i)) > weight_tol) return false;
  }
  return true;
}

void write_atoms_csv_header(std::ostream& os, Eigen::Index dim) {
  os << 't';
  for (Eigen::Index c = 1; c <= dim; ++c) os << ",x" << c;
  os << ",weight\n";
}

void write_atoms_csv_rows(std::ostream& os, double t, const DiscreteMeasure& mu) {
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    os << fmt17(t);
    for (Eigen::Index c = 0; c < mu.dim(); ++c) os << ',' << fmt17(mu.atom(i)(c));
    os << ',' << fmt17(mu.weight(i)) << '\n';
  }
}

}  // namespace mdelab
