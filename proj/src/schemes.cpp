#include "mdelab/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mdelab {

namespace {

constexpr double kOffGridTol = 1e-9;

void require_scheme(const SchemeConfig& cfg, SchemeKind expected) {
  cfg.validate();
  if (cfg.scheme != expected)
    throw Error(ErrorCode::InvalidArgument,
                "config is for scheme " + to_string(cfg.scheme) + ", not " + to_string(expected));
}

MeasurePath start_path(const SchemeConfig& cfg, DiscreteMeasure mu0) {
  MeasurePath path;
  path.scheme = cfg.scheme;
  path.grid = cfg.grid;
  path.times.reserve(static_cast<std::size_t>(cfg.grid.N) + 1);
  path.measures.reserve(static_cast<std::size_t>(cfg.grid.N) + 1);
  path.interp.reserve(static_cast<std::size_t>(cfg.grid.N));
  path.times.push_back(0.0);
  path.measures.push_back(std::move(mu0));
  return path;
}

// Pushes every lifted atom along its characteristic for time s.
DiscreteMeasure transport(const LiftedMeasure& lift, double s, double tol) {
  return make_measure(lift.positions() + s * lift.velocities(), lift.weights(), tol);
}

// Drops atoms lighter than the floor and renormalizes; returns the mass removed.
double prune(DiscreteMeasure& mu, double floor) {
  if (floor <= 0.0) return 0.0;
  std::vector<Eigen::Index> keep;
  double removed = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) >= floor)
      keep.push_back(i);
    else
      removed += mu.weight(i);
  }
  if (removed == 0.0 || keep.empty()) return 0.0;
  PointSet x(mu.dim(), static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = mu.atom(keep[k]);
    w(static_cast<Eigen::Index>(k)) = mu.weight(keep[k]);
  }
  mu = make_measure(x, w, 0.0);
  return removed;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::LAS: return "las";
    case SchemeKind::Lagrangian: return "lagrangian";
    case SchemeKind::MeanVelocity: return "mean-velocity";
  }
  return "unknown";
}

SchemeKind scheme_from_string(const std::string& name) {
  if (name == "las" || name == "LAS") return SchemeKind::LAS;
  if (name == "lagrangian") return SchemeKind::Lagrangian;
  if (name == "mean-velocity" || name == "mean_velocity") return SchemeKind::MeanVelocity;
  throw Error(ErrorCode::ConfigError, "unknown scheme '" + name + "'");
}

GridSpec GridSpec::standard(int N, double T) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be > 0");
  GridSpec g;
  g.N = N;
  g.T = T;
  g.resolution = N;
  g.dt = T / N;
  g.dv = 1.0 / N;
  g.dx = g.dt * g.dv;
  return g;
}

GridSpec GridSpec::unit_step(int N, double T) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be > 0");
  const double steps = T * N;
  const auto rounded = std::llround(steps);
  if (rounded < 1 || std::abs(steps - static_cast<double>(rounded)) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, "unit_step grid needs T * N to be a positive integer");
  GridSpec g;
  g.N = static_cast<int>(rounded);
  g.T = T;
  g.resolution = N;
  g.dt = 1.0 / N;
  g.dv = 1.0 / N;
  g.dx = g.dt * g.dv;
  return g;
}

std::string to_string(GridConvention convention) {
  return convention == GridConvention::UnitStep ? "unit_step" : "standard";
}

GridConvention convention_from_string(const std::string& name) {
  if (name == "standard") return GridConvention::Standard;
  if (name == "unit_step" || name == "unit-step") return GridConvention::UnitStep;
  throw Error(ErrorCode::ConfigError, "unknown grid convention '" + name + "'");
}

GridSpec make_grid(GridConvention convention, int N, double T) {
  return convention == GridConvention::UnitStep ? GridSpec::unit_step(N, T)
                                                : GridSpec::standard(N, T);
}

void SchemeConfig::validate() const {
  if (!(coalesce_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "coalesce_tol must be >= 0");
  if (!(prune_floor >= 0.0 && prune_floor <= 1e-6))
    throw Error(ErrorCode::InvalidArgument, "prune_floor must lie in [0, 1e-6]");
  if (grid.N < 1 || !(grid.dt > 0.0) || !(grid.dv > 0.0) || !(grid.dx > 0.0))
    throw Error(ErrorCode::InvalidArgument, "grid steps must be positive");
  if (atom_cap < 1) throw Error(ErrorCode::InvalidArgument, "atom_cap must be positive");
}

std::vector<double> MeasurePath::support_radii() const {
  std::vector<double> r;
  r.reserve(measures.size());
  for (const auto& mu : measures) r.push_back(support_radius(mu));
  return r;
}

namespace detail {
long long grid_index(double value, double h) {
  return static_cast<long long>(std::floor(value / h + 1e-9));
}
}  // namespace detail

DiscreteMeasure snap_space(const DiscreteMeasure& mu, const GridSpec& grid) {
  PointSet x = mu.atoms();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = static_cast<double>(detail::grid_index(x.data()[i], grid.dx)) * grid.dx;
  return make_measure(x, mu.weights());
}

LiftedMeasure snap_velocity(const LiftedMeasure& lifted, const GridSpec& grid) {
  PointSet x = lifted.positions();
  PointSet v = lifted.velocities();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double on_grid = std::round(x.data()[i] / grid.dx) * grid.dx;
    if (std::abs(on_grid - x.data()[i]) > kOffGridTol)
      throw Error(ErrorCode::BaseOffGrid, "base atom coordinate " + std::to_string(x.data()[i]) +
                                              " is not on the space grid");
    x.data()[i] = on_grid;
    v.data()[i] = static_cast<double>(detail::grid_index(v.data()[i], grid.dv)) * grid.dv;
  }
  return make_lifted(x, v, lifted.weights());
}

MeasurePath las_run(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg) {
  require_scheme(cfg, SchemeKind::LAS);
  const GridSpec& g = cfg.grid;
  MeasurePath path = start_path(cfg, snap_space(mu0, g));
  for (int k = 0; k < g.N; ++k) {
    const DiscreteMeasure& mu = path.measures.back();
    LiftedMeasure snapped = snap_velocity(eval_pvf(spec, mu), g);
    // x_i + dt v_j = (i + j) dx: advance integer indices so atoms stay
    // exactly on the grid.
    PointSet next(snapped.dim(), snapped.size());
    for (Eigen::Index a = 0; a < next.size(); ++a) {
      const double i = std::round(snapped.positions().data()[a] / g.dx);
      const double j = std::round(snapped.velocities().data()[a] / g.dv);
      next.data()[a] = (i + j) * g.dx;
    }
    DiscreteMeasure mu_next = make_measure(next, snapped.weights());
    path.interp.push_back(std::move(snapped));
    path.times.push_back(g.time(k + 1));
    path.measures.push_back(std::move(mu_next));
  }
  return path;
}

MeasurePath lagrangian_run(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg) {
  require_scheme(cfg, SchemeKind::Lagrangian);
  const GridSpec& g = cfg.grid;
  MeasurePath path = start_path(cfg, mu0);
  for (int k = 0; k < g.N; ++k) {
    LiftedMeasure lift = eval_pvf(spec, path.measures.back());
    if (lift.size() > cfg.atom_cap)
      throw Error(ErrorCode::SupportBlowup, "Lagrangian step " + std::to_string(k) + " produced " +
                                                std::to_string(lift.size()) + " atoms");
    DiscreteMeasure mu_next = transport(lift, g.dt, cfg.coalesce_tol);
    path.pruned_mass += prune(mu_next, cfg.prune_floor);
    path.interp.push_back(std::move(lift));
    path.times.push_back(g.time(k + 1));
    path.measures.push_back(std::move(mu_next));
  }
  return path;
}

MeasurePath mean_velocity_run(const PvfSpec& spec, const DiscreteMeasure& mu0,
                              const SchemeConfig& cfg) {
  require_scheme(cfg, SchemeKind::MeanVelocity);
  const GridSpec& g = cfg.grid;
  MeasurePath path = start_path(cfg, mu0);
  for (int k = 0; k < g.N; ++k) {
    const DiscreteMeasure& mu = path.measures.back();
    LiftedMeasure lift = make_lifted(mu.atoms(), barycentric_field(spec, mu), mu.weights());
    DiscreteMeasure mu_next = transport(lift, g.dt, cfg.coalesce_tol);
    path.interp.push_back(std::move(lift));
    path.times.push_back(g.time(k + 1));
    path.measures.push_back(std::move(mu_next));
  }
  return path;
}

MeasurePath run_scheme(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg) {
  switch (cfg.scheme) {
    case SchemeKind::LAS: return las_run(spec, mu0, cfg);
    case SchemeKind::Lagrangian: return lagrangian_run(spec, mu0, cfg);
    case SchemeKind::MeanVelocity: return mean_velocity_run(spec, mu0, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scheme");
}

DiscreteMeasure interpolate_at(const MeasurePath& path, double t) {
  if (path.measures.empty()) throw Error(ErrorCode::EmptyInput, "empty measure path");
  const double T = path.horizon();
  const double eps = 1e-12 * std::max(1.0, T);
  if (t < -eps || t > T + eps)
    throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t) + " outside [0, T]");
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - path.times.begin() - 1, 0));
  if (std::abs(t - path.times[k]) <= eps) return path.measures[k];
  if (k + 1 < path.times.size() && std::abs(t - path.times[k + 1]) <= eps)
    return path.measures[k + 1];
  if (k >= path.interp.size()) return path.measures.back();
  return transport(path.interp[k], t - path.times[k], kCanonicalTol);
}

bool support_bound_check(const MeasurePath& path, double C, double R) {
  const double bound = std::exp(C * path.horizon()) * (R + 1.0);
  for (const auto& mu : path.measures)
    if (support_radius(mu) > bound * (1.0 + 1e-12)) return false;
  return true;
}

void write_path_csv(std::ostream& os, const MeasurePath& path, int samples_per_interval) {
  if (path.measures.empty()) return;
  write_atoms_csv_header(os, path.measures.front().dim());
  for (std::size_t k = 0; k < path.measures.size(); ++k) {
    write_atoms_csv_rows(os, path.times[k], path.measures[k]);
    if (samples_per_interval <= 0 || k + 1 >= path.measures.size()) continue;
    const double h = (path.times[k + 1] - path.times[k]) / (samples_per_interval + 1);
    for (int s = 1; s <= samples_per_interval; ++s) {
      const double t = path.times[k] + s * h;
      write_atoms_csv_rows(os, t, transport(path.interp[k], t - path.times[k], kCanonicalTol));
    }
  }
}

nlohmann::json path_summary_json(const MeasurePath& path, const SchemeConfig& cfg) {
  std::vector<long long> counts;
  for (const auto& mu : path.measures) counts.push_back(mu.size());
  const GridSpec& g = path.grid;
  return {
      {"scheme", to_string(path.scheme)},
      {"grid",
       {{"dt", g.dt}, {"dv", g.dv}, {"dx", g.dx}, {"N", g.N}, {"T", g.T}, {"resolution", g.resolution}}},
      {"coalesce_tol", cfg.coalesce_tol},
      {"prune_floor", cfg.prune_floor},
      {"pruned_mass", path.pruned_mass},
      {"support_radii", path.support_radii()},
      {"atom_counts", counts},
  };
}

}  // namespace mdelab
