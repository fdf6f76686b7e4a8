#pragma once

// Explicit time stepping for measure differential equations:
//   - LAS: lattice scheme, mass snapped to a space grid and velocities to a
//     velocity grid, grid atoms transported linearly over each step;
//   - Lagrangian: grid-free, every atom split along its whole fiber;
//   - MeanVelocity: every atom moved by the barycenter of its fiber.

#include <string>
#include <vector>

#include "json.hpp"
#include "mdelab/pvf.hpp"

namespace mdelab {

enum class SchemeKind { LAS, Lagrangian, MeanVelocity };

std::string to_string(SchemeKind kind);
/// Accepts "las", "lagrangian", "mean-velocity" (and "mean_velocity").
SchemeKind scheme_from_string(const std::string& name);

/// Time, velocity and space steps. `N` counts time steps; `resolution` is
/// the refinement index that fixes dv = 1/resolution.
struct GridSpec {
  double dt = 1.0;
  double dv = 1.0;
  double dx = 1.0;
  int N = 1;
  double T = 1.0;
  int resolution = 1;

  /// dt = T/N, dv = 1/N, dx = dt dv; N steps.
  static GridSpec standard(int N, double T);
  /// dt = dv = 1/N, dx = 1/N^2; round(T N) steps. This is the convention of
  /// the worked examples (time step 1/N independent of the horizon).
  static GridSpec unit_step(int N, double T);

  double time(int k) const { return k * dt; }
};

enum class GridConvention { Standard, UnitStep };

std::string to_string(GridConvention convention);
/// Accepts "standard" and "unit_step" (or "unit-step").
GridConvention convention_from_string(const std::string& name);
GridSpec make_grid(GridConvention convention, int N, double T);

struct SchemeConfig {
  SchemeKind scheme = SchemeKind::LAS;
  GridSpec grid;
  double coalesce_tol = 1e-12;
  double prune_floor = 0.0;     // 0 disables pruning; at most 1e-6
  long long atom_cap = 1000000;  // Lagrangian support blowup guard

  void validate() const;
};

/// Time-indexed node measures of one run plus, for every interval
/// [t_k, t_{k+1}], the lifted measure whose characteristics x + (t - t_k) v
/// carry node k to node k+1. For the mean-velocity scheme the lift is
/// mu_k (x) delta_{w(x)} with w the barycentric field.
struct MeasurePath {
  SchemeKind scheme = SchemeKind::LAS;
  GridSpec grid;
  std::vector<double> times;
  std::vector<DiscreteMeasure> measures;
  std::vector<LiftedMeasure> interp;
  double pruned_mass = 0.0;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  std::vector<double> support_radii() const;
};

/// A_N^x: bins every atom into its half-open cell i dx + [0, dx)^d.
DiscreteMeasure snap_space(const DiscreteMeasure& mu, const GridSpec& grid);
/// A_N^v: bins velocities into v_j + [0, dv)^d; positions must already be
/// on the space grid (BaseOffGrid otherwise).
LiftedMeasure snap_velocity(const LiftedMeasure& lifted, const GridSpec& grid);

MeasurePath las_run(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg);
MeasurePath lagrangian_run(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg);
MeasurePath mean_velocity_run(const PvfSpec& spec, const DiscreteMeasure& mu0,
                              const SchemeConfig& cfg);
/// Dispatches on cfg.scheme.
MeasurePath run_scheme(const PvfSpec& spec, const DiscreteMeasure& mu0, const SchemeConfig& cfg);

/// Node measure at node times, characteristics from the stored lift in
/// between. Throws OutOfRange outside [0, T].
DiscreteMeasure interpolate_at(const MeasurePath& path, double t);

/// Every node satisfies supp mu_t within B(0, e^{C T} (R + 1)).
bool support_bound_check(const MeasurePath& path, double C, double R);

/// CSV rows `t,x1..xd,weight` for all nodes; with `samples_per_interval`
/// > 0 additional uniformly spaced interior times are interpolated.
void write_path_csv(std::ostream& os, const MeasurePath& path, int samples_per_interval = 0);
/// Run manifest fragment: scheme, grid, pruned mass, support radii.
nlohmann::json path_summary_json(const MeasurePath& path, const SchemeConfig& cfg);

namespace detail {
/// Index of the grid cell containing `value` for cell width h. A relative
/// guard of 1e-9 cells keeps values that sit on a grid point (up to
/// roundoff) in that point's cell.
long long grid_index(double value, double h);
}  // namespace detail

}  // namespace mdelab
