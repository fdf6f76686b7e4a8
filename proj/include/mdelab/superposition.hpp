#pragma once

// Finite probability measures on piecewise-linear curves. A scheme run is
// represented by gluing, node by node, the straight characteristics of each
// step onto the curves that arrive at their starting points, splitting mass
// by conditional weights.

#include <string>
#include <vector>

#include "json.hpp"
#include "mdelab/pvf.hpp"
#include "mdelab/schemes.hpp"

namespace mdelab {

struct Curve {
  double weight = 0.0;
  PointSet knots;  // dim x (number of knot times)
};

/// Weighted curves sharing the knot times; linear between knots.
struct TrajectoryEnsemble {
  std::vector<double> times;
  std::vector<Curve> curves;

  Eigen::Index dim() const { return curves.empty() ? 0 : curves.front().knots.rows(); }
  double total_weight() const;
};

struct Segment {
  double weight = 0.0;
  Point start;
  Point velocity;
};

/// Straight characteristics x + (t - t_start) v over one interval.
struct SegmentEnsemble {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<Segment> segments;
};

SegmentEnsemble segment_ensemble(const LiftedMeasure& lifted, double t_start, double t_end);

/// Two-knot trajectory ensemble made from a single segment ensemble.
TrajectoryEnsemble as_trajectories(const SegmentEnsemble& segments);

/// Glues tail segments onto head curves that end where they start. Over a
/// joint atom x of mass m the pair (curve, segment) gets weight
/// m (w_curve / m_head(x)) (w_seg / m_tail(x)). Curves identical in every
/// knot are merged afterwards. Throws EndpointMismatch when the endpoint
/// groupings disagree with `joint`.
TrajectoryEnsemble concat_merge(const TrajectoryEnsemble& head, const SegmentEnsemble& tail,
                                const DiscreteMeasure& joint);

/// Representation of a scheme run: e_t # eta equals interpolate_at(path, t)
/// for every t. Throws SupportBlowup beyond `curve_cap` curves.
TrajectoryEnsemble build_representation(const MeasurePath& path, std::size_t curve_cap = 1000000);

/// e_t # eta. Throws OutOfRange outside the knot range.
DiscreteMeasure evaluate_pushforward(const TrajectoryEnsemble& eta, double t);

struct FiberBarycenterReport {
  double t = 0.0;
  double max_defect = 0.0;
  /// Largest |slope| over all curves on the interval starting at t.
  double max_speed = 0.0;
  std::vector<double> positions;  // first coordinate of each grouped position
  std::vector<double> defects;
  std::string convention = "right-derivative";
};

/// Compares, at each occupied position y, the mean right slope of the curves
/// through y with the barycentric field of the PVF at e_t # eta. `t` must be
/// a knot time other than the last (OutOfRange otherwise).
FiberBarycenterReport verify_fiber_barycenter(const TrajectoryEnsemble& eta, const PvfSpec& spec,
                                              double t);

/// Largest slope magnitude over all curves and intervals.
double max_speed(const TrajectoryEnsemble& eta);

/// {"times":[...],"curves":[{"weight":w,"knots":[[x...],...]},...]}
nlohmann::json trajectories_to_json(const TrajectoryEnsemble& eta);
TrajectoryEnsemble trajectories_from_json(const nlohmann::json& j);

}  // namespace mdelab
