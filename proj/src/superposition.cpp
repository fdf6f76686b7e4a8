#include "mdelab/superposition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdelab {

namespace {

constexpr double kGroupTol = 1e-12;
constexpr double kJointMassTol = 1e-9;

std::size_t knot_index(const std::vector<double>& times, double t) {
  if (times.empty()) throw Error(ErrorCode::EmptyInput, "ensemble has no knot times");
  const double eps = 1e-12 * std::max(1.0, std::abs(times.back()));
  if (t < times.front() - eps || t > times.back() + eps)
    throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t) + " outside the knot range");
  const auto it = std::upper_bound(times.begin(), times.end(), t + eps);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - times.begin() - 1, 0));
}

bool is_knot(const std::vector<double>& times, std::size_t k, double t) {
  return std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(times.back()));
}

// Sums weights of curves whose knots agree within kGroupTol everywhere.
std::vector<Curve> merge_identical(std::vector<Curve> curves) {
  std::sort(curves.begin(), curves.end(), [](const Curve& a, const Curve& b) {
    const double* pa = a.knots.data();
    const double* pb = b.knots.data();
    return std::lexicographical_compare(pa, pa + a.knots.size(), pb, pb + b.knots.size());
  });
  std::vector<Curve> merged;
  merged.reserve(curves.size());
  for (auto& c : curves) {
    if (!merged.empty() &&
        (merged.back().knots - c.knots).cwiseAbs().maxCoeff() <= kGroupTol) {
      merged.back().weight += c.weight;
    } else {
      merged.push_back(std::move(c));
    }
  }
  return merged;
}

}  // namespace

double TrajectoryEnsemble::total_weight() const {
  double w = 0.0;
  for (const auto& c : curves) w += c.weight;
  return w;
}

SegmentEnsemble segment_ensemble(const LiftedMeasure& lifted, double t_start, double t_end) {
  if (!(t_start < t_end)) throw Error(ErrorCode::InvalidArgument, "segment interval is empty");
  SegmentEnsemble out{t_start, t_end, {}};
  out.segments.reserve(static_cast<std::size_t>(lifted.size()));
  for (Eigen::Index i = 0; i < lifted.size(); ++i)
    out.segments.push_back({lifted.weight(i), lifted.position(i), lifted.velocity(i)});
  return out;
}

TrajectoryEnsemble as_trajectories(const SegmentEnsemble& segments) {
  TrajectoryEnsemble eta;
  eta.times = {segments.t_start, segments.t_end};
  const double h = segments.t_end - segments.t_start;
  for (const auto& s : segments.segments) {
    Curve c;
    c.weight = s.weight;
    c.knots.resize(s.start.size(), 2);
    c.knots.col(0) = s.start;
    c.knots.col(1) = s.start + h * s.velocity;
    eta.curves.push_back(std::move(c));
  }
  eta.curves = merge_identical(std::move(eta.curves));
  return eta;
}

TrajectoryEnsemble concat_merge(const TrajectoryEnsemble& head, const SegmentEnsemble& tail,
                                const DiscreteMeasure& joint) {
  if (head.times.empty() || std::abs(head.times.back() - tail.t_start) > 1e-12 * std::max(1.0, tail.t_end))
    throw Error(ErrorCode::InvalidArgument, "head does not end where the tail starts");

  const auto n_joint = static_cast<std::size_t>(joint.size());
  std::vector<std::vector<std::size_t>> head_groups(n_joint), tail_groups(n_joint);
  std::vector<double> head_mass(n_joint, 0.0), tail_mass(n_joint, 0.0);

  for (std::size_t c = 0; c < head.curves.size(); ++c) {
    const auto& knots = head.curves[c].knots;
    const Eigen::Index at = find_atom(joint, knots.col(knots.cols() - 1), kGroupTol);
    if (at < 0) throw Error(ErrorCode::EndpointMismatch, "a head curve ends off the joint support");
    head_groups[static_cast<std::size_t>(at)].push_back(c);
    head_mass[static_cast<std::size_t>(at)] += head.curves[c].weight;
  }
  for (std::size_t s = 0; s < tail.segments.size(); ++s) {
    const Eigen::Index at = find_atom(joint, tail.segments[s].start, kGroupTol);
    if (at < 0) throw Error(ErrorCode::EndpointMismatch, "a tail segment starts off the joint support");
    tail_groups[static_cast<std::size_t>(at)].push_back(s);
    tail_mass[static_cast<std::size_t>(at)] += tail.segments[s].weight;
  }
  for (std::size_t x = 0; x < n_joint; ++x) {
    const double m = joint.weight(static_cast<Eigen::Index>(x));
    if (std::abs(head_mass[x] - m) > kJointMassTol || std::abs(tail_mass[x] - m) > kJointMassTol)
      throw Error(ErrorCode::EndpointMismatch,
                  "mass over joint atom " + std::to_string(x) + " differs between head and tail");
  }

  TrajectoryEnsemble out;
  out.times = head.times;
  out.times.push_back(tail.t_end);
  const double h = tail.t_end - tail.t_start;
  for (std::size_t x = 0; x < n_joint; ++x) {
    const double m = joint.weight(static_cast<Eigen::Index>(x));
    for (const std::size_t c : head_groups[x]) {
      const Curve& curve = head.curves[c];
      for (const std::size_t s : tail_groups[x]) {
        const Segment& seg = tail.segments[s];
        Curve glued;
        glued.weight = m * (curve.weight / head_mass[x]) * (seg.weight / tail_mass[x]);
        glued.knots.resize(curve.knots.rows(), curve.knots.cols() + 1);
        glued.knots.leftCols(curve.knots.cols()) = curve.knots;
        glued.knots.col(curve.knots.cols()) = seg.start + h * seg.velocity;
        out.curves.push_back(std::move(glued));
      }
    }
  }
  out.curves = merge_identical(std::move(out.curves));
  return out;
}

TrajectoryEnsemble build_representation(const MeasurePath& path, std::size_t curve_cap) {
  if (path.interp.empty() || path.interp.size() + 1 != path.measures.size())
    throw Error(ErrorCode::InvalidArgument, "path carries no interpolation data");
  if (path.pruned_mass > 0.0)
    throw Error(ErrorCode::InvalidArgument, "pruned paths have no exact representation");
  TrajectoryEnsemble eta =
      as_trajectories(segment_ensemble(path.interp[0], path.times[0], path.times[1]));
  for (std::size_t k = 1; k < path.interp.size(); ++k) {
    eta = concat_merge(eta, segment_ensemble(path.interp[k], path.times[k], path.times[k + 1]),
                       path.measures[k]);
    if (eta.curves.size() > curve_cap)
      throw Error(ErrorCode::SupportBlowup,
                  "representation exceeds " + std::to_string(curve_cap) + " curves");
  }
  return eta;
}

DiscreteMeasure evaluate_pushforward(const TrajectoryEnsemble& eta, double t) {
  if (eta.curves.empty()) throw Error(ErrorCode::EmptyInput, "empty trajectory ensemble");
  const std::size_t k = knot_index(eta.times, t);
  PointSet x(eta.dim(), static_cast<Eigen::Index>(eta.curves.size()));
  Eigen::VectorXd w(x.cols());
  const bool at_knot = is_knot(eta.times, k, t) || k + 1 == eta.times.size();
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t c = 0; c < eta.curves.size(); ++c) {
    const auto& knots = eta.curves[c].knots;
    const auto ci = static_cast<Eigen::Index>(c);
    if (at_knot) {
      x.col(ci) = knots.col(kk);
    } else {
      const double s = (t - eta.times[k]) / (eta.times[k + 1] - eta.times[k]);
      x.col(ci) = knots.col(kk) + s * (knots.col(kk + 1) - knots.col(kk));
    }
    w(ci) = eta.curves[c].weight;
  }
  return make_measure(x, w);
}

FiberBarycenterReport verify_fiber_barycenter(const TrajectoryEnsemble& eta, const PvfSpec& spec,
                                              double t) {
  const std::size_t k = knot_index(eta.times, t);
  if (!is_knot(eta.times, k, t) || k + 1 >= eta.times.size())
    throw Error(ErrorCode::OutOfRange, "fiber barycenter needs a knot time with a right slope");

  const auto kk = static_cast<Eigen::Index>(k);
  const double h = eta.times[k + 1] - eta.times[k];
  const auto n = static_cast<Eigen::Index>(eta.curves.size());
  PointSet y(eta.dim(), n), slope(eta.dim(), n);
  Eigen::VectorXd w(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& curve = eta.curves[static_cast<std::size_t>(c)];
    y.col(c) = curve.knots.col(kk);
    slope.col(c) = (curve.knots.col(kk + 1) - curve.knots.col(kk)) / h;
    w(c) = curve.weight;
  }

  const DiscreteMeasure mu_t = make_measure(y, w);
  const Eigen::MatrixXd field = barycentric_field(spec, mu_t);

  Eigen::MatrixXd slope_sum = Eigen::MatrixXd::Zero(eta.dim(), mu_t.size());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mu_t.size());
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index at = find_atom(mu_t, y.col(c), kCanonicalTol);
    if (at < 0) throw Error(ErrorCode::InvalidArgument, "curve position lost while grouping");
    slope_sum.col(at) += w(c) * slope.col(c);
    mass(at) += w(c);
  }

  FiberBarycenterReport report;
  report.t = t;
  report.max_speed = n > 0 ? slope.colwise().norm().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < mu_t.size(); ++i) {
    const double defect = (slope_sum.col(i) / mass(i) - field.col(i)).norm();
    report.positions.push_back(mu_t.atom(i)(0));
    report.defects.push_back(defect);
    report.max_defect = std::max(report.max_defect, defect);
  }
  return report;
}

double max_speed(const TrajectoryEnsemble& eta) {
  double best = 0.0;
  for (const auto& c : eta.curves)
    for (Eigen::Index k = 0; k + 1 < c.knots.cols(); ++k) {
      const double h = eta.times[static_cast<std::size_t>(k) + 1] - eta.times[static_cast<std::size_t>(k)];
      best = std::max(best, (c.knots.col(k + 1) - c.knots.col(k)).norm() / h);
    }
  return best;
}

nlohmann::json trajectories_to_json(const TrajectoryEnsemble& eta) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : eta.curves) {
    nlohmann::json knots = nlohmann::json::array();
    for (Eigen::Index k = 0; k < c.knots.cols(); ++k) {
      nlohmann::json p = nlohmann::json::array();
      for (Eigen::Index d = 0; d < c.knots.rows(); ++d) p.push_back(c.knots(d, k));
      knots.push_back(std::move(p));
    }
    curves.push_back({{"weight", c.weight}, {"knots", std::move(knots)}});
  }
  return {{"times", eta.times}, {"curves", std::move(curves)}};
}

TrajectoryEnsemble trajectories_from_json(const nlohmann::json& j) {
  try {
    TrajectoryEnsemble eta;
    eta.times = j.at("times").get<std::vector<double>>();
    for (const auto& cj : j.at("curves")) {
      Curve c;
      c.weight = cj.at("weight").get<double>();
      const auto& knots = cj.at("knots");
      if (knots.size() != eta.times.size())
        throw Error(ErrorCode::ConfigError, "curve knot count differs from the time grid");
      const auto d = static_cast<Eigen::Index>(knots.at(0).size());
      c.knots.resize(d, static_cast<Eigen::Index>(knots.size()));
      for (std::size_t k = 0; k < knots.size(); ++k)
        for (Eigen::Index r = 0; r < d; ++r)
          c.knots(r, static_cast<Eigen::Index>(k)) = knots[k].at(static_cast<std::size_t>(r)).get<double>();
      eta.curves.push_back(std::move(c));
    }
    return eta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("trajectory JSON: ") + e.what());
  }
}

}  // namespace mdelab
