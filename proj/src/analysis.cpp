#include "mdelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>

#include "mdelab/format.hpp"
#include "mdelab/transport.hpp"

namespace mdelab {

double TestFunction::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double q = (x - center).squaredNorm() / (radius * radius);
  if (q >= 1.0) return 0.0;
  const double u = 1.0 - q;
  return u * u * u;
}

Point TestFunction::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double r2 = radius * radius;
  const double q = (x - center).squaredNorm() / r2;
  if (q >= 1.0) return Point::Zero(x.size());
  const double u = 1.0 - q;
  return (-6.0 * u * u / r2) * (x - center);
}

std::vector<TestFunction> default_family(const MeasurePath& path, int count) {
  if (path.measures.empty()) throw Error(ErrorCode::EmptyInput, "empty measure path");
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "family size must be positive");
  const Eigen::Index d = path.measures.front().dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (const auto& mu : path.measures) {
    lo = lo.cwiseMin(mu.atoms().rowwise().minCoeff());
    hi = hi.cwiseMax(mu.atoms().rowwise().maxCoeff());
  }
  const Eigen::VectorXd mid = 0.5 * (lo + hi);
  Eigen::VectorXd half = 0.5 * (hi - lo);
  if (half.maxCoeff() <= 0.0) half.setConstant(0.5);
  half = (1.2 * half).cwiseMax(1e-12);
  const double width = 2.0 * half.maxCoeff();

  const int per_axis =
      d == 1 ? count
             : std::max(2, static_cast<int>(std::lround(std::pow(count, 1.0 / static_cast<double>(d)))));
  long long total = 1;
  for (Eigen::Index a = 0; a < d; ++a) total *= per_axis;

  std::vector<TestFunction> family;
  family.reserve(static_cast<std::size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    Point c(d);
    long long rest = idx;
    for (Eigen::Index a = 0; a < d; ++a) {
      const long long i = rest % per_axis;
      rest /= per_axis;
      const double s = per_axis == 1 ? 0.5 : static_cast<double>(i) / (per_axis - 1);
      c(a) = mid(a) - half(a) + 2.0 * half(a) * s;
    }
    family.push_back({std::move(c), width});
  }
  return family;
}

ResidualReport residual(const MeasurePath& path, const PvfSpec& spec,
                        std::span<const TestFunction> family) {
  if (family.empty()) throw Error(ErrorCode::InvalidArgument, "empty test family");
  const auto nf = static_cast<Eigen::Index>(family.size());
  const auto nk = static_cast<Eigen::Index>(path.measures.size());

  // Pairing <mu_k, f> and the flux sum grad f(x).v w over V[mu_k].
  Eigen::MatrixXd pairing(nf, nk), flux(nf, nk);
  for (Eigen::Index k = 0; k < nk; ++k) {
    const DiscreteMeasure& mu = path.measures[static_cast<std::size_t>(k)];
    const LiftedMeasure lift = eval_pvf(spec, mu);
    for (Eigen::Index f = 0; f < nf; ++f) {
      const TestFunction& tf = family[static_cast<std::size_t>(f)];
      double p = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) p += tf.value(mu.atom(i)) * mu.weight(i);
      double g = 0.0;
      for (Eigen::Index i = 0; i < lift.size(); ++i)
        g += tf.gradient(lift.position(i)).dot(lift.velocity(i)) * lift.weight(i);
      pairing(f, k) = p;
      flux(f, k) = g;
    }
  }

  ResidualReport report;
  report.family.assign(family.begin(), family.end());
  report.times = path.times;
  report.dt = path.grid.dt;
  report.defects = Eigen::MatrixXd::Zero(nf, nk);
  Eigen::VectorXd trapezoid = Eigen::VectorXd::Zero(nf);
  for (Eigen::Index k = 1; k < nk; ++k) {
    const double h = path.times[static_cast<std::size_t>(k)] - path.times[static_cast<std::size_t>(k) - 1];
    trapezoid += 0.5 * h * (flux.col(k - 1) + flux.col(k));
    report.defects.col(k) = (pairing.col(k) - pairing.col(0) - trapezoid).cwiseAbs();
  }
  report.max_defect = report.defects.size() > 0 ? report.defects.maxCoeff() : 0.0;
  report.description = std::to_string(family.size()) +
                       " bumps (1 - |x - c|^2 / r^2)^3, radius " + fmt17(family.front().radius);
  return report;
}

void write_residual_csv(std::ostream& os, const ResidualReport& report) {
  os << "function,t,defect\n";
  for (Eigen::Index f = 0; f < report.defects.rows(); ++f)
    for (Eigen::Index k = 0; k < report.defects.cols(); ++k)
      os << f << ',' << fmt17(report.times[static_cast<std::size_t>(k)]) << ','
         << fmt17(report.defects(f, k)) << '\n';
}

nlohmann::json residual_to_json(const ResidualReport& report) {
  nlohmann::json family = nlohmann::json::array();
  for (const auto& tf : report.family) {
    std::vector<double> c(tf.center.data(), tf.center.data() + tf.center.size());
    family.push_back({{"center", c}, {"radius", tf.radius}});
  }
  nlohmann::json per_function = nlohmann::json::array();
  for (Eigen::Index f = 0; f < report.defects.rows(); ++f)
    per_function.push_back(report.defects.row(f).maxCoeff());
  return {{"max_defect", report.max_defect},
          {"dt", report.dt},
          {"family", report.description},
          {"functions", family},
          {"max_defect_per_function", per_function}};
}

double sup_node_gap(const MeasurePath& a, const MeasurePath& b, double* t_at_max) {
  if (a.times.size() != b.times.size())
    throw Error(ErrorCode::InvalidArgument, "paths have different node counts");
  double best = 0.0;
  double where = 0.0;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    if (std::abs(a.times[k] - b.times[k]) > 1e-12 * std::max(1.0, a.horizon()))
      throw Error(ErrorCode::InvalidArgument, "paths have different node times");
    const double w = w1_distance(a.measures[k], b.measures[k]);
    if (w > best) {
      best = w;
      where = a.times[k];
    }
  }
  if (t_at_max) *t_at_max = where;
  return best;
}

namespace {

double sup_error(const MeasurePath& path, const std::vector<double>& times,
                 const std::function<DiscreteMeasure(double)>& exact) {
  double best = 0.0;
  for (const double t : times) best = std::max(best, w1_distance(interpolate_at(path, t), exact(t)));
  return best;
}

}  // namespace

ConvergenceTable convergence_table(std::span<const MeasurePath> paths, const Reference& reference) {
  if (paths.empty()) throw Error(ErrorCode::EmptyInput, "no runs to compare");
  for (std::size_t i = 1; i < paths.size(); ++i)
    if (paths[i].grid.resolution <= paths[i - 1].grid.resolution)
      throw Error(ErrorCode::InvalidArgument, "resolutions must increase");
  const std::vector<double>& times = paths.front().times;

  ConvergenceTable table;
  table.scheme = paths.front().scheme;
  if (std::holds_alternative<std::monostate>(reference)) {
    table.successive = true;
    for (std::size_t i = 0; i + 1 < paths.size(); ++i) {
      const MeasurePath& finer = paths[i + 1];
      table.rows.push_back({paths[i].grid.resolution, paths[i].grid.dt,
                            sup_error(paths[i], times, [&](double t) { return interpolate_at(finer, t); })});
    }
    return table;
  }
  std::function<DiscreteMeasure(double)> exact;
  if (const auto* ref = std::get_if<MeasurePath>(&reference))
    exact = [ref](double t) { return interpolate_at(*ref, t); };
  else
    exact = std::get<ClosedForm>(reference);
  for (const auto& p : paths)
    table.rows.push_back({p.grid.resolution, p.grid.dt, sup_error(p, times, exact)});
  return table;
}

ConvergenceTable convergence_study(const PvfSpec& spec, const DiscreteMeasure& mu0,
                                   SchemeKind scheme, std::span<const int> Ns, double T,
                                   const Reference& reference, GridConvention convention) {
  std::vector<std::future<MeasurePath>> jobs;
  jobs.reserve(Ns.size());
  for (const int n : Ns) {
    SchemeConfig cfg;
    cfg.scheme = scheme;
    cfg.grid = make_grid(convention, n, T);
    jobs.push_back(std::async(std::launch::async, [&spec, &mu0, cfg] { return run_scheme(spec, mu0, cfg); }));
  }
  std::vector<MeasurePath> paths;
  paths.reserve(jobs.size());
  for (auto& j : jobs) paths.push_back(j.get());
  return convergence_table(paths, reference);
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
  os << "N,dt,error\n";
  for (const auto& r : table.rows) os << r.N << ',' << fmt17(r.dt) << ',' << fmt17(r.error) << '\n';
}

void write_convergence_dat(std::ostream& os, const ConvergenceTable& table) {
  os << "# N error\n";
  for (const auto& r : table.rows) os << r.N << ' ' << fmt17(r.error) << '\n';
}

nlohmann::json convergence_to_json(const ConvergenceTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) rows.push_back({{"N", r.N}, {"dt", r.dt}, {"error", r.error}});
  return {{"scheme", to_string(table.scheme)},
          {"mode", table.successive ? "successive" : "reference"},
          {"rows", rows}};
}

double CompareTable::gap(SchemeKind a, SchemeKind b) const {
  for (const auto& r : rows)
    if ((r.first == a && r.second == b) || (r.first == b && r.second == a)) return r.gap;
  throw Error(ErrorCode::InvalidArgument, "no gap recorded for " + to_string(a) + " / " + to_string(b));
}

CompareTable compare_paths(std::span<const MeasurePath> paths) {
  if (paths.empty()) throw Error(ErrorCode::EmptyInput, "no runs to compare");
  CompareTable table;
  table.N = paths.front().grid.resolution;
  table.T = paths.front().horizon();
  for (std::size_t a = 0; a < paths.size(); ++a)
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      CompareRow row{paths[a].scheme, paths[b].scheme, 0.0, 0.0};
      row.gap = sup_node_gap(paths[a], paths[b], &row.t_at_max);
      table.rows.push_back(row);
    }
  return table;
}

CompareTable scheme_compare(const PvfSpec& spec, const DiscreteMeasure& mu0, int N, double T,
                            GridConvention convention) {
  std::vector<std::future<MeasurePath>> jobs;
  for (const SchemeKind s : {SchemeKind::LAS, SchemeKind::Lagrangian, SchemeKind::MeanVelocity}) {
    SchemeConfig cfg;
    cfg.scheme = s;
    cfg.grid = make_grid(convention, N, T);
    jobs.push_back(std::async(std::launch::async, [&spec, &mu0, cfg] { return run_scheme(spec, mu0, cfg); }));
  }
  std::vector<MeasurePath> paths;
  for (auto& j : jobs) paths.push_back(j.get());
  return compare_paths(paths);
}

void write_compare_csv(std::ostream& os, const CompareTable& table) {
  os << "first,second,gap,t_at_max\n";
  for (const auto& r : table.rows)
    os << to_string(r.first) << ',' << to_string(r.second) << ',' << fmt17(r.gap) << ','
       << fmt17(r.t_at_max) << '\n';
}

nlohmann::json compare_to_json(const CompareTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"first", to_string(r.first)},
                    {"second", to_string(r.second)},
                    {"gap", r.gap},
                    {"t_at_max", r.t_at_max}});
  return {{"N", table.N}, {"T", table.T}, {"rows", rows}};
}

}  // namespace mdelab
