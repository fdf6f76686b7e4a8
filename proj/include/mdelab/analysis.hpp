#pragma once

// Verification tooling for scheme output: weak-form residuals against a
// family of smooth bumps, refinement studies and scheme-to-scheme gaps.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mdelab/pvf.hpp"
#include "mdelab/schemes.hpp"

namespace mdelab {

/// f(x) = (max(0, 1 - |x - c|^2 / r^2))^3, C^2 and supported in B(c, r).
struct TestFunction {
  Point center;
  double radius = 1.0;

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Point gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Bumps centered on a uniform grid over the support hull of the path
/// (all nodes), inflated by 20%, with radius equal to the hull width.
/// In d dimensions each axis gets max(2, round(count^(1/d))) centers.
/// A degenerate hull is widened to unit width.
std::vector<TestFunction> default_family(const MeasurePath& path, int count = 9);

struct ResidualReport {
  std::vector<TestFunction> family;
  std::vector<double> times;
  Eigen::MatrixXd defects;  // family.size() x times.size()
  double max_defect = 0.0;
  double dt = 0.0;
  std::string description;
};

/// For node t_k and bump f:
///   |<mu_k, f> - <mu_0, f> - trapezoid_{j<=k} sum_{(x,v)} grad f(x).v w|
/// with the integrand evaluated on eval_pvf(spec, mu_j).
ResidualReport residual(const MeasurePath& path, const PvfSpec& spec,
                        std::span<const TestFunction> family);

/// Rows `function,t,defect`.
void write_residual_csv(std::ostream& os, const ResidualReport& report);
nlohmann::json residual_to_json(const ResidualReport& report);

/// Exact solution as a function of time.
using ClosedForm = std::function<DiscreteMeasure(double)>;
using Reference = std::variant<std::monostate, MeasurePath, ClosedForm>;

struct ConvergenceRow {
  int N = 0;
  double dt = 0.0;
  double error = 0.0;
};

struct ConvergenceTable {
  SchemeKind scheme = SchemeKind::LAS;
  /// True when errors are gaps between consecutive resolutions (no
  /// reference); row i then compares Ns[i] with Ns[i + 1].
  bool successive = false;
  std::vector<ConvergenceRow> rows;
};

/// sup over the coarsest run's node times of the W1 error, per N.
ConvergenceTable convergence_study(const PvfSpec& spec, const DiscreteMeasure& mu0,
                                   SchemeKind scheme, std::span<const int> Ns, double T,
                                   const Reference& reference = {},
                                   GridConvention convention = GridConvention::Standard);
/// Same on precomputed paths (ordered by increasing N).
ConvergenceTable convergence_table(std::span<const MeasurePath> paths, const Reference& reference = {});

/// Rows `N,dt,error`.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);
/// Plot data: `# N error` header then whitespace-separated pairs.
void write_convergence_dat(std::ostream& os, const ConvergenceTable& table);
nlohmann::json convergence_to_json(const ConvergenceTable& table);

struct CompareRow {
  SchemeKind first = SchemeKind::LAS;
  SchemeKind second = SchemeKind::LAS;
  double gap = 0.0;
  double t_at_max = 0.0;
};

struct CompareTable {
  int N = 0;
  double T = 0.0;
  std::vector<CompareRow> rows;

  /// Gap between two schemes in either order. Throws InvalidArgument if the
  /// pair is absent.
  double gap(SchemeKind a, SchemeKind b) const;
};

/// sup over common node times of W1 between every pair of the three schemes.
CompareTable scheme_compare(const PvfSpec& spec, const DiscreteMeasure& mu0, int N, double T,
                            GridConvention convention = GridConvention::Standard);
/// Pairwise gaps among precomputed runs on the same time grid.
CompareTable compare_paths(std::span<const MeasurePath> paths);

/// sup over node times of W1(a_k, b_k); the grids must share node times.
double sup_node_gap(const MeasurePath& a, const MeasurePath& b, double* t_at_max = nullptr);

/// Rows `first,second,gap,t_at_max`.
void write_compare_csv(std::ostream& os, const CompareTable& table);
nlohmann::json compare_to_json(const CompareTable& table);

}  // namespace mdelab
