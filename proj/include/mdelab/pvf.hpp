#pragma once

// Probability vector fields: rules mu -> V[mu] assigning to every atomic
// measure a lifted measure whose position marginal is mu itself.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>

#include "json.hpp"
#include "mdelab/measure.hpp"

namespace mdelab {

using FieldParams = std::map<std::string, double>;

/// V[mu] = mu (x) delta_{v(x)}: the MDE collapses to a continuity equation.
struct GraphPvf {
  std::string field;  // registry name, kept for serialization
  FieldParams params;
  std::function<Point(const Point&)> v;
};

/// V[mu] = mu (x) omega.
struct ConstantFiberPvf {
  DiscreteMeasure omega;
};

/// One-dimensional splitting particle: mass left of the median moves at
/// speed -1, mass right of it at +1, and the median atom is split so that
/// the median stays put.
struct SplittingPvf {};

/// Arbitrary in-process rule. Must return a lifted measure whose base is
/// the argument.
struct CustomPvf {
  std::function<LiftedMeasure(const DiscreteMeasure&)> eval;
};

struct PvfSpec {
  std::string name;
  std::variant<GraphPvf, ConstantFiberPvf, SplittingPvf, CustomPvf> rule;
};

/// Splitting point of a 1-D measure and the mass bookkeeping around it.
struct MedianData {
  double B = 0.0;              // sup{x : mu(]-inf, x]) <= 1/2}
  double eta = 0.0;            // mu(]-inf, B]) - 1/2
  double mass_at_B = 0.0;      // mu({B})
  double cdf_left_of_B = 0.0;  // mu(]-inf, B[)
  Eigen::Index atom_index = 0;
};

/// Built-in closed-form velocity fields, applied componentwise:
///   "zero"            v = 0
///   "constant"        v = value            (param "value", default 1)
///   "linear"          v = slope x + offset (params "slope" = 1, "offset" = 0)
///   "peano", "sqrt2"  v = 2 sqrt(|x|)
/// Throws ConfigError for unknown names.
std::function<Point(const Point&)> builtin_field(const std::string& name, const FieldParams& params);
std::span<const std::string_view> builtin_field_names();

PvfSpec graph_pvf(const std::string& field, const FieldParams& params = {});
PvfSpec graph_pvf(const std::string& name, std::function<Point(const Point&)> v);
PvfSpec constant_fiber_pvf(DiscreteMeasure omega, std::string name = "constant_fiber");
PvfSpec splitting_pvf();
PvfSpec custom_pvf(std::string name, std::function<LiftedMeasure(const DiscreteMeasure&)> eval);

/// Median data of a 1-D measure; CDF comparisons use absolute tolerance
/// 1e-12, so B is the first atom whose CDF exceeds 1/2 + 1e-12.
MedianData median_data(const DiscreteMeasure& mu);

/// V[mu]. The base of the result equals mu atom for atom.
LiftedMeasure eval_pvf(const PvfSpec& spec, const DiscreteMeasure& mu);

/// Mean fiber velocity over each atom of mu (column i belongs to
/// mu.atom(i)). Exact for graph fields.
Eigen::MatrixXd barycentric_field(const PvfSpec& spec, const DiscreteMeasure& mu);

/// max over samples of sup|v| / (1 + sup|x|), an estimate of the growth
/// constant C with sup|v| <= C (1 + sup|x|).
double sublinearity_bound(const PvfSpec& spec, std::span<const DiscreteMeasure> samples);

/// JSON spec fragments:
///   {"kind":"graph","field":"peano"}, {"kind":"graph","field":"linear","slope":2}
///   {"kind":"constant_fiber","omega":<measure spec>}
///   {"kind":"splitting"}
/// Measure specs: {"kind":"dirac","point":[..]},
///   {"kind":"atoms","atoms":[..],"weights":[..]},
///   {"kind":"uniform_1d","a":..,"b":..,"atoms":M}.
PvfSpec pvf_from_json(const nlohmann::json& j);
nlohmann::json pvf_to_json(const PvfSpec& spec);
DiscreteMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json measure_to_json(const DiscreteMeasure& mu);

}  // namespace mdelab
