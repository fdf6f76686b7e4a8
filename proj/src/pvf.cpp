#include "mdelab/pvf.hpp"

#include <array>
#include <cmath>

namespace mdelab {

namespace {

constexpr double kCdfTol = 1e-12;

constexpr std::array<std::string_view, 5> kFieldNames = {"zero", "constant", "linear", "peano",
                                                         "sqrt2"};

double param_or(const FieldParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// Velocity law over atom `i` of a 1-D measure under the splitting rule.
DiscreteMeasure splitting_fiber(const MedianData& md, Eigen::Index i) {
  if (i < md.atom_index) return dirac(-1.0);
  if (i > md.atom_index) return dirac(1.0);
  const double up = md.eta;
  const double down = std::max(0.5 - md.cdf_left_of_B, 0.0);
  const std::array<double, 2> v{-1.0, 1.0};
  const std::array<double, 2> w{down / md.mass_at_B, up / md.mass_at_B};
  return make_measure(v, w);
}

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
  return j.at(key);
}

double require_number(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number())
    throw Error(ErrorCode::ConfigError, where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

Point point_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return Point::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::ConfigError, where + ": expected a number or a nonempty array");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    if (!j[c].is_number()) throw Error(ErrorCode::ConfigError, where + ": non-numeric coordinate");
    p(static_cast<Eigen::Index>(c)) = j[c].get<double>();
  }
  return p;
}

}  // namespace

std::function<Point(const Point&)> builtin_field(const std::string& name, const FieldParams& params) {
  if (name == "zero") return [](const Point& x) -> Point { return Point::Zero(x.size()); };
  if (name == "constant") {
    const double value = param_or(params, "value", 1.0);
    return [value](const Point& x) -> Point { return Point::Constant(x.size(), value); };
  }
  if (name == "linear") {
    const double slope = param_or(params, "slope", 1.0);
    const double offset = param_or(params, "offset", 0.0);
    return [slope, offset](const Point& x) -> Point {
      return (slope * x.array() + offset).matrix();
    };
  }
  if (name == "peano" || name == "sqrt2")
    return [](const Point& x) -> Point { return (2.0 * x.array().abs().sqrt()).matrix(); };
  throw Error(ErrorCode::ConfigError, "unknown graph field '" + name + "'");
}

std::span<const std::string_view> builtin_field_names() { return kFieldNames; }

PvfSpec graph_pvf(const std::string& field, const FieldParams& params) {
  return {"graph:" + field, GraphPvf{field, params, builtin_field(field, params)}};
}

PvfSpec graph_pvf(const std::string& name, std::function<Point(const Point&)> v) {
  return {name, GraphPvf{"", {}, std::move(v)}};
}

PvfSpec constant_fiber_pvf(DiscreteMeasure omega, std::string name) {
  return {std::move(name), ConstantFiberPvf{std::move(omega)}};
}

PvfSpec splitting_pvf() { return {"splitting", SplittingPvf{}}; }

PvfSpec custom_pvf(std::string name, std::function<LiftedMeasure(const DiscreteMeasure&)> eval) {
  return {std::move(name), CustomPvf{std::move(eval)}};
}

MedianData median_data(const DiscreteMeasure& mu) {
  if (mu.dim() != 1) throw Error(ErrorCode::DimMismatch, "median data needs a 1-D measure");
  if (mu.empty()) throw Error(ErrorCode::EmptyInput, "median data of an empty measure");
  double cdf = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double left = cdf;
    cdf += mu.weight(i);
    if (cdf > 0.5 + kCdfTol || i + 1 == mu.size()) {
      MedianData md;
      md.B = mu.atom(i)(0);
      md.atom_index = i;
      md.cdf_left_of_B = left;
      md.mass_at_B = mu.weight(i);
      md.eta = std::max(cdf - 0.5, 0.0);
      return md;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unreachable: total mass below 1/2");
}

LiftedMeasure eval_pvf(const PvfSpec& spec, const DiscreteMeasure& mu) {
  if (mu.empty()) throw Error(ErrorCode::EmptyInput, "PVF evaluated at an empty measure");
  return std::visit(
      [&](const auto& rule) -> LiftedMeasure {
        using Rule = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<Rule, GraphPvf>) {
          PointSet v(mu.dim(), mu.size());
          for (Eigen::Index i = 0; i < mu.size(); ++i) {
            Point vi = rule.v(Point(mu.atom(i)));
            if (vi.size() != mu.dim())
              throw Error(ErrorCode::DimMismatch, "graph field returned wrong dimension");
            v.col(i) = vi;
          }
          return make_lifted(mu.atoms(), v, mu.weights());
        } else if constexpr (std::is_same_v<Rule, ConstantFiberPvf>) {
          if (rule.omega.dim() != mu.dim())
            throw Error(ErrorCode::DimMismatch, "fiber dimension differs from measure dimension");
          return product_measure(mu, rule.omega);
        } else if constexpr (std::is_same_v<Rule, SplittingPvf>) {
          if (mu.dim() != 1)
            throw Error(ErrorCode::DimMismatch, "splitting particle is defined in one dimension");
          const MedianData md = median_data(mu);
          Disintegration parts{mu, {}};
          parts.fibers.reserve(static_cast<std::size_t>(mu.size()));
          for (Eigen::Index i = 0; i < mu.size(); ++i) parts.fibers.push_back(splitting_fiber(md, i));
          return recombine(parts);
        } else {
          LiftedMeasure lifted = rule.eval(mu);
          if (!approx_equal(base_of(lifted), mu))
            throw Error(ErrorCode::InvalidArgument,
                        "custom PVF '" + spec.name + "' does not project onto its argument");
          return lifted;
        }
      },
      spec.rule);
}

Eigen::MatrixXd barycentric_field(const PvfSpec& spec, const DiscreteMeasure& mu) {
  if (const auto* graph = std::get_if<GraphPvf>(&spec.rule)) {
    Eigen::MatrixXd w(mu.dim(), mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) w.col(i) = graph->v(Point(mu.atom(i)));
    return w;
  }
  const Disintegration parts = disintegrate(eval_pvf(spec, mu));
  if (parts.base.size() != mu.size())
    throw Error(ErrorCode::InvalidArgument, "PVF base does not match the measure");
  Eigen::MatrixXd w(mu.dim(), mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const auto& fiber = parts.fibers[static_cast<std::size_t>(i)];
    w.col(i) = fiber.atoms() * fiber.weights();
  }
  return w;
}

double sublinearity_bound(const PvfSpec& spec, std::span<const DiscreteMeasure> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "sublinearity bound needs samples");
  double c = 0.0;
  for (const auto& mu : samples) {
    const LiftedMeasure lifted = eval_pvf(spec, mu);
    const double speed = lifted.velocities().colwise().norm().maxCoeff();
    c = std::max(c, speed / (1.0 + support_radius(mu)));
  }
  return c;
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  const std::string where = "measure";
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + ": expected an object");
  const std::string kind = j.value("kind", std::string("atoms"));
  if (kind == "dirac") return dirac(point_from_json(require(j, "point", where), where + ".point"));
  if (kind == "uniform_1d") {
    const double a = require_number(j, "a", where);
    const double b = require_number(j, "b", where);
    const auto& m = require(j, "atoms", where);
    if (!m.is_number_integer() || m.get<int>() < 1)
      throw Error(ErrorCode::ConfigError, where + ": 'atoms' must be a positive integer");
    if (!(b > a)) throw Error(ErrorCode::ConfigError, where + ": uniform_1d needs a < b");
    return uniform_1d(a, b, m.get<int>());
  }
  if (kind == "atoms") {
    const auto& pts = require(j, "atoms", where);
    if (!pts.is_array() || pts.empty())
      throw Error(ErrorCode::ConfigError, where + ": 'atoms' must be a nonempty array");
    std::vector<Point> points;
    for (std::size_t i = 0; i < pts.size(); ++i)
      points.push_back(point_from_json(pts[i], where + ".atoms[" + std::to_string(i) + "]"));
    const Eigen::Index d = points.front().size();
    PointSet x(d, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != d)
        throw Error(ErrorCode::ConfigError, where + ": atoms differ in dimension");
      x.col(static_cast<Eigen::Index>(i)) = points[i];
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(x.cols());
    if (j.contains("weights")) {
      const auto& wj = j.at("weights");
      if (!wj.is_array() || wj.size() != points.size())
        throw Error(ErrorCode::ConfigError, where + ": 'weights' must match 'atoms' in length");
      for (std::size_t i = 0; i < wj.size(); ++i) {
        if (!wj[i].is_number()) throw Error(ErrorCode::ConfigError, where + ": non-numeric weight");
        w(static_cast<Eigen::Index>(i)) = wj[i].get<double>();
      }
    }
    return make_measure(x, w);
  }
  throw Error(ErrorCode::ConfigError, where + ": unknown kind '" + kind + "'");
}

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json atoms = nlohmann::json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu.dim() == 1) {
      atoms.push_back(mu.atom(i)(0));
    } else {
      nlohmann::json p = nlohmann::json::array();
      for (Eigen::Index c = 0; c < mu.dim(); ++c) p.push_back(mu.atom(i)(c));
      atoms.push_back(p);
    }
  }
  nlohmann::json w(std::vector<double>(mu.weights().data(), mu.weights().data() + mu.size()));
  return {{"kind", "atoms"}, {"atoms", atoms}, {"weights", w}};
}

PvfSpec pvf_from_json(const nlohmann::json& j) {
  const std::string where = "pvf";
  const auto& kind_json = require(j, "kind", where);
  if (!kind_json.is_string()) throw Error(ErrorCode::ConfigError, where + ": 'kind' must be a string");
  const std::string kind = kind_json.get<std::string>();
  if (kind == "graph") {
    const auto& field = require(j, "field", where);
    if (!field.is_string()) throw Error(ErrorCode::ConfigError, where + ": 'field' must be a string");
    FieldParams params;
    for (const auto& [key, value] : j.items())
      if (value.is_number()) params[key] = value.get<double>();
    return graph_pvf(field.get<std::string>(), params);
  }
  if (kind == "constant_fiber") {
    PvfSpec spec = constant_fiber_pvf(measure_from_json(require(j, "omega", where)));
    if (j.contains("name") && j.at("name").is_string()) spec.name = j.at("name").get<std::string>();
    return spec;
  }
  if (kind == "splitting") return splitting_pvf();
  throw Error(ErrorCode::ConfigError, where + ": unknown kind '" + kind + "'");
}

nlohmann::json pvf_to_json(const PvfSpec& spec) {
  return std::visit(
      [&](const auto& rule) -> nlohmann::json {
        using Rule = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<Rule, GraphPvf>) {
          if (rule.field.empty())
            throw Error(ErrorCode::InvalidArgument, "graph PVF without a registry field");
          nlohmann::json j{{"kind", "graph"}, {"field", rule.field}};
          for (const auto& [key, value] : rule.params) j[key] = value;
          return j;
        } else if constexpr (std::is_same_v<Rule, ConstantFiberPvf>) {
          return {{"kind", "constant_fiber"}, {"omega", measure_to_json(rule.omega)}};
        } else if constexpr (std::is_same_v<Rule, SplittingPvf>) {
          return {{"kind", "splitting"}};
        } else {
          throw Error(ErrorCode::InvalidArgument, "custom PVFs have no JSON form");
        }
      },
      spec.rule);
}

}  // namespace mdelab
