#include "mdelab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "mdelab/analysis.hpp"
#include "mdelab/superposition.hpp"

namespace mdelab {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys = {
    "schema", "name",   "description",  "pvf",          "initial",  "T",         "N",
    "convention", "scheme", "outputs", "coalesce_tol", "prune_floor", "sample_interp",
    "analysis", "reference", "seed"};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "scenario field '" + field + "': " + what);
}

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(key, "expected a number");
  return j.at(key).get<double>();
}

// Re-tags errors raised while building a measure or PVF from a fragment.
template <class Fn>
auto as_config(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(field, e.what());
  }
}

std::vector<SchemeKind> parse_schemes(const json& j) {
  std::vector<std::string> names;
  if (j.is_string()) {
    if (j.get<std::string>() == "all") return {SchemeKind::LAS, SchemeKind::Lagrangian, SchemeKind::MeanVelocity};
    names.push_back(j.get<std::string>());
  } else if (j.is_array() && !j.empty()) {
    for (const auto& e : j) {
      if (!e.is_string()) fail("scheme", "entries must be strings");
      names.push_back(e.get<std::string>());
    }
  } else {
    fail("scheme", "expected a scheme name, \"all\" or a list of names");
  }
  std::vector<SchemeKind> out;
  for (const auto& n : names) {
    const SchemeKind k = as_config("scheme", [&] { return scheme_from_string(n); });
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

std::vector<int> parse_ns(const json& j) {
  std::vector<int> ns;
  if (j.is_number_integer()) {
    ns.push_back(j.get<int>());
  } else if (j.is_array() && !j.empty()) {
    for (const auto& e : j) {
      if (!e.is_number_integer()) fail("N", "entries must be integers");
      ns.push_back(e.get<int>());
    }
  } else {
    fail("N", "expected an integer or a nonempty list of integers");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) fail("N", "values must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) fail("N", "values must be strictly increasing");
  }
  return ns;
}

AnalysisFlags parse_flags(const json& j) {
  if (!j.is_object()) fail("analysis", "expected an object");
  AnalysisFlags f;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_boolean()) fail("analysis." + key, "expected true or false");
    const bool on = value.get<bool>();
    if (key == "residual") f.residual = on;
    else if (key == "converge") f.converge = on;
    else if (key == "compare") f.compare = on;
    else if (key == "represent") f.represent = on;
    else fail("analysis." + key, "unknown flag");
  }
  return f;
}

void check_reference(const json& ref) {
  if (!ref.is_object()) fail("reference", "expected an object");
  const std::string kind = ref.value("kind", "");
  if (kind == "run") {
    if (!ref.contains("scheme") || !ref.at("scheme").is_string()) fail("reference.scheme", "expected a string");
    as_config("reference.scheme", [&] { return scheme_from_string(ref.at("scheme").get<std::string>()); });
    if (!ref.contains("N") || !ref.at("N").is_number_integer() || ref.at("N").get<int>() < 1)
      fail("reference.N", "expected a positive integer");
  } else if (kind == "stationary") {
    if (!ref.contains("measure")) fail("reference.measure", "missing");
    as_config("reference.measure", [&] { return measure_from_json(ref.at("measure")); });
  } else {
    fail("reference.kind", "expected \"run\" or \"stationary\"");
  }
}

std::string file_tag(SchemeKind s, int n) { return to_string(s) + "_N" + std::to_string(n); }

}  // namespace

Scenario scenario_from_json(const json& input) {
  if (!input.is_object()) throw Error(ErrorCode::ConfigError, "scenario: expected a JSON object");
  const json& j = input.contains("config") && input.contains("artifacts") ? input.at("config") : input;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "manifest: 'config' is not an object");

  for (const auto& [key, value] : j.items())
    if (!kTopLevelKeys.count(key)) fail(key, "unknown field");
  if (!j.contains("schema") || j.at("schema") != kScenarioSchema)
    fail("schema", std::string("expected \"") + kScenarioSchema + "\"");

  Scenario s;
  if (!j.contains("name") || !j.at("name").is_string() || j.at("name").get<std::string>().empty())
    fail("name", "expected a nonempty string");
  s.name = j.at("name").get<std::string>();
  if (j.contains("description")) {
    if (!j.at("description").is_string()) fail("description", "expected a string");
    s.description = j.at("description").get<std::string>();
  }

  if (!j.contains("pvf")) fail("pvf", "missing");
  s.pvf = j.at("pvf");
  as_config("pvf", [&] { return pvf_from_json(s.pvf); });
  if (!j.contains("initial")) fail("initial", "missing");
  s.initial = j.at("initial");
  as_config("initial", [&] { return measure_from_json(s.initial); });

  if (!j.contains("T")) fail("T", "missing");
  s.T = number_field(j, "T", 0.0);
  if (!(s.T > 0.0)) fail("T", "must be > 0");
  if (!j.contains("N")) fail("N", "missing");
  s.Ns = parse_ns(j.at("N"));

  if (j.contains("convention")) {
    if (!j.at("convention").is_string()) fail("convention", "expected a string");
    s.convention = as_config("convention",
                             [&] { return convention_from_string(j.at("convention").get<std::string>()); });
  }
  for (const int n : s.Ns) as_config("N", [&] { return make_grid(s.convention, n, s.T); });

  s.schemes = parse_schemes(j.value("scheme", json("all")));

  if (j.contains("outputs")) {
    if (!j.at("outputs").is_string()) fail("outputs", "expected a directory path");
    s.outputs = j.at("outputs").get<std::string>();
  } else {
    s.outputs = "out/" + s.name;
  }

  s.coalesce_tol = number_field(j, "coalesce_tol", s.coalesce_tol);
  s.prune_floor = number_field(j, "prune_floor", s.prune_floor);
  if (!(s.coalesce_tol >= 0.0)) fail("coalesce_tol", "must be >= 0");
  if (!(s.prune_floor >= 0.0 && s.prune_floor <= 1e-6)) fail("prune_floor", "must lie in [0, 1e-6]");
  if (j.contains("sample_interp")) {
    if (!j.at("sample_interp").is_number_integer() || j.at("sample_interp").get<int>() < 0)
      fail("sample_interp", "expected a non-negative integer");
    s.sample_interp = j.at("sample_interp").get<int>();
  }
  if (j.contains("analysis")) s.analysis = parse_flags(j.at("analysis"));
  if (j.contains("reference") && !j.at("reference").is_null()) {
    s.reference = j.at("reference");
    check_reference(s.reference);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed", "expected an integer");
    s.seed = j.at("seed").get<long long>();
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json schemes = json::array();
  for (const auto k : s.schemes) schemes.push_back(to_string(k));
  json j{{"schema", kScenarioSchema},
         {"name", s.name},
         {"description", s.description},
         {"pvf", s.pvf},
         {"initial", s.initial},
         {"T", s.T},
         {"N", s.Ns},
         {"convention", to_string(s.convention)},
         {"scheme", schemes},
         {"outputs", s.outputs},
         {"coalesce_tol", s.coalesce_tol},
         {"prune_floor", s.prune_floor},
         {"sample_interp", s.sample_interp},
         {"analysis",
          {{"residual", s.analysis.residual},
           {"converge", s.analysis.converge},
           {"compare", s.analysis.compare},
           {"represent", s.analysis.represent}}},
         {"seed", s.seed}};
  if (!s.reference.is_null()) j["reference"] = s.reference;
  return j;
}

Scenario parse_scenario(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw Error(ErrorCode::ConfigError, "scenario: empty input");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + at, '\n'));
    const std::size_t nl = text.rfind('\n', at == 0 ? 0 : at - 1);
    const std::size_t column = nl == std::string::npos ? at + 1 : at - nl;
    throw Error(ErrorCode::ConfigError, "scenario: JSON syntax error at line " + std::to_string(line) +
                                            ", column " + std::to_string(column) + ": " + e.what());
  }
  return scenario_from_json(j);
}

Scenario load_scenario_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.detail());
  }
}

std::vector<Scenario> builtin_scenarios() {
  static const char* const kSources[] = {
      R"json({"schema":"mde-lab/1","name":"splitting-dirac",
          "description":"splitting particle from a Dirac at 0; mean-velocity stays put",
          "pvf":{"kind":"splitting"},"initial":{"kind":"dirac","point":[0]},
          "T":1,"N":[4,8,16],"scheme":"all"})json",
      R"json({"schema":"mde-lab/1","name":"splitting-uniform",
          "description":"splitting particle from the uniform law on [0,1] (256 atoms)",
          "pvf":{"kind":"splitting"},"initial":{"kind":"uniform_1d","a":0,"b":1,"atoms":256},
          "T":1,"N":[16,64],"scheme":"all"})json",
      R"json({"schema":"mde-lab/1","name":"binomial",
          "description":"velocity law (d_-1 + d_1)/2 everywhere from a Dirac at 0",
          "pvf":{"kind":"constant_fiber","omega":{"kind":"atoms","atoms":[-1,1],"weights":[0.5,0.5]}},
          "initial":{"kind":"dirac","point":[0]},"T":1,"N":[4,8,16],"scheme":"all"})json",
      R"json({"schema":"mde-lab/1","name":"uniform-fiber",
          "description":"uniform velocity law on [-1,1] (64-point quantile grid) from a Dirac at 0",
          "pvf":{"kind":"constant_fiber","omega":{"kind":"uniform_1d","a":-1,"b":1,"atoms":64}},
          "initial":{"kind":"dirac","point":[0]},"T":1,"N":[2,4,8],"scheme":"all"})json",
      R"json({"schema":"mde-lab/1","name":"peano",
          "description":"v = 2 sqrt|x| from -1 on the unit-step grid (dt = dv = 1/N)",
          "pvf":{"kind":"graph","field":"peano"},"initial":{"kind":"dirac","point":[-1]},
          "T":3,"N":[1,2,3],"convention":"unit_step","scheme":"las"})json",
  };
  std::vector<Scenario> out;
  for (const char* src : kSources) out.push_back(parse_scenario(src));
  return out;
}

ScenarioRegistry::ScenarioRegistry() {
  for (auto& s : builtin_scenarios()) add(std::move(s));
}

void ScenarioRegistry::add(Scenario s) {
  if (scenarios_.count(s.name))
    throw Error(ErrorCode::ConfigError, "scenario name '" + s.name + "' is already registered");
  auto name = s.name;
  scenarios_.emplace(std::move(name), std::move(s));
}

void ScenarioRegistry::add_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    Scenario s = load_scenario_file(f);
    if (contains(s.name))
      throw Error(ErrorCode::ConfigError,
                  f.string() + ": scenario name '" + s.name + "' conflicts with an existing scenario");
    add(std::move(s));
  }
}

bool ScenarioRegistry::contains(const std::string& name) const { return scenarios_.count(name) > 0; }

const Scenario& ScenarioRegistry::get(const std::string& name) const {
  const auto it = scenarios_.find(name);
  if (it == scenarios_.end()) throw Error(ErrorCode::ConfigError, "no scenario named '" + name + "'");
  return it->second;
}

std::vector<ScenarioInfo> ScenarioRegistry::list() const {
  std::vector<ScenarioInfo> out;
  for (const auto& [name, s] : scenarios_) out.push_back({name, s.description});
  return out;
}

RunResult run_scenario(const Scenario& s) {
  const auto started = std::chrono::steady_clock::now();
  const PvfSpec spec = as_config("pvf", [&] { return pvf_from_json(s.pvf); });
  const DiscreteMeasure mu0 = as_config("initial", [&] { return measure_from_json(s.initial); });
  if (s.schemes.empty() || s.Ns.empty()) throw Error(ErrorCode::ConfigError, "scenario has nothing to run");

  std::vector<SchemeKind> to_run = s.schemes;
  if (s.analysis.compare)
    for (const auto k : {SchemeKind::LAS, SchemeKind::Lagrangian, SchemeKind::MeanVelocity})
      if (std::find(to_run.begin(), to_run.end(), k) == to_run.end()) to_run.push_back(k);

  auto config_for = [&](SchemeKind k, int n) {
    SchemeConfig cfg;
    cfg.scheme = k;
    cfg.grid = make_grid(s.convention, n, s.T);
    cfg.coalesce_tol = s.coalesce_tol;
    cfg.prune_floor = s.prune_floor;
    return cfg;
  };

  std::map<std::pair<SchemeKind, int>, std::future<MeasurePath>> jobs;
  for (const auto k : to_run)
    for (const int n : s.Ns) {
      const SchemeConfig cfg = config_for(k, n);
      jobs.emplace(std::make_pair(k, n), std::async(std::launch::async, [&spec, &mu0, cfg] {
                     return run_scheme(spec, mu0, cfg);
                   }));
    }
  std::map<std::pair<SchemeKind, int>, MeasurePath> paths;
  for (auto& [key, job] : jobs) paths.emplace(key, job.get());

  // Artifacts are rendered in memory and written only once everything succeeded.
  std::vector<std::pair<std::string, std::string>> files;
  json runs = json::array();
  json notes = json::array();

  for (const auto k : s.schemes)
    for (const int n : s.Ns) {
      const MeasurePath& path = paths.at({k, n});
      const std::string tag = file_tag(k, n);
      std::ostringstream csv;
      write_path_csv(csv, path, s.sample_interp);
      files.emplace_back("path_" + tag + ".csv", csv.str());
      json summary = path_summary_json(path, config_for(k, n));
      summary["file"] = "path_" + tag + ".csv";
      runs.push_back(std::move(summary));

      if (s.analysis.residual) {
        const auto family = default_family(path);
        const ResidualReport report = residual(path, spec, family);
        std::ostringstream rc;
        write_residual_csv(rc, report);
        files.emplace_back("residual_" + tag + ".csv", rc.str());
        files.emplace_back("residual_" + tag + ".json", residual_to_json(report).dump(2) + "\n");
      }
      if (s.analysis.represent) {
        try {
          const TrajectoryEnsemble eta = build_representation(path);
          files.emplace_back("trajectories_" + tag + ".json", trajectories_to_json(eta).dump() + "\n");
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SupportBlowup && e.code() != ErrorCode::InvalidArgument) throw;
          notes.push_back("representation skipped for " + tag + ": " + e.what());
        }
      }
    }

  if (s.analysis.converge) {
    Reference reference;
    if (!s.reference.is_null()) {
      if (s.reference.at("kind") == "run") {
        const SchemeKind rk = scheme_from_string(s.reference.at("scheme").get<std::string>());
        reference = run_scheme(spec, mu0, config_for(rk, s.reference.at("N").get<int>()));
      } else {
        const DiscreteMeasure fixed = measure_from_json(s.reference.at("measure"));
        reference = ClosedForm([fixed](double) { return fixed; });
      }
    }
    for (const auto k : s.schemes) {
      if (s.Ns.size() < 2 && std::holds_alternative<std::monostate>(reference)) {
        notes.push_back("convergence for " + to_string(k) + " needs two resolutions or a reference");
        continue;
      }
      std::vector<MeasurePath> series;
      for (const int n : s.Ns) series.push_back(paths.at({k, n}));
      const ConvergenceTable table = convergence_table(series, reference);
      std::ostringstream csv, dat;
      write_convergence_csv(csv, table);
      write_convergence_dat(dat, table);
      files.emplace_back("converge_" + to_string(k) + ".csv", csv.str());
      files.emplace_back("converge_" + to_string(k) + ".dat", dat.str());
      files.emplace_back("converge_" + to_string(k) + ".json", convergence_to_json(table).dump(2) + "\n");
    }
  }

  if (s.analysis.compare) {
    for (const int n : s.Ns) {
      const std::vector<MeasurePath> trio = {paths.at({SchemeKind::LAS, n}),
                                             paths.at({SchemeKind::Lagrangian, n}),
                                             paths.at({SchemeKind::MeanVelocity, n})};
      const CompareTable table = compare_paths(trio);
      std::ostringstream csv;
      write_compare_csv(csv, table);
      files.emplace_back("compare_N" + std::to_string(n) + ".csv", csv.str());
      files.emplace_back("compare_N" + std::to_string(n) + ".json", compare_to_json(table).dump(2) + "\n");
    }
  }

  RunResult result;
  result.directory = s.outputs;
  for (const auto& f : files) result.artifacts.push_back(f.first);
  result.artifacts.push_back("manifest.json");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.manifest = {{"schema", kScenarioSchema}, {"config", scenario_to_json(s)},
                     {"wall_time_s", wall},       {"runs", runs},
                     {"artifacts", result.artifacts}, {"notes", notes}};

  std::error_code ec;
  std::filesystem::create_directories(result.directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + result.directory.string() + ": " + ec.message());
  files.emplace_back("manifest.json", result.manifest.dump(2) + "\n");
  for (const auto& [name, content] : files) {
    std::ofstream out(result.directory / name, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (result.directory / name).string());
  }
  return result;
}

}  // namespace mdelab
