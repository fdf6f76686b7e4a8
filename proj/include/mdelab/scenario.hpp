#pragma once

// JSON scenarios ("schema": "mde-lab/1") and the runner that turns them into
// CSV/JSON artifacts.
//
//   {
//     "schema": "mde-lab/1",
//     "name": "binomial",
//     "pvf": {"kind": "constant_fiber", "omega": {...}},
//     "initial": {"kind": "dirac", "point": [0]},
//     "T": 1, "N": [4, 8], "convention": "standard",
//     "scheme": "all",
//     "outputs": "out/binomial",
//     "analysis": {"residual": false, "converge": true, "compare": true, "represent": false},
//     "reference": {"kind": "run", "scheme": "lagrangian", "N": 64}
//   }

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdelab/schemes.hpp"

namespace mdelab {

inline constexpr const char* kScenarioSchema = "mde-lab/1";

struct AnalysisFlags {
  bool residual = false;
  bool converge = false;
  bool compare = false;
  bool represent = false;
};

struct Scenario {
  std::string name;
  std::string description;
  nlohmann::json pvf;
  nlohmann::json initial;
  double T = 1.0;
  std::vector<int> Ns;
  GridConvention convention = GridConvention::Standard;
  std::vector<SchemeKind> schemes;
  std::string outputs = "out";
  double coalesce_tol = 1e-12;
  double prune_floor = 0.0;
  /// Interpolated samples written between consecutive nodes.
  int sample_interp = 0;
  AnalysisFlags analysis;
  /// {"kind":"run","scheme":..,"N":..} or {"kind":"stationary","measure":..}.
  nlohmann::json reference;
  /// Reserved; no randomness is used.
  long long seed = 0;
};

/// Throws ConfigError naming the offending field. Accepts a run manifest
/// too, in which case its echoed config is used.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
/// Parses text; syntax errors become ConfigError with line and column.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::filesystem::path& file);

struct ScenarioInfo {
  std::string name;
  std::string description;
};

/// Built-in scenarios plus user-registered ones.
class ScenarioRegistry {
 public:
  ScenarioRegistry();

  /// Throws ConfigError when the name is already taken.
  void add(Scenario s);
  /// Registers every *.json file of `dir` (sorted by file name).
  void add_directory(const std::filesystem::path& dir);
  bool contains(const std::string& name) const;
  const Scenario& get(const std::string& name) const;
  std::vector<ScenarioInfo> list() const;

 private:
  std::map<std::string, Scenario> scenarios_;
};

/// splitting-dirac, splitting-uniform, binomial, uniform-fiber, peano.
std::vector<Scenario> builtin_scenarios();

struct RunResult {
  std::filesystem::path directory;
  std::vector<std::string> artifacts;
  nlohmann::json manifest;
};

/// Runs every (scheme, N) pair concurrently, computes the requested
/// analyses and only then writes the artifacts, so a failing scenario leaves
/// nothing behind. Throws ConfigError or IoError.
RunResult run_scenario(const Scenario& s);

}  // namespace mdelab
