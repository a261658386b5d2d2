#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockdirichlet/analysis.hpp"

namespace fockdirichlet {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitAssertion = 1, kExitSchema = 2, kExitBudget = 3 };

// Config violations carry the offending field path and, when found, its line.
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& field, int line, const std::string& message);
  std::string field;
  int line = 0;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  std::string experiment;
  std::uint64_t seed = 0;
  ModelSpec model;
  AdmissibleKernel kernel;
  Json params = Json::object();
  Json source;  // the parsed config, echoed into the report
};

const std::vector<std::string>& experiment_names();

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> nmax_override;
  double budget_mb = 0.0;  // 0: unlimited
};

struct Assertion {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", "in"
  bool passed = false;
};

struct ScenarioResult {
  Json report;  // without the timestamp
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  std::vector<Assertion> assertions;
  bool passed() const;
};

ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& opts = {});

// Writes <dir>/<name>.json (with "generated_at") and, when there are rows, <dir>/<name>.csv.
void write_outputs(const Scenario& scenario, const ScenarioResult& result, const std::string& dir);

std::string format_number(double v);
std::string csv_text(const ScenarioResult& result);

// Budget from the flag, else FOCKDIRICHLET_BUDGET_MB, else 0.
double resolve_budget(std::optional<double> flag);

}  // namespace fockdirichlet
