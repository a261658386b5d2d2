#include <doctest.h>

#include <cstdlib>

#include "fockdirichlet/scenario.hpp"

using namespace fockdirichlet;

namespace {

const char* kVerify = R"({
  "schema_version": 1,
  "name": "t_verify",
  "experiment": "verify",
  "seed": 3,
  "model": {"kind": "MeanField", "lattice": {"extent": [1], "n_max": 3}},
  "kernel": {"n": 1}
})";

SchemaError schema_error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const SchemaError& e) {
    return e;
  }
  FAIL("expected a schema error");
  return SchemaError("", 0, "");
}

}  // namespace

TEST_CASE("parsing a valid config") {
  const Scenario sc = parse_scenario(kVerify);
  CHECK(sc.name == "t_verify");
  CHECK(sc.experiment == "verify");
  CHECK(sc.seed == 3);
  CHECK(sc.model.kind == ModelKind::mean_field);
  CHECK(sc.model.lattice.n_max == 3);
}

TEST_CASE("schema violations name the field and line") {
  std::string unknown = kVerify;
  unknown.replace(unknown.find("\"n_max\""), 7, "\"nmax\"");
  const SchemaError e = schema_error_of(unknown);
  CHECK(e.field == "model.lattice.nmax");
  CHECK(e.line == 6);
  CHECK(std::string(e.what()).find("line 6") != std::string::npos);

  const SchemaError bad_json = schema_error_of("{\n  \"schema_version\": 1,\n  \"name\": \n}");
  CHECK(bad_json.line == 4);

  std::string version = kVerify;
  version.replace(version.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  CHECK(schema_error_of(version).field == "schema_version");

  std::string experiment = kVerify;
  experiment.replace(experiment.find("\"verify\""), 8, "\"sweep\"");
  CHECK(schema_error_of(experiment).field == "experiment");

  std::string model = kVerify;
  model.replace(model.find("MeanField"), 9, "Nonsense");
  CHECK_THROWS_AS(parse_scenario(model), SchemaError);

  const SchemaError missing = schema_error_of(R"({"schema_version": 1, "name": "x", "experiment": "gap"})");
  CHECK(missing.field == "model");

  const SchemaError param = schema_error_of(
      R"({"schema_version": 1, "name": "x", "experiment": "decay", "params": {"rings": 3}})");
  CHECK(param.field == "params.rings");

  std::string wrong_type = kVerify;
  wrong_type.replace(wrong_type.find("\"n_max\": 3"), 10, "\"n_max\": \"3\"");
  CHECK(schema_error_of(wrong_type).field == "model.lattice.n_max");
}

TEST_CASE("reports are deterministic and carry their assertions") {
  const Scenario sc = parse_scenario(kVerify);
  const ScenarioResult a = run_scenario(sc), b = run_scenario(sc);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(csv_text(a) == csv_text(b));
  CHECK(a.passed());
  CHECK(a.report["passed"].get<bool>());
  CHECK(!a.report.contains("generated_at"));
  CHECK(a.report["assertions"].size() == a.assertions.size());
  RunOptions o;
  o.seed = 99;
  CHECK(run_scenario(sc, o).report["seed"].get<std::uint64_t>() == 99);
}

TEST_CASE("budget refusal") {
  const Scenario sc = parse_scenario(R"({
    "schema_version": 1, "name": "big", "experiment": "gap",
    "model": {"kind": "ZPower", "lattice": {"extent": [4], "n_max": 3}}
  })");
  RunOptions o;
  o.budget_mb = 1.0;
  CHECK_THROWS_AS(run_scenario(sc, o), BudgetError);
}

TEST_CASE("n_max override is validated") {
  const Scenario sc = parse_scenario(kVerify);
  RunOptions o;
  o.nmax_override = 0;
  CHECK_THROWS_AS(run_scenario(sc, o), SchemaError);
}

TEST_CASE("number and CSV formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(-2.0) == "-2");
  ScenarioResult r;
  r.csv_header = {"a", "b"};
  r.csv_rows = {{"x,y", "say \"hi\""}};
  CHECK(csv_text(r) == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
}

TEST_CASE("budget resolution") {
  CHECK(resolve_budget(12.0) == 12.0);
  setenv("FOCKDIRICHLET_BUDGET_MB", "256", 1);
  CHECK(resolve_budget(std::nullopt) == 256.0);
  setenv("FOCKDIRICHLET_BUDGET_MB", "lots", 1);
  CHECK_THROWS_AS(resolve_budget(std::nullopt), SchemaError);
  unsetenv("FOCKDIRICHLET_BUDGET_MB");
  CHECK(resolve_budget(std::nullopt) == 0.0);
}
