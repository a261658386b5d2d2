#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fockdirichlet/scenario.hpp"

namespace fs = std::filesystem;
using namespace fockdirichlet;

namespace {

struct Flags {
  std::string config, manifest, out = "reports";
  std::optional<std::uint64_t> seed;
  std::optional<int> nmax;
  std::optional<double> budget;
  int jobs = 1;
};

int run_one(const std::string& path, const Flags& f) {
  try {
    const Scenario sc = load_scenario(path);
    RunOptions o;
    o.seed = f.seed;
    o.nmax_override = f.nmax;
    o.budget_mb = resolve_budget(f.budget);
    const ScenarioResult r = run_scenario(sc, o);
    write_outputs(sc, r, f.out);
    for (const auto& a : r.assertions)
      if (!a.passed)
        std::cerr << sc.name << ": FAIL " << a.name << " (" << format_number(a.value) << " " << a.relation << " "
                  << format_number(a.tolerance) << ")\n";
    std::cout << sc.name << ": " << (r.passed() ? "ok" : "assertion failure") << " -> "
              << (fs::path(f.out) / (sc.name + ".json")).string() << "\n";
    return r.passed() ? kExitOk : kExitAssertion;
  } catch (const SchemaError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kExitSchema;
  } catch (const BudgetError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kExitAssertion;
  }
}

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", 0, "cannot read manifest " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", 0, std::string("malformed manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("scenarios") || !j["scenarios"].is_array() || j.size() != 1)
    throw SchemaError("scenarios", 0, "manifest must be {\"scenarios\": [config paths]}");
  std::vector<std::string> out;
  const fs::path base = fs::path(path).parent_path();
  for (const auto& s : j["scenarios"]) {
    if (!s.is_string()) throw SchemaError("scenarios", 0, "entries must be strings");
    out.push_back((base / s.get<std::string>()).string());
  }
  return out;
}

std::vector<std::string> child_args(const std::string& config, const Flags& f) {
  std::vector<std::string> a{"fockdirichlet", "--config", config, "--out", f.out};
  if (f.seed) a.insert(a.end(), {"--seed", std::to_string(*f.seed)});
  if (f.nmax) a.insert(a.end(), {"--nmax-override", std::to_string(*f.nmax)});
  if (f.budget) a.insert(a.end(), {"--budget-mb", format_number(*f.budget)});
  return a;
}

int run_manifest(const Flags& f) {
  std::vector<std::string> configs;
  try {
    configs = read_manifest(f.manifest);
  } catch (const SchemaError& e) {
    std::cerr << f.manifest << ": " << e.what() << "\n";
    return kExitSchema;
  }
  int worst = kExitOk;
  if (f.jobs <= 1) {
    for (const auto& c : configs) worst = std::max(worst, run_one(c, f));
    return worst;
  }
  // one worker process per scenario, at most `jobs` alive
  std::map<pid_t, std::string> running;
  size_t next = 0;
  auto reap = [&]() {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid <= 0) return;
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : kExitAssertion;
    worst = std::max(worst, code);
    running.erase(pid);
  };
  while (next < configs.size() || !running.empty()) {
    while (next < configs.size() && static_cast<int>(running.size()) < f.jobs) {
      const auto args = child_args(configs[next], f);
      const pid_t pid = ::fork();
      if (pid < 0) {
        std::cerr << "fork failed; running " << configs[next] << " in-process\n";
        worst = std::max(worst, run_one(configs[next++], f));
        continue;
      }
      if (pid == 0) {
        std::vector<char*> argv;
        for (const auto& s : args) argv.push_back(const_cast<char*>(s.c_str()));
        argv.push_back(nullptr);
        ::execv("/proc/self/exe", argv.data());
        std::_Exit(run_one(args[2], f));
      }
      running.emplace(pid, configs[next++]);
    }
    if (!running.empty()) reap();
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet forms and Markov generators on truncated bosonic Fock spaces"};
  Flags f;
  auto* config = app.add_option("--config", f.config, "scenario config (JSON)")->check(CLI::ExistingFile);
  auto* manifest = app.add_option("--manifest", f.manifest, "manifest listing scenario configs")->check(CLI::ExistingFile);
  config->excludes(manifest);
  app.add_option("--out", f.out, "output directory")->capture_default_str();
  app.add_option("--seed", f.seed, "override the config seed");
  app.add_option("--nmax-override", f.nmax, "override the lattice occupation cutoff")->check(CLI::PositiveNumber);
  app.add_option("--budget-mb", f.budget, "memory budget in MB (default: $FOCKDIRICHLET_BUDGET_MB, else none)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", f.jobs, "worker processes for --manifest")->check(CLI::PositiveNumber)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitSchema;
  }
  if (f.config.empty() && f.manifest.empty()) {
    std::cerr << "one of --config or --manifest is required\n" << app.help();
    return kExitSchema;
  }
  return f.manifest.empty() ? run_one(f.config, f) : run_manifest(f);
}
