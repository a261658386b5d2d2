#include "fockdirichlet/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fockdirichlet/bogolubov.hpp"

namespace fockdirichlet {

namespace {

int line_of(const std::string& text, const std::string& key) {
  if (text.empty() || key.empty()) return 0;
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string what_of(const std::string& field, int line, const std::string& message) {
  std::string out = "config error";
  if (line > 0) out += " at line " + std::to_string(line);
  if (!field.empty()) out += " (field '" + field + "')";
  return out + ": " + message;
}

// Typed access to one config object with unknown-key rejection.
class Fields {
 public:
  Fields(const Json& j, std::string path, const std::string& text, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)), text_(text) {
    if (!j_.is_object()) fail(path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) fail(join(it.key()), "unknown field");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const { return j_.at(key); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    const auto dot = field.find_last_of('.');
    throw SchemaError(field, line_of(text_, dot == std::string::npos ? field : field.substr(dot + 1)), message);
  }

  double number(const std::string& key, double def) const {
    if (!has(key)) return def;
    if (!raw(key).is_number()) fail(join(key), "expected a number");
    return raw(key).get<double>();
  }
  int integer(const std::string& key, int def) const {
    if (!has(key)) return def;
    if (!raw(key).is_number_integer()) fail(join(key), "expected an integer");
    return raw(key).get<int>();
  }
  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!raw(key).is_boolean()) fail(join(key), "expected true or false");
    return raw(key).get<bool>();
  }
  std::string string(const std::string& key, const std::string& def, bool required = false) const {
    if (!has(key)) {
      if (required) fail(join(key), "required field missing");
      return def;
    }
    if (!raw(key).is_string()) fail(join(key), "expected a string");
    return raw(key).get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) const {
    if (!has(key)) return def;
    if (!raw(key).is_array()) fail(join(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : raw(key)) {
      if (!v.is_number()) fail(join(key), "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  std::vector<int> integers(const std::string& key, std::vector<int> def) const {
    if (!has(key)) return def;
    if (!raw(key).is_array()) fail(join(key), "expected an array of integers");
    std::vector<int> out;
    for (const auto& v : raw(key)) {
      if (!v.is_number_integer()) fail(join(key), "expected an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  cplx complex_value(const Json& v, const std::string& field) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    fail(field, "expected a number or [re, im]");
  }
  // A number, [re, im], or a list of either.
  std::vector<cplx> complexes(const std::string& key, std::vector<cplx> def) const {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {complex_value(v, join(key))};
    if (!v.is_array()) fail(join(key), "expected a number, [re, im] or a list of them");
    std::vector<cplx> out;
    for (const auto& e : v) out.push_back(complex_value(e, join(key)));
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
  std::string text_;
};

LatticeConfig parse_lattice(const Json& j, const std::string& text) {
  Fields f(j, "model.lattice", text, {"dims", "extent", "geometry", "neighbor_radius", "n_max", "sites"});
  LatticeConfig lat;
  lat.dims = f.integer("dims", 1);
  lat.extent = f.integers("extent", {1});
  try {
    lat.geometry = parse_geometry(f.string("geometry", "open_chain"));
  } catch (const std::invalid_argument& e) {
    f.fail("model.lattice.geometry", e.what());
  }
  lat.neighbor_radius = f.integer("neighbor_radius", 1);
  lat.n_max = f.integer("n_max", 1);
  if (f.has("sites")) {
    if (!f.raw("sites").is_array()) f.fail("model.lattice.sites", "expected a list of coordinate lists");
    for (const auto& s : f.raw("sites")) {
      if (!s.is_array()) f.fail("model.lattice.sites", "expected a list of coordinate lists");
      std::vector<int> c;
      for (const auto& v : s) {
        if (!v.is_number_integer()) f.fail("model.lattice.sites", "coordinates must be integers");
        c.push_back(v.get<int>());
      }
      lat.explicit_sites.push_back(c);
    }
  }
  return lat;
}

ModelSpec parse_model(const Json& j, const std::string& text) {
  Fields f(j, "model", text,
           {"kind", "beta", "nu", "mu", "n", "m", "epsilon", "kappa", "xi", "selfadjoint", "ergodic_augment",
            "ordered_pairs", "scale", "I", "J", "lattice"});
  ModelSpec s;
  try {
    s.kind = parse_model_kind(f.string("kind", "", true));
  } catch (const std::invalid_argument& e) {
    f.fail("model.kind", e.what());
  }
  s.beta = f.number("beta", s.beta);
  s.nu = f.number("nu", s.nu);
  s.mu = f.number("mu", s.mu);
  s.n = f.integer("n", s.n);
  s.m = f.integer("m", s.m);
  s.epsilon = f.number("epsilon", s.epsilon);
  s.kappa = f.complexes("kappa", s.kappa);
  s.xi = f.complexes("xi", s.xi);
  s.selfadjoint = f.boolean("selfadjoint", s.selfadjoint);
  s.ergodic_augment = f.boolean("ergodic_augment", s.ergodic_augment);
  if (f.has("ordered_pairs")) s.ordered_pairs = f.boolean("ordered_pairs", false);
  s.scale = f.number("scale", s.scale);
  s.I = f.integers("I", s.I);
  s.J = f.integers("J", s.J);
  if (!f.has("lattice")) f.fail("model.lattice", "required field missing");
  s.lattice = parse_lattice(f.raw("lattice"), text);
  return s;
}

const std::map<std::string, std::set<std::string>>& param_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"verify", {"pairs", "compare_paths", "path_tolerance"}},
      {"gap", {"k", "dense_limit", "lanczos_steps"}},
      {"scaling", {"test", "sizes", "pad", "local"}},
      {"heat", {"times", "kappa0", "sign", "clean_margin"}},
      {"decay", {"ring", "points"}},
      {"lieb-robinson", {"sites", "n_max", "lambda", "epsilon", "site", "times"}},
      {"bogolubov", {"rapidity", "second_rapidity", "n_max", "s", "n_max_list", "pairs", "minkowski_tau", "minkowski_x",
                     "minkowski_n_max"}},
  };
  return keys;
}

bool needs_model(const std::string& experiment) {
  return experiment == "verify" || experiment == "gap" || experiment == "scaling" || experiment == "heat";
}

Json complex_json(cplx c) {
  if (c.imag() == 0.0) return c.real();
  return Json::array({c.real(), c.imag()});
}

Json model_json(const ModelSpec& s) {
  Json kappa = Json::array(), xi = Json::array();
  for (cplx c : s.kappa) kappa.push_back(complex_json(c));
  for (cplx c : s.xi) xi.push_back(complex_json(c));
  Json j{{"kind", model_kind_name(s.kind)},
         {"beta", s.beta},
         {"nu", s.nu},
         {"mu", s.mu},
         {"n", s.n},
         {"m", s.m},
         {"epsilon", s.epsilon},
         {"kappa", kappa},
         {"xi", xi},
         {"selfadjoint", s.selfadjoint},
         {"ergodic_augment", s.ergodic_augment},
         {"ordered_pairs", uses_ordered_pairs(s)},
         {"scale", s.scale},
         {"I", s.I},
         {"J", s.J}};
  j["lattice"] = Json{{"dims", s.lattice.dims},
                      {"extent", s.lattice.extent},
                      {"geometry", geometry_name(s.lattice.geometry)},
                      {"neighbor_radius", s.lattice.neighbor_radius},
                      {"n_max", s.lattice.n_max},
                      {"sites", s.lattice.num_sites()},
                      {"dimension", s.lattice.dimension()}};
  return j;
}

class Checks {
 public:
  void le(const std::string& name, double value, double tol) { add({name, value, tol, "<=", value <= tol}); }
  void ge(const std::string& name, double value, double tol) { add({name, value, tol, ">=", value >= tol}); }
  void within(const std::string& name, double value, double target, double tol) {
    add({name, value, tol, "within " + format_number(target) + " +/-", std::abs(value - target) <= tol});
  }
  void flag(const std::string& name, bool ok) { add({name, ok ? 1.0 : 0.0, 1.0, "==", ok}); }
  std::vector<Assertion> list;

 private:
  void add(Assertion a) { list.push_back(std::move(a)); }
};

Json vec_json(const std::vector<double>& v) { return Json(v); }

double estimate_superop_mb(const ModelSpec& s) {
  const double D = std::pow(static_cast<double>(s.lattice.local_dim()), s.lattice.num_sites());
  return 16.0 * D * D * 48.0 / 1048576.0;
}

void check_budget(double need_mb, double budget_mb, const std::string& what) {
  if (budget_mb > 0.0 && need_mb > budget_mb)
    throw BudgetError("memory budget refusal: " + what + " needs about " + format_number(std::round(need_mb)) +
                      " MB, budget is " + format_number(budget_mb) + " MB");
}

Superoperator assemble_any(const BuiltModel& model, const KmsMetric& metric, const AdmissibleKernel& kernel,
                           std::string* path) {
  try {
    *path = "eigen";
    return assemble_generator(model.directions, metric, kernel, AssemblyPath::eigen);
  } catch (const std::runtime_error&) {
    *path = "quadrature";
    return assemble_generator(model.directions, metric, kernel, AssemblyPath::quadrature);
  }
}

// ---- experiments -------------------------------------------------------------------------

void run_verify(const Scenario& sc, const ModelSpec& spec, std::uint64_t seed, double budget, ScenarioResult& out,
                Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("verify"));
  const int pairs = p.integer("pairs", 50);
  check_budget(estimate_superop_mb(spec) * 2.0, budget, "generator assembly");
  const AlgebraReport alg = verify_algebra(spec);
  Json checks = Json::array();
  out.csv_header = {"check", "residual", "tolerance", "passed", "informational"};
  for (const auto& c : alg.checks) {
    checks.push_back({{"name", c.name},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed},
                      {"informational", c.informational},
                      {"note", c.note}});
    out.csv_rows.push_back({c.name, format_number(c.residual), format_number(c.tolerance), c.passed ? "1" : "0",
                            c.informational ? "1" : "0"});
    if (!c.informational) chk.le("identity: " + c.name, c.residual, c.tolerance);
  }
  const BuiltModel model = build_model(spec);
  const KmsMetric metric(model.state);
  std::string path;
  Superoperator S = assemble_any(model, metric, sc.kernel, &path);
  std::mt19937_64 rng(seed);
  const double sym = S.verify_symmetry(rng, pairs, 1e-9);
  const Index D = metric.dim();
  const double unit = S.apply(vec(Mat::Identity(D, D))).norm();
  chk.le("KMS symmetry", sym, 1e-9);
  chk.le("L(I) = 0", unit, 1e-12);
  Json gen{{"path", path}, {"nnz", S.nnz()}, {"symmetry_residual", sym}, {"unit_residual", unit}};
  if (D * D <= 1024) {
    const GapReport g = spectral_gap(S, metric);
    gen["min_eigenvalue"] = g.min_eigenvalue;
    chk.ge("-L PSD (min eigenvalue)", g.min_eigenvalue, -1e-9);
  }
  const bool compare = p.boolean("compare_paths", D <= 27);
  if (compare && path == "eigen") {
    const Superoperator Q = assemble_generator(model.directions, metric, sc.kernel, AssemblyPath::quadrature);
    const double diff = max_abs(SpMat(S.matrix() - Q.matrix()));
    gen["eigen_vs_quadrature"] = diff;
    chk.le("eigen vs quadrature assembly", diff, p.number("path_tolerance", 1e-6));
  }
  out.report["results"] = Json{{"identities", checks}, {"generator", gen}};
}

void run_gap(const Scenario& sc, const ModelSpec& spec, double budget, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("gap"));
  GapOptions o;
  o.k = p.integer("k", o.k);
  o.dense_limit = p.integer("dense_limit", static_cast<int>(o.dense_limit));
  o.lanczos_steps = p.integer("lanczos_steps", o.lanczos_steps);
  const double D = std::pow(static_cast<double>(spec.lattice.local_dim()), spec.lattice.num_sites());
  double need = estimate_superop_mb(spec);
  if (D * D <= static_cast<double>(o.dense_limit)) need += 32.0 * D * D * D * D / 1048576.0;
  check_budget(need, budget, "spectral gap");
  const GapReport g = model_gap(build_model(spec), sc.kernel, o);
  out.report["results"] = Json{{"eigenvalues", vec_json(g.eigenvalues)},
                               {"gap", g.gap},
                               {"kernel_dim", g.kernel_dim},
                               {"identity_residual", g.identity_residual},
                               {"min_eigenvalue", g.min_eigenvalue},
                               {"condition", g.condition},
                               {"method", g.method},
                               {"model", g.model},
                               {"sites", g.sites},
                               {"n_max", g.n_max}};
  out.csv_header = {"index", "eigenvalue"};
  for (size_t i = 0; i < g.eigenvalues.size(); ++i)
    out.csv_rows.push_back({std::to_string(i), format_number(g.eigenvalues[i])});
  chk.ge("eigenvalues >= -1e-9", g.min_eigenvalue, -1e-9);
  chk.le("kernel contains vec(I)", g.identity_residual, 1e-10);
}

void run_scaling(const Scenario& sc, const ModelSpec& spec, double budget, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("scaling"));
  TestSequence test;
  try {
    test = parse_test_sequence(p.string("test", "sum A*"));
  } catch (const std::invalid_argument& e) {
    p.fail("params.test", e.what());
  }
  ScalingOptions o;
  o.pad = p.integer("pad", o.pad);
  o.local = p.boolean("local", o.local);
  o.budget_mb = budget;
  const auto sizes = p.integers("sizes", {3, 4, 5, 6, 7, 8});
  const ScalingReport r = rayleigh_scaling(spec, test, sizes, sc.kernel, o);
  out.report["results"] = Json{{"test", test_sequence_name(test)},
                               {"method", r.method},
                               {"sizes", r.sizes},
                               {"energies", vec_json(r.energies)},
                               {"variances", vec_json(r.variances)},
                               {"ratios", vec_json(r.ratios)},
                               {"boundary", r.boundary},
                               {"fitted_exponent", r.fitted_exponent},
                               {"boundary_variation", r.boundary_variation},
                               {"partial", r.partial},
                               {"note", r.note}};
  out.csv_header = {"size", "energy", "variance", "ratio", "boundary"};
  for (size_t i = 0; i < r.sizes.size(); ++i)
    out.csv_rows.push_back({std::to_string(r.sizes[i]), format_number(r.energies[i]), format_number(r.variances[i]),
                            format_number(r.ratios[i]), std::to_string(r.boundary[i])});
  double emin = INFINITY, vmin = INFINITY;
  for (size_t i = 0; i < r.sizes.size(); ++i) {
    emin = std::min(emin, r.energies[i]);
    vmin = std::min(vmin, r.variances[i]);
  }
  if (!r.sizes.empty()) {
    chk.ge("energies >= 0", emin, -1e-12);
    chk.ge("variances > 0", vmin, 1e-300);
  }
  chk.flag("complete size list", !r.partial);
}

double bond_weight(const ModelSpec& s) {
  if (s.kind != ModelKind::z_power) return 1.0;
  return s.scale * s.scale * (uses_ordered_pairs(s) ? 1.0 : 0.5);
}

void run_heat(const Scenario& sc, const ModelSpec& spec, double budget, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("heat"));
  HeatOptions o;
  o.times = p.numbers("times", o.times);
  o.kappa0 = p.numbers("kappa0", o.kappa0);
  o.sign = p.number("sign", o.sign);
  o.clean_margin = p.integer("clean_margin", o.clean_margin);
  check_budget(estimate_superop_mb(spec), budget, "heat comparison");
  const HeatReport r = heat_comparison(spec, sc.kernel, o);
  Json R = Json::array();
  for (Index i = 0; i < r.restriction.rows(); ++i) {
    std::vector<double> row;
    for (Index j = 0; j < r.restriction.cols(); ++j) row.push_back(r.restriction(i, j).real());
    R.push_back(row);
  }
  out.report["results"] = Json{{"C_formula", r.C_formula},
                               {"bond_weight", bond_weight(spec)},
                               {"span_residual", r.span_residual},
                               {"restriction", R},
                               {"restriction_error", r.restriction_error},
                               {"restriction_eigenvalues", vec_json(r.restriction_eigenvalues)},
                               {"sign", r.sign_match},
                               {"times", vec_json(r.times)},
                               {"full_coefficients", r.full_coefficients},
                               {"heat_coefficients", r.heat_coefficients},
                               {"trajectory_error", r.trajectory_error}};
  out.csv_header = {"t", "site", "full", "heat"};
  for (size_t i = 0; i < r.times.size(); ++i)
    for (size_t j = 0; j < r.full_coefficients[i].size(); ++j)
      out.csv_rows.push_back({format_number(r.times[i]), std::to_string(j), format_number(r.full_coefficients[i][j]),
                              format_number(r.heat_coefficients[i][j])});
  chk.le("(i) span invariance", r.span_residual, 1e-9);
  chk.le("(ii) restriction = C Laplacian", r.restriction_error, 1e-8);
  chk.le("(iii) trajectory vs heat semigroup", r.trajectory_error, 1e-6);
}

void run_decay(const Scenario& sc, const ModelSpec& spec, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("decay"));
  const double C = 4.0 * kernel_fourier(sc.kernel, 0.0).real() * std::sinh(0.5 * spec.beta) * bond_weight(spec);
  const DecayReport r = polynomial_decay_probe(p.integer("ring", 16), C, p.integer("points", 48));
  out.report["results"] = Json{{"ring", r.ring},
                               {"C", r.C},
                               {"window", {r.window_lo, r.window_hi}},
                               {"window_points", r.window_points},
                               {"fitted_slope", r.fitted_slope},
                               {"tail_rate", r.tail_rate},
                               {"tail_rate_predicted", r.tail_rate_predicted},
                               {"note", r.note}};
  out.csv_header = {"t", "sup_norm", "in_window"};
  for (size_t i = 0; i < r.times.size(); ++i)
    out.csv_rows.push_back({format_number(r.times[i]), format_number(r.sup_norm[i]),
                            r.times[i] >= r.window_lo && r.times[i] <= r.window_hi ? "1" : "0"});
  chk.within("intermediate-time slope", r.fitted_slope, -0.5, 0.15);
}

void run_lieb_robinson(const Scenario& sc, double budget, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("lieb-robinson"));
  LRSpec s;
  s.sites = p.integer("sites", s.sites);
  s.n_max = p.integer("n_max", s.n_max);
  s.lambda = p.number("lambda", s.lambda);
  s.epsilon = p.number("epsilon", s.epsilon);
  s.site = p.integer("site", s.site);
  s.times = p.numbers("times", s.times);
  const double D = std::pow(s.n_max + 1.0, s.sites);
  check_budget(16.0 * D * D * 12.0 / 1048576.0, budget, "dense Heisenberg evolution");
  const LRReport r = lieb_robinson_probe(s);
  out.report["results"] = Json{{"times", vec_json(r.times)},
                               {"distances", r.distances},
                               {"B", r.B},
                               {"D", r.D},
                               {"C", r.C},
                               {"m", r.m},
                               {"c_phi", r.c_phi},
                               {"bound_holds", r.bound_holds},
                               {"decreasing_in_d", r.decreasing_in_d},
                               {"short_time_ratio", vec_json(r.short_time_ratio)}};
  out.csv_header = {"t", "d", "B"};
  for (size_t i = 0; i < r.times.size(); ++i)
    for (size_t d = 0; d < r.distances.size(); ++d)
      out.csv_rows.push_back({format_number(r.times[i]), std::to_string(r.distances[d]), format_number(r.B[i][d])});
  chk.ge("fitted m > 0", r.m, 1e-300);
  chk.flag("bound holds on the grid", r.bound_holds);
  chk.le("B(0, d >= 1)", r.max_zero_time, 1e-12);
}

void run_bogolubov(const Scenario& sc, std::uint64_t seed, ScenarioResult& out, Checks& chk) {
  Fields p(sc.params, "params", "", param_keys().at("bogolubov"));
  const double r1 = p.number("rapidity", 0.3), r2 = p.number("second_rapidity", 0.5);
  const LatticeConfig one = LatticeConfig::chain(1, p.integer("n_max", 6));
  const BogolubovPair pair = bogolubov_pair(boost(r1), 0, one);
  const BogolubovParams c = compose(boost(r1), boost(r2)), d = boost(r1 + r2);
  const double group = std::max(std::abs(c.tau - d.tau), std::abs(c.theta - d.theta));
  std::vector<cplx> x;
  for (double v : p.numbers("minkowski_x", {1.0, 1.0})) x.push_back(v);
  const cplx tau = p.number("minkowski_tau", 2.0);
  const LatticeConfig mk = LatticeConfig::chain(static_cast<int>(x.size()), p.integer("minkowski_n_max", 3));
  const double mink = minkowski_defect(tau, x, mk);
  const double s = p.number("s", 0.1);
  const int pairs = p.integer("pairs", 20);
  Json reps = Json::array();
  out.csv_header = {"n_max", "unitarity_residual", "log_Z", "log_Z_s", "condition"};
  std::vector<double> res;
  for (int n : p.integers("n_max_list", {4, 6, 8})) {
    const auto q = quasi_invariance_rep(LadderPolynomial::number(), lorentz_path(), LadderPolynomial::number(), s, n, 1.0,
                                        seed, pairs);
    res.push_back(q.unitarity_residual);
    reps.push_back({{"n_max", n},
                    {"unitarity_residual", q.unitarity_residual},
                    {"log_Z", q.log_Z},
                    {"log_Z_s", q.log_Z_s},
                    {"condition", q.condition}});
    out.csv_rows.push_back({std::to_string(n), format_number(q.unitarity_residual), format_number(q.log_Z),
                            format_number(q.log_Z_s), format_number(q.condition)});
  }
  bool monotone = true;
  for (size_t i = 1; i < res.size(); ++i) monotone = monotone && res[i] <= res[i - 1];
  out.report["results"] = Json{{"ccr_clean_defect", pair.clean_defect},
                               {"ccr_leakage", pair.leakage},
                               {"group_law_defect", group},
                               {"minkowski_defect", mink},
                               {"unitarity", reps},
                               {"monotone", monotone}};
  chk.le("clean CCR preservation", pair.clean_defect, 1e-10);
  chk.le("Minkowski relation", mink, 1e-10);
  chk.le("boost group law", group, 1e-14);
  chk.flag("unitarity residual non-increasing in n_max", monotone);
}

}  // namespace

SchemaError::SchemaError(const std::string& f, int l, const std::string& message)
    : std::runtime_error(what_of(f, l, message)), field(f), line(l) {}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"verify", "gap", "scaling", "heat", "decay", "lieb-robinson", "bogolubov"};
  return names;
}

Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw SchemaError("", line, std::string("malformed JSON: ") + e.what());
  }
  Fields f(j, "", text, {"schema_version", "name", "experiment", "seed", "model", "kernel", "params"});
  const int version = f.integer("schema_version", -1);
  if (version != kSchemaVersion) f.fail("schema_version", "expected schema_version " + std::to_string(kSchemaVersion));
  Scenario sc;
  sc.source = j;
  sc.name = f.string("name", "", true);
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos)
    f.fail("name", "must be a non-empty file stem without path separators");
  sc.experiment = f.string("experiment", "", true);
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), sc.experiment) == names.end())
    f.fail("experiment", "unknown experiment '" + sc.experiment + "'");
  if (f.has("seed")) {
    if (!f.raw("seed").is_number_unsigned()) f.fail("seed", "expected a non-negative integer");
    sc.seed = f.raw("seed").get<std::uint64_t>();
  }
  if (f.has("model")) {
    sc.model = parse_model(f.raw("model"), text);
  } else if (needs_model(sc.experiment)) {
    f.fail("model", "required field missing");
  } else {
    sc.model.kind = ModelKind::z_power;
    sc.model.lattice = LatticeConfig::chain(2, 1);
  }
  if (f.has("kernel")) {
    Fields k(f.raw("kernel"), "kernel", text, {"kappa", "n", "sigma"});
    sc.kernel.kappa = k.number("kappa", 0.0);
    sc.kernel.n = k.integer("n", 1);
    sc.kernel.sigma = k.number("sigma", 0.0);
  }
  if (f.has("params")) sc.params = f.raw("params");
  // params are checked against the experiment's field list here so schema errors surface before any work
  Fields(sc.params, "params", text, param_keys().at(sc.experiment));
  try {
    sc.model.validate();
    sc.kernel.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("model", line_of(text, "model"), e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", 0, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

bool ScenarioResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

ScenarioResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  ModelSpec spec = sc.model;
  if (opts.nmax_override) {
    spec.lattice.n_max = *opts.nmax_override;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError("model.lattice.n_max", 0, std::string("after --nmax-override: ") + e.what());
    }
  }
  const std::uint64_t seed = opts.seed.value_or(sc.seed);
  take_warnings();
  ScenarioResult out;
  Checks chk;
  out.report["schema_version"] = kSchemaVersion;
  out.report["name"] = sc.name;
  out.report["experiment"] = sc.experiment;
  out.report["seed"] = seed;
  out.report["conventions"] = Json{{"generator", "assembled operator is -L (positive in the KMS metric)"},
                                   {"semigroup", "P_t = exp(-t(-L))"},
                                   {"vectorization", "column-stacking; left X -> I kron X, right X -> X^T kron I"}};
  out.report["config"] = sc.source;
  if (needs_model(sc.experiment) || sc.experiment == "decay") out.report["model"] = model_json(spec);
  out.report["kernel"] = Json{{"kappa", sc.kernel.kappa}, {"n", sc.kernel.n}, {"sigma", sc.kernel.sigma}};
  try {
    if (sc.experiment == "verify") run_verify(sc, spec, seed, opts.budget_mb, out, chk);
    else if (sc.experiment == "gap") run_gap(sc, spec, opts.budget_mb, out, chk);
    else if (sc.experiment == "scaling") run_scaling(sc, spec, opts.budget_mb, out, chk);
    else if (sc.experiment == "heat") run_heat(sc, spec, opts.budget_mb, out, chk);
    else if (sc.experiment == "decay") run_decay(sc, spec, out, chk);
    else if (sc.experiment == "lieb-robinson") run_lieb_robinson(sc, opts.budget_mb, out, chk);
    else run_bogolubov(sc, seed, out, chk);
  } catch (const std::invalid_argument& e) {
    throw SchemaError("params", 0, e.what());
  }
  out.assertions = chk.list;
  Json as = Json::array();
  for (const auto& a : out.assertions)
    as.push_back({{"name", a.name}, {"value", a.value}, {"relation", a.relation}, {"tolerance", a.tolerance}, {"passed", a.passed}});
  out.report["assertions"] = as;
  out.report["passed"] = out.passed();
  out.report["warnings"] = take_warnings();
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_text(const ScenarioResult& result) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char ch : cells[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      out += '"';
    }
    out += '\n';
  };
  line(result.csv_header);
  for (const auto& r : result.csv_rows) line(r);
  return out;
}

void write_outputs(const Scenario& scenario, const ScenarioResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Json report = result.report;
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  report["generated_at"] = stamp;
  {
    std::ofstream js(fs::path(dir) / (scenario.name + ".json"));
    if (!js) throw std::runtime_error("cannot write report to " + dir);
    js << report.dump(2) << '\n';
  }
  if (!result.csv_header.empty()) {
    std::ofstream csv(fs::path(dir) / (scenario.name + ".csv"));
    csv << csv_text(result);
  }
}

double resolve_budget(std::optional<double> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FOCKDIRICHLET_BUDGET_MB")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || v < 0.0)
      throw SchemaError("FOCKDIRICHLET_BUDGET_MB", 0, "expected a non-negative number of megabytes");
    return v;
  }
  return 0.0;
}

}  // namespace fockdirichlet
