#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fockdirichlet/dirichlet.hpp"

namespace fockdirichlet {

enum class ModelKind {
  mean_field,
  mean_field_n,
  z_field,
  zjk_quadratic,
  y_field,
  w_ops,
  z_power,
  y_power,
  g_model,
  invariant_aij,
};

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::mean_field;
  LatticeConfig lattice;
  double beta = 1.0;
  double nu = 1.0;
  double mu = 1.0;
  // Powers for mean_field_n (n), w_ops / z_power / y_power (n, m).
  int n = 1;
  int m = 1;
  // mean_field_n normalization |L|^-epsilon.
  double epsilon = 0.5;
  // Coefficient sequences indexed by site id (z_field, y_field); first entries are used as
  // the scalar couplings for zjk_quadratic (kappa_j, eps_k) and g_model.
  std::vector<cplx> kappa{1.0};
  std::vector<cplx> xi;
  bool selfadjoint = false;
  // w_ops: add i(A_j* A_k - A_k* A_j) directions.
  bool ergodic_augment = false;
  // Use both orientations of every edge; unset means the per-kind default
  // (unordered for zjk_quadratic, ordered otherwise).
  std::optional<bool> ordered_pairs;
  // Overall factor on z_power / y_power directions (0.5 reproduces the halved convention).
  double scale = 1.0;
  // invariant_aij site sets (offsets, translated over the lattice).
  std::vector<int> I{0};
  std::vector<int> J{1};

  void validate() const;
};

bool uses_ordered_pairs(const ModelSpec& spec);

struct BuiltModel {
  ModelSpec spec;
  LatticeOperator hamiltonian;
  StatePtr state;
  std::vector<DerivationDirection> directions;
  // Largest per-site margin below n_max on which the model's identities are exact.
  int clean_margin = 1;
  // True when the reference Hamiltonian conserves the total number and clean checks
  // should use the total-occupation sector instead of per-site margins.
  bool number_sector = false;
};

BuiltModel build_model(const ModelSpec& spec);

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 1e-10;
  bool passed = false;
  // Not asserted: reported for comparison with an alternative written form.
  bool informational = false;
  std::string note;
};

struct AlgebraReport {
  std::vector<IdentityCheck> checks;
  bool passed() const;
};

AlgebraReport verify_algebra(const ModelSpec& spec);

// Helpers also used by the acceptance checks.
// Single-mode [A^n, A*^n] as the polynomial (N+n)...(N+1) - N(N-1)...(N-n+1).
SpMat ladder_power_commutator(int n, int n_max);

// Coefficients c[k][l] with [U, .]^k (X_n) = sum_l c[k][l] T_l, T_l = |L|^{-l/2} X_{n-l} X^l.
std::vector<std::vector<double>> mean_field_n_coefficients(int n, int k_max);
// The same table from the alternative recursion a_{k+1,l} = -(l-1) a_{k,l-1} - (n-l) a_{k,l}.
std::vector<std::vector<double>> mean_field_n_coefficients_alt(int n, int k_max);

struct OrbitComponent {
  SpMat op;
  // alpha_t(X) = sum_k exp(i frequency_k beta t) op_k
  double frequency = 0.0;
};

struct ModularOrbit {
  std::vector<OrbitComponent> components;
  std::string method;
  bool quadrature_only = false;
  // Columns on which the reconstruction is exact under truncation.
  std::vector<char> exact_columns;

  SpMat evaluate(double t, double beta) const;
};

ModularOrbit modular_orbit(const BuiltModel& model, std::size_t direction_index);

// Truncated power series for alpha_t(X_n) of the mean_field_n model, order chosen so the
// remainder bound sum_{k>K} (2 n beta |t|)^k / k! * max|T_l| stays below tol.
struct SeriesResult {
  SpMat value;
  int order = 0;
  double remainder_bound = 0.0;
};
SeriesResult mean_field_n_series(const BuiltModel& model, double t, double tol = 1e-10);

}  // namespace fockdirichlet
