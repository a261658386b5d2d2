#pragma once

#include <string>
#include <vector>

#include "fockdirichlet/models.hpp"

namespace fockdirichlet {

struct GapReport {
  std::vector<double> eigenvalues;  // lowest k of the KMS-symmetrized -L, ascending
  double gap = 0.0;                 // smallest eigenvalue above the kernel threshold; 0 if none found
  int kernel_dim = 0;
  double identity_residual = 0.0;  // |(-L) vec(I)|
  double min_eigenvalue = 0.0;
  double condition = 1.0;  // max/min square-root KMS weight
  std::string method;
  std::string model;
  int sites = 0;
  int n_max = 0;
};

struct GapOptions {
  int k = 6;
  double kernel_tol = 1e-10;
  // Dense eigensolver up to this many vec coordinates (D^2).
  Index dense_limit = 1024;
  int lanczos_steps = 160;
};

GapReport spectral_gap(const Superoperator& minus_L, const KmsMetric& metric, const GapOptions& opts = {});
GapReport model_gap(const BuiltModel& model, const AdmissibleKernel& kernel, const GapOptions& opts = {});

enum class TestSequence { sum_creators, sum_numbers };
TestSequence parse_test_sequence(const std::string& name);
std::string test_sequence_name(TestSequence t);

struct ScalingReport {
  std::vector<int> sizes;
  std::vector<double> energies;
  std::vector<double> variances;
  std::vector<double> ratios;
  std::vector<int> boundary;  // |dL_n|: direction supports crossing the box boundary
  double fitted_exponent = 0.0;
  // (max - min) / max of E(F_n)/|dL_n| over sizes
  double boundary_variation = 0.0;
  bool partial = false;
  std::string method;
  std::string note;
};

struct ScalingOptions {
  int pad = 1;
  double budget_mb = 0.0;
  // Product reference state and translated local directions: evaluate the form window by
  // window on a chain as wide as one direction's support (exact, any n_max).
  bool local = true;
};

// Box L_n of n sites inside an open chain padded by `pad` sites on each side (no padding for
// mean-field models, whose directions are not local). Energies use the direct quadratic form.
ScalingReport rayleigh_scaling(const ModelSpec& base, TestSequence test, const std::vector<int>& sizes,
                               const AdmissibleKernel& kernel, const ScalingOptions& opts = {});

struct HeatOptions {
  std::vector<double> times{0.25, 0.5, 1.0, 2.0};
  // Coefficients kappa_j of f = sum_j kappa_j (A_j + sign A_j*); empty means delta at site 0.
  std::vector<double> kappa0;
  double sign = 1.0;
  // Columns with every occupation <= n_max - margin carry the exact identities.
  int clean_margin = 2;
  KrylovOptions krylov{};
};

struct HeatReport {
  double C_formula = 0.0;          // 4 eta^(0) sinh(beta/2)
  double span_residual = 0.0;      // (i)
  Mat restriction;                 // (ii) action of -L on (A_0..A_{L-1}, A_0*..A_{L-1}*)
  Mat laplacian;                   // graph Laplacian (PSD)
  double restriction_error = 0.0;  // max |R - C Lap (+) C Lap|
  std::vector<double> restriction_eigenvalues;
  std::string sign_match;
  std::vector<double> times;       // (iii)
  std::vector<std::vector<double>> full_coefficients;
  std::vector<std::vector<double>> heat_coefficients;
  double trajectory_error = 0.0;
};

HeatReport heat_comparison(const ModelSpec& spec, const AdmissibleKernel& kernel, const HeatOptions& opts = {});

// Graph Laplacian (degree - adjacency) over the edges the model's directions use.
Mat graph_laplacian(const LatticeConfig& lattice, bool ordered_pairs);

struct DecayReport {
  int ring = 0;
  double C = 0.0;
  std::vector<double> times;
  std::vector<double> sup_norm;  // sup_j |delta_{A_j}(P_t f)|
  double window_lo = 0.0, window_hi = 0.0;
  double fitted_slope = 0.0;
  int window_points = 0;
  // beyond the window: fitted rate of sup - 1/L, and the Laplacian prediction C lambda_1
  double tail_rate = 0.0;
  double tail_rate_predicted = 0.0;
  std::string note;
};

// Coefficient-space heat flow on a ring, f = A_0 + A_0*.
DecayReport polynomial_decay_probe(int ring, double C, int points = 48);

struct LRReport {
  std::vector<double> times;
  std::vector<int> distances;
  std::vector<std::vector<double>> B;  // B[t][d]
  double D = 0.0, C = 0.0, m = 0.0;
  double c_phi = 0.0;
  double max_zero_time = 0.0;  // max_d>=1 B(0,d)
  bool bound_holds = false;
  bool decreasing_in_d = false;
  std::vector<double> short_time_ratio;  // B(t,0)/t
};

struct LRSpec {
  int sites = 5;
  int n_max = 2;
  double lambda = 0.5;
  double epsilon = 0.1;  // mollifier
  int site = 0;          // j
  std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
};

LRReport lieb_robinson_probe(const LRSpec& spec);

// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fockdirichlet
