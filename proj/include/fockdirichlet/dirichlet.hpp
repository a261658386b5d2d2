#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fockdirichlet/kernels.hpp"
#include "fockdirichlet/state.hpp"

namespace fockdirichlet {

// eta(t) = exp(i kappa t) / cosh(2 n pi t), optionally convolved with a Gaussian of width sigma.
struct AdmissibleKernel {
  double kappa = 0.0;
  int n = 1;
  double sigma = 0.0;

  void validate() const;
  // Time-domain value at complex t. The smoothed kernel is entire and is
  // evaluated by Fourier inversion; the raw kernel uses the closed form.
  cplx eval(cplx t) const;
  // Integration half-width making the tail below 1e-12.
  double tail_cutoff() const;
};

cplx kernel_fourier(const AdmissibleKernel& k, double s);

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod evaluation of the Fourier transform on [-T, T].
QuadratureResult kernel_fourier_quadrature(const AdmissibleKernel& k, double s, double tol = 1e-12);

struct AdmissibilityReport {
  bool real_part_nonnegative = false;
  double max_imag_part = 0.0;
  bool condition1_flag_complex = false;
  double min_contour_sum = 0.0;
  double max_contour_sum_abs = 0.0;
  bool contour_sum_identically_zero = false;
  double decay_constant = 0.0;
  int decay_power = 2;
  bool decay_bounded = false;
};

AdmissibilityReport check_admissibility(const AdmissibleKernel& k);

// Integral of eta(t + i y) over the real line by quadrature; needs sigma > 0 when |y| = 1/4.
cplx shifted_kernel_integral(const AdmissibleKernel& k, double y);

struct DerivationDirection {
  LatticeOperator X;
  double nu = 1.0;
  double mu = 1.0;
  std::optional<double> xi;
};

class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(SpMat matrix, Index dim, StatePtr metric_state = nullptr);

  const SpMat& matrix() const { return matrix_; }
  Index dim() const { return dim_; }
  const StatePtr& metric_state() const { return metric_; }
  bool symmetric_in_metric() const { return symmetric_; }
  std::size_t nnz() const { return csr_.nnz(); }

  Vec apply(const Vec& v) const;
  Mat apply(const Mat& f) const;

  // Max over random pairs of |<f,Sg> - <Sf,g>| / (|f||g|); flags on success.
  double verify_symmetry(std::mt19937_64& rng, int pairs = 50, double tol = 1e-9);

 private:
  SpMat matrix_;
  kernels::Csr csr_;
  Index dim_ = 0;
  StatePtr metric_;
  bool symmetric_ = false;
};

// Left/right multiplication superoperators in the column-stacking convention.
SpMat left_mult(const SpMat& X);
SpMat right_mult(const SpMat& X);

Superoperator derivation_super(const LatticeOperator& X);
Superoperator adjoint_derivation_super(const LatticeOperator& X, const KmsMetric& metric);

Mat apply_derivation(const SpMat& X, const Mat& f);
Mat apply_adjoint_derivation(const SpMat& X, const Mat& g, const GibbsState& state);

enum class AssemblyPath { eigen, quadrature };

struct AssemblyOptions {
  double T = 8.0;
  int panels = 32;
  double frequency_tol = 1e-9;
};

// Returns -L (positive in the KMS metric).
Superoperator assemble_generator(const std::vector<DerivationDirection>& directions, const KmsMetric& metric,
                                 const AdmissibleKernel& kernel, AssemblyPath path,
                                 const AssemblyOptions& opts = {});

// Same quadratic form evaluated without a superoperator.
double dirichlet_energy_direct(const SpMat& f, const std::vector<DerivationDirection>& directions,
                               const KmsMetric& metric, const AdmissibleKernel& kernel);

double dirichlet_energy(const Mat& f, const Superoperator& minus_L, const KmsMetric& metric);

// 1/2 (L(f*f) - f* L(f) - L(f*) f)
Mat gamma1(const Mat& f, const Superoperator& minus_L);

// Twice gamma1 from the shifted-contour integral; requires sigma > 0.
Mat gamma1_contour_form(const Mat& f, const std::vector<DerivationDirection>& directions,
                        const GibbsState& state, const AdmissibleKernel& kernel, const AssemblyOptions& opts = {});

// Closed form for one modular-eigenvector direction with alpha_{i/2}(X) = e^xi X.
Mat gamma1_eigen_closed_form(const Mat& f, const DerivationDirection& direction, const AdmissibleKernel& kernel);

// C = int (eta(t + i/4) + eta(t - i/4)) dt
double contour_constant(const AdmissibleKernel& kernel);

struct KrylovOptions {
  int krylov_dim = 30;
  double tol = 1e-12;
  int max_steps = 100000;
};

struct SemigroupResult {
  Mat value;
  double error_estimate = 0.0;
  int steps = 0;
  bool converged = true;
};

// exp(-t (-L)) f via Arnoldi on vec(f).
SemigroupResult semigroup_apply(const Superoperator& minus_L, const Mat& f, double t, const KrylovOptions& opts = {});
Vec expv(const std::function<Vec(const Vec&)>& matvec, const Vec& v, double t, const KrylovOptions& opts,
         double* err = nullptr, int* steps = nullptr, double norm_estimate = 0.0);

}  // namespace fockdirichlet
