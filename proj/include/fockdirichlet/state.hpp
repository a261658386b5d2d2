#pragma once

#include <memory>
#include <optional>

#include "fockdirichlet/fock.hpp"

namespace fockdirichlet {

class GibbsState {
 public:
  // rho = exp(-beta H) / Tr exp(-beta H), built in the shifted log domain.
  static std::shared_ptr<const GibbsState> from_hamiltonian(const LatticeOperator& H, double beta);

  double beta() const { return beta_; }
  double log_Z() const { return log_Z_; }
  Index dim() const { return log_p_.size(); }
  bool is_diagonal() const { return diagonal_; }
  // log of the eigenvalues of rho, in eigenbasis order.
  const RealVec& log_weights() const { return log_p_; }
  const RealVec& energies() const { return energies_; }
  // Columns are eigenvectors; empty when diagonal.
  const Mat& eigenvectors() const { return V_; }

  Mat power(cplx z) const;
  Mat rho() const { return power(1.0); }
  double trace() const;
  double min_eigenvalue() const;

  // X -> V^* X V and back; identity maps on the diagonal fast path.
  Mat to_eigenbasis(const Mat& X) const;
  Mat from_eigenbasis(const Mat& X) const;

 private:
  double beta_ = 1.0;
  double log_Z_ = 0.0;
  bool diagonal_ = true;
  RealVec energies_;
  RealVec log_p_;
  Mat V_;
};

using StatePtr = std::shared_ptr<const GibbsState>;

class KmsMetric {
 public:
  explicit KmsMetric(StatePtr state);
  const StatePtr& state() const { return state_; }
  Index dim() const { return state_->dim(); }

  cplx inner(const Mat& f, const Mat& g) const;
  cplx inner(const SpMat& f, const SpMat& g) const;
  // Weight on entry (r,c) of vec in the computational basis when the state is diagonal.
  const RealVec& diagonal_weights() const { return weights_; }
  // vec(f) -> coordinates in which the metric is the standard one.
  Vec whiten(const Vec& v) const;
  Vec unwhiten(const Vec& v) const;

 private:
  StatePtr state_;
  RealVec sqrt_p_;
  RealVec weights_;
};

cplx kms_inner(const LatticeOperator& f, const LatticeOperator& g, const KmsMetric& metric);
double lp_norm(const Mat& f, const GibbsState& state, int p, double s);

struct FlowOptions {
  double strip = 1.0;
  double warn_ratio = 1e12;
};

// rho^{iz} X rho^{-iz}
SpMat modular_flow(const SpMat& X, const GibbsState& state, cplx z, const FlowOptions& opts = {});
Mat modular_flow(const Mat& X, const GibbsState& state, cplx z, const FlowOptions& opts = {});
LatticeOperator modular_flow(const LatticeOperator& X, const GibbsState& state, cplx z,
                             const FlowOptions& opts = {});

// xi with alpha_{i/2}(X) = e^xi X, if X is a modular eigenvector.
std::optional<double> eigen_detect(const LatticeOperator& X, const GibbsState& state, double tol = 1e-9);

// Components X_k with alpha_t(X_k) = exp(i w_k t) X_k; w_k in absolute units (not divided by beta).
struct FrequencyComponent {
  SpMat op;
  double omega = 0.0;
};
std::vector<FrequencyComponent> frequency_components(const SpMat& X, const GibbsState& state,
                                                     double tol = 1e-9, size_t max_components = 256);

}  // namespace fockdirichlet
