#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fockdirichlet/state.hpp"

namespace fockdirichlet {

// a = tau A + theta A*, |tau|^2 - |theta|^2 = 1
struct BogolubovParams {
  cplx tau = 1.0;
  cplx theta = 0.0;
  void validate(double tol = 1e-12) const;
};

// a_i = sum_j gamma_ij A_j + kappa_ij A_j*
struct MultimodeBogolubov {
  Mat gamma;
  Mat kappa;
  void validate(double tol = 1e-12) const;
  // max |(gamma gamma^* - kappa kappa^* - I)_ij| and |(gamma kappa^T - kappa gamma^T)_ij|
  double symplectic_defect() const;
};

struct BogolubovPair {
  LatticeOperator a;
  LatticeOperator a_dagger;
  // max entry of [a_i, a_j*] - delta_ij on levels 0..n_max-2
  double clean_defect = 0.0;
  // same over the whole truncated space; concentrated at the cutoff
  double leakage = 0.0;
};

BogolubovPair bogolubov_pair(const BogolubovParams& p, int site, const LatticeConfig& lattice);
std::vector<BogolubovPair> bogolubov_modes(const MultimodeBogolubov& p, const LatticeConfig& lattice);

// Hyperbolic boost tau = cosh s, theta = sinh s.
BogolubovParams boost(double rapidity);
// Parameters of (first after second): a'' = tau1 a' + theta1 a'*, a' = tau2 A + theta2 A*.
BogolubovParams compose(const BogolubovParams& first, const BogolubovParams& second);

// S = tau n^{-1/2} sum_i A_i + sum_i x_i A_i* over sites 0..n-1.
LatticeOperator minkowski_field(cplx tau, const std::vector<cplx>& x, const LatticeConfig& lattice);
double minkowski_defect(cplx tau, const std::vector<cplx>& x, const LatticeConfig& lattice);

// Polynomial in one mode: words over 'a' (annihilator) and 'c' (creator), read left to right.
struct LadderPolynomial {
  std::vector<std::pair<cplx, std::string>> terms;

  static LadderPolynomial number() { return {{{1.0, "ca"}}}; }
  Mat evaluate(const Mat& a, const Mat& c) const;
  LadderPolynomial adjoint() const;
};

using BogolubovPath = std::function<BogolubovParams(double)>;
BogolubovPath lorentz_path();
BogolubovPath phase_path();

struct QuasiInvarianceResult {
  Mat value;
  double unitarity_residual = 0.0;
  double log_Z = 0.0;
  double log_Z_s = 0.0;
  // largest/smallest eigenvalue ratio entering rho^{-1/4}
  double condition = 1.0;
};

// V_s(f) = rho^{-1/4} rho_s^{1/4} f(a_s, a_s*) rho_s^{1/4} rho^{-1/4} on a single mode,
// with the unitarity residual max |<V f, V g> - <f, g>| / (|f||g|) over seeded random pairs.
QuasiInvarianceResult quasi_invariance_rep(const LadderPolynomial& U, const BogolubovPath& path,
                                           const LadderPolynomial& f, double s, int n_max, double beta = 1.0,
                                           std::uint64_t seed = 7, int pairs = 20);

}  // namespace fockdirichlet
