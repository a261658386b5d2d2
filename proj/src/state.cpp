#include "fockdirichlet/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fockdirichlet/kernels.hpp"

namespace fockdirichlet {

namespace {

bool is_diagonal_matrix(const SpMat& m) {
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SpMat::InnerIterator it(m, c); it; ++it)
      if (it.row() != it.col() && std::abs(it.value()) > 0.0) return false;
  return true;
}

constexpr Index kDenseStateLimit = 4096;

}  // namespace

std::shared_ptr<const GibbsState> GibbsState::from_hamiltonian(const LatticeOperator& H, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("gibbs_state: beta must be positive");
  const SpMat& h = H.matrix;
  if (h.rows() != h.cols()) throw std::invalid_argument("gibbs_state: Hamiltonian not square");
  const double herm = max_abs(SpMat(h - SpMat(h.adjoint())));
  if (herm > 1e-12) throw std::invalid_argument("gibbs_state: Hamiltonian not Hermitian (defect " + std::to_string(herm) + ")");

  auto state = std::make_shared<GibbsState>();
  state->beta_ = beta;
  const Index D = h.rows();
  if (is_diagonal_matrix(h)) {
    state->diagonal_ = true;
    state->energies_ = RealVec::Zero(D);
    for (Index c = 0; c < h.outerSize(); ++c)
      for (SpMat::InnerIterator it(h, c); it; ++it) state->energies_[c] = it.value().real();
  } else {
    if (D > kDenseStateLimit) throw std::length_error("gibbs_state: dense eigendecomposition limited to D <= 4096");
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(h)};
    if (es.info() != Eigen::Success) throw std::runtime_error("gibbs_state: eigendecomposition failed");
    state->diagonal_ = false;
    state->energies_ = es.eigenvalues();
    state->V_ = es.eigenvectors();
  }
  const double emin = state->energies_.minCoeff();
  RealVec shifted = -beta * (state->energies_.array() - emin).matrix();
  const double log_sum = std::log(shifted.array().exp().sum());
  state->log_p_ = (shifted.array() - log_sum).matrix();
  state->log_Z_ = -beta * emin + log_sum;
  if (state->log_p_.minCoeff() < -700.0)
    warn("gibbs_state: weights below double range; kept in log domain (beta*spread = " +
         std::to_string(-state->log_p_.minCoeff()) + ")");
  return state;
}

Mat GibbsState::power(cplx z) const {
  const Index D = dim();
  Vec w(D);
  for (Index i = 0; i < D; ++i) w[i] = std::exp(z * log_p_[i]);
  if (diagonal_) return w.asDiagonal();
  return V_ * w.asDiagonal() * V_.adjoint();
}

double GibbsState::trace() const { return log_p_.array().exp().sum(); }

double GibbsState::min_eigenvalue() const { return std::exp(log_p_.minCoeff()); }

Mat GibbsState::to_eigenbasis(const Mat& X) const { return diagonal_ ? X : Mat(V_.adjoint() * X * V_); }

Mat GibbsState::from_eigenbasis(const Mat& X) const { return diagonal_ ? X : Mat(V_ * X * V_.adjoint()); }

KmsMetric::KmsMetric(StatePtr state) : state_(std::move(state)) {
  if (!state_) throw std::invalid_argument("KmsMetric: null state");
  const Index D = state_->dim();
  sqrt_p_ = (0.5 * state_->log_weights().array()).exp().matrix();
  weights_.resize(D * D);
  for (Index c = 0; c < D; ++c)
    for (Index r = 0; r < D; ++r) weights_[c * D + r] = sqrt_p_[r] * sqrt_p_[c];
}

cplx KmsMetric::inner(const Mat& f, const Mat& g) const {
  if (f.rows() != dim() || g.rows() != dim() || f.cols() != dim() || g.cols() != dim())
    throw std::invalid_argument("kms_inner: dimension mismatch");
  if (state_->is_diagonal())
    return kernels::weighted_dotc(static_cast<size_t>(f.size()), weights_.data(), f.data(), g.data());
  const Mat ft = state_->to_eigenbasis(f);
  const Mat gt = state_->to_eigenbasis(g);
  return kernels::weighted_dotc(static_cast<size_t>(ft.size()), weights_.data(), ft.data(), gt.data());
}

cplx KmsMetric::inner(const SpMat& f, const SpMat& g) const {
  if (f.rows() != dim() || g.rows() != dim()) throw std::invalid_argument("kms_inner: dimension mismatch");
  if (!state_->is_diagonal()) return inner(Mat(f), Mat(g));
  const SpMat prod = SpMat(f.conjugate()).cwiseProduct(g);
  cplx acc = 0.0;
  for (Index c = 0; c < prod.outerSize(); ++c)
    for (SpMat::InnerIterator it(prod, c); it; ++it) acc += sqrt_p_[it.row()] * sqrt_p_[c] * it.value();
  return acc;
}

Vec KmsMetric::whiten(const Vec& v) const {
  const Index D = dim();
  Vec t = state_->is_diagonal() ? v : vec(state_->to_eigenbasis(unvec(v, D)));
  return (t.array() * weights_.array().sqrt()).matrix();
}

Vec KmsMetric::unwhiten(const Vec& v) const {
  const Index D = dim();
  Vec t = (v.array() / weights_.array().sqrt()).matrix();
  return state_->is_diagonal() ? t : vec(state_->from_eigenbasis(unvec(t, D)));
}

cplx kms_inner(const LatticeOperator& f, const LatticeOperator& g, const KmsMetric& metric) {
  return metric.inner(f.matrix, g.matrix);
}

double lp_norm(const Mat& f, const GibbsState& state, int p, double s) {
  if (p < 1) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("lp_norm: s must lie in [0,1]");
  if (f.rows() != state.dim()) throw std::invalid_argument("lp_norm: dimension mismatch");
  const Mat g = state.power((1.0 - s) / p) * f * state.power(s / p);
  Eigen::JacobiSVD<Mat> svd(g);
  double acc = 0.0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) acc += std::pow(svd.singularValues()[i], p);
  return std::pow(acc, 1.0 / p);
}

namespace {

void check_strip(cplx z, const GibbsState& state, const FlowOptions& opts, double spread) {
  if (std::abs(z.imag()) > opts.strip + 1e-15)
    throw std::domain_error("modular_flow: |Im z| exceeds the guard strip");
  const double exponent = std::abs(z.imag()) * spread;
  if (exponent > std::log(opts.warn_ratio))
    warn("modular_flow: weight ratio exp(" + std::to_string(exponent) + ") exceeds warning threshold at beta=" +
         std::to_string(state.beta()));
}

}  // namespace

SpMat modular_flow(const SpMat& X, const GibbsState& state, cplx z, const FlowOptions& opts) {
  if (X.rows() != state.dim()) throw std::invalid_argument("modular_flow: dimension mismatch");
  if (!state.is_diagonal()) return to_sparse(modular_flow(Mat(X), state, z, opts));
  const RealVec& lp = state.log_weights();
  double spread = 0.0;
  SpMat out = X;
  for (Index c = 0; c < out.outerSize(); ++c)
    for (SpMat::InnerIterator it(out, c); it; ++it) {
      const double diff = lp[it.row()] - lp[c];
      spread = std::max(spread, std::abs(diff));
      it.valueRef() *= std::exp(kI * z * diff);
    }
  check_strip(z, state, opts, spread);
  prune(out);
  return out;
}

Mat modular_flow(const Mat& X, const GibbsState& state, cplx z, const FlowOptions& opts) {
  if (X.rows() != state.dim()) throw std::invalid_argument("modular_flow: dimension mismatch");
  const RealVec& lp = state.log_weights();
  const Index D = state.dim();
  Mat xt = state.to_eigenbasis(X);
  double spread = 0.0;
  for (Index c = 0; c < D; ++c)
    for (Index r = 0; r < D; ++r) {
      if (xt(r, c) == cplx(0.0)) continue;
      const double diff = lp[r] - lp[c];
      spread = std::max(spread, std::abs(diff));
      xt(r, c) *= std::exp(kI * z * diff);
    }
  check_strip(z, state, opts, spread);
  return state.from_eigenbasis(xt);
}

LatticeOperator modular_flow(const LatticeOperator& X, const GibbsState& state, cplx z, const FlowOptions& opts) {
  return {modular_flow(X.matrix, state, z, opts), X.support, X.label};
}

std::optional<double> eigen_detect(const LatticeOperator& X, const GibbsState& state, double tol) {
  const Mat x = X.dense();
  const double nx = x.norm();
  if (nx == 0.0) throw std::invalid_argument("eigen_detect: zero operator");
  const Mat y = modular_flow(x, state, cplx(0.0, 0.5));
  const cplx ratio = (x.adjoint() * y).trace() / (nx * nx);
  if (ratio.real() <= 0.0 || std::abs(ratio.imag()) > tol * std::abs(ratio)) return std::nullopt;
  if ((y - ratio.real() * x).norm() > tol * nx * std::max(1.0, ratio.real())) return std::nullopt;
  return std::log(ratio.real());
}

std::vector<FrequencyComponent> frequency_components(const SpMat& X, const GibbsState& state, double tol,
                                                     size_t max_components) {
  struct Entry {
    double omega;
    Index r, c;
    cplx v;
  };
  const RealVec& lp = state.log_weights();
  std::vector<Entry> entries;
  const Index D = state.dim();
  if (state.is_diagonal()) {
    for (Index c = 0; c < X.outerSize(); ++c)
      for (SpMat::InnerIterator it(X, c); it; ++it) entries.push_back({lp[it.row()] - lp[c], it.row(), c, it.value()});
  } else {
    const Mat xt = state.to_eigenbasis(Mat(X));
    const double scale = std::max(max_abs(xt), 1e-300);
    for (Index c = 0; c < D; ++c)
      for (Index r = 0; r < D; ++r)
        if (std::abs(xt(r, c)) > 1e-14 * scale) entries.push_back({lp[r] - lp[c], r, c, xt(r, c)});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.omega < b.omega; });

  std::vector<FrequencyComponent> out;
  size_t start = 0;
  while (start < entries.size()) {
    size_t stop = start + 1;
    while (stop < entries.size() &&
           entries[stop].omega - entries[stop - 1].omega <= tol * std::max(1.0, std::abs(entries[stop].omega)))
      ++stop;
    double mean = 0.0;
    std::vector<Eigen::Triplet<cplx>> trips;
    for (size_t i = start; i < stop; ++i) {
      mean += entries[i].omega;
      trips.emplace_back(entries[i].r, entries[i].c, entries[i].v);
    }
    mean /= static_cast<double>(stop - start);
    SpMat comp(D, D);
    comp.setFromTriplets(trips.begin(), trips.end());
    if (!state.is_diagonal()) comp = to_sparse(state.from_eigenbasis(Mat(comp)));
    out.push_back({comp, mean});
    if (out.size() > max_components)
      throw std::runtime_error("frequency decomposition exceeds " + std::to_string(max_components) +
                               " modular frequencies; use the quadrature path");
    start = stop;
  }
  return out;
}

}  // namespace fockdirichlet
