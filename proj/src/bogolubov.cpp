#include <cmath>
#include <random>
#include <stdexcept>

#include "fockdirichlet/bogolubov.hpp"

namespace fockdirichlet {

void BogolubovParams::validate(double tol) const {
  if (std::abs(std::norm(tau) - std::norm(theta) - 1.0) > tol)
    throw std::invalid_argument("bogolubov: |tau|^2 - |theta|^2 must equal 1");
}

void MultimodeBogolubov::validate(double tol) const {
  if (gamma.rows() != kappa.rows() || gamma.cols() != kappa.cols())
    throw std::invalid_argument("bogolubov: gamma and kappa must have equal shape");
  for (Index i = 0; i < gamma.rows(); ++i)
    if (std::abs(gamma.row(i).squaredNorm() - kappa.row(i).squaredNorm() - 1.0) > tol)
      throw std::invalid_argument("bogolubov: row " + std::to_string(i) + " violates sum|gamma|^2 - sum|kappa|^2 = 1");
}

double MultimodeBogolubov::symplectic_defect() const {
  const Mat id = Mat::Identity(gamma.rows(), gamma.rows());
  const Mat g1 = gamma * gamma.adjoint() - kappa * kappa.adjoint() - id;
  const Mat g2 = gamma * kappa.transpose() - kappa * gamma.transpose();
  return std::max(max_abs(g1), max_abs(g2));
}

namespace {

void fill_defects(std::vector<BogolubovPair>& modes, const LatticeConfig& lattice) {
  const auto mask = clean_mask(lattice, 2);
  const Index D = lattice.dimension();
  SpMat id(D, D);
  id.setIdentity();
  for (size_t i = 0; i < modes.size(); ++i) {
    double clean = 0.0, full = 0.0;
    for (size_t j = 0; j < modes.size(); ++j) {
      SpMat d = (modes[i].a * modes[j].a_dagger - modes[j].a_dagger * modes[i].a).matrix;
      if (i == j) d -= id;
      clean = std::max(clean, block_residual(d, mask));
      full = std::max(full, max_abs(d));
    }
    modes[i].clean_defect = clean;
    modes[i].leakage = full;
  }
}

}  // namespace

BogolubovPair bogolubov_pair(const BogolubovParams& p, int site, const LatticeConfig& lattice) {
  p.validate();
  BogolubovPair out;
  out.a = p.tau * annihilator(site, lattice) + p.theta * creator(site, lattice);
  out.a.label = "a_" + std::to_string(site);
  out.a_dagger = out.a.adjoint();
  std::vector<BogolubovPair> v{out};
  fill_defects(v, lattice);
  return v[0];
}

std::vector<BogolubovPair> bogolubov_modes(const MultimodeBogolubov& p, const LatticeConfig& lattice) {
  p.validate();
  if (p.gamma.cols() > lattice.num_sites()) throw std::invalid_argument("bogolubov: more modes than sites");
  std::vector<BogolubovPair> out;
  const Index D = lattice.dimension();
  for (Index i = 0; i < p.gamma.rows(); ++i) {
    LatticeOperator a{SpMat(D, D), {}, "a_" + std::to_string(i)};
    for (Index j = 0; j < p.gamma.cols(); ++j) {
      if (p.gamma(i, j) != cplx(0.0)) a = a + p.gamma(i, j) * annihilator(static_cast<int>(j), lattice);
      if (p.kappa(i, j) != cplx(0.0)) a = a + p.kappa(i, j) * creator(static_cast<int>(j), lattice);
    }
    out.push_back({a, a.adjoint(), 0.0, 0.0});
  }
  fill_defects(out, lattice);
  return out;
}

BogolubovParams boost(double rapidity) { return {std::cosh(rapidity), std::sinh(rapidity)}; }

BogolubovParams compose(const BogolubovParams& first, const BogolubovParams& second) {
  return {first.tau * second.tau + first.theta * std::conj(second.theta),
          first.tau * second.theta + first.theta * std::conj(second.tau)};
}

LatticeOperator minkowski_field(cplx tau, const std::vector<cplx>& x, const LatticeConfig& lattice) {
  const int n = static_cast<int>(x.size());
  if (n < 1) throw std::invalid_argument("minkowski_field: need at least one mode");
  if (n > lattice.num_sites()) throw std::invalid_argument("minkowski_field: more modes than sites");
  const Index D = lattice.dimension();
  LatticeOperator S{SpMat(D, D), {}, "S"};
  for (int i = 0; i < n; ++i) {
    S = S + (tau / std::sqrt(static_cast<double>(n))) * annihilator(i, lattice);
    if (x[i] != cplx(0.0)) S = S + x[i] * creator(i, lattice);
  }
  S.label = "S";
  return S;
}

double minkowski_defect(cplx tau, const std::vector<cplx>& x, const LatticeConfig& lattice) {
  const LatticeOperator S = minkowski_field(tau, x, lattice);
  double xn = 0.0;
  for (cplx v : x) xn += std::norm(v);
  const Index D = lattice.dimension();
  SpMat id(D, D);
  id.setIdentity();
  const SpMat d = commutator(S, S.adjoint()).matrix - (std::norm(tau) - xn) * id;
  return column_residual(d, clean_mask(lattice, 1));
}

Mat LadderPolynomial::evaluate(const Mat& a, const Mat& c) const {
  const Index D = a.rows();
  Mat out = Mat::Zero(D, D);
  for (const auto& [coeff, word] : terms) {
    Mat term = Mat::Identity(D, D);
    for (char ch : word) {
      if (ch == 'a') term = term * a;
      else if (ch == 'c') term = term * c;
      else throw std::invalid_argument("ladder polynomial words use 'a' and 'c' only");
    }
    out += coeff * term;
  }
  return out;
}

LadderPolynomial LadderPolynomial::adjoint() const {
  LadderPolynomial out;
  for (const auto& [coeff, word] : terms) {
    std::string w(word.rbegin(), word.rend());
    for (char& ch : w) ch = ch == 'a' ? 'c' : 'a';
    out.terms.emplace_back(std::conj(coeff), w);
  }
  return out;
}

BogolubovPath lorentz_path() {
  return [](double s) { return boost(s); };
}

BogolubovPath phase_path() {
  return [](double s) { return BogolubovParams{std::exp(kI * s), 0.0}; };
}

namespace {

StatePtr state_of(const Mat& h, double beta) {
  LatticeOperator H{to_sparse(0.5 * (h + h.adjoint())), {0}, "U"};
  if (max_abs(Mat(h - h.adjoint())) > 1e-10 * std::max(1.0, max_abs(h)))
    throw std::invalid_argument("quasi_invariance_rep: U is not selfadjoint");
  return GibbsState::from_hamiltonian(H, beta);
}

LadderPolynomial random_poly(std::mt19937_64& rng) {
  static const char* words[] = {"", "a", "c", "aa", "ac", "ca", "cc"};
  std::normal_distribution<double> nd;
  LadderPolynomial p;
  for (const char* w : words) p.terms.emplace_back(cplx(nd(rng), nd(rng)), w);
  return p;
}

}  // namespace

QuasiInvarianceResult quasi_invariance_rep(const LadderPolynomial& U, const BogolubovPath& path,
                                           const LadderPolynomial& f, double s, int n_max, double beta,
                                           std::uint64_t seed, int pairs) {
  const ModeOps ops = build_mode_ops(n_max);
  const Mat A(ops.A), C(ops.A_dagger);
  const BogolubovParams p = path(s);
  p.validate(1e-10);
  const Mat a = p.tau * A + p.theta * C;
  const Mat c = a.adjoint();

  const StatePtr rho = state_of(U.evaluate(A, C), beta);
  const StatePtr rho_s = state_of(U.evaluate(a, c), beta);
  const Mat left = rho->power(-0.25) * rho_s->power(0.25);
  const Mat right = rho_s->power(0.25) * rho->power(-0.25);
  const auto& lp = rho->log_weights();
  QuasiInvarianceResult out;
  out.condition = std::exp(0.25 * (lp.maxCoeff() - lp.minCoeff()));
  if (out.condition > 1e12) warn("quasi_invariance_rep: rho^{-1/4} condition number " + std::to_string(out.condition));
  out.log_Z = rho->log_Z();
  out.log_Z_s = rho_s->log_Z();

  auto V = [&](const LadderPolynomial& g) { return Mat(left * g.evaluate(a, c) * right); };
  out.value = V(f);

  const KmsMetric metric(rho);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const LadderPolynomial g = random_poly(rng), h = random_poly(rng);
    const Mat g0 = g.evaluate(A, C), h0 = h.evaluate(A, C);
    const cplx before = metric.inner(g0, h0);
    const cplx after = metric.inner(V(g), V(h));
    const double scale = std::sqrt(metric.inner(g0, g0).real() * metric.inner(h0, h0).real());
    worst = std::max(worst, std::abs(after - before) / scale);
  }
  out.unitarity_residual = worst;
  return out;
}

}  // namespace fockdirichlet
