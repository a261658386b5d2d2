#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "fockdirichlet/dirichlet.hpp"
#include "quadrature.hpp"

namespace fockdirichlet {

Superoperator::Superoperator(SpMat matrix, Index dim, StatePtr metric_state)
    : matrix_(std::move(matrix)), dim_(dim), metric_(std::move(metric_state)) {
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim)
    throw std::invalid_argument("Superoperator: matrix must be D^2 x D^2");
  prune(matrix_);
  csr_ = kernels::Csr(matrix_);
}

Vec Superoperator::apply(const Vec& v) const { return csr_.multiply(v); }

Mat Superoperator::apply(const Mat& f) const { return unvec(apply(vec(f)), dim_); }

namespace {

Mat random_operator(std::mt19937_64& rng, Index D) {
  std::normal_distribution<double> nd;
  Mat m(D, D);
  for (Index c = 0; c < D; ++c)
    for (Index r = 0; r < D; ++r) m(r, c) = cplx(nd(rng), nd(rng));
  return m;
}

SpMat identity(Index D) {
  SpMat id(D, D);
  id.setIdentity();
  return id;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  SpMat out = Eigen::kroneckerProduct(a, b);
  return out;
}

}  // namespace

double Superoperator::verify_symmetry(std::mt19937_64& rng, int pairs, double tol) {
  if (!metric_) throw std::logic_error("verify_symmetry: superoperator carries no metric");
  const KmsMetric metric(metric_);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Mat f = random_operator(rng, dim_);
    const Mat g = random_operator(rng, dim_);
    const cplx a = metric.inner(f, apply(g));
    const cplx b = metric.inner(apply(f), g);
    const double nf = std::sqrt(metric.inner(f, f).real());
    const double ng = std::sqrt(metric.inner(g, g).real());
    worst = std::max(worst, std::abs(a - b) / (nf * ng));
  }
  symmetric_ = worst <= tol;
  return worst;
}

SpMat left_mult(const SpMat& X) { return kron(identity(X.rows()), X); }

SpMat right_mult(const SpMat& X) { return kron(SpMat(X.transpose()), identity(X.rows())); }

Superoperator derivation_super(const LatticeOperator& X) {
  SpMat m = kI * (left_mult(X.matrix) - right_mult(X.matrix));
  return Superoperator(m, X.dim());
}

Superoperator adjoint_derivation_super(const LatticeOperator& X, const KmsMetric& metric) {
  const GibbsState& st = *metric.state();
  const SpMat xs = X.matrix.adjoint();
  const SpMat B = modular_flow(xs, st, cplx(0.0, -0.5));
  const SpMat C = modular_flow(xs, st, cplx(0.0, 0.5));
  SpMat m = kI * (right_mult(B) - left_mult(C));
  return Superoperator(m, X.dim(), metric.state());
}

Mat apply_derivation(const SpMat& X, const Mat& f) { return kI * (X * f - f * X); }

Mat apply_adjoint_derivation(const SpMat& X, const Mat& g, const GibbsState& state) {
  const SpMat xs = X.adjoint();
  const SpMat B = modular_flow(xs, state, cplx(0.0, -0.5));
  const SpMat C = modular_flow(xs, state, cplx(0.0, 0.5));
  return kI * (g * B - C * g);
}

namespace {

// Accumulates superoperator terms either densely (small D) or sparsely.
class Accumulator {
 public:
  explicit Accumulator(Index D) : D_(D), dense_(D * D <= 1024) {
    if (dense_) {
      dense_acc_ = Mat::Zero(D * D, D * D);
    } else {
      sparse_acc_.resize(D * D, D * D);
    }
  }
  void add(const SpMat& term) {
    if (dense_) {
      for (Index c = 0; c < term.outerSize(); ++c)
        for (SpMat::InnerIterator it(term, c); it; ++it) dense_acc_(it.row(), c) += it.value();
    } else {
      pending_.push_back(term);
      if (pending_.size() >= 16) flush();
    }
  }
  // c * (R^T kron L), i.e. f -> c L f R
  void add_sandwich(cplx c, const SpMat& L, const SpMat& R) {
    if (c == cplx(0.0)) return;
    add(c * kron(SpMat(R.transpose()), L));
  }
  SpMat result() {
    if (dense_) return to_sparse(dense_acc_);
    flush();
    sparse_acc_.makeCompressed();
    return sparse_acc_;
  }

 private:
  Index D_;
  bool dense_;
  Mat dense_acc_;
  SpMat sparse_acc_;
  std::vector<SpMat> pending_;

  // pairwise merges keep each sparse sum linear in the operand sizes
  void flush() {
    while (pending_.size() > 1) {
      std::vector<SpMat> next;
      for (size_t i = 0; i + 1 < pending_.size(); i += 2) next.push_back(pending_[i] + pending_[i + 1]);
      if (pending_.size() % 2) next.push_back(std::move(pending_.back()));
      pending_.swap(next);
    }
    if (!pending_.empty()) {
      sparse_acc_ = sparse_acc_.nonZeros() == 0 ? pending_[0] : SpMat(sparse_acc_ + pending_[0]);
      pending_.clear();
    }
  }
};

// Adds sum_{k,l} c_kl delta*_{Y_l} delta_{Y_k} for one weighted direction.
//   delta*_{Y_l} delta_{Y_k}(f) = -(Y_k f B_l - f Y_k B_l - C_l Y_k f + C_l f Y_k)
void add_pair_terms(Accumulator& acc, const std::vector<SpMat>& Y, const std::vector<SpMat>& B,
                    const std::vector<SpMat>& C, const Mat& coeff, Index D) {
  const size_t K = Y.size();
  SpMat P(D, D), Q(D, D);
  for (size_t l = 0; l < K; ++l) {
    SpMat Ytilde(D, D);
    for (size_t k = 0; k < K; ++k)
      if (coeff(k, l) != cplx(0.0)) Ytilde += coeff(k, l) * Y[k];
    prune(Ytilde);
    acc.add_sandwich(-1.0, Ytilde, B[l]);
    P += SpMat(Ytilde * B[l]);
  }
  for (size_t k = 0; k < K; ++k) {
    SpMat Ctilde(D, D);
    for (size_t l = 0; l < K; ++l)
      if (coeff(k, l) != cplx(0.0)) Ctilde += coeff(k, l) * C[l];
    prune(Ctilde);
    acc.add_sandwich(-1.0, Ctilde, Y[k]);
    Q += SpMat(Ctilde * Y[k]);
  }
  prune(P);
  prune(Q);
  acc.add_sandwich(1.0, identity(D), P);
  acc.add_sandwich(1.0, Q, identity(D));
}

void assemble_eigen(Accumulator& acc, const SpMat& Yop, double weight, const GibbsState& st,
                    const AdmissibleKernel& kernel, const AssemblyOptions& opts) {
  if (weight == 0.0) return;
  const auto comps = frequency_components(Yop, st, opts.frequency_tol);
  const Index D = st.dim();
  std::vector<SpMat> Y, B, C;
  for (const auto& c : comps) {
    Y.push_back(c.op);
    const SpMat ys = c.op.adjoint();
    B.push_back(modular_flow(ys, st, cplx(0.0, -0.5)));
    C.push_back(modular_flow(ys, st, cplx(0.0, 0.5)));
  }
  const size_t K = comps.size();
  Mat coeff(K, K);
  for (size_t k = 0; k < K; ++k)
    for (size_t l = 0; l < K; ++l) coeff(k, l) = weight * kernel_fourier(kernel, comps[k].omega - comps[l].omega);
  add_pair_terms(acc, Y, B, C, coeff, D);
}

void assemble_quadrature(Accumulator& acc, const SpMat& Yop, double weight, const GibbsState& st,
                         const AdmissibleKernel& kernel, const AssemblyOptions& opts) {
  if (weight == 0.0) return;
  const Index D = st.dim();
  const double T = std::max(opts.T, kernel.tail_cutoff());
  for (const auto& [t, w] : detail::gauss_legendre_nodes(-T, T, opts.panels)) {
    const cplx c = weight * w * kernel.eval(t);
    if (std::abs(c) < 1e-18 * weight) continue;
    const SpMat Yt = modular_flow(Yop, st, t);
    const SpMat ys = Yt.adjoint();
    std::vector<SpMat> Y{Yt}, B{modular_flow(ys, st, cplx(0.0, -0.5))}, C{modular_flow(ys, st, cplx(0.0, 0.5))};
    Mat coeff(1, 1);
    coeff(0, 0) = c;
    add_pair_terms(acc, Y, B, C, coeff, D);
  }
}

}  // namespace

Superoperator assemble_generator(const std::vector<DerivationDirection>& directions, const KmsMetric& metric,
                                 const AdmissibleKernel& kernel, AssemblyPath path, const AssemblyOptions& opts) {
  kernel.validate();
  const GibbsState& st = *metric.state();
  const Index D = st.dim();
  Accumulator acc(D);
  for (const auto& d : directions) {
    if (d.nu < 0.0 || d.mu < 0.0 || (d.nu == 0.0 && d.mu == 0.0))
      throw std::invalid_argument("direction weights must be nonnegative with one positive");
    if (d.X.dim() != D) throw std::invalid_argument("direction dimension does not match the state");
    const SpMat xs = d.X.matrix.adjoint();
    if (path == AssemblyPath::eigen) {
      assemble_eigen(acc, d.X.matrix, d.nu, st, kernel, opts);
      assemble_eigen(acc, xs, d.mu, st, kernel, opts);
    } else {
      assemble_quadrature(acc, d.X.matrix, d.nu, st, kernel, opts);
      assemble_quadrature(acc, xs, d.mu, st, kernel, opts);
    }
  }
  return Superoperator(acc.result(), D, metric.state());
}

double dirichlet_energy_direct(const SpMat& f, const std::vector<DerivationDirection>& directions,
                               const KmsMetric& metric, const AdmissibleKernel& kernel) {
  const GibbsState& st = *metric.state();
  double energy = 0.0;
  auto one = [&](const SpMat& Y, double weight) {
    if (weight == 0.0) return;
    const auto comps = frequency_components(Y, st);
    std::vector<SpMat> d;
    for (const auto& c : comps) {
      SpMat v = kI * (c.op * f - f * c.op);
      prune(v);
      d.push_back(v);
    }
    cplx acc = 0.0;
    for (size_t k = 0; k < comps.size(); ++k)
      for (size_t l = 0; l < comps.size(); ++l) {
        const cplx h = kernel_fourier(kernel, comps[k].omega - comps[l].omega);
        if (h == cplx(0.0)) continue;
        acc += h * metric.inner(d[l], d[k]);
      }
    energy += weight * acc.real();
  };
  for (const auto& dir : directions) {
    one(dir.X.matrix, dir.nu);
    one(SpMat(dir.X.matrix.adjoint()), dir.mu);
  }
  return energy;
}

double dirichlet_energy(const Mat& f, const Superoperator& minus_L, const KmsMetric& metric) {
  if (minus_L.metric_state() && minus_L.metric_state() != metric.state())
    throw std::invalid_argument("dirichlet_energy: generator assembled for a different metric");
  return metric.inner(f, minus_L.apply(f)).real();
}

Mat gamma1(const Mat& f, const Superoperator& minus_L) {
  const Mat fs = f.adjoint();
  return 0.5 * (-minus_L.apply(Mat(fs * f)) + fs * minus_L.apply(f) + minus_L.apply(fs) * f);
}

Mat gamma1_contour_form(const Mat& f, const std::vector<DerivationDirection>& directions, const GibbsState& state,
                        const AdmissibleKernel& kernel, const AssemblyOptions& opts) {
  if (kernel.sigma <= 0.0) throw std::domain_error("gamma1_contour_form: needs the smoothed kernel (sigma > 0)");
  const Index D = state.dim();
  Mat out = Mat::Zero(D, D);
  const double T = std::max(opts.T, kernel.tail_cutoff());
  for (const auto& [t, w] : detail::gauss_legendre_nodes(-T, T, opts.panels)) {
    const cplx up = kernel.eval(cplx(t, 0.25));
    const cplx down = kernel.eval(cplx(t, -0.25));
    for (const auto& d : directions) {
      const Mat X = d.X.dense();
      const Mat Xt = modular_flow(X, state, cplx(t, -0.25));
      const Mat Xst = modular_flow(Mat(X.adjoint()), state, cplx(t, -0.25));
      const Mat dx = apply_derivation(to_sparse(Xt), f);
      const Mat dxs = apply_derivation(to_sparse(Xst), f);
      const Mat sq_x = dx.adjoint() * dx;
      const Mat sq_xs = dxs.adjoint() * dxs;
      out += w * ((d.nu * sq_xs + d.mu * sq_x) * up + (d.nu * sq_x + d.mu * sq_xs) * down);
    }
  }
  return out;
}

Mat gamma1_eigen_closed_form(const Mat& f, const DerivationDirection& d, const AdmissibleKernel& kernel) {
  if (!d.xi) throw std::invalid_argument("gamma1_eigen_closed_form: direction is not a modular eigenvector");
  const double xi = *d.xi;
  const cplx up = shifted_kernel_integral(kernel, 0.25);
  const cplx down = shifted_kernel_integral(kernel, -0.25);
  const Mat dx = apply_derivation(d.X.matrix, f);
  const Mat dxs = apply_derivation(SpMat(d.X.matrix.adjoint()), f);
  const Mat sq_x = dx.adjoint() * dx;
  const Mat sq_xs = dxs.adjoint() * dxs;
  const Mat twice = (d.nu * up + d.mu * down) * std::exp(xi) * sq_xs + (d.mu * up + d.nu * down) * std::exp(-xi) * sq_x;
  return 0.5 * twice;
}

}  // namespace fockdirichlet
