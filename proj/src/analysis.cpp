#include "fockdirichlet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace fockdirichlet {

namespace {

// Lanczos with full reorthogonalization; returns Ritz values ascending.
std::vector<double> lanczos(const std::function<Vec(const Vec&)>& op, Index N, int steps, std::uint64_t seed) {
  const int m = static_cast<int>(std::min<Index>(N, steps));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Mat Q(N, m + 1);
  Vec q(N);
  for (Index i = 0; i < N; ++i) q[i] = cplx(nd(rng), nd(rng));
  Q.col(0) = q / q.norm();
  RealVec alpha(m), beta(m);
  int used = m;
  for (int j = 0; j < m; ++j) {
    Vec w = op(Q.col(j));
    alpha[j] = Q.col(j).dot(w).real();
    // two passes of classical Gram-Schmidt against the whole basis
    for (int pass = 0; pass < 2; ++pass) {
      const Vec h = Q.leftCols(j + 1).adjoint() * w;
      w -= Q.leftCols(j + 1) * h;
    }
    beta[j] = w.norm();
    if (beta[j] < 1e-12 * std::max(1.0, std::abs(alpha[j]))) {
      used = j + 1;
      break;
    }
    Q.col(j + 1) = w / beta[j];
  }
  RealVec d = alpha.head(used), e = beta.head(std::max(used - 1, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + used);
  return out;
}

}  // namespace

GapReport spectral_gap(const Superoperator& minus_L, const KmsMetric& metric, const GapOptions& opts) {
  const Index D = metric.dim();
  if (minus_L.dim() != D) throw std::invalid_argument("spectral_gap: dimension mismatch");
  const Index N = D * D;
  GapReport rep;
  const RealVec& lp = metric.state()->log_weights();
  rep.condition = std::exp(0.5 * (lp.maxCoeff() - lp.minCoeff()));
  if (rep.condition > 1e12)
    warn("spectral_gap: KMS symmetrization ill-conditioned, condition number " + std::to_string(rep.condition));
  rep.identity_residual = minus_L.apply(vec(Mat::Identity(D, D))).norm();

  std::vector<double> ev;
  if (N <= opts.dense_limit) {
    rep.method = "dense";
    Mat S(N, N);
    Vec e = Vec::Zero(N);
    for (Index i = 0; i < N; ++i) {
      e[i] = 1.0;
      S.col(i) = metric.whiten(minus_L.apply(metric.unwhiten(e)));
      e[i] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (S + S.adjoint())), Eigen::EigenvaluesOnly);
    ev.assign(es.eigenvalues().data(), es.eigenvalues().data() + N);
  } else if (metric.state()->is_diagonal()) {
    rep.method = "shift-invert lanczos";
    const RealVec w = metric.diagonal_weights().array().sqrt();
    SpMat S = minus_L.matrix();
    for (Index c = 0; c < S.outerSize(); ++c)
      for (SpMat::InnerIterator it(S, c); it; ++it) it.valueRef() *= w[it.row()] / w[c];
    S = 0.5 * (S + SpMat(S.adjoint()));
    double scale = 0.0;
    for (Index c = 0; c < S.outerSize(); ++c)
      for (SpMat::InnerIterator it(S, c); it; ++it) scale = std::max(scale, std::abs(it.value()));
    const double tau = 1e-3 * std::max(scale, 1e-12);
    SpMat shifted = S;
    for (Index i = 0; i < N; ++i) shifted.coeffRef(i, i) += tau;
    shifted.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw std::runtime_error("spectral_gap: shifted factorization failed");
    auto ritz = lanczos([&](const Vec& v) { return Vec(lu.solve(v)); }, N, opts.lanczos_steps, 7);
    for (double th : ritz)
      if (th > 0.0) ev.push_back(1.0 / th - tau);
    std::sort(ev.begin(), ev.end());
  } else {
    rep.method = "lanczos";
    ev = lanczos([&](const Vec& v) { return metric.whiten(minus_L.apply(metric.unwhiten(v))); }, N,
                 opts.lanczos_steps, 7);
  }
  const size_t k = std::min<size_t>(static_cast<size_t>(opts.k), ev.size());
  rep.eigenvalues.assign(ev.begin(), ev.begin() + static_cast<long>(k));
  rep.min_eigenvalue = ev.empty() ? 0.0 : ev.front();
  for (double v : ev) {
    if (v <= opts.kernel_tol) {
      ++rep.kernel_dim;
    } else {
      rep.gap = v;
      break;
    }
  }
  return rep;
}

GapReport model_gap(const BuiltModel& model, const AdmissibleKernel& kernel, const GapOptions& opts) {
  const KmsMetric metric(model.state);
  Superoperator S;
  try {
    S = assemble_generator(model.directions, metric, kernel, AssemblyPath::eigen);
  } catch (const std::runtime_error&) {
    S = assemble_generator(model.directions, metric, kernel, AssemblyPath::quadrature);
  }
  GapReport rep = spectral_gap(S, metric, opts);
  rep.model = model_kind_name(model.spec.kind);
  rep.sites = model.spec.lattice.num_sites();
  rep.n_max = model.spec.lattice.n_max;
  return rep;
}

TestSequence parse_test_sequence(const std::string& name) {
  if (name == "sum A†" || name == "sum A*" || name == "sum_creators") return TestSequence::sum_creators;
  if (name == "sum N" || name == "sum_numbers") return TestSequence::sum_numbers;
  throw std::invalid_argument("unknown test sequence '" + name + "' (expected \"sum A*\" or \"sum N\")");
}

std::string test_sequence_name(TestSequence t) { return t == TestSequence::sum_creators ? "sum A*" : "sum N"; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("loglog_slope: non-positive value");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

LatticeOperator test_operator(TestSequence test, const std::vector<int>& sites, const LatticeConfig& lat) {
  LatticeOperator F{SpMat(lat.dimension(), lat.dimension()), {}, "F"};
  for (int s : sites) F = F + (test == TestSequence::sum_creators ? creator(s, lat) : number_op(s, lat));
  return F;
}

cplx state_mean(const GibbsState& st, const SpMat& F) {
  if (!st.is_diagonal()) return (st.rho() * F).trace();
  const RealVec p = st.log_weights().array().exp();
  cplx mean = 0.0;
  for (Index i = 0; i < F.rows(); ++i) mean += p[i] * F.coeff(i, i);
  return mean;
}

int support_span(const DerivationDirection& d) {
  return d.X.support.empty() ? 0 : *d.X.support.rbegin() - *d.X.support.begin() + 1;
}

// Window width when the model on an open chain is the union of translates of the model on a
// chain of that width, with a product reference state; 0 otherwise.
int local_window(const ModelSpec& base) {
  switch (base.kind) {
    case ModelKind::z_field:
    case ModelKind::y_field:
    case ModelKind::w_ops:
    case ModelKind::z_power:
    case ModelKind::y_power:
    case ModelKind::invariant_aij:
      break;
    default:
      return 0;
  }
  auto probe = [&](int sites) {
    ModelSpec s = base;
    s.lattice = LatticeConfig::chain(sites, 1);
    s.lattice.neighbor_radius = base.lattice.neighbor_radius;
    return build_model(s);
  };
  int W = 0;
  const BuiltModel wide = probe(6);
  for (const auto& d : wide.directions) W = std::max(W, support_span(d));
  if (W < 1 || W > 4) return 0;
  const BuiltModel narrow = probe(W);
  for (const auto& d : narrow.directions)
    if (support_span(d) != W) return 0;
  if (wide.directions.size() != static_cast<size_t>(6 - W + 1) * narrow.directions.size()) return 0;
  return W;
}

}  // namespace

ScalingReport rayleigh_scaling(const ModelSpec& base, TestSequence test, const std::vector<int>& sizes,
                               const AdmissibleKernel& kernel, const ScalingOptions& opts) {
  for (size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw std::invalid_argument("rayleigh_scaling: sizes must increase");
  if (sizes.empty() || sizes.front() < 1) throw std::invalid_argument("rayleigh_scaling: sizes must be positive");
  const bool global = base.kind == ModelKind::mean_field || base.kind == ModelKind::mean_field_n;
  const int pad = global ? 0 : opts.pad;
  if (pad < 0) throw std::invalid_argument("rayleigh_scaling: pad must be >= 0");
  const int W = opts.local && !global ? local_window(base) : 0;
  ScalingReport rep;
  rep.method = W > 0 ? "local-window" : "full";

  // window model and single-site variance, shared by every size
  std::optional<BuiltModel> window;
  double site_variance = 0.0;
  if (W > 0) {
    ModelSpec s = base;
    s.lattice = LatticeConfig::chain(W, base.lattice.n_max);
    s.lattice.neighbor_radius = base.lattice.neighbor_radius;
    window = build_model(s);
    ModelSpec one = s;
    one.kind = ModelKind::z_power;  // any product-state model; only the state is used
    one.lattice = LatticeConfig::chain(1, base.lattice.n_max);
    const auto st = GibbsState::from_hamiltonian(total_number(one.lattice), base.beta);
    const KmsMetric m1(st);
    const SpMat F1 = test_operator(test, {0}, one.lattice).matrix;
    site_variance = m1.inner(F1, F1).real() - std::norm(state_mean(*st, F1));
  }

  for (int n : sizes) {
    const int N = n + 2 * pad;
    double energy = 0.0, variance = 0.0;
    int crossing = 0;
    if (W > 0) {
      const KmsMetric metric(window->state);
      const auto& lat = window->spec.lattice;
      // E depends only on which window sites lie in the box; cache per pattern
      std::map<std::vector<int>, double> cache;
      for (int p = 0; p + W <= N; ++p) {
        std::vector<int> inside;
        for (int s = 0; s < W; ++s)
          if (p + s >= pad && p + s < pad + n) inside.push_back(s);
        if (inside.empty()) continue;
        if (static_cast<int>(inside.size()) < W) crossing += static_cast<int>(window->directions.size());
        auto it = cache.find(inside);
        if (it == cache.end()) {
          const SpMat F = test_operator(test, inside, lat).matrix;
          it = cache.emplace(inside, dirichlet_energy_direct(F, window->directions, metric, kernel)).first;
        }
        energy += it->second;
      }
      variance = n * site_variance;
    } else {
      ModelSpec spec = base;
      spec.lattice = LatticeConfig::chain(N, base.lattice.n_max);
      spec.lattice.neighbor_radius = base.lattice.neighbor_radius;
      const double D = std::pow(static_cast<double>(spec.lattice.local_dim()), N);
      // KMS weights are D^2 reals; the state is dense D x D for the global models
      const double bytes = 8.0 * D * D + (global ? 48.0 * D * D : 128.0 * D * (N + 16));
      if (opts.budget_mb > 0.0 && bytes > opts.budget_mb * 1024.0 * 1024.0) {
        rep.partial = true;
        rep.note = "stopped before size " + std::to_string(n) + ": estimated " + std::to_string(bytes / 1048576.0) +
                   " MB exceeds budget";
        break;
      }
      const BuiltModel model = build_model(spec);
      const KmsMetric metric(model.state);
      std::vector<int> box;
      for (int s = pad; s < pad + n; ++s) box.push_back(s);
      const SpMat F = test_operator(test, box, spec.lattice).matrix;
      energy = dirichlet_energy_direct(F, model.directions, metric, kernel);
      variance = metric.inner(F, F).real() - std::norm(state_mean(*model.state, F));
      for (const auto& d : model.directions) {
        bool in = false, out = false;
        for (int s : d.X.support) (s >= pad && s < pad + n ? in : out) = true;
        crossing += in && out;
      }
    }
    rep.sizes.push_back(n);
    rep.energies.push_back(energy);
    rep.variances.push_back(variance);
    rep.ratios.push_back(energy / variance);
    rep.boundary.push_back(crossing);
  }
  if (rep.sizes.size() >= 2) {
    std::vector<double> x(rep.sizes.begin(), rep.sizes.end());
    const bool positive = std::all_of(rep.ratios.begin(), rep.ratios.end(), [](double r) { return r > 0.0; });
    if (positive) rep.fitted_exponent = loglog_slope(x, rep.ratios);
    else rep.note += (rep.note.empty() ? "" : "; ") + std::string("ratio vanishes at some size; exponent not fitted");
  }
  if (!global && !rep.sizes.empty()) {
    double lo = INFINITY, hi = 0.0;
    for (size_t i = 0; i < rep.sizes.size(); ++i) {
      if (rep.boundary[i] == 0) continue;
      const double v = rep.energies[i] / rep.boundary[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rep.boundary_variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
  }
  return rep;
}

Mat graph_laplacian(const LatticeConfig& lattice, bool ordered_pairs) {
  const int L = lattice.num_sites();
  Mat lap = Mat::Zero(L, L);
  const auto edges = ordered_pairs ? lattice.ordered_edges() : lattice.edges();
  for (auto [j, k] : edges) {
    lap(j, j) += 1.0;
    lap(k, k) += 1.0;
    lap(j, k) -= 1.0;
    lap(k, j) -= 1.0;
  }
  return lap;
}

HeatReport heat_comparison(const ModelSpec& spec, const AdmissibleKernel& kernel, const HeatOptions& opts) {
  if (spec.kind != ModelKind::z_power || spec.n != 1 || spec.m != 1)
    throw std::invalid_argument("heat_comparison: needs the Z-model (z_power with n = m = 1)");
  const BuiltModel model = build_model(spec);
  if (!model.state->is_diagonal()) throw std::invalid_argument("heat_comparison: needs a product state");
  const auto& lat = spec.lattice;
  const int L = lat.num_sites();
  const Index D = lat.dimension();
  const KmsMetric metric(model.state);
  const Superoperator S = assemble_generator(model.directions, metric, kernel, AssemblyPath::eigen);

  HeatReport rep;
  rep.C_formula = 4.0 * kernel_fourier(kernel, 0.0).real() * std::sinh(0.5 * spec.beta);
  // each ordered direction scale*(A_j - A_k) contributes scale^2 / 2 per orientation to its bond
  rep.laplacian = graph_laplacian(lat, false) * (spec.scale * spec.scale * (uses_ordered_pairs(spec) ? 1.0 : 0.5));

  const auto mask = clean_mask(lat, opts.clean_margin);
  std::vector<Index> cols;
  for (Index c = 0; c < D; ++c)
    if (mask[c]) cols.push_back(c);
  if (cols.empty()) throw std::invalid_argument("heat_comparison: n_max too small for the clean margin");
  const Index rows = D * static_cast<Index>(cols.size());
  auto restrict_cols = [&](const Mat& m) {
    Vec out(rows);
    for (size_t i = 0; i < cols.size(); ++i) out.segment(static_cast<Index>(i) * D, D) = m.col(cols[i]);
    return out;
  };
  std::vector<Mat> basis;
  for (int j = 0; j < L; ++j) basis.push_back(annihilator(j, lat).dense());
  for (int j = 0; j < L; ++j) basis.push_back(creator(j, lat).dense());
  Mat B(rows, 2 * L);
  for (int i = 0; i < 2 * L; ++i) B.col(i) = restrict_cols(basis[i]);
  const auto qr = B.colPivHouseholderQr();
  auto coefficients = [&](const Mat& m, double* residual) {
    const Vec y = restrict_cols(m);
    const Vec c = qr.solve(y);
    if (residual) *residual = (y - B * c).norm();
    return c;
  };

  rep.restriction = Mat::Zero(2 * L, 2 * L);
  for (int i = 0; i < 2 * L; ++i) {
    double res = 0.0;
    rep.restriction.col(i) = coefficients(S.apply(basis[i]), &res);
    rep.span_residual = std::max(rep.span_residual, res / B.col(i).norm());
  }
  Mat target = Mat::Zero(2 * L, 2 * L);
  target.topLeftCorner(L, L) = rep.C_formula * rep.laplacian;
  target.bottomRightCorner(L, L) = rep.C_formula * rep.laplacian;
  rep.restriction_error = max_abs(Mat(rep.restriction - target));
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (rep.restriction + rep.restriction.adjoint())), Eigen::EigenvaluesOnly);
    rep.restriction_eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + 2 * L);
  }
  const double plus = max_abs(Mat(rep.restriction - target));
  const double minus = max_abs(Mat(rep.restriction + target));
  rep.sign_match = plus <= minus ? "L(A_l) = C sum_{j~l} (A_j - A_l), i.e. dk/dt = C Delta k with -L positive"
                                 : "L(A_l) = C sum_{j~l} (A_l - A_j), i.e. -L negative";

  // (iii) trajectories
  std::vector<double> k0 = opts.kappa0;
  if (k0.empty()) {
    k0.assign(L, 0.0);
    k0[0] = 1.0;
  }
  if (static_cast<int>(k0.size()) != L) throw std::invalid_argument("heat_comparison: kappa0 length must equal |L|");
  Mat f = Mat::Zero(D, D);
  for (int j = 0; j < L; ++j) f += k0[j] * (basis[j] + opts.sign * basis[L + j]);
  // Trajectory coefficients are the KMS-orthogonal projection onto the span: the truncation
  // defect is small in the state's norm but not entrywise near the cutoff.
  Mat gram(2 * L, 2 * L);
  for (int i = 0; i < 2 * L; ++i)
    for (int j = 0; j < 2 * L; ++j) gram(i, j) = metric.inner(basis[i], basis[j]);
  const auto gram_ldlt = gram.ldlt();
  auto kms_coefficients = [&](const Mat& m) {
    Vec b(2 * L);
    for (int i = 0; i < 2 * L; ++i) b[i] = metric.inner(basis[i], m);
    return Vec(gram_ldlt.solve(b));
  };
  Eigen::SelfAdjointEigenSolver<Mat> lap_es(rep.laplacian);
  for (double t : opts.times) {
    const SemigroupResult r = semigroup_apply(S, f, t, opts.krylov);
    const Vec c = kms_coefficients(r.value);
    const Vec expo = (-t * rep.C_formula * lap_es.eigenvalues().array()).exp().cast<cplx>();
    const Vec kappa = lap_es.eigenvectors() * expo.asDiagonal() * lap_es.eigenvectors().adjoint() *
                      Eigen::Map<const RealVec>(k0.data(), L).cast<cplx>();
    std::vector<double> full(L), heat(L);
    for (int j = 0; j < L; ++j) {
      // A and sign*A* parts should agree; report their average
      full[j] = 0.5 * (c[j] + opts.sign * c[L + j]).real();
      heat[j] = kappa[j].real();
      rep.trajectory_error = std::max({rep.trajectory_error, std::abs(c[j] - kappa[j]),
                                       std::abs(opts.sign * c[L + j] - kappa[j])});
    }
    rep.times.push_back(t);
    rep.full_coefficients.push_back(full);
    rep.heat_coefficients.push_back(heat);
  }
  return rep;
}

DecayReport polynomial_decay_probe(int ring, double C, int points) {
  if (ring < 3) throw std::invalid_argument("decay probe: ring needs at least 3 sites");
  if (!(C > 0.0)) throw std::invalid_argument("decay probe: C must be positive");
  DecayReport rep;
  rep.ring = ring;
  rep.C = C;
  rep.window_lo = 1.0 / C;
  rep.window_hi = static_cast<double>(ring) * ring / (8.0 * C);
  if (rep.window_hi <= 2.0 * rep.window_lo) {
    rep.note = "fit window [1/C, L^2/(8C)] is empty for this ring length";
    return rep;
  }
  const LatticeConfig lat = LatticeConfig::chain(ring, 1, true);
  const Mat lap = graph_laplacian(lat, false);
  Eigen::SelfAdjointEigenSolver<Mat> es(lap);
  const double t_end = 4.0 * rep.window_hi;
  // t = 0 plus log-spaced points on [window_lo / 4, t_end]
  rep.times.push_back(0.0);
  const double a = std::log(rep.window_lo / 4.0), b = std::log(t_end);
  for (int i = 0; i < points; ++i) rep.times.push_back(std::exp(a + (b - a) * i / (points - 1)));
  Vec k0 = Vec::Zero(ring);
  k0[0] = 1.0;
  std::vector<double> wx, wy, tx, ty;
  for (double t : rep.times) {
    const Vec expo = (-t * C * es.eigenvalues().array()).exp().cast<cplx>();
    const Vec k = es.eigenvectors() * expo.asDiagonal() * es.eigenvectors().adjoint() * k0;
    // delta_{A_j}(f) = i kappa_j [A_j, A_j*] = i kappa_j I, whose KMS norm is |kappa_j|
    const double sup = k.cwiseAbs().maxCoeff();
    rep.sup_norm.push_back(sup);
    if (t >= rep.window_lo && t <= rep.window_hi) {
      wx.push_back(t);
      wy.push_back(sup);
    } else if (t > 2.0 * rep.window_hi && sup - 1.0 / ring > 1e-13) {
      tx.push_back(t);
      ty.push_back(std::log(sup - 1.0 / ring));
    }
  }
  rep.window_points = static_cast<int>(wx.size());
  if (wx.size() >= 2) rep.fitted_slope = loglog_slope(wx, wy);
  if (tx.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < tx.size(); ++i) {
      sx += tx[i];
      sy += ty[i];
      sxx += tx[i] * tx[i];
      sxy += tx[i] * ty[i];
    }
    const double n = static_cast<double>(tx.size());
    rep.tail_rate = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  rep.tail_rate_predicted = C * (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / ring));
  return rep;
}

LRReport lieb_robinson_probe(const LRSpec& spec) {
  if (spec.sites < 4) throw std::invalid_argument("lieb_robinson_probe: chain length must be >= 4");
  if (spec.site < 0 || spec.site >= spec.sites) throw std::invalid_argument("lieb_robinson_probe: site out of range");
  const LatticeConfig lat = LatticeConfig::chain(spec.sites, spec.n_max);
  const Index D = lat.dimension();
  std::vector<std::pair<LatticeOperator, LatticeOperator>> a;
  for (int s = 0; s < spec.sites; ++s) a.push_back(mollify(s, spec.epsilon, lat));
  std::vector<Mat> phi;  // bond (s, s+1)
  Mat H = Mat::Zero(D, D);
  for (int s = 0; s + 1 < spec.sites; ++s) {
    const Mat p = spec.lambda * (a[s].first * a[s + 1].second + a[s].second * a[s + 1].first).dense();
    if (max_abs(Mat(p - p.adjoint())) > 1e-12) throw std::invalid_argument("lieb_robinson_probe: potential not Hermitian");
    phi.push_back(p);
    H += p;
  }
  auto opnorm = [](const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(m.adjoint() * m), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  };
  LRReport rep;
  std::vector<double> bond_norm;
  for (const auto& p : phi) bond_norm.push_back(opnorm(p));
  for (int s = 0; s < spec.sites; ++s) {
    double acc = 0.0;
    for (int b = 0; b < static_cast<int>(phi.size()); ++b)
      if (b == s || b + 1 == s) acc += bond_norm[b];
    rep.c_phi = std::max(rep.c_phi, 2.0 * acc);
  }

  // distance from j to bond b = min over its two sites
  std::vector<int> bond_of_distance;
  for (int d = 0;; ++d) {
    int found = -1;
    for (int b = 0; b < static_cast<int>(phi.size()); ++b)
      if (std::min(std::abs(b - spec.site), std::abs(b + 1 - spec.site)) == d) {
        found = b;
        break;
      }
    if (found < 0) break;
    bond_of_distance.push_back(found);
    rep.distances.push_back(d);
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Mat aj = a[spec.site].first.dense();
  const Mat aj_eig = es.eigenvectors().adjoint() * aj * es.eigenvectors();
  for (double t : spec.times) {
    const Vec phase = (kI * t * es.eigenvalues().array().cast<cplx>()).exp();
    // alpha_t(a) = e^{iHt} a e^{-iHt}
    const Mat evolved = es.eigenvectors() * (phase.asDiagonal() * aj_eig * phase.conjugate().asDiagonal()) *
                        es.eigenvectors().adjoint();
    std::vector<double> row;
    for (int b : bond_of_distance) row.push_back(opnorm(Mat(phi[b] * evolved - evolved * phi[b])));
    rep.B.push_back(row);
    rep.times.push_back(t);
  }

  // least squares log B = log D + C t - m d over the resolved entries
  std::vector<std::array<double, 4>> pts;
  for (size_t i = 0; i < rep.times.size(); ++i)
    for (size_t d = 0; d < rep.distances.size(); ++d) {
      if (rep.times[i] == 0.0 && rep.distances[d] >= 1) rep.max_zero_time = std::max(rep.max_zero_time, rep.B[i][d]);
      if (rep.B[i][d] > 1e-10) pts.push_back({1.0, rep.times[i], -static_cast<double>(rep.distances[d]), std::log(rep.B[i][d])});
    }
  if (pts.size() < 3) throw std::runtime_error("lieb_robinson_probe: too few resolved points to fit");
  Eigen::MatrixXd X(pts.size(), 3);
  Eigen::VectorXd y(pts.size()), w(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    X.row(i) << pts[i][0], pts[i][1], pts[i][2];
    y[i] = pts[i][3];
    // later times carry the asymptotic cone; weight them up linearly
    w[i] = 1.0 + pts[i][1];
  }
  const Eigen::VectorXd sw = w.array().sqrt();
  const Eigen::VectorXd beta = (sw.asDiagonal() * X).colPivHouseholderQr().solve(sw.asDiagonal() * y);
  const double shift = (y - X * beta).maxCoeff();
  rep.D = std::exp(beta[0] + std::max(shift, 0.0));
  rep.C = beta[1];
  rep.m = beta[2];
  rep.bound_holds = true;
  for (size_t i = 0; i < rep.times.size(); ++i)
    for (size_t d = 0; d < rep.distances.size(); ++d) {
      const double bound = rep.D * std::exp(rep.C * rep.times[i] - rep.m * rep.distances[d]);
      if (rep.B[i][d] > bound * (1.0 + 1e-12)) rep.bound_holds = false;
    }
  rep.decreasing_in_d = true;
  for (size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.times[i] == 0.0) continue;
    for (size_t d = 1; d < rep.distances.size(); ++d)
      if (rep.B[i][d] > rep.B[i][d - 1]) rep.decreasing_in_d = false;
    rep.short_time_ratio.push_back(rep.B[i][0] / rep.times[i]);
  }
  return rep;
}

}  // namespace fockdirichlet
