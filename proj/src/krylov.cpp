#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "fockdirichlet/dirichlet.hpp"

namespace fockdirichlet {

// Expokit-style expv: w = exp(-t S) v with adaptive substeps.
Vec expv(const std::function<Vec(const Vec&)>& matvec, const Vec& v, double t, const KrylovOptions& opts, double* err,
         int* steps, double norm_estimate) {
  const std::size_t n = v.size();
  const int m_max = static_cast<int>(std::min<std::size_t>(opts.krylov_dim, n));
  const double beta0 = kernels::nrm2(n, v.data());
  Vec w = v;
  if (err) *err = 0.0;
  if (steps) *steps = 0;
  if (beta0 == 0.0 || t == 0.0) return w;

  double anorm = norm_estimate;
  if (anorm <= 0.0) {
    // cheap estimate from a few power iterations
    Vec x = v / beta0;
    for (int i = 0; i < 5; ++i) {
      Vec y = matvec(x);
      anorm = std::max(anorm, kernels::nrm2(n, y.data()));
      const double ny = kernels::nrm2(n, y.data());
      if (ny == 0.0) break;
      x = y / ny;
    }
    anorm = std::max(anorm, 1e-300);
  }

  const double tol = opts.tol;
  const double gamma = 0.9, delta = 1.2;
  double t_now = 0.0, err_total = 0.0;
  double beta = beta0;
  double t_step = (1.0 / anorm) * std::pow((tol * std::pow((m_max + 1) / std::exp(1.0), m_max + 1) *
                                            std::sqrt(2.0 * M_PI * (m_max + 1))) /
                                               (4.0 * beta * anorm),
                                           1.0 / m_max);
  t_step = std::min(t_step, t);
  int nstep = 0;

  Mat V(n, m_max + 1);
  while (t_now < t) {
    if (++nstep > opts.max_steps) throw std::runtime_error("expv: step limit exceeded");
    const double t_rem = t - t_now;
    t_step = std::min(t_step, t_rem);

    Mat H = Mat::Zero(m_max + 2, m_max + 2);
    V.col(0) = w / beta;
    int m = m_max;
    bool happy = false;
    double hnorm = 0.0;
    for (int j = 0; j < m_max; ++j) {
      Vec p = -matvec(V.col(j));
      for (int i = 0; i <= j; ++i) {
        const cplx h = kernels::dotc(n, V.col(i).data(), p.data());
        H(i, j) = h;
        kernels::axpy(n, -h, V.col(i).data(), p.data());
      }
      const double s = kernels::nrm2(n, p.data());
      if (s < 1e-14 * anorm * std::max(1.0, t_rem)) {
        happy = true;
        m = j + 1;
        t_step = t_rem;
        break;
      }
      H(j + 1, j) = s;
      V.col(j + 1) = p / s;
    }
    if (!happy) {
      H(m_max + 1, m_max) = 1.0;
      Vec av = -matvec(V.col(m_max));
      hnorm = kernels::nrm2(n, av.data());
    }

    const int mx = happy ? m : m_max + 2;
    double err_loc = 0.0;
    Mat F;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Mat Hs = H.topLeftCorner(mx, mx) * cplx(t_step);
      F = Hs.exp();
      if (happy) {
        err_loc = tol;
        break;
      }
      const double phi1 = std::abs(beta * F(m_max, 0));
      const double phi2 = std::abs(beta * F(m_max + 1, 0) * hnorm);
      if (phi1 > 10.0 * phi2) {
        err_loc = phi2;
      } else if (phi1 > phi2) {
        err_loc = (phi1 * phi2) / (phi1 - phi2);
      } else {
        err_loc = phi1;
      }
      if (err_loc <= delta * t_step * tol * beta0) break;
      t_step *= gamma * std::pow(t_step * tol * beta0 / err_loc, 1.0 / m_max);
      const double s = std::pow(10.0, std::floor(std::log10(t_step)) - 1.0);
      t_step = std::ceil(t_step / s) * s;
    }

    const int mb = happy ? m : m_max + 1;
    w = V.leftCols(mb) * (beta * F.col(0).head(mb));
    beta = kernels::nrm2(n, w.data());
    if (beta == 0.0) break;
    t_now += t_step;
    err_total += std::max(err_loc, 0.0);
    if (!happy) {
      t_step = gamma * t_step * std::pow(t_step * tol * beta0 / std::max(err_loc, 1e-300), 1.0 / m_max);
      const double s = std::pow(10.0, std::floor(std::log10(t_step)) - 1.0);
      t_step = std::ceil(t_step / s) * s;
    }
  }
  if (err) *err = err_total;
  if (steps) *steps = nstep;
  return w;
}

SemigroupResult semigroup_apply(const Superoperator& minus_L, const Mat& f, double t, const KrylovOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
  SemigroupResult out;
  double err = 0.0;
  int steps = 0;
  auto mv = [&](const Vec& x) { return minus_L.apply(x); };
  Vec w = expv(mv, vec(f), t, opts, &err, &steps);
  out.value = unvec(w, minus_L.dim());
  out.error_estimate = err;
  out.steps = steps;
  out.converged = err <= std::max(1e-8, 1e3 * opts.tol) * std::max(1.0, vec(f).norm());
  return out;
}

}  // namespace fockdirichlet
