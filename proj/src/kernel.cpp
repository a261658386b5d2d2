#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fockdirichlet/dirichlet.hpp"
#include "quadrature.hpp"

namespace fockdirichlet {

namespace detail {

std::vector<std::pair<double, double>> gauss_legendre_nodes(double a, double b, int panels) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<size_t>(panels) * 20);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (size_t i = 0; i < x.size(); ++i) {
      out.emplace_back(mid - half * x[i], half * w[i]);
      out.emplace_back(mid + half * x[i], half * w[i]);
    }
  }
  return out;
}

}  // namespace detail

void AdmissibleKernel::validate() const {
  if (n < 1) throw std::invalid_argument("kernel: n must be a positive integer");
  if (sigma < 0.0) throw std::invalid_argument("kernel: sigma must be >= 0");
}

double AdmissibleKernel::tail_cutoff() const {
  const double base = std::log(1e12 / (n * std::numbers::pi)) / (2.0 * n * std::numbers::pi);
  return std::max(8.0 / n, base) + 8.0 * sigma;
}

cplx kernel_fourier(const AdmissibleKernel& k, double s) {
  k.validate();
  const double raw = (1.0 / (2.0 * k.n)) / std::cosh((s + k.kappa) / (4.0 * k.n));
  return raw * std::exp(-0.5 * k.sigma * k.sigma * s * s);
}

cplx AdmissibleKernel::eval(cplx t) const {
  validate();
  const double pi = std::numbers::pi;
  if (sigma == 0.0) return std::exp(kI * kappa * t) / std::cosh(2.0 * n * pi * t);
  const double y = std::abs(t.imag());
  if (y * y < 10.0 * sigma * sigma) {
    // eta_sigma(z) = int eta(v) g_sigma(z - v) dv with the Gaussian continued off the axis
    const double half = 10.0 * sigma;
    const int panels = 4 + static_cast<int>(std::ceil(2.0 * half * (4.0 * n + (y + std::abs(kappa) * sigma * sigma) / (sigma * sigma))));
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * pi));
    cplx acc = 0.0;
    for (const auto& [v, w] : detail::gauss_legendre_nodes(t.real() - half, t.real() + half, panels)) {
      const cplx d = t - v;
      acc += w * std::exp(kI * kappa * v) / std::cosh(2.0 * n * pi * v) * std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return acc * norm;
  }
  // Fourier inversion; the Gaussian factor makes eta_sigma entire.
  const double S = (y + std::sqrt(y * y + 80.0 * sigma * sigma)) / (sigma * sigma) + std::abs(kappa);
  const int panels = std::max(16, static_cast<int>(std::ceil(2.0 * S * (1.0 + std::abs(t.real())) / 1.5)));
  cplx acc = 0.0;
  for (const auto& [s, w] : detail::gauss_legendre_nodes(-S, S, panels))
    acc += w * kernel_fourier(*this, s) * std::exp(-kI * s * t);
  return acc / (2.0 * pi);
}

QuadratureResult kernel_fourier_quadrature(const AdmissibleKernel& k, double s, double tol) {
  k.validate();
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double T = 8.0 / k.n + std::log(1e12) / (2.0 * k.n * std::numbers::pi);
  const double a = 2.0 * k.n * std::numbers::pi;
  double err_re = 0.0, err_im = 0.0;
  const double re = gk::integrate([&](double t) { return std::cos((k.kappa + s) * t) / std::cosh(a * t); }, -T, T, 20,
                                  tol, &err_re);
  const double im = gk::integrate([&](double t) { return std::sin((k.kappa + s) * t) / std::cosh(a * t); }, -T, T, 20,
                                  tol, &err_im);
  QuadratureResult out;
  out.value = {re, im};
  out.error_estimate = std::hypot(err_re, err_im);
  if (k.sigma > 0.0) {
    // Convolution with a unit-mass Gaussian multiplies the transform by its own transform.
    const double sg = k.sigma;
    double err_g = 0.0;
    const double g = gk::integrate(
        [&](double u) { return std::exp(-0.5 * u * u / (sg * sg)) * std::cos(s * u) / (sg * std::sqrt(2.0 * std::numbers::pi)); },
        -12.0 * sg, 12.0 * sg, 20, tol, &err_g);
    out.value *= g;
    out.error_estimate += err_g;
  }
  out.converged = out.error_estimate <= 1e-9;
  return out;
}

AdmissibilityReport check_admissibility(const AdmissibleKernel& k) {
  k.validate();
  AdmissibilityReport rep;
  const double T = 4.0;
  const int steps = k.sigma > 0.0 ? 200 : 2000;
  double min_re = std::numeric_limits<double>::infinity();
  double min_sum = std::numeric_limits<double>::infinity();
  double max_sum = 0.0, M = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = -T + 2.0 * T * i / steps;
    const cplx v = k.eval(t);
    min_re = std::min(min_re, v.real());
    rep.max_imag_part = std::max(rep.max_imag_part, std::abs(v.imag()));
    const bool at_pole = k.sigma == 0.0 && std::abs(t) < 1e-12;
    if (!at_pole) {
      const cplx c = k.eval(cplx(t, 0.25)) + k.eval(cplx(t, -0.25));
      min_sum = std::min(min_sum, c.real());
      max_sum = std::max(max_sum, std::abs(c));
    }
    for (double y : {-0.25, -0.125, 0.0, 0.125, 0.25}) {
      const double mag = std::abs(k.eval(cplx(t, y))) * (1.0 + std::abs(t)) * (1.0 + std::abs(t));
      M = std::max(M, std::isfinite(mag) ? mag : std::numeric_limits<double>::infinity());
    }
  }
  rep.real_part_nonnegative = min_re >= -1e-14;
  rep.condition1_flag_complex = rep.max_imag_part > 1e-14;
  rep.min_contour_sum = min_sum;
  rep.max_contour_sum_abs = max_sum;
  rep.contour_sum_identically_zero = max_sum < 1e-10;
  rep.decay_constant = M;
  rep.decay_bounded = std::isfinite(M) && M < 1e6;
  return rep;
}

cplx shifted_kernel_integral(const AdmissibleKernel& k, double y) {
  k.validate();
  const double pole = 1.0 / (4.0 * k.n);
  if (k.sigma == 0.0) {
    const double r = std::fmod(std::abs(y) - pole, 2.0 * pole);
    if (std::abs(r) < 1e-12) throw std::domain_error("shifted_kernel_integral: contour runs through a pole of the raw kernel");
  }
  const double T = k.tail_cutoff();
  cplx acc = 0.0;
  for (const auto& [t, w] : detail::gauss_legendre_nodes(-T, T, 128)) acc += w * k.eval(cplx(t, y));
  return acc;
}

double contour_constant(const AdmissibleKernel& k) {
  if (k.sigma <= 0.0) throw std::domain_error("contour_constant: the raw kernel has poles on the contour; set sigma > 0");
  return (shifted_kernel_integral(k, 0.25) + shifted_kernel_integral(k, -0.25)).real();
}

}  // namespace fockdirichlet
