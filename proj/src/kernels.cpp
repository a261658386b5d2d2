#include "fockdirichlet/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace fockdirichlet::kernels {

namespace scalar {

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  for (Index r = 0; r < a.rows; ++r) {
    double re = 0.0, im = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const cplx v = a.val[k];
      const cplx xv = x[a.col[k]];
      re += v.real() * xv.real() - v.imag() * xv.imag();
      im += v.real() * xv.imag() + v.imag() * xv.real();
    }
    y[r] = {re, im};
  }
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

cplx dotc(std::size_t n, const cplx* x, const cplx* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double nrm2(std::size_t n, const cplx* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return std::sqrt(s);
}

cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += w[i] * (x[i].real() * y[i].real() + x[i].imag() * y[i].imag());
    im += w[i] * (x[i].real() * y[i].imag() - x[i].imag() * y[i].real());
  }
  return {re, im};
}

}  // namespace scalar

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend detect() {
  if (const char* env = std::getenv("FOCKDIRICHLET_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
  }
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<int>& backend_slot() {
  static std::atomic<int> slot{static_cast<int>(detect())};
  return slot;
}

}  // namespace

Backend active_backend() { return static_cast<Backend>(backend_slot().load()); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available()) throw std::runtime_error("AVX2 not supported on this CPU");
  backend_slot().store(static_cast<int>(b));
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  if (active_backend() == Backend::avx2) return avx2::spmv(a, x, y);
  scalar::spmv(a, x, y);
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  if (active_backend() == Backend::avx2) return avx2::axpy(n, alpha, x, y);
  scalar::axpy(n, alpha, x, y);
}

cplx dotc(std::size_t n, const cplx* x, const cplx* y) {
  if (active_backend() == Backend::avx2) return avx2::dotc(n, x, y);
  return scalar::dotc(n, x, y);
}

double nrm2(std::size_t n, const cplx* x) {
  if (active_backend() == Backend::avx2) return avx2::nrm2(n, x);
  return scalar::nrm2(n, x);
}

cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y) {
  if (active_backend() == Backend::avx2) return avx2::weighted_dotc(n, w, x, y);
  return scalar::weighted_dotc(n, w, x, y);
}

Csr::Csr(const SpMat& m) : rows_(m.rows()), cols_(m.cols()) {
  Eigen::SparseMatrix<cplx, Eigen::RowMajor, int> rm(m);
  rm.makeCompressed();
  row_ptr_.assign(rm.outerIndexPtr(), rm.outerIndexPtr() + rm.rows() + 1);
  col_.assign(rm.innerIndexPtr(), rm.innerIndexPtr() + rm.nonZeros());
  val_.assign(rm.valuePtr(), rm.valuePtr() + rm.nonZeros());
}

Vec Csr::multiply(const Vec& x) const {
  if (x.size() != cols_) throw std::invalid_argument("Csr::multiply: dimension mismatch");
  Vec y(rows_);
  spmv(view(), x.data(), y.data());
  return y;
}

}  // namespace fockdirichlet::kernels
