#include "fockdirichlet/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define FD_AVX2 __attribute__((target("avx2,fma")))
#endif

namespace fockdirichlet::kernels::avx2 {

#if defined(__x86_64__) || defined(__i386__)

namespace {

// (a0,a1) * (x0,x1) for packed complex pairs.
FD_AVX2 inline __m256d cmul(__m256d a, __m256d x) {
  const __m256d ar = _mm256_movedup_pd(a);
  const __m256d ai = _mm256_permute_pd(a, 0xF);
  const __m256d xs = _mm256_permute_pd(x, 0x5);
  return _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, xs));
}

FD_AVX2 inline cplx hsum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return {t[0] + t[2], t[1] + t[3]};
}

}  // namespace

FD_AVX2 void spmv(const CsrView& a, const cplx* x, cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  for (Index r = 0; r < a.rows; ++r) {
    int k = a.row_ptr[r];
    const int end = a.row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 1 < end; k += 2) {
      const __m256d v = _mm256_loadu_pd(reinterpret_cast<const double*>(a.val + k));
      const __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xd + 2 * a.col[k + 1]), _mm_loadu_pd(xd + 2 * a.col[k]));
      acc = _mm256_add_pd(acc, cmul(v, xv));
    }
    cplx s = hsum(acc);
    if (k < end) s += a.val[k] * x[a.col[k]];
    y[r] = s;
  }
}

FD_AVX2 void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  const __m256d al = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(), alpha.real());
  double* yd = reinterpret_cast<double*>(y);
  const double* xd = reinterpret_cast<const double*>(x);
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(yv, cmul(al, xv)));
  }
  if (i < n) y[i] += alpha * x[i];
}

FD_AVX2 cplx dotc(std::size_t n, const cplx* x, const cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  const double* yd = reinterpret_cast<const double*>(y);
  __m256d same = _mm256_setzero_pd();
  __m256d cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    same = _mm256_fmadd_pd(xv, yv, same);
    cross = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), cross);
  }
  alignas(32) double s[4], c[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(c, cross);
  cplx out{s[0] + s[1] + s[2] + s[3], c[0] - c[1] + c[2] - c[3]};
  if (i < n) out += std::conj(x[i]) * y[i];
  return out;
}

FD_AVX2 double nrm2(std::size_t n, const cplx* x) {
  const double* xd = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    acc = _mm256_fmadd_pd(xv, xv, acc);
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  double s = t[0] + t[1] + t[2] + t[3];
  if (i < n) s += std::norm(x[i]);
  return std::sqrt(s);
}

FD_AVX2 cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  const double* yd = reinterpret_cast<const double*>(y);
  __m256d same = _mm256_setzero_pd();
  __m256d cross = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d wv = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
    const __m256d xv = _mm256_mul_pd(wv, _mm256_loadu_pd(xd + 2 * i));
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    same = _mm256_fmadd_pd(xv, yv, same);
    cross = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), cross);
  }
  alignas(32) double s[4], c[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(c, cross);
  cplx out{s[0] + s[1] + s[2] + s[3], c[0] - c[1] + c[2] - c[3]};
  if (i < n) out += w[i] * std::conj(x[i]) * y[i];
  return out;
}

#else

void spmv(const CsrView& a, const cplx* x, cplx* y) { scalar::spmv(a, x, y); }
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) { scalar::axpy(n, alpha, x, y); }
cplx dotc(std::size_t n, const cplx* x, const cplx* y) { return scalar::dotc(n, x, y); }
double nrm2(std::size_t n, const cplx* x) { return scalar::nrm2(n, x); }
cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y) {
  return scalar::weighted_dotc(n, w, x, y);
}

#endif

}  // namespace fockdirichlet::kernels::avx2
