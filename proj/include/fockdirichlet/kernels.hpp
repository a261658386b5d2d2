#pragma once

// Data-parallel inner loops: complex CSR matvec and BLAS-1 style vector ops.
// A scalar reference and an AVX2 variant exist for each; the variant is picked
// once at runtime from CPUID and can be forced with FOCKDIRICHLET_SIMD=scalar.

#include <cstddef>

#include "fockdirichlet/types.hpp"

namespace fockdirichlet::kernels {

struct CsrView {
  Index rows = 0;
  const int* row_ptr = nullptr;
  const int* col = nullptr;
  const cplx* val = nullptr;
};

enum class Backend { scalar, avx2 };

bool avx2_available();
Backend active_backend();
void force_backend(Backend b);
const char* backend_name(Backend b);

// y = A x
void spmv(const CsrView& a, const cplx* x, cplx* y);
// y += alpha x
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
// sum conj(x_i) y_i
cplx dotc(std::size_t n, const cplx* x, const cplx* y);
double nrm2(std::size_t n, const cplx* x);
// sum w_i conj(x_i) y_i
cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y);

namespace scalar {
void spmv(const CsrView& a, const cplx* x, cplx* y);
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
cplx dotc(std::size_t n, const cplx* x, const cplx* y);
double nrm2(std::size_t n, const cplx* x);
cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y);
}  // namespace scalar

namespace avx2 {
void spmv(const CsrView& a, const cplx* x, cplx* y);
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
cplx dotc(std::size_t n, const cplx* x, const cplx* y);
double nrm2(std::size_t n, const cplx* x);
cplx weighted_dotc(std::size_t n, const double* w, const cplx* x, const cplx* y);
}  // namespace avx2

// Row-major compressed copy of a sparse matrix, kept alive next to its view.
class Csr {
 public:
  Csr() = default;
  explicit Csr(const SpMat& m);
  CsrView view() const { return {rows_, row_ptr_.data(), col_.data(), val_.data()}; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return val_.size(); }
  Vec multiply(const Vec& x) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<cplx> val_;
};

}  // namespace fockdirichlet::kernels
