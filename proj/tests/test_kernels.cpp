#include <doctest.h>

#include <random>

#include "fockdirichlet/kernels.hpp"
#include "support.hpp"

using namespace fockdirichlet;
namespace k = fockdirichlet::kernels;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

SpMat random_sparse(Index rows, Index cols, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  std::normal_distribution<double> g;
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (u(rng) < density) t.emplace_back(r, c, cplx(g(rng), g(rng)));
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("CSR matvec matches Eigen on every backend") {
  std::mt19937_64 rng(1);
  // odd lengths exercise the vector tails
  for (Index n : {1, 7, 33, 130}) {
    const SpMat m = random_sparse(n, n + 3, 0.2, rng);
    const k::Csr csr(m);
    const auto xv = random_vec(static_cast<std::size_t>(n + 3), rng);
    const Vec x = Eigen::Map<const Vec>(xv.data(), n + 3);
    const Vec ref = m * x;
    std::vector<cplx> ys(n), ya(n);
    k::scalar::spmv(csr.view(), xv.data(), ys.data());
    for (Index i = 0; i < n; ++i) CHECK(rel(ys[i], ref[i]) < 1e-13);
    if (k::avx2_available()) {
      k::avx2::spmv(csr.view(), xv.data(), ya.data());
      for (Index i = 0; i < n; ++i) CHECK(rel(ya[i], ys[i]) < 1e-13);
    }
    CHECK((csr.multiply(x) - ref).norm() < 1e-12 * (1.0 + ref.norm()));
  }
}

TEST_CASE("vector kernels agree between scalar and AVX2") {
  std::mt19937_64 rng(2);
  for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 16u, 101u, 4097u}) {
    const auto x = random_vec(n, rng), y0 = random_vec(n, rng);
    std::vector<double> w(n);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& v : w) v = u(rng);
    const cplx alpha(0.3, -1.2);
    auto ys = y0;
    k::scalar::axpy(n, alpha, x.data(), ys.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(ys[i], y0[i] + alpha * x[i]) < 1e-14);
    const cplx d = k::scalar::dotc(n, x.data(), y0.data());
    const double nn = k::scalar::nrm2(n, x.data());
    const cplx wd = k::scalar::weighted_dotc(n, w.data(), x.data(), y0.data());
    cplx dref = 0.0, wref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dref += std::conj(x[i]) * y0[i];
      wref += w[i] * std::conj(x[i]) * y0[i];
    }
    CHECK(rel(d, dref) < 1e-12);
    CHECK(rel(wd, wref) < 1e-12);
    if (!k::avx2_available()) continue;
    auto ya = y0;
    k::avx2::axpy(n, alpha, x.data(), ya.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(ya[i], ys[i]) < 1e-14);
    CHECK(rel(k::avx2::dotc(n, x.data(), y0.data()), d) < 1e-12);
    CHECK(std::abs(k::avx2::nrm2(n, x.data()) - nn) <= 1e-12 * std::max(1.0, nn));
    CHECK(rel(k::avx2::weighted_dotc(n, w.data(), x.data(), y0.data()), wd) < 1e-12);
  }
}

TEST_CASE("backend can be forced") {
  const k::Backend before = k::active_backend();
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  std::vector<cplx> x{{1, 2}, {3, -1}, {0.5, 0.5}};
  CHECK(std::abs(k::dotc(3, x.data(), x.data()) - cplx(15.5, 0.0)) < 1e-14);
  if (k::avx2_available()) {
    k::force_backend(k::Backend::avx2);
    CHECK(std::string(k::backend_name(k::active_backend())) == "avx2");
    CHECK(std::abs(k::dotc(3, x.data(), x.data()) - cplx(15.5, 0.0)) < 1e-14);
  }
  k::force_backend(before);
}
