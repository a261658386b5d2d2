#pragma once

#include <random>

#include "fockdirichlet/fock.hpp"

namespace testsupport {

using fockdirichlet::cplx;
using fockdirichlet::Index;
using fockdirichlet::Mat;

inline Mat random_matrix(Index D, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(D, D);
  for (Index c = 0; c < D; ++c)
    for (Index r = 0; r < D; ++r) m(r, c) = cplx(g(rng), g(rng));
  return m;
}

inline Mat random_hermitian(Index D, std::mt19937_64& rng) {
  const Mat m = random_matrix(D, rng);
  return 0.5 * (m + m.adjoint());
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace testsupport
