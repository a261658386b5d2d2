#include <doctest.h>

#include <cmath>

#include "fockdirichlet/fock.hpp"
#include "support.hpp"

using namespace fockdirichlet;
using testsupport::kron;

TEST_CASE("mode operators at n_max = 2") {
  const ModeOps m = build_mode_ops(2);
  const Mat A(m.A);
  CHECK(A(0, 1) == cplx(1.0));
  CHECK(std::abs(A(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK(max_abs(A) == doctest::Approx(std::sqrt(2.0)));
  CHECK((A.array() != cplx(0.0)).count() == 2);
  const Mat comm = A * Mat(m.A_dagger) - Mat(m.A_dagger) * A;
  Mat expect = Mat::Zero(3, 3);
  expect.diagonal() << 1.0, 1.0, -2.0;
  CHECK(max_abs(comm - expect) < 1e-14);
}

TEST_CASE("number operator is A*A") {
  const ModeOps m = build_mode_ops(4);
  const Mat N(m.N);
  for (int n = 0; n <= 4; ++n) CHECK(N(n, n) == cplx(n));
  CHECK(max_abs(Mat(m.A_dagger) * Mat(m.A) - N) < 1e-14);
  CHECK_THROWS_AS(build_mode_ops(0), std::invalid_argument);
}

TEST_CASE("truncation defect sits on the top level") {
  for (int n = 1; n <= 6; ++n) {
    const TruncationReport r = truncation_report(n);
    CHECK(r.defect_norm == doctest::Approx(n + 1.0));
    CHECK(r.clean_dim == n);
    const ModeOps m = build_mode_ops(n);
    const Mat d = Mat(m.A) * Mat(m.A_dagger) - Mat(m.A_dagger) * Mat(m.A) - Mat::Identity(n + 1, n + 1);
    for (int r2 = 0; r2 < n; ++r2)
      for (int c = 0; c < n; ++c) CHECK(std::abs(d(r2, c)) < 1e-14);
  }
}

TEST_CASE("embedding follows the Kronecker layout, site 0 most significant") {
  const LatticeConfig lat = LatticeConfig::chain(2, 1);
  const ModeOps m = build_mode_ops(1);
  const Mat I2 = Mat::Identity(2, 2);
  CHECK(max_abs(annihilator(0, lat).dense() - kron(Mat(m.A), I2)) == 0.0);
  CHECK(max_abs(annihilator(1, lat).dense() - kron(I2, Mat(m.A))) == 0.0);
  const LatticeOperator c = commutator(annihilator(0, lat), creator(1, lat));
  CHECK(max_abs(c.matrix) == 0.0);
  const LatticeOperator prod = annihilator(1, lat) * annihilator(0, lat);
  const LatticeOperator both = embed(to_sparse(kron(Mat(m.A), Mat(m.A))), {0, 1}, lat);
  CHECK(max_abs(SpMat(prod.matrix - both.matrix)) < 1e-14);
}

TEST_CASE("embedding with reversed site order permutes factors") {
  const LatticeConfig lat = LatticeConfig::chain(3, 2);
  const ModeOps m = build_mode_ops(2);
  const Mat AN = kron(Mat(m.A), Mat(m.N));
  const LatticeOperator a = embed(to_sparse(AN), {2, 0}, lat);
  const LatticeOperator b = annihilator(2, lat) * number_op(0, lat);
  CHECK(max_abs(SpMat(a.matrix - b.matrix)) < 1e-14);
  CHECK(a.support == std::set<int>{0, 2});
}

TEST_CASE("embedding rejects bad input") {
  const LatticeConfig lat = LatticeConfig::chain(2, 1);
  const ModeOps m = build_mode_ops(1);
  CHECK_THROWS_AS(embed(m.A, {0, 0}, lat), std::invalid_argument);
  CHECK_THROWS_AS(embed(m.A, {0, 1}, lat), std::invalid_argument);
  CHECK_THROWS_AS(embed(m.A, {2}, lat), std::invalid_argument);
}

TEST_CASE("disjoint supports commute") {
  const LatticeConfig lat = LatticeConfig::chain(3, 2, true);
  std::mt19937_64 rng(3);
  const Mat x = testsupport::random_matrix(3, rng), y = testsupport::random_matrix(9, rng);
  const LatticeOperator X = embed(to_sparse(x), {1}, lat);
  const LatticeOperator Y = embed(to_sparse(y), {2, 0}, lat);
  CHECK(max_abs(commutator(X, Y).matrix) < 1e-12);
}

TEST_CASE("mollified ladder") {
  const LatticeConfig lat = LatticeConfig::chain(1, 2);
  const auto [a, ad] = mollify(0, 1.0, lat);
  const Mat A = a.dense();
  CHECK(std::abs(A(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(A(1, 2) - std::sqrt(2.0) / 2.0) < 1e-15);
  CHECK(max_abs(ad.dense() - A.adjoint()) == 0.0);
  const auto [a0, ad0] = mollify(0, 1e-14, lat);
  CHECK(max_abs(SpMat(a0.matrix - annihilator(0, lat).matrix)) < 1e-13);
  auto opnorm = [](const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()[0]; };
  CHECK(opnorm(A) <= opnorm(annihilator(0, lat).dense()));
  CHECK(opnorm(mollify(0, 2.0, lat).first.dense()) <= opnorm(A));
  CHECK_THROWS_AS(mollify(0, 0.0, lat), std::invalid_argument);
}

TEST_CASE("ladder relations hold exactly under truncation") {
  const int n_max = 5;
  const ModeOps m = build_mode_ops(n_max);
  const Mat Ad(m.A_dagger);
  // h(x) = 2 - x + 0.5 x^3
  auto h = [&](int shift) {
    Mat d = Mat::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
      const double x = n + shift;
      d(n, n) = 2.0 - x + 0.5 * x * x * x;
    }
    return d;
  };
  CHECK(max_abs(Ad * h(0) - h(-1) * Ad) < 1e-12);
  CHECK(max_abs(h(0) * Ad - Ad * h(1)) < 1e-12);
}

TEST_CASE("lattice geometry") {
  LatticeConfig ring = LatticeConfig::chain(5, 1, true);
  CHECK(ring.distance(0, 4) == 1);
  CHECK(ring.edges().size() == 5);
  CHECK(ring.ordered_edges().size() == 10);
  LatticeConfig open = LatticeConfig::chain(5, 1);
  CHECK(open.distance(0, 4) == 4);
  CHECK(open.edges().size() == 4);
  LatticeConfig box;
  box.dims = 2;
  box.extent = {3, 2};
  box.geometry = Geometry::box;
  box.n_max = 1;
  box.validate();
  CHECK(box.num_sites() == 6);
  CHECK(box.edges().size() == 7);
  CHECK(box.dimension() == 64);
  for (int a = 0; a < 6; ++a) {
    CHECK_FALSE(box.neighbors(a, a));
    for (int b = 0; b < 6; ++b) CHECK(box.neighbors(a, b) == box.neighbors(b, a));
  }
  LatticeConfig bad = open;
  bad.n_max = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("clean masks") {
  const LatticeConfig lat = LatticeConfig::chain(2, 2);
  const auto m1 = clean_mask(lat, 1);
  CHECK(std::count(m1.begin(), m1.end(), 1) == 4);
  const auto t = total_number_mask(lat, 1);
  CHECK(std::count(t.begin(), t.end(), 1) == 3);
  CHECK(occupations(5, lat) == std::vector<int>{1, 2});
}
