#include <doctest.h>

#include <cmath>

#include "catalog.hpp"
#include "fockdirichlet/dirichlet.hpp"
#include "support.hpp"

using namespace fockdirichlet;
using testsupport::make;

namespace {

const IdentityCheck* find(const AlgebraReport& r, const std::string& prefix) {
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("every catalog model passes its algebra checks") {
  for (const auto& e : testsupport::small_catalog()) {
    ModelSpec s = e.spec;
    if (s.kind == ModelKind::g_model) s.lattice.n_max = 6;
    const AlgebraReport r = verify_algebra(s);
    CAPTURE(e.name);
    CHECK(!r.checks.empty());
    for (const auto& c : r.checks) {
      CAPTURE(c.name);
      CAPTURE(c.residual);
      if (!c.informational) CHECK(c.passed);
    }
  }
}

TEST_CASE("mean-field field and its CCR") {
  const ModelSpec s = make(ModelKind::mean_field, 2, 3);
  const BuiltModel b = build_model(s);
  REQUIRE(b.directions.size() == 1);
  const LatticeOperator expect = cplx(1.0 / std::sqrt(2.0)) * (annihilator(0, s.lattice) + annihilator(1, s.lattice));
  CHECK(max_abs(SpMat(b.directions[0].X.matrix - expect.matrix)) < 1e-15);
  const LatticeOperator c = commutator(expect, expect.adjoint()) - identity_op(s.lattice);
  CHECK(column_residual(c.matrix, clean_mask(s.lattice, 1)) < 1e-14);
}

TEST_CASE("field CCR with a coefficient sequence") {
  const LatticeConfig lat = LatticeConfig::chain(2, 3);
  const LatticeOperator Z = annihilator(0, lat) + annihilator(1, lat);
  const LatticeOperator c = commutator(Z, Z.adjoint()) - cplx(2.0) * identity_op(lat);
  CHECK(block_residual(c.matrix, clean_mask(lat, 1)) < 1e-14);
  ModelSpec s = make(ModelKind::z_field, 2, 3);
  s.kappa = {1.0, 1.0};
  const AlgebraReport r = verify_algebra(s);
  const auto* ccr = find(r, "[Z_kappa, Z_xi*]");
  REQUIRE(ccr != nullptr);
  CHECK(ccr->residual < 1e-10);
}

TEST_CASE("invariant A(I,J) direction has frequency zero") {
  const BuiltModel b = build_model(make(ModelKind::invariant_aij, 2, 2));
  REQUIRE(!b.directions.empty());
  REQUIRE(b.directions[0].xi.has_value());
  CHECK(std::abs(*b.directions[0].xi) < 1e-12);
  for (double t : {0.1, 0.7, 2.3})
    CHECK(max_abs(SpMat(modular_flow(b.directions[0].X.matrix, *b.state, t) - b.directions[0].X.matrix)) < 1e-14);
}

TEST_CASE("power commutator polynomial") {
  // [A^2, A*^2] = 4N + 2 below the cutoff
  const SpMat P = ladder_power_commutator(2, 4);
  const Mat d(P);
  for (int n = 0; n <= 4; ++n) CHECK(std::abs(d(n, n) - cplx(4.0 * n + 2.0)) < 1e-12);
  const LatticeConfig lat = LatticeConfig::chain(1, 4);
  const LatticeOperator A2 = power(annihilator(0, lat), 2);
  const Mat c = commutator(A2, A2.adjoint()).dense();
  for (int n = 0; n <= 2; ++n) CHECK(std::abs(c(n, n) - d(n, n)) < 1e-12);
}

TEST_CASE("W and G commutation relations") {
  ModelSpec w = make(ModelKind::w_ops, 2, 3);
  const AlgebraReport rw = verify_algebra(w);
  const auto* four = find(rw, "[W_jk, W_pq*] = d_kp");
  REQUIRE(four != nullptr);
  CHECK(four->residual <= 1e-12);
  ModelSpec g = make(ModelKind::g_model, 1, 6);
  g.kappa = {std::sqrt(2.0)};
  g.xi = {1.0};
  const AlgebraReport rg = verify_algebra(g);
  const auto* gn = find(rg, "[G,Ncal] = 2R G");
  REQUIRE(gn != nullptr);
  CHECK(gn->residual <= 1e-10);
}

TEST_CASE("nested commutator coefficients are integers and follow the recursion") {
  for (int n = 2; n <= 4; ++n) {
    const auto c = mean_field_n_coefficients(n, 5);
    REQUIRE(c.size() == 6);
    CHECK(c[0][0] == 1.0);
    for (const auto& row : c)
      for (double v : row) CHECK(v == std::round(v));
    // first step: [U, X_n] = -n T_1
    CHECK(c[1][0] == 0.0);
    CHECK(c[1][1] == -n);
  }
}

TEST_CASE("orbits") {
  {
    ModelSpec s = make(ModelKind::y_power, 2, 3);
    s.m = 2;
    const BuiltModel b = build_model(s);
    const ModularOrbit o = modular_orbit(b, 0);
    REQUIRE(o.components.size() == 2);
    const LatticeConfig& lat = s.lattice;
    const SpMat a0 = annihilator(0, lat).matrix;
    const SpMat c1 = power(creator(1, lat), 2).matrix;
    bool found_a = false, found_c = false;
    for (const auto& c : o.components) {
      if (std::abs(c.frequency - 1.0) < 1e-12) found_a = max_abs(SpMat(c.op - a0)) < 1e-14;
      if (std::abs(c.frequency + 2.0) < 1e-12) found_c = max_abs(SpMat(c.op + c1)) < 1e-14;
    }
    CHECK(found_a);
    CHECK(found_c);
  }
  {
    const BuiltModel b = build_model(make(ModelKind::mean_field, 1, 3));
    const ModularOrbit o = modular_orbit(b, 0);
    REQUIRE(o.components.size() == 1);
    CHECK(o.components[0].frequency == 1.0);
  }
}

TEST_CASE("orbit reconstruction matches the modular flow") {
  for (const auto& e : testsupport::small_catalog()) {
    const BuiltModel b = build_model(e.spec);
    CAPTURE(e.name);
    for (size_t i = 0; i < b.directions.size(); ++i) {
      const ModularOrbit o = modular_orbit(b, i);
      if (o.quadrature_only) continue;
      const double tol = o.method == "one-particle" ? 1e-8 : 1e-10;
      for (double t : {0.1, 0.7, 2.3}) {
        const SpMat flow = modular_flow(b.directions[i].X.matrix, *b.state, t);
        CHECK(column_residual(SpMat(o.evaluate(t, e.spec.beta) - flow), o.exact_columns) < tol);
      }
    }
  }
}

TEST_CASE("quadratic hopping orbit on two sites") {
  ModelSpec s = make(ModelKind::zjk_quadratic, 2, 3);
  s.kappa = {1.0};
  s.xi = {1.0};
  const BuiltModel b = build_model(s);
  CHECK_FALSE(b.state->is_diagonal());
  const ModularOrbit o = modular_orbit(b, 0);
  CHECK(o.method == "one-particle");
  const SpMat A0 = annihilator(0, s.lattice).matrix;
  // the orbit of A_0 itself, through the one-particle reduction of the full flow
  for (double t : {0.3, 1.1}) {
    const Mat full = modular_flow(Mat(A0), *b.state, t);
    // alpha_t preserves the one-particle span: A_0 -> u00 A_0 + u01 A_1
    const Mat A1 = annihilator(1, s.lattice).dense();
    // basis index = 4 n_0 + n_1; read the vacuum row of the one-particle columns
    const cplx u0 = full(0, 4) / Mat(A0)(0, 4);
    const cplx u1 = full(0, 1) / A1(0, 1);
    CHECK(column_residual(Mat(full - u0 * Mat(A0) - u1 * A1), total_number_mask(s.lattice, 3)) < 1e-8);
    CHECK(std::abs(std::norm(u0) + std::norm(u1) - 1.0) < 1e-10);
  }
}

TEST_CASE("number-conserving directions are fixed by the flow") {
  for (const ModelSpec& s : {make(ModelKind::w_ops, 2, 3), make(ModelKind::invariant_aij, 3, 2)}) {
    const BuiltModel b = build_model(s);
    for (const auto& d : b.directions)
      for (double t : {0.1, 0.7, 2.3}) CHECK(max_abs(SpMat(modular_flow(d.X.matrix, *b.state, t) - d.X.matrix)) < 1e-14);
  }
}

TEST_CASE("self-adjoint W form annihilates W") {
  ModelSpec s = make(ModelKind::w_ops, 2, 2);
  s.selfadjoint = true;
  const BuiltModel b = build_model(s);
  const KmsMetric metric(b.state);
  const Superoperator S = assemble_generator(b.directions, metric, AdmissibleKernel{}, AssemblyPath::eigen);
  for (const auto& d : b.directions) {
    CHECK(max_abs(SpMat(d.X.matrix - SpMat(d.X.matrix.adjoint()))) < 1e-15);
    CHECK(std::abs(dirichlet_energy(d.X.dense(), S, metric)) < 1e-10);
  }
}

TEST_CASE("power series for the n-th power field") {
  ModelSpec s = make(ModelKind::mean_field_n, 2, 3);
  s.n = 2;
  const BuiltModel b = build_model(s);
  for (double t : {0.2, 0.9}) {
    const SeriesResult r = mean_field_n_series(b, t);
    CHECK(r.remainder_bound < 1e-10);
    const SpMat flow = modular_flow(b.directions[0].X.matrix, *b.state, t);
    CHECK(column_residual(SpMat(r.value - flow), total_number_mask(s.lattice, s.lattice.n_max)) < 1e-9);
  }
}

TEST_CASE("parameter validation") {
  ModelSpec g = make(ModelKind::g_model, 1, 3);
  g.kappa = {0.0};
  g.xi = {0.0};
  CHECK_THROWS_AS(build_model(g), std::invalid_argument);
  ModelSpec z = make(ModelKind::z_power, 1, 3);
  CHECK_THROWS_AS(build_model(z), std::invalid_argument);
  ModelSpec p = make(ModelKind::z_power, 2, 1);
  p.n = 2;
  CHECK_THROWS_AS(build_model(p), std::invalid_argument);
  CHECK_THROWS_AS(parse_model_kind("Nope"), std::invalid_argument);
  CHECK(model_kind_name(parse_model_kind("YPower")) == "YPower");
}
