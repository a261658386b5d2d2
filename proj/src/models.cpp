#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "fockdirichlet/models.hpp"

namespace fockdirichlet {

namespace {

const std::map<std::string, ModelKind>& kind_table() {
  static const std::map<std::string, ModelKind> table{
      {"MeanField", ModelKind::mean_field},     {"MeanFieldN", ModelKind::mean_field_n},
      {"ZField", ModelKind::z_field},           {"ZjkQuadratic", ModelKind::zjk_quadratic},
      {"YField", ModelKind::y_field},           {"WOps", ModelKind::w_ops},
      {"ZPower", ModelKind::z_power},           {"YPower", ModelKind::y_power},
      {"GModel", ModelKind::g_model},           {"InvariantAIJ", ModelKind::invariant_aij},
  };
  return table;
}

using Op = LatticeOperator;

Op ann(int s, const LatticeConfig& lat) { return annihilator(s, lat); }
Op cre(int s, const LatticeConfig& lat) { return creator(s, lat); }

Op zero_op(const LatticeConfig& lat) {
  const Index D = lat.dimension();
  return Op{SpMat(D, D), {}, "0"};
}

Op scaled(cplx s, const Op& a) { return s * a; }

Op labelled(Op op, std::string label) {
  op.label = std::move(label);
  return op;
}

std::string site_label(const std::string& base, int j, int k) {
  return base + "_{" + std::to_string(j) + "," + std::to_string(k) + "}";
}

std::vector<std::pair<int, int>> pairs_for(const ModelSpec& spec) {
  return uses_ordered_pairs(spec) ? spec.lattice.ordered_edges() : spec.lattice.edges();
}

Op single_mode_poly(const SpMat& diag, int site, const LatticeConfig& lat) { return embed(diag, {site}, lat); }

// Sequence translated so that its entry at site l lands on translate(l, shift of site j).
std::optional<std::vector<cplx>> translated(const std::vector<cplx>& seq, int j, const LatticeConfig& lat) {
  const int L = lat.num_sites();
  std::vector<cplx> out(L, 0.0);
  const auto shift = lat.coordinates()[j];
  for (int l = 0; l < static_cast<int>(seq.size()); ++l) {
    if (seq[l] == cplx(0.0)) continue;
    if (l >= L) throw std::invalid_argument("coefficient sequence longer than the lattice");
    const int target = lat.translate(l, shift);
    if (target < 0) return std::nullopt;
    out[target] += seq[l];
  }
  return out;
}

Op field(const std::vector<cplx>& coeff, const LatticeConfig& lat) {
  Op z = zero_op(lat);
  for (int l = 0; l < static_cast<int>(coeff.size()); ++l)
    if (coeff[l] != cplx(0.0)) z = z + scaled(coeff[l], ann(l, lat));
  return z;
}

std::vector<cplx> xi_or_kappa(const ModelSpec& spec) { return spec.xi.empty() ? spec.kappa : spec.xi; }

// |L|^-eps sum_k A_k^p
Op mean_field_power(int p, const ModelSpec& spec) {
  const auto& lat = spec.lattice;
  const int L = lat.num_sites();
  Op sum = zero_op(lat);
  for (int k = 0; k < L; ++k) sum = sum + power(ann(k, lat), p);
  return scaled(std::pow(static_cast<double>(L), -spec.epsilon), sum);
}

Op mean_field_x(const LatticeConfig& lat) {
  const int L = lat.num_sites();
  Op sum = zero_op(lat);
  for (int k = 0; k < L; ++k) sum = sum + ann(k, lat);
  return labelled(scaled(1.0 / std::sqrt(static_cast<double>(L)), sum), "X_L");
}

Op aij(const std::vector<int>& I, const std::vector<int>& J, const LatticeConfig& lat) {
  Op out = identity_op(lat);
  for (int i : I) out = out * ann(i, lat);
  for (int j : J) out = out * cre(j, lat);
  return out;
}

// Site sets shifted by the coordinates of site k, or nullopt if they leave the lattice.
std::optional<std::pair<std::vector<int>, std::vector<int>>> shifted_sets(const ModelSpec& spec, int k) {
  const auto& lat = spec.lattice;
  const auto shift = lat.coordinates()[k];
  std::vector<int> I, J;
  for (int i : spec.I) {
    const int t = lat.translate(i, shift);
    if (t < 0) return std::nullopt;
    I.push_back(t);
  }
  for (int j : spec.J) {
    const int t = lat.translate(j, shift);
    if (t < 0) return std::nullopt;
    J.push_back(t);
  }
  return std::make_pair(I, J);
}

Op g_y(int site, const ModelSpec& spec) {
  const cplx kappa = spec.kappa.at(0);
  const cplx xi = xi_or_kappa(spec).at(0);
  return scaled(kappa, ann(site, spec.lattice)) + scaled(xi, cre(site, spec.lattice));
}

Op g_op(int site, const ModelSpec& spec) {
  const Op y = g_y(site, spec);
  return labelled(scaled(0.5, y * y), "G_" + std::to_string(site));
}

double g_r(const ModelSpec& spec) {
  return std::norm(spec.kappa.at(0)) - std::norm(xi_or_kappa(spec).at(0));
}

Op w_op(int j, int k, const ModelSpec& spec) {
  const auto& lat = spec.lattice;
  Op w = power(cre(j, lat), spec.n) * power(ann(k, lat), spec.m);
  if (spec.selfadjoint) w = w + w.adjoint();
  return labelled(w, site_label("W", j, k));
}

Op w_minus(int x, int y, const LatticeConfig& lat) {
  return cre(x, lat) * ann(y, lat) - cre(y, lat) * ann(x, lat);
}

Op w_plus(int x, int y, const LatticeConfig& lat) {
  return cre(x, lat) * ann(y, lat) + cre(y, lat) * ann(x, lat);
}

// One-particle hopping matrix h with H = sum_lm A_l* h_lm A_m.
Mat one_particle_matrix(const ModelSpec& spec) {
  const int L = spec.lattice.num_sites();
  const cplx kappa = spec.kappa.at(0);
  const cplx eps = xi_or_kappa(spec).at(0);
  Mat h = Mat::Zero(L, L);
  for (auto [j, k] : pairs_for(spec)) {
    std::vector<std::pair<int, cplx>> c{{j, kappa}, {k, eps}};
    for (auto [a, ca] : c)
      for (auto [b, cb] : c) h(a, b) += std::conj(ca) * cb;
  }
  return h;
}

Op zjk(int j, int k, const ModelSpec& spec) {
  const cplx kappa = spec.kappa.at(0);
  const cplx eps = xi_or_kappa(spec).at(0);
  return labelled(scaled(kappa, ann(j, spec.lattice)) + scaled(eps, ann(k, spec.lattice)), site_label("Z", j, k));
}

void add_direction(BuiltModel& b, Op X, double nu, double mu) {
  if (nu == 0.0 && mu == 0.0) return;
  DerivationDirection d{std::move(X), nu, mu, std::nullopt};
  b.directions.push_back(std::move(d));
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  const auto& t = kind_table();
  auto it = t.find(name);
  if (it == t.end()) throw std::invalid_argument("unknown model kind '" + name + "'");
  return it->second;
}

std::string model_kind_name(ModelKind kind) {
  for (const auto& [name, k] : kind_table())
    if (k == kind) return name;
  return "?";
}

bool uses_ordered_pairs(const ModelSpec& spec) {
  if (spec.ordered_pairs) return *spec.ordered_pairs;
  return spec.kind != ModelKind::zjk_quadratic;
}

void ModelSpec::validate() const {
  lattice.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (nu < 0.0 || mu < 0.0 || (nu == 0.0 && mu == 0.0))
    throw std::invalid_argument("weights nu, mu must be nonnegative with one positive");
  const int L = lattice.num_sites();
  switch (kind) {
    case ModelKind::mean_field_n:
      if (n < 2) throw std::invalid_argument("MeanFieldN needs n >= 2");
      if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("MeanFieldN needs epsilon in [0,1]");
      if (n > lattice.n_max) throw std::invalid_argument("MeanFieldN needs n <= n_max");
      break;
    case ModelKind::z_field:
    case ModelKind::y_field:
      if (kappa.empty() || std::all_of(kappa.begin(), kappa.end(), [](cplx c) { return c == cplx(0.0); }))
        throw std::invalid_argument("kappa must be a nonzero sequence");
      if (static_cast<int>(kappa.size()) > L || static_cast<int>(xi.size()) > L)
        throw std::invalid_argument("coefficient sequence longer than the lattice");
      if (kind == ModelKind::y_field && !xi.empty() &&
          std::all_of(xi.begin(), xi.end(), [](cplx c) { return c == cplx(0.0); }))
        throw std::invalid_argument("xi must be a nonzero sequence");
      break;
    case ModelKind::zjk_quadratic:
      if (kappa.empty()) throw std::invalid_argument("ZjkQuadratic needs kappa");
      if (L < 2) throw std::invalid_argument("ZjkQuadratic needs at least two sites");
      break;
    case ModelKind::w_ops:
    case ModelKind::z_power:
    case ModelKind::y_power:
      if (n < 1 || m < 1) throw std::invalid_argument("powers n, m must be >= 1");
      if (n > lattice.n_max || m > lattice.n_max) throw std::invalid_argument("powers must not exceed n_max");
      if (L < 2) throw std::invalid_argument("pair models need at least two sites");
      if (scale == 0.0) throw std::invalid_argument("scale must be nonzero");
      break;
    case ModelKind::g_model: {
      const cplx k = kappa.empty() ? cplx(0.0) : kappa[0];
      const cplx x = xi.empty() ? k : xi[0];
      if (k == cplx(0.0) && x == cplx(0.0)) throw std::invalid_argument("GModel requires (kappa, xi) != 0");
      break;
    }
    case ModelKind::invariant_aij: {
      if (I.empty() && J.empty()) throw std::invalid_argument("InvariantAIJ needs nonempty I or J");
      for (int i : I)
        if (std::find(J.begin(), J.end(), i) != J.end()) throw std::invalid_argument("InvariantAIJ needs I and J disjoint");
      auto check = [&](const std::vector<int>& s) {
        for (int v : s)
          if (v < 0 || v >= L) throw std::invalid_argument("InvariantAIJ site outside lattice");
        if (std::set<int>(s.begin(), s.end()).size() != s.size())
          throw std::invalid_argument("InvariantAIJ site sets must not repeat sites");
      };
      check(I);
      check(J);
      break;
    }
    case ModelKind::mean_field:
      break;
  }
}

BuiltModel build_model(const ModelSpec& spec_in) {
  spec_in.validate();
  BuiltModel b;
  b.spec = spec_in;
  const ModelSpec& spec = b.spec;
  const auto& lat = spec.lattice;
  const int L = lat.num_sites();

  Op H = total_number(lat);
  switch (spec.kind) {
    case ModelKind::mean_field: {
      const Op X = mean_field_x(lat);
      H = labelled(X.adjoint() * X, "U_L");
      add_direction(b, X, spec.nu, spec.mu);
      b.number_sector = L > 1;
      break;
    }
    case ModelKind::mean_field_n: {
      const Op X = mean_field_x(lat);
      H = labelled(X.adjoint() * X, "U_L");
      add_direction(b, labelled(mean_field_power(spec.n, spec), "X_{n,L}"), spec.nu, spec.mu);
      b.clean_margin = spec.n;
      b.number_sector = true;
      break;
    }
    case ModelKind::z_field: {
      const auto xi = xi_or_kappa(spec);
      for (int j = 0; j < L; ++j) {
        if (auto k = translated(spec.kappa, j, lat); k && spec.nu > 0.0)
          add_direction(b, labelled(field(*k, lat), "Z_{T" + std::to_string(j) + " kappa}"), spec.nu, 0.0);
        if (auto x = translated(xi, j, lat); x && spec.mu > 0.0)
          add_direction(b, labelled(field(*x, lat), "Z_{T" + std::to_string(j) + " xi}"), 0.0, spec.mu);
      }
      break;
    }
    case ModelKind::zjk_quadratic: {
      H = zero_op(lat);
      for (auto [j, k] : pairs_for(spec)) {
        const Op z = zjk(j, k, spec);
        H = H + z.adjoint() * z;
        add_direction(b, z, spec.nu, spec.mu);
      }
      H.label = "H_L";
      b.number_sector = true;
      break;
    }
    case ModelKind::y_field: {
      const auto xi = xi_or_kappa(spec);
      for (int j = 0; j < L; ++j) {
        auto k = translated(spec.kappa, j, lat);
        auto x = translated(xi, j, lat);
        if (!k || !x) continue;
        const Op y = field(*k, lat) - field(*x, lat).adjoint();
        add_direction(b, labelled(y, "Y_{T" + std::to_string(j) + "}"), spec.nu, spec.mu);
      }
      break;
    }
    case ModelKind::w_ops: {
      for (auto [j, k] : pairs_for(spec)) {
        add_direction(b, w_op(j, k, spec), spec.nu, spec.mu);
        if (spec.ergodic_augment)
          add_direction(b, labelled(kI * w_minus(j, k, lat), site_label("iW-", j, k)), spec.nu, spec.mu);
      }
      b.clean_margin = 2 * std::max(spec.n, spec.m);
      break;
    }
    case ModelKind::z_power: {
      for (auto [j, k] : pairs_for(spec)) {
        const Op z = power(ann(j, lat), spec.n) - power(ann(k, lat), spec.m);
        add_direction(b, labelled(scaled(spec.scale, z), site_label("Z", j, k)), spec.nu, spec.mu);
      }
      b.clean_margin = std::max(spec.n, spec.m);
      break;
    }
    case ModelKind::y_power: {
      for (auto [j, k] : pairs_for(spec)) {
        const Op y = power(ann(j, lat), spec.n) - power(cre(k, lat), spec.m);
        add_direction(b, labelled(scaled(spec.scale, y), site_label("Y", j, k)), spec.nu, spec.mu);
      }
      b.clean_margin = std::max(spec.n, spec.m);
      break;
    }
    case ModelKind::g_model: {
      H = zero_op(lat);
      for (int j = 0; j < L; ++j) {
        const Op y = g_y(j, spec);
        H = H + y.adjoint() * y;
        add_direction(b, g_op(j, spec), spec.nu, spec.mu);
      }
      H.label = "sum_j Y_j* Y_j";
      b.clean_margin = 4;
      break;
    }
    case ModelKind::invariant_aij: {
      for (int k = 0; k < L; ++k) {
        auto sets = shifted_sets(spec, k);
        if (!sets) continue;
        add_direction(b, labelled(aij(sets->first, sets->second, lat), "A(I+" + std::to_string(k) + ",J+" + std::to_string(k) + ")"),
                      spec.nu, spec.mu);
      }
      break;
    }
  }
  if (b.directions.empty()) throw std::invalid_argument("model has no directions on this lattice");
  b.hamiltonian = H;
  b.state = GibbsState::from_hamiltonian(H, spec.beta);
  for (auto& d : b.directions) d.xi = eigen_detect(d.X, *b.state);
  return b;
}

bool AlgebraReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.informational || c.passed; });
}

SpMat ladder_power_commutator(int n, int n_max) {
  const int d = n_max + 1;
  SpMat out(d, d);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (int k = 0; k < d; ++k) {
    double up = 1.0, down = 1.0;
    for (int i = 1; i <= n; ++i) up *= k + i;
    for (int i = 0; i < n; ++i) down *= k - i;
    trips.emplace_back(k, k, up - down);
  }
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

std::vector<std::vector<double>> mean_field_n_coefficients(int n, int k_max) {
  std::vector<std::vector<double>> c(k_max + 1, std::vector<double>(n + 1, 0.0));
  c[0][0] = 1.0;
  for (int k = 0; k < k_max; ++k)
    for (int l = 0; l <= n; ++l) {
      double v = -l * c[k][l];
      if (l > 0) v -= (n - l + 1) * c[k][l - 1];
      c[k + 1][l] = v;
    }
  return c;
}

std::vector<std::vector<double>> mean_field_n_coefficients_alt(int n, int k_max) {
  std::vector<std::vector<double>> c(k_max + 1, std::vector<double>(n + 1, 0.0));
  c[0][0] = 1.0;
  for (int k = 0; k < k_max; ++k)
    for (int l = 0; l <= n; ++l) {
      double v = -(n - l) * c[k][l];
      if (l > 0) v -= (l - 1) * c[k][l - 1];
      c[k + 1][l] = v;
    }
  return c;
}

namespace {

// T_l = |L|^{-l/2} X_{n-l} X^l
std::vector<Op> mean_field_n_basis(const ModelSpec& spec) {
  const auto& lat = spec.lattice;
  const double L = lat.num_sites();
  const Op X = mean_field_x(lat);
  std::vector<Op> T;
  for (int l = 0; l <= spec.n; ++l) {
    Op lower = mean_field_power(spec.n - l, spec);
    T.push_back(scaled(std::pow(L, -0.5 * l), lower * power(X, l)));
  }
  return T;
}

Op combine(const std::vector<Op>& T, const std::vector<double>& c) {
  Op out{SpMat(T[0].dim(), T[0].dim()), {}, ""};
  for (size_t l = 0; l < T.size(); ++l)
    if (c[l] != 0.0) out = out + scaled(c[l], T[l]);
  return out;
}

IdentityCheck check(std::string name, double residual, double tol = 1e-10, bool informational = false,
                    std::string note = "") {
  IdentityCheck c;
  c.name = std::move(name);
  c.residual = residual;
  c.tolerance = tol;
  c.passed = residual <= tol;
  c.informational = informational;
  c.note = std::move(note);
  return c;
}

double block(const Op& a, const Op& b, const std::vector<char>& mask) {
  return column_residual(SpMat(a.matrix - b.matrix), mask);
}

double flow_invariance(const Op& X, const GibbsState& st, double freq, double beta, const std::vector<char>& mask) {
  double worst = 0.0;
  for (double t : {0.1, 0.7, 2.3}) {
    const SpMat flowed = modular_flow(X.matrix, st, cplx(t));
    const SpMat expect = std::exp(kI * freq * beta * t) * X.matrix;
    worst = std::max(worst, column_residual(SpMat(flowed - expect), mask));
  }
  return worst;
}

}  // namespace

AlgebraReport verify_algebra(const ModelSpec& spec) {
  const BuiltModel b = build_model(spec);
  const auto& lat = spec.lattice;
  const int L = lat.num_sites();
  const int n_max = lat.n_max;
  const GibbsState& st = *b.state;
  AlgebraReport rep;
  auto& out = rep.checks;
  const Op id = identity_op(lat);

  switch (spec.kind) {
    case ModelKind::mean_field: {
      const Op X = b.directions[0].X;
      out.push_back(check("[X,X*] = I", block(commutator(X, X.adjoint()), id, clean_mask(lat, 1))));
      out.push_back(check("alpha_t(X) = e^{i beta t} X", flow_invariance(X, st, 1.0, spec.beta, total_number_mask(lat, n_max))));
      break;
    }
    case ModelKind::mean_field_n: {
      const Op Xn = b.directions[0].X;
      Op P = zero_op(lat);
      const SpMat pn = ladder_power_commutator(spec.n, n_max);
      for (int k = 0; k < L; ++k) P = P + single_mode_poly(pn, k, lat);
      P = scaled(std::pow(static_cast<double>(L), -2.0 * spec.epsilon), P);
      out.push_back(check("[X_n,X_n*] = |L|^{-2eps} sum P_n(N_k)", block(commutator(Xn, Xn.adjoint()), P, clean_mask(lat, spec.n))));

      const auto T = mean_field_n_basis(spec);
      const auto c = mean_field_n_coefficients(spec.n, 5);
      const auto c_alt = mean_field_n_coefficients_alt(spec.n, 5);
      const auto mask = total_number_mask(lat, n_max);
      Op nested = Xn;
      double worst = 0.0, worst_alt = 0.0;
      for (int k = 1; k <= 5; ++k) {
        nested = commutator(b.hamiltonian, nested);
        worst = std::max(worst, block(nested, combine(T, c[k]), mask));
        worst_alt = std::max(worst_alt, block(nested, combine(T, c_alt[k]), mask));
      }
      out.push_back(check("[U,.]^k X_n = sum_l c_kl T_l, k<=5, c_{k+1,l} = -(n-l+1)c_{k,l-1} - l c_{k,l}", worst));
      out.push_back(check("alternative recursion a_{k+1,l} = -(l-1)a_{k,l-1} - (n-l)a_{k,l}", worst_alt, 1e-10, true,
                          "written form; does not reproduce the nested commutators"));
      out.push_back(check("[U, sum N] = 0", max_abs(commutator(b.hamiltonian, total_number(lat)).matrix)));
      break;
    }
    case ModelKind::z_field: {
      const auto xi = xi_or_kappa(spec);
      cplx pairing = 0.0;
      for (size_t j = 0; j < std::min(spec.kappa.size(), xi.size()); ++j) pairing += spec.kappa[j] * std::conj(xi[j]);
      std::vector<cplx> k(L, 0.0), x(L, 0.0);
      std::copy(spec.kappa.begin(), spec.kappa.end(), k.begin());
      std::copy(xi.begin(), xi.end(), x.begin());
      const Op zk = field(k, lat), zx = field(x, lat);
      out.push_back(check("[Z_kappa, Z_xi*] = sum kappa_j conj(xi_j)", block(commutator(zk, zx.adjoint()), scaled(pairing, id), clean_mask(lat, 1))));
      out.push_back(check("alpha_t(Z_kappa) = e^{i beta t} Z_kappa", flow_invariance(zk, st, 1.0, spec.beta, clean_mask(lat, 0))));
      break;
    }
    case ModelKind::zjk_quadratic: {
      out.push_back(check("[H, N_L] = 0", max_abs(commutator(b.hamiltonian, total_number(lat)).matrix)));
      const Mat h = one_particle_matrix(spec);
      const auto mask = total_number_mask(lat, n_max);
      double worst = 0.0, worst_alt = 0.0;
      ModelSpec other = spec;
      other.ordered_pairs = !uses_ordered_pairs(spec);
      const Mat h_alt = one_particle_matrix(other);
      for (int l = 0; l < L; ++l) {
        Op rhs = zero_op(lat), rhs_alt = zero_op(lat);
        for (int m = 0; m < L; ++m) {
          if (h(l, m) != cplx(0.0)) rhs = rhs + scaled(-h(l, m), ann(m, lat));
          if (h_alt(l, m) != cplx(0.0)) rhs_alt = rhs_alt + scaled(-h_alt(l, m), ann(m, lat));
        }
        const Op lhs = commutator(b.hamiltonian, ann(l, lat));
        worst = std::max(worst, block(lhs, rhs, mask));
        worst_alt = std::max(worst_alt, block(lhs, rhs_alt, mask));
      }
      out.push_back(check("[H, A_l] = -sum_m h_lm A_m", worst));
      out.push_back(check(std::string("same with the ") + (uses_ordered_pairs(spec) ? "unordered" : "ordered") + "-pair hopping matrix",
                          worst_alt, 1e-10, true, "edge normalization differs by a factor 2"));
      break;
    }
    case ModelKind::y_field: {
      const auto xi = xi_or_kappa(spec);
      std::vector<cplx> k(L, 0.0), x(L, 0.0);
      std::copy(spec.kappa.begin(), spec.kappa.end(), k.begin());
      std::copy(xi.begin(), xi.end(), x.begin());
      double nk = 0.0, nx = 0.0;
      for (cplx c : k) nk += std::norm(c);
      for (cplx c : x) nx += std::norm(c);
      const Op y = field(k, lat) - field(x, lat).adjoint();
      const auto mask = clean_mask(lat, 1);
      out.push_back(check("[Y,Y*] = (|kappa|^2 - |xi|^2) I", block(commutator(y, y.adjoint()), scaled(nk - nx, id), mask)));
      double worst = 0.0, worst_alt = 0.0;
      for (int l = 0; l < L; ++l) {
        const Op lhs = commutator(y, number_op(l, lat));
        const Op a = scaled(k[l], ann(l, lat));
        const Op c = scaled(std::conj(x[l]), cre(l, lat));
        worst = std::max(worst, block(lhs, a + c, mask));
        worst_alt = std::max(worst_alt, block(lhs, a - c, mask));
      }
      out.push_back(check("[Y,N_l] = kappa_l A_l + conj(xi_l) A_l*", worst));
      out.push_back(check("[Y,N_l] = kappa_l A_l - conj(xi_l) A_l*", worst_alt, 1e-10, true, "sign of the creation term"));
      out.push_back(check("alpha_t(Y) = e^{i beta t} Z_kappa - e^{-i beta t} Z_xi*", [&] {
        double w = 0.0;
        for (double t : {0.1, 0.7, 2.3}) {
          const SpMat f = modular_flow(y.matrix, st, cplx(t));
          const SpMat e = std::exp(kI * spec.beta * t) * field(k, lat).matrix - std::exp(-kI * spec.beta * t) * field(x, lat).adjoint().matrix;
          w = std::max(w, max_abs(SpMat(f - e)));
        }
        return w;
      }()));
      break;
    }
    case ModelKind::w_ops: {
      const auto pairs = pairs_for(spec);
      const double freq = spec.selfadjoint ? 0.0 : static_cast<double>(spec.m - spec.n);
      if (!spec.selfadjoint || spec.m == spec.n) {
        double w = 0.0;
        for (const auto& d : b.directions)
          if (d.X.label.rfind("W", 0) == 0) w = std::max(w, flow_invariance(d.X, st, freq, spec.beta, clean_mask(lat, 0)));
        out.push_back(check("alpha_t(W) = e^{i(m-n) beta t} W", w));
      }
      if (spec.n == 1 && spec.m == 1) {
        const auto mask = clean_mask(lat, 2);
        double worst = 0.0, worst_alt = 0.0;
        for (auto [j, k] : pairs)
          for (auto [p, q] : pairs) {
            const Op lhs = commutator(w_plus(j, k, lat), w_plus(p, q, lat).adjoint());
            Op rhs = zero_op(lat), alt = zero_op(lat);
            if (k == p) rhs = rhs + w_minus(j, q, lat);
            if (j == q) rhs = rhs + w_minus(k, p, lat);
            if (k == q) rhs = rhs + w_minus(j, p, lat);
            if (j == p) rhs = rhs + w_minus(k, q, lat);
            if (j == q) alt = alt + w_plus(k, p, lat);
            if (k == p) alt = alt + w_plus(j, q, lat);
            if (j == p) alt = alt + w_plus(k, q, lat);
            if (k == q) alt = alt + w_plus(j, p, lat);
            worst = std::max(worst, block(lhs, rhs, mask));
            worst_alt = std::max(worst_alt, block(lhs, alt, mask));
          }
        out.push_back(check("[W_jk, W_pq*] = d_kp W-_jq + d_jq W-_kp + d_kq W-_jp + d_jp W-_kq", worst, 1e-12));
        out.push_back(check("[W_jk, W_pq*] = d_jq W_kp + d_kp W_jq + d_jp W_kq + d_kq W_jp", worst_alt, 1e-12, true,
                            "a commutator of selfadjoint operators is anti-selfadjoint"));
      }
      break;
    }
    case ModelKind::z_power:
    case ModelKind::y_power: {
      const bool ypow = spec.kind == ModelKind::y_power;
      const int margin = std::max(spec.n, spec.m);
      const auto mask = clean_mask(lat, margin);
      const SpMat pn = ladder_power_commutator(spec.n, n_max);
      const SpMat pm = ladder_power_commutator(spec.m, n_max);
      out.push_back(check("[A^n, A*^n] = (N+n)...(N+1) - N...(N-n+1)",
                          block(commutator(power(ann(0, lat), spec.n), power(cre(0, lat), spec.n)),
                                single_mode_poly(pn, 0, lat), clean_mask(lat, spec.n))));
      double worst = 0.0, worst_alt = 0.0, worst_n = 0.0, worst_flow = 0.0;
      for (auto [j, k] : pairs_for(spec)) {
        const Op aj = power(ann(j, lat), spec.n);
        const Op other = ypow ? power(cre(k, lat), spec.m) : power(ann(k, lat), spec.m);
        const Op x = aj - other;
        const Op lhs = commutator(x, x.adjoint());
        const Op rhs = ypow ? single_mode_poly(pn, j, lat) - single_mode_poly(pm, k, lat)
                            : single_mode_poly(pn, j, lat) + single_mode_poly(pm, k, lat);
        worst = std::max(worst, block(lhs, rhs, mask));
        if (ypow) {
          const Op alt = scaled(spec.n, power(ann(j, lat), spec.n - 1) * power(cre(j, lat), spec.n - 1)) -
                         scaled(spec.m, power(ann(k, lat), spec.m - 1) * power(cre(k, lat), spec.m - 1));
          worst_alt = std::max(worst_alt, block(lhs, alt, mask));
          const Op ncomm = commutator(x, total_number(lat));
          worst_n = std::max(worst_n, block(ncomm, scaled(spec.n, aj) + scaled(spec.m, other), clean_mask(lat, 0)));
        }
        double w = 0.0;
        for (double t : {0.1, 0.7, 2.3}) {
          const SpMat f = modular_flow(x.matrix, st, cplx(t));
          const double fo = ypow ? -spec.m : spec.m;
          const SpMat e = std::exp(kI * (spec.n * spec.beta * t)) * aj.matrix - std::exp(kI * (fo * spec.beta * t)) * other.matrix;
          w = std::max(w, max_abs(SpMat(f - e)));
        }
        worst_flow = std::max(worst_flow, w);
      }
      if (ypow) {
        out.push_back(check("[Y,Y*] = P_n(N_j) - P_m(N_k)", worst));
        out.push_back(check("[Y,Y*] = n A^{n-1}A*^{n-1} - m A^{m-1}A*^{m-1}", worst_alt, 1e-10, true,
                            "agrees only for n = m = 1"));
        out.push_back(check("[Y, sum N] = n A_j^n + m A_k*^m", worst_n));
        out.push_back(check("alpha_t(Y) = e^{in beta t}A_j^n - e^{-im beta t}A_k*^m", worst_flow));
      } else {
        out.push_back(check("[Z,Z*] = P_n(N_j) + P_m(N_k)", worst));
        out.push_back(check("alpha_t(Z) = e^{in beta t}A_j^n - e^{im beta t}A_k^m", worst_flow));
      }
      break;
    }
    case ModelKind::g_model: {
      const double R = g_r(spec);
      const auto mask = clean_mask(lat, 4);
      double w1 = 0.0, w2 = 0.0, w3 = 0.0;
      for (int j = 0; j < L; ++j) {
        const Op y = g_y(j, spec);
        const Op Nc = y.adjoint() * y;
        const Op G = g_op(j, spec);
        w1 = std::max(w1, block(commutator(G, G.adjoint()), scaled(0.5 * R * R, id) + scaled(R, Nc), mask));
        w2 = std::max(w2, block(commutator(G, Nc), scaled(2.0 * R, G), mask));
        w3 = std::max(w3, block(commutator(G.adjoint(), Nc), scaled(-2.0 * R, G.adjoint()), mask));
      }
      out.push_back(check("[G,G*] = R^2/2 + R Ncal", w1));
      out.push_back(check("[G,Ncal] = 2R G", w2));
      out.push_back(check("[G*,Ncal] = -2R G*", w3));
      break;
    }
    case ModelKind::invariant_aij: {
      double w = 0.0;
      const double freq = static_cast<double>(spec.J.size()) - static_cast<double>(spec.I.size());
      for (const auto& d : b.directions) w = std::max(w, flow_invariance(d.X, st, freq, spec.beta, clean_mask(lat, 0)));
      out.push_back(check(spec.I.size() == spec.J.size() ? "alpha_t(A(I,J)) = A(I,J)" : "alpha_t(A(I,J)) = e^{i(|J|-|I|) beta t} A(I,J)", w));
      break;
    }
  }
  return rep;
}

SpMat ModularOrbit::evaluate(double t, double beta) const {
  if (components.empty()) throw std::logic_error("modular orbit has no components (quadrature-only model)");
  SpMat out(components[0].op.rows(), components[0].op.cols());
  for (const auto& c : components) out += std::exp(kI * c.frequency * beta * t) * c.op;
  prune(out);
  return out;
}

ModularOrbit modular_orbit(const BuiltModel& model, std::size_t index) {
  if (index >= model.directions.size()) throw std::out_of_range("modular_orbit: direction index");
  const ModelSpec& spec = model.spec;
  const auto& lat = spec.lattice;
  const Op& X = model.directions[index].X;
  ModularOrbit orbit;
  const Index D = lat.dimension();
  orbit.exact_columns.assign(D, 1);

  auto from_product_state = [&] {
    // Diagonal state: entries of X group exactly by energy difference.
    orbit.method = "analytic";
    for (const auto& c : frequency_components(X.matrix, *model.state))
      orbit.components.push_back({c.op, c.omega / spec.beta});
  };

  switch (spec.kind) {
    case ModelKind::mean_field:
      orbit.method = "analytic";
      orbit.components.push_back({X.matrix, 1.0});
      orbit.exact_columns = total_number_mask(lat, lat.n_max);
      break;
    case ModelKind::mean_field_n: {
      // c(t) = exp(-i beta t M) e_0 with M the recursion matrix; M has eigenvalues -l.
      orbit.method = "recursion";
      const int n = spec.n;
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
      for (int l = 0; l <= n; ++l) {
        M(l, l) = -l;
        if (l < n) M(l + 1, l) = -(n - l);
      }
      Eigen::EigenSolver<Eigen::MatrixXd> es(M);
      const Mat V = es.eigenvectors();
      const Vec a = V.partialPivLu().solve(Vec::Unit(n + 1, 0));
      const auto T = mean_field_n_basis(spec);
      for (int q = 0; q <= n; ++q) {
        SpMat op(D, D);
        for (int l = 0; l <= n; ++l) op += (V(l, q) * a[q]) * T[l].matrix;
        prune(op);
        orbit.components.push_back({op, -es.eigenvalues()[q].real()});
      }
      orbit.exact_columns = total_number_mask(lat, lat.n_max);
      break;
    }
    case ModelKind::zjk_quadratic: {
      // alpha_t(A) = exp(i beta t h) A on the coefficient vector.
      orbit.method = "one-particle";
      const Mat h = one_particle_matrix(spec);
      Eigen::SelfAdjointEigenSolver<Mat> es(h);
      const int L = lat.num_sites();
      // coefficients of X on the A_l
      Vec c = Vec::Zero(L);
      for (int l = 0; l < L; ++l) {
        const SpMat al = ann(l, lat).matrix;
        // X is linear in annihilators; read coefficient from one nonzero entry of A_l
        for (Index col = 0; col < al.outerSize(); ++col) {
          SpMat::InnerIterator it(al, col);
          if (it) {
            c[l] = X.matrix.coeff(it.row(), col) / it.value();
            break;
          }
        }
      }
      for (int q = 0; q < L; ++q) {
        const Vec v = es.eigenvectors().col(q);
        // row vector c^T projected on the eigenvector: (c^T v) v^*
        const Vec coeff = (c.transpose() * v)(0) * v.conjugate();
        SpMat op(D, D);
        for (int l = 0; l < L; ++l)
          if (std::abs(coeff[l]) > 1e-15) op += coeff[l] * ann(l, lat).matrix;
        prune(op);
        if (op.nonZeros() == 0) continue;
        orbit.components.push_back({op, es.eigenvalues()[q]});
      }
      orbit.exact_columns = total_number_mask(lat, lat.n_max);
      break;
    }
    case ModelKind::g_model:
      orbit.method = "spectral";
      orbit.quadrature_only = true;
      break;
    default:
      from_product_state();
      break;
  }
  return orbit;
}

SeriesResult mean_field_n_series(const BuiltModel& model, double t, double tol) {
  const ModelSpec& spec = model.spec;
  if (spec.kind != ModelKind::mean_field_n) throw std::invalid_argument("mean_field_n_series: wrong model kind");
  const int n = spec.n;
  const auto T = mean_field_n_basis(spec);
  double tmax = 0.0;
  for (const auto& op : T) tmax = std::max(tmax, Mat(op.matrix).operatorNorm());
  const double x = 2.0 * n * spec.beta * std::abs(t);
  // smallest K whose tail sum_{k>K} x^k/k! * tmax is below tol
  int K = 0;
  double term = 1.0, tail = std::exp(x) - 1.0;
  while (tail * tmax > tol && K < 400) {
    ++K;
    term *= x / K;
    tail -= term;
    if (tail < 0.0) tail = 0.0;
  }
  const auto c = mean_field_n_coefficients(n, K);
  std::vector<cplx> coeff(n + 1, 0.0);
  cplx factor = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) factor *= cplx(0.0, -spec.beta * t) / static_cast<double>(k);
    for (int l = 0; l <= n; ++l) coeff[l] += factor * c[k][l];
  }
  SeriesResult r;
  r.value = SpMat(T[0].dim(), T[0].dim());
  for (int l = 0; l <= n; ++l) r.value += coeff[l] * T[l].matrix;
  prune(r.value);
  r.order = K;
  r.remainder_bound = tail * tmax;
  return r;
}

}  // namespace fockdirichlet
