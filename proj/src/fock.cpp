#include "fockdirichlet/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace fockdirichlet {

Geometry parse_geometry(const std::string& name) {
  if (name == "open chain" || name == "open_chain" || name == "open") return Geometry::open_chain;
  if (name == "cycle" || name == "ring" || name == "periodic") return Geometry::cycle;
  if (name == "box") return Geometry::box;
  throw std::invalid_argument("unknown geometry: " + name);
}

std::string geometry_name(Geometry g) {
  switch (g) {
    case Geometry::open_chain: return "open chain";
    case Geometry::cycle: return "cycle";
    case Geometry::box: return "box";
  }
  return "?";
}

LatticeConfig LatticeConfig::chain(int sites, int n_max, bool periodic) {
  LatticeConfig c;
  c.dims = 1;
  c.extent = {sites};
  c.geometry = periodic ? Geometry::cycle : Geometry::open_chain;
  c.n_max = n_max;
  return c;
}

void LatticeConfig::validate() const {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (dims < 1) throw std::invalid_argument("dims must be >= 1");
  if (neighbor_radius < 1) throw std::invalid_argument("neighbor_radius must be >= 1");
  if (explicit_sites.empty()) {
    if (static_cast<int>(extent.size()) != dims) throw std::invalid_argument("extent length must equal dims");
    for (int e : extent)
      if (e < 1) throw std::invalid_argument("extent entries must be positive");
  } else {
    std::set<std::vector<int>> seen;
    for (const auto& s : explicit_sites) {
      if (static_cast<int>(s.size()) != dims) throw std::invalid_argument("site coordinate has wrong dimension");
      if (!seen.insert(s).second) throw std::invalid_argument("duplicate site in explicit site list");
    }
  }
  (void)dimension();
}

int LatticeConfig::num_sites() const {
  if (!explicit_sites.empty()) return static_cast<int>(explicit_sites.size());
  int n = 1;
  for (int e : extent) n *= e;
  return n;
}

Index LatticeConfig::dimension() const {
  const int sites = num_sites();
  double logd = sites * std::log(static_cast<double>(local_dim()));
  if (logd > std::log(static_cast<double>(std::numeric_limits<int>::max())))
    throw std::length_error("Fock dimension too large");
  Index d = 1;
  for (int i = 0; i < sites; ++i) d *= local_dim();
  return d;
}

std::vector<std::vector<int>> LatticeConfig::coordinates() const {
  if (!explicit_sites.empty()) return explicit_sites;
  std::vector<std::vector<int>> out;
  const int n = num_sites();
  out.reserve(n);
  for (int idx = 0; idx < n; ++idx) {
    std::vector<int> c(dims);
    int rem = idx;
    for (int a = dims - 1; a >= 0; --a) {
      c[a] = rem % extent[a];
      rem /= extent[a];
    }
    out.push_back(c);
  }
  return out;
}

int LatticeConfig::distance(int a, int b) const {
  const auto coords = coordinates();
  int d = 0;
  for (int ax = 0; ax < dims; ++ax) {
    int diff = std::abs(coords[a][ax] - coords[b][ax]);
    if (explicit_sites.empty() && geometry == Geometry::cycle) diff = std::min(diff, extent[ax] - diff);
    d += diff;
  }
  return d;
}

bool LatticeConfig::neighbors(int a, int b) const {
  return a != b && distance(a, b) <= neighbor_radius;
}

std::vector<std::pair<int, int>> LatticeConfig::edges() const {
  std::vector<std::pair<int, int>> out;
  const int n = num_sites();
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      if (neighbors(j, k)) out.emplace_back(j, k);
  return out;
}

std::vector<std::pair<int, int>> LatticeConfig::ordered_edges() const {
  std::vector<std::pair<int, int>> out;
  for (auto [j, k] : edges()) {
    out.emplace_back(j, k);
    out.emplace_back(k, j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int LatticeConfig::translate(int site, const std::vector<int>& shift) const {
  const auto coords = coordinates();
  std::vector<int> c = coords.at(site);
  for (int ax = 0; ax < dims; ++ax) {
    c[ax] += shift.at(ax);
    if (explicit_sites.empty()) {
      if (geometry == Geometry::cycle) {
        c[ax] = ((c[ax] % extent[ax]) + extent[ax]) % extent[ax];
      } else if (c[ax] < 0 || c[ax] >= extent[ax]) {
        return -1;
      }
    }
  }
  auto it = std::find(coords.begin(), coords.end(), c);
  return it == coords.end() ? -1 : static_cast<int>(it - coords.begin());
}

LatticeOperator LatticeOperator::adjoint() const {
  LatticeOperator out{SpMat(matrix.adjoint()), support, label.empty() ? "" : label + "^*"};
  return out;
}

namespace {

std::set<int> merged(const std::set<int>& a, const std::set<int>& b) {
  std::set<int> s = a;
  s.insert(b.begin(), b.end());
  return s;
}

void check_dims(const LatticeOperator& a, const LatticeOperator& b) {
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    throw std::invalid_argument("lattice operator dimension mismatch");
}

}  // namespace

LatticeOperator operator+(const LatticeOperator& a, const LatticeOperator& b) {
  check_dims(a, b);
  LatticeOperator out{SpMat(a.matrix + b.matrix), merged(a.support, b.support), ""};
  prune(out.matrix);
  return out;
}

LatticeOperator operator-(const LatticeOperator& a, const LatticeOperator& b) {
  check_dims(a, b);
  LatticeOperator out{SpMat(a.matrix - b.matrix), merged(a.support, b.support), ""};
  prune(out.matrix);
  return out;
}

LatticeOperator operator*(const LatticeOperator& a, const LatticeOperator& b) {
  check_dims(a, b);
  LatticeOperator out{SpMat(a.matrix * b.matrix), merged(a.support, b.support), ""};
  prune(out.matrix);
  return out;
}

LatticeOperator operator*(cplx s, const LatticeOperator& a) {
  LatticeOperator out{SpMat(s * a.matrix), a.support, ""};
  prune(out.matrix);
  return out;
}

LatticeOperator commutator(const LatticeOperator& a, const LatticeOperator& b) { return a * b - b * a; }

LatticeOperator power(const LatticeOperator& a, int k) {
  if (k < 0) throw std::invalid_argument("negative operator power");
  SpMat id(a.dim(), a.dim());
  id.setIdentity();
  LatticeOperator out{id, {}, ""};
  for (int i = 0; i < k; ++i) out = out * a;
  if (k > 0) out.support = a.support;
  return out;
}

ModeOps build_mode_ops(int n_max) {
  if (n_max < 1) throw std::invalid_argument("build_mode_ops: n_max must be >= 1");
  const int d = n_max + 1;
  std::vector<Eigen::Triplet<cplx>> ta, tn;
  for (int n = 1; n <= n_max; ++n) ta.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  for (int n = 1; n <= n_max; ++n) tn.emplace_back(n, n, static_cast<double>(n));
  ModeOps ops;
  ops.A.resize(d, d);
  ops.A.setFromTriplets(ta.begin(), ta.end());
  ops.A_dagger = ops.A.adjoint();
  ops.N.resize(d, d);
  ops.N.setFromTriplets(tn.begin(), tn.end());
  return ops;
}

TruncationReport truncation_report(int n_max) {
  const ModeOps ops = build_mode_ops(n_max);
  SpMat id(n_max + 1, n_max + 1);
  id.setIdentity();
  const SpMat defect = ops.A * ops.A_dagger - ops.A_dagger * ops.A - id;
  // The defect is diagonal, so its operator norm is its largest entry.
  return {max_abs(defect), n_max};
}

LatticeOperator embed(const SpMat& op, const std::vector<int>& sites, const LatticeConfig& lattice,
                      const std::string& label) {
  const int L = lattice.num_sites();
  const int d = lattice.local_dim();
  const int k = static_cast<int>(sites.size());
  std::set<int> support(sites.begin(), sites.end());
  if (static_cast<int>(support.size()) != k) throw std::invalid_argument("embed: duplicate sites");
  for (int s : sites)
    if (s < 0 || s >= L) throw std::invalid_argument("embed: site outside lattice");
  Index local = 1;
  for (int i = 0; i < k; ++i) local *= d;
  if (op.rows() != local || op.cols() != local) throw std::invalid_argument("embed: operator dimension mismatch");

  std::vector<Index> stride(L);
  Index s = 1;
  for (int site = L - 1; site >= 0; --site) {
    stride[site] = s;
    s *= d;
  }
  const Index D = s;

  std::vector<Index> offset(local, 0);
  for (Index r = 0; r < local; ++r) {
    Index rem = r;
    for (int i = k - 1; i >= 0; --i) {
      offset[r] += (rem % d) * stride[sites[i]];
      rem /= d;
    }
  }
  std::vector<int> others;
  for (int site = 0; site < L; ++site)
    if (!support.count(site)) others.push_back(site);
  Index combos = 1;
  for (size_t i = 0; i < others.size(); ++i) combos *= d;

  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<size_t>(op.nonZeros() * combos));
  for (Index c = 0; c < combos; ++c) {
    Index base = 0, rem = c;
    for (int i = static_cast<int>(others.size()) - 1; i >= 0; --i) {
      base += (rem % d) * stride[others[i]];
      rem /= d;
    }
    for (Index col = 0; col < op.outerSize(); ++col)
      for (SpMat::InnerIterator it(op, col); it; ++it)
        trips.emplace_back(base + offset[it.row()], base + offset[it.col()], it.value());
  }
  LatticeOperator out;
  out.matrix.resize(D, D);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  prune(out.matrix);
  out.support = support;
  out.label = label;
  return out;
}

LatticeOperator identity_op(const LatticeConfig& lattice) {
  const Index D = lattice.dimension();
  SpMat id(D, D);
  id.setIdentity();
  return {id, {}, "I"};
}

LatticeOperator annihilator(int site, const LatticeConfig& lattice) {
  return embed(build_mode_ops(lattice.n_max).A, {site}, lattice, "A_" + std::to_string(site));
}

LatticeOperator creator(int site, const LatticeConfig& lattice) {
  return embed(build_mode_ops(lattice.n_max).A_dagger, {site}, lattice, "A_" + std::to_string(site) + "^*");
}

LatticeOperator number_op(int site, const LatticeConfig& lattice) {
  return embed(build_mode_ops(lattice.n_max).N, {site}, lattice, "N_" + std::to_string(site));
}

LatticeOperator total_number(const LatticeConfig& lattice) {
  const Index D = lattice.dimension();
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index i = 0; i < D; ++i) {
    int total = 0;
    for (int o : occupations(i, lattice)) total += o;
    if (total) trips.emplace_back(i, i, static_cast<double>(total));
  }
  LatticeOperator out;
  out.matrix.resize(D, D);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  for (int s = 0; s < lattice.num_sites(); ++s) out.support.insert(s);
  out.label = "N_total";
  return out;
}

std::pair<LatticeOperator, LatticeOperator> mollify(int site, double epsilon, const LatticeConfig& lattice) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("mollify: epsilon must be positive");
  const ModeOps ops = build_mode_ops(lattice.n_max);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n = 0; n <= lattice.n_max; ++n) t.emplace_back(n, n, 1.0 / (1.0 + epsilon * std::sqrt(static_cast<double>(n))));
  SpMat damp(lattice.local_dim(), lattice.local_dim());
  damp.setFromTriplets(t.begin(), t.end());
  const SpMat a = damp * ops.A;
  const std::string tag = "a_" + std::to_string(site);
  LatticeOperator low = embed(a, {site}, lattice, tag);
  LatticeOperator high = embed(SpMat(a.adjoint()), {site}, lattice, tag + "^*");
  return {low, high};
}

std::vector<int> occupations(Index index, const LatticeConfig& lattice) {
  const int L = lattice.num_sites();
  const int d = lattice.local_dim();
  std::vector<int> occ(L);
  for (int site = L - 1; site >= 0; --site) {
    occ[site] = static_cast<int>(index % d);
    index /= d;
  }
  return occ;
}

std::vector<char> clean_mask(const LatticeConfig& lattice, int margin) {
  const Index D = lattice.dimension();
  std::vector<char> mask(D);
  for (Index i = 0; i < D; ++i) {
    const auto occ = occupations(i, lattice);
    mask[i] = std::all_of(occ.begin(), occ.end(), [&](int o) { return o <= lattice.n_max - margin; });
  }
  return mask;
}

std::vector<char> total_number_mask(const LatticeConfig& lattice, int limit) {
  const Index D = lattice.dimension();
  std::vector<char> mask(D);
  for (Index i = 0; i < D; ++i) {
    int total = 0;
    for (int o : occupations(i, lattice)) total += o;
    mask[i] = total <= limit;
  }
  return mask;
}

double column_residual(const SpMat& m, const std::vector<char>& mask) {
  double best = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c) {
    if (!mask[c]) continue;
    for (SpMat::InnerIterator it(m, c); it; ++it) best = std::max(best, std::abs(it.value()));
  }
  return best;
}

double column_residual(const Mat& m, const std::vector<char>& mask) {
  double best = 0.0;
  for (Index c = 0; c < m.cols(); ++c)
    if (mask[c]) best = std::max(best, m.col(c).cwiseAbs().maxCoeff());
  return best;
}

double block_residual(const SpMat& m, const std::vector<char>& mask) {
  double best = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c) {
    if (!mask[c]) continue;
    for (SpMat::InnerIterator it(m, c); it; ++it)
      if (mask[it.row()]) best = std::max(best, std::abs(it.value()));
  }
  return best;
}

}  // namespace fockdirichlet
