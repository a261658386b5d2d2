#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fockdirichlet/types.hpp"

namespace fockdirichlet {

enum class Geometry { open_chain, cycle, box };

Geometry parse_geometry(const std::string& name);
std::string geometry_name(Geometry g);

struct LatticeConfig {
  int dims = 1;
  std::vector<int> extent{1};
  // When non-empty, overrides extent; distances are then non-periodic.
  std::vector<std::vector<int>> explicit_sites;
  Geometry geometry = Geometry::open_chain;
  int neighbor_radius = 1;
  int n_max = 1;

  static LatticeConfig chain(int sites, int n_max, bool periodic = false);

  void validate() const;
  int num_sites() const;
  int local_dim() const { return n_max + 1; }
  // (n_max+1)^|sites|; throws if it does not fit an Index.
  Index dimension() const;
  // Row-major coordinates, index = site id.
  std::vector<std::vector<int>> coordinates() const;
  int distance(int a, int b) const;
  bool neighbors(int a, int b) const;
  // Unordered pairs (j<k) within neighbor_radius.
  std::vector<std::pair<int, int>> edges() const;
  // Both orientations of every edge.
  std::vector<std::pair<int, int>> ordered_edges() const;
  // Site reached from `site` by adding `shift`; -1 when it leaves an open lattice.
  int translate(int site, const std::vector<int>& shift) const;
};

struct LatticeOperator {
  SpMat matrix;
  std::set<int> support;
  std::string label;

  Index dim() const { return matrix.rows(); }
  Mat dense() const { return Mat(matrix); }
  LatticeOperator adjoint() const;
};

LatticeOperator operator+(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator-(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator*(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator operator*(cplx s, const LatticeOperator& a);
LatticeOperator commutator(const LatticeOperator& a, const LatticeOperator& b);
LatticeOperator power(const LatticeOperator& a, int k);

struct ModeOps {
  SpMat A, A_dagger, N;
};

ModeOps build_mode_ops(int n_max);

struct TruncationReport {
  double defect_norm = 0.0;
  int clean_dim = 0;
};

TruncationReport truncation_report(int n_max);

LatticeOperator embed(const SpMat& op, const std::vector<int>& sites, const LatticeConfig& lattice,
                      const std::string& label = "");

LatticeOperator identity_op(const LatticeConfig& lattice);
LatticeOperator annihilator(int site, const LatticeConfig& lattice);
LatticeOperator creator(int site, const LatticeConfig& lattice);
LatticeOperator number_op(int site, const LatticeConfig& lattice);
LatticeOperator total_number(const LatticeConfig& lattice);

std::pair<LatticeOperator, LatticeOperator> mollify(int site, double epsilon, const LatticeConfig& lattice);

// Occupation digits of a basis index, site 0 first.
std::vector<int> occupations(Index index, const LatticeConfig& lattice);

// Basis states whose every site occupation is <= n_max - margin.
std::vector<char> clean_mask(const LatticeConfig& lattice, int margin);
// Basis states with total occupation <= limit.
std::vector<char> total_number_mask(const LatticeConfig& lattice, int limit);

// Largest entry magnitude over the columns selected by mask.
double column_residual(const SpMat& m, const std::vector<char>& mask);
double column_residual(const Mat& m, const std::vector<char>& mask);
// Largest entry magnitude of the block rows x cols selected by mask.
double block_residual(const SpMat& m, const std::vector<char>& mask);

}  // namespace fockdirichlet
