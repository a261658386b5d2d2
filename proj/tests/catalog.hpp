#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fockdirichlet/models.hpp"

namespace testsupport {

using namespace fockdirichlet;

struct CatalogEntry {
  std::string name;
  ModelSpec spec;
};

inline ModelSpec make(ModelKind kind, int sites, int n_max, bool ring = false) {
  ModelSpec s;
  s.kind = kind;
  s.lattice = LatticeConfig::chain(sites, n_max, ring);
  return s;
}

// One instance of every model kind with |L| <= 3 and n_max <= 3.
inline std::vector<CatalogEntry> small_catalog() {
  std::vector<CatalogEntry> out;
  out.push_back({"MeanField", make(ModelKind::mean_field, 2, 3)});
  {
    ModelSpec s = make(ModelKind::mean_field_n, 2, 2);
    s.n = 2;
    out.push_back({"MeanFieldN", s});
  }
  {
    ModelSpec s = make(ModelKind::z_field, 3, 2, true);
    s.kappa = {1.0, 0.5};
    s.xi = {0.5, cplx(0.0, 0.25)};
    out.push_back({"ZField", s});
  }
  {
    ModelSpec s = make(ModelKind::zjk_quadratic, 3, 2);
    s.kappa = {1.0};
    s.xi = {0.7};
    out.push_back({"ZjkQuadratic", s});
  }
  {
    ModelSpec s = make(ModelKind::y_field, 2, 3);
    s.kappa = {1.0};
    s.xi = {0.5};
    out.push_back({"YField", s});
  }
  out.push_back({"WOps", make(ModelKind::w_ops, 2, 3)});
  {
    ModelSpec s = make(ModelKind::w_ops, 2, 3);
    s.m = 2;
    s.ergodic_augment = true;
    out.push_back({"WOps(1,2)+aug", s});
  }
  out.push_back({"ZPower", make(ModelKind::z_power, 3, 2, true)});
  {
    ModelSpec s = make(ModelKind::z_power, 2, 3);
    s.n = 2;
    out.push_back({"ZPower(2,1)", s});
  }
  {
    ModelSpec s = make(ModelKind::y_power, 2, 3);
    s.m = 2;
    out.push_back({"YPower(1,2)", s});
  }
  {
    ModelSpec s = make(ModelKind::g_model, 1, 3);
    s.kappa = {std::sqrt(2.0)};
    s.xi = {1.0};
    out.push_back({"GModel", s});
  }
  out.push_back({"InvariantAIJ", make(ModelKind::invariant_aij, 3, 2)});
  return out;
}

}  // namespace testsupport
