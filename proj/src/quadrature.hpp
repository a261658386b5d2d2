#pragma once

#include <utility>
#include <vector>

namespace fockdirichlet::detail {

// Composite 20-point Gauss-Legendre nodes and weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre_nodes(double a, double b, int panels);

}  // namespace fockdirichlet::detail
