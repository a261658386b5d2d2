#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fockdirichlet {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;
using Index = Eigen::Index;

inline constexpr double kPruneThreshold = 1e-15;
inline constexpr cplx kI{0.0, 1.0};

// Drops entries with magnitude below the threshold and compresses.
void prune(SpMat& m, double threshold = kPruneThreshold);

SpMat to_sparse(const Mat& m, double threshold = kPruneThreshold);

// Column-stacking vectorization.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Index dim);

double max_abs(const Mat& m);
double max_abs(const SpMat& m);

// Collected warnings; experiments copy them into their reports.
void warn(const std::string& message);
std::vector<std::string> take_warnings();

}  // namespace fockdirichlet
