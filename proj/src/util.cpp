#include "fockdirichlet/types.hpp"

#include <mutex>

namespace fockdirichlet {

void prune(SpMat& m, double threshold) {
  m.prune([threshold](Index, Index, const cplx& v) { return std::abs(v) >= threshold; });
  m.makeCompressed();
}

SpMat to_sparse(const Mat& m, double threshold) {
  SpMat s = m.sparseView();
  prune(s, threshold);
  return s;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Index dim) { return Eigen::Map<const Mat>(v.data(), dim, dim); }

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const SpMat& m) {
  double best = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
  return best;
}

namespace {
std::mutex warn_mutex;
std::vector<std::string> warnings;
}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(warn_mutex);
  if (warnings.size() < 256) warnings.push_back(message);
}

std::vector<std::string> take_warnings() {
  std::lock_guard<std::mutex> lock(warn_mutex);
  std::vector<std::string> out;
  out.swap(warnings);
  return out;
}

}  // namespace fockdirichlet
