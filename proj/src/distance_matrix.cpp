#include "ctmcdist/distance_matrix.hpp"

#include <algorithm>

namespace ctmcdist {

DistanceMatrix DistanceMatrix::constant(std::size_t n, double off) {
  DistanceMatrix d(n, off);
  for (std::size_t s = 0; s < n; ++s) d.v_[s * n + s] = 0.0;
  return d;
}

bool DistanceMatrix::total() const {
  return std::none_of(v_.begin(), v_.end(), [](double x) { return std::isnan(x); });
}

double sup_distance(const DistanceMatrix& a, const DistanceMatrix& b) {
  const auto& x = a.data();
  const auto& y = b.data();
  double out = 0.0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (!std::isnan(x[i]) && !std::isnan(y[i])) out = std::max(out, std::fabs(x[i] - y[i]));
  return out;
}

bool leq(const DistanceMatrix& a, const DistanceMatrix& b, double tol) {
  const auto& x = a.data();
  const auto& y = b.data();
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (!std::isnan(x[i]) && !std::isnan(y[i]) && x[i] > y[i] + tol) return false;
  return true;
}

}  // namespace ctmcdist
