#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <vector>

namespace ctmcdist {

struct StatePair {
  int first;
  int second;

  StatePair canonical() const {
    return first <= second ? *this : StatePair{second, first};
  }
  auto operator<=>(const StatePair&) const = default;
};

// Dense symmetric n x n table. NaN marks undefined entries, so the same type
// serves as a partial map.
class DistanceMatrix {
 public:
  static constexpr double undefined = std::numeric_limits<double>::quiet_NaN();

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n, double fill = undefined) : n_(n), v_(n * n, fill) {}

  // 0 on the diagonal, `off` elsewhere.
  static DistanceMatrix constant(std::size_t n, double off);

  std::size_t size() const { return n_; }
  double operator()(int s, int t) const { return v_[s * n_ + t]; }
  bool defined(int s, int t) const { return !std::isnan(v_[s * n_ + t]); }
  bool total() const;
  void set(int s, int t, double v) {
    v_[s * n_ + t] = v;
    v_[t * n_ + s] = v;
  }
  void clear(int s, int t) { set(s, t, undefined); }
  const std::vector<double>& data() const { return v_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

// Max |a - b| over entries defined in both.
double sup_distance(const DistanceMatrix& a, const DistanceMatrix& b);
// a ⊑ b + tol on entries defined in both.
bool leq(const DistanceMatrix& a, const DistanceMatrix& b, double tol = 0.0);

}  // namespace ctmcdist
