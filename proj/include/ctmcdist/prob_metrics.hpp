#pragma once

#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"

namespace ctmcdist {

// Total variation distance between exp(r) and exp(r2).
double tv_exp(double r, double r2);

// K_d(mu, nu) solved exactly as a transportation problem.
double kantorovich(const DistanceMatrix& d, const Distribution& mu, const Distribution& nu);

enum class PairKind {
  diagonal,        // s = t
  inequivalent,    // exactly one of s, t absorbing
  both_absorbing,  // s != t, both absorbing
  regular          // s != t, neither absorbing
};

// Per-model cache of ℓ(s,t) and Λ(s,t).
class PairTables {
 public:
  PairTables(const Ctmc& m, const LabelMetric& metric);

  const Ctmc& ctmc() const { return *m_; }
  std::size_t size() const { return n_; }
  double label(int s, int t) const { return label_[s * n_ + t]; }
  double rate(int s, int t) const { return rate_[s * n_ + t]; }
  PairKind kind(int s, int t) const;
  // Value of δ for non-regular pairs; meaningless for regular ones.
  double trivial_value(int s, int t) const;

 private:
  const Ctmc* m_;
  std::size_t n_;
  std::vector<double> label_;
  std::vector<double> rate_;
};

}  // namespace ctmcdist
