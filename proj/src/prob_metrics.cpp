#include "ctmcdist/prob_metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "ctmcdist/transport.hpp"

namespace ctmcdist {

double tv_exp(double r, double r2) {
  if (!(r > 0.0) || !(r2 > 0.0) || !std::isfinite(r) || !std::isfinite(r2))
    throw std::invalid_argument("tv_exp: rates must be positive and finite");
  double lo = std::min(r, r2), hi = std::max(r, r2);
  if (hi - lo < 1e-12 * hi) return 0.0;
  // |q^(e+1) - q^e| = q^e (1 - q) with q = lo/hi, e = lo/(hi-lo)
  double gap = (hi - lo) / hi;
  double e = lo / (hi - lo);
  return std::exp(e * std::log1p(-gap)) * gap;
}

double kantorovich(const DistanceMatrix& d, const Distribution& mu, const Distribution& nu) {
  TransportProblem p = make_tp(mu, nu, [&d](int u, int v) {
    if (!d.defined(u, v)) throw std::invalid_argument("kantorovich: distance undefined on support");
    return d(u, v);
  });
  return solve_tp(p).value;
}

PairTables::PairTables(const Ctmc& m, const LabelMetric& metric)
    : m_(&m), n_(m.size()), label_(n_ * n_, 0.0), rate_(n_ * n_, 0.0) {
  std::vector<int> idx(n_);
  for (std::size_t s = 0; s < n_; ++s) {
    idx[s] = metric.index_of(m.labels[s]);
    if (idx[s] < 0) throw std::invalid_argument("unknown label '" + m.labels[s] + "'");
  }
  for (std::size_t s = 0; s < n_; ++s)
    for (std::size_t t = s; t < n_; ++t) {
      double l = s == t ? 0.0 : metric.dist(idx[s], idx[t]);
      double r = 0.0;
      if (s != t && !m.is_absorbing(s) && !m.is_absorbing(t)) r = tv_exp(m.rates[s], m.rates[t]);
      label_[s * n_ + t] = label_[t * n_ + s] = l;
      rate_[s * n_ + t] = rate_[t * n_ + s] = r;
    }
}

PairKind PairTables::kind(int s, int t) const {
  if (s == t) return PairKind::diagonal;
  bool a = m_->is_absorbing(s), b = m_->is_absorbing(t);
  if (a != b) return PairKind::inequivalent;
  return a ? PairKind::both_absorbing : PairKind::regular;
}

double PairTables::trivial_value(int s, int t) const {
  switch (kind(s, t)) {
    case PairKind::diagonal: return 0.0;
    case PairKind::inequivalent: return 1.0;
    default: return label(s, t);
  }
}

}  // namespace ctmcdist
