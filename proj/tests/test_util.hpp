#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"
#include "ctmcdist/prob_metrics.hpp"
#include "ctmcdist/random.hpp"
#include "ctmcdist/transport.hpp"

#ifndef CTMCDIST_TEST_DATA
#define CTMCDIST_TEST_DATA "tests/data"
#endif

inline std::string test_data(const std::string& name) { return std::string(CTMCDIST_TEST_DATA) + "/" + name; }

// Three states s, t, u; t stays with probability lam and moves to u otherwise.
inline ctmcdist::Model chain_example(double lam) {
  ctmcdist::Model m;
  auto& c = m.ctmc;
  int s = c.add_state("s", "red", 1.0);
  int t = c.add_state("t", "red", 1.0);
  int u = c.add_state("u", "blue", 1.0);
  c.add_transition(s, s, 1.0);
  c.add_transition(t, t, lam);
  c.add_transition(t, u, 1.0 - lam);
  c.add_transition(u, u, 1.0);
  m.metric = ctmcdist::LabelMetric::discrete({"red", "blue"});
  return m;
}

// Largest d(a,c) - d(a,b) - d(b,c) over all triples.
inline double triangle_violation(const ctmcdist::DistanceMatrix& d) {
  const int n = static_cast<int>(d.size());
  double worst = -1.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) worst = std::max(worst, d(a, c) - d(a, b) - d(b, c));
  return worst;
}

inline bool is_symmetric(const ctmcdist::DistanceMatrix& d) {
  for (std::size_t a = 0; a < d.size(); ++a)
    for (std::size_t b = 0; b < d.size(); ++b)
      if (!(d(a, b) == d(b, a))) return false;
  return true;
}

// Truncated line metric; repeated points give zero distances.
inline ctmcdist::DistanceMatrix random_pseudometric(ctmcdist::SplitMix64& rng, int n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.below(4) ? rng.uniform(0, 2) : 0.5;
  ctmcdist::DistanceMatrix d(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d.set(i, j, std::min(1.0, std::fabs(x[i] - x[j])));
  return d;
}

// Symmetric, zero diagonal, otherwise arbitrary in [0,1].
inline ctmcdist::DistanceMatrix random_matrix(ctmcdist::SplitMix64& rng, int n) {
  ctmcdist::DistanceMatrix d(n);
  for (int i = 0; i < n; ++i) {
    d.set(i, i, 0.0);
    for (int j = i + 1; j < n; ++j) d.set(i, j, rng.uniform());
  }
  return d;
}

inline ctmcdist::Model random_model(ctmcdist::SplitMix64& rng, int n_lo, int n_hi, int max_degree = 4) {
  ctmcdist::RandomParams p;
  p.n = n_lo + static_cast<int>(rng.below(n_hi - n_lo + 1));
  p.out_degree = 1 + static_cast<int>(rng.below(std::min(max_degree, p.n)));
  p.label_count = 1 + static_cast<int>(rng.below(3));
  p.absorbing_count = static_cast<int>(rng.below(3)) == 0 ? 1 : 0;
  p.rate_lo = 1.0;
  p.rate_hi = rng.below(2) ? 3.0 : 10.0;
  p.seed = rng.next();
  return ctmcdist::random_ctmc(p);
}

// A vertex coupling for every pair of distinct non-absorbing states, chosen
// as the optimum of a random transportation problem.
inline ctmcdist::CouplingStructure random_vertex_structure(ctmcdist::SplitMix64& rng, const ctmcdist::Ctmc& m) {
  const int n = static_cast<int>(m.size());
  ctmcdist::CouplingStructure c(n);
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t) {
      if (m.is_absorbing(s) || m.is_absorbing(t)) continue;
      std::vector<double> cost(n * n);
      for (auto& v : cost) v = rng.uniform();
      auto tp = ctmcdist::make_tp(m.trans[s], m.trans[t], [&](int u, int v) { return cost[u * n + v]; });
      c.set_unchecked(s, t, ctmcdist::solve_tp(tp).coupling);
    }
  return c;
}

// Couplings optimal for d on every pair of distinct non-absorbing states.
inline ctmcdist::CouplingStructure optimal_structure(const ctmcdist::Ctmc& m, const ctmcdist::DistanceMatrix& d) {
  const int n = static_cast<int>(m.size());
  ctmcdist::CouplingStructure c(n);
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t) {
      if (m.is_absorbing(s) || m.is_absorbing(t)) continue;
      auto tp = ctmcdist::make_tp(m.trans[s], m.trans[t], [&](int u, int v) { return d(u, v); });
      c.set_unchecked(s, t, ctmcdist::solve_tp(tp).coupling);
    }
  return c;
}

inline std::vector<ctmcdist::StatePair> all_pairs(std::size_t n) {
  std::vector<ctmcdist::StatePair> out;
  for (int s = 0; s < static_cast<int>(n); ++s)
    for (int t = s; t < static_cast<int>(n); ++t) out.push_back({s, t});
  return out;
}

// Adds a copy of some states and splits every edge into a copied state
// between the original and its copy at a random ratio.
inline ctmcdist::Model with_clones(ctmcdist::SplitMix64& rng, const ctmcdist::Model& base, int copies) {
  const ctmcdist::Ctmc& m = base.ctmc;
  const int n = static_cast<int>(m.size());
  std::vector<int> src;
  for (int i = 0; i < copies; ++i) src.push_back(static_cast<int>(rng.below(n)));
  std::sort(src.begin(), src.end());
  src.erase(std::unique(src.begin(), src.end()), src.end());
  std::vector<int> clone(n, -1);
  ctmcdist::Model out;
  out.metric = base.metric;
  for (int s = 0; s < n; ++s)
    out.ctmc.add_state(m.ids[s], m.labels[s], m.is_absorbing(s) ? std::nullopt : std::optional<double>(m.rates[s]));
  for (int s : src)
    clone[s] = out.ctmc.add_state(m.ids[s] + "c", m.labels[s],
                                  m.is_absorbing(s) ? std::nullopt : std::optional<double>(m.rates[s]));
  auto copy_row = [&](int from, int s) {
    for (auto e : m.trans[s]) {
      if (clone[e.state] < 0) {
        out.ctmc.add_transition(from, e.state, e.prob);
      } else {
        double q = rng.uniform(0.2, 0.8);
        out.ctmc.add_transition(from, e.state, q * e.prob);
        out.ctmc.add_transition(from, clone[e.state], (1 - q) * e.prob);
      }
    }
  };
  for (int s = 0; s < n; ++s) copy_row(s, s);
  for (int s : src) copy_row(clone[s], s);
  return out;
}
