#include "ctmcdist/global_lp.hpp"

#include <stdexcept>
#include <string>

#include "ctmcdist/fixpoint.hpp"
#include "ctmcdist/prob_metrics.hpp"

namespace ctmcdist {

namespace {

constexpr double kCutTolerance = 1e-9;

GlobalLpLayout make_layout(const Ctmc& m) {
  GlobalLpLayout l;
  l.n = m.size();
  l.live_pos.assign(l.n, -1);
  for (std::size_t s = 0; s < l.n; ++s)
    if (!m.is_absorbing(s)) {
      l.live_pos[s] = static_cast<int>(l.live.size());
      l.live.push_back(static_cast<int>(s));
    }
  l.h = l.live.size();
  return l;
}

}  // namespace

DProgram build_d_program(const Ctmc& m, const LabelMetric& metric, double lambda) {
  check_discount(lambda);
  PairTables pt(m, metric);
  DProgram prog;
  GlobalLpLayout& L = prog.layout = make_layout(m);
  const int n = static_cast<int>(L.n);
  LpProblem& lp = prog.lp;
  lp.sense = Sense::maximize;
  const std::size_t nv = L.num_vars();
  lp.objective.assign(nv, 0.0);
  lp.lower.assign(nv, 0.0);
  lp.upper.assign(nv, 1.0);
  for (int s : L.live)
    for (int t : L.live) {
      for (int u = 0; u < n; ++u) {
        lp.lower[L.y(s, t, u)] = -lp_infinity;
        lp.upper[L.y(s, t, u)] = lp_infinity;
      }
      lp.objective[L.k(s, t)] = 1.0;
      lp.objective[L.m(s, t)] = 1.0;
    }

  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      const bool as = m.is_absorbing(s), at = m.is_absorbing(t);
      if (as != at) {
        lp.add_row({{L.d(s, t), 1.0}}, Relation::equal, 1.0);
        continue;
      }
      const double l = pt.label(s, t);
      if (as) {
        lp.add_row({{L.d(s, t), 1.0}}, Relation::equal, l);
        continue;
      }
      const double rate = pt.rate(s, t), scale = lambda * (1.0 - rate);
      const int k = L.k(s, t), mm = L.m(s, t);
      lp.add_row({{L.d(s, t), 1.0}, {k, -scale}, {mm, 1.0}}, Relation::equal, l + lambda * rate);
      lp.add_row({{mm, 1.0}}, Relation::less_equal, l);
      lp.add_row({{mm, 1.0}, {k, -scale}}, Relation::less_equal, lambda * rate);
      std::vector<LpTerm> terms{{k, 1.0}};
      for (int u = 0; u < n; ++u) {
        double diff = m.prob(s, u) - m.prob(t, u);
        if (diff != 0.0) terms.push_back({L.y(s, t, u), -diff});
      }
      lp.add_row(std::move(terms), Relation::equal, 0.0);
    }
  prog.core_rows = lp.rows.size();

  for (int s : L.live)
    for (int t : L.live)
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
          if (u == v) continue;
          lp.add_row({{L.y(s, t, u), 1.0}, {L.y(s, t, v), -1.0}, {L.d(u, v), -1.0}}, Relation::less_equal, 0.0);
        }
  return prog;
}

DistanceMatrix solve_distance_lp(const Ctmc& m, const LabelMetric& metric, double lambda, DistanceLpStats* stats,
                                 std::vector<double>* values) {
  DProgram prog = build_d_program(m, metric, lambda);
  const GlobalLpLayout& L = prog.layout;
  const LpProblem& lp = prog.lp;
  const int n = static_cast<int>(L.n);

  Simplex sx(lp.sense, lp.objective, lp.lower, lp.upper);
  for (std::size_t i = 0; i < prog.core_rows; ++i) sx.add_row(lp.rows[i]);

  // Row of y_u - y_v <= d_uv for the ordered pair (s,t).
  const std::size_t block = static_cast<std::size_t>(n) * (n - 1);
  auto y_row = [&](int s, int t, int u, int v) {
    std::size_t pair = static_cast<std::size_t>(L.live_pos[s]) * L.h + L.live_pos[t];
    return prog.core_rows + pair * block + static_cast<std::size_t>(u) * (n - 1) + (v < u ? v : v - 1);
  };
  std::vector<char> added(lp.rows.size(), 0);
  std::size_t used = prog.core_rows;
  // Seed with the rows that pair surplus states of τ(s) with deficit states of τ(t).
  for (int s : L.live)
    for (int t : L.live)
      for (const auto& eu : m.trans[s]) {
        if (eu.prob <= m.prob(t, eu.state)) continue;
        for (const auto& ev : m.trans[t]) {
          if (ev.prob <= m.prob(s, ev.state)) continue;
          std::size_t r = y_row(s, t, eu.state, ev.state);
          added[r] = 1;
          sx.add_row(lp.rows[r]);
          ++used;
        }
      }

  std::size_t rounds = 0;
  std::vector<double> x;
  for (;;) {
    ++rounds;
    LpStatus st = sx.solve();
    if (st != LpStatus::optimal)
      throw std::runtime_error(std::string("distance program not solved: ") + to_string(st));
    x = sx.values();
    std::size_t fresh = 0;
    for (std::size_t r = prog.core_rows; r < lp.rows.size(); ++r) {
      if (added[r]) continue;
      if (row_activity(lp.rows[r], x) > kCutTolerance) {
        added[r] = 1;
        sx.add_row(lp.rows[r]);
        ++fresh;
      }
    }
    used += fresh;
    if (fresh == 0) break;
  }

  DistanceMatrix d(n);
  for (int s = 0; s < n; ++s) {
    d.set(s, s, 0.0);
    for (int t = s + 1; t < n; ++t) d.set(s, t, 0.5 * (x[L.d(s, t)] + x[L.d(t, s)]));
  }
  if (stats) {
    stats->rows_total = lp.rows.size();
    stats->rows_used = used;
    stats->rounds = rounds;
    stats->iterations = sx.iterations();
  }
  if (values) *values = std::move(x);
  return d;
}

}  // namespace ctmcdist
