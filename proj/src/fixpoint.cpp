#include "ctmcdist/fixpoint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctmcdist {

void check_discount(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("discount factor must lie in (0,1)");
}

namespace {

double regular_value(const PairTables& pt, double lambda, int s, int t, double k) {
  double rate = pt.rate(s, t);
  return std::max(pt.label(s, t), lambda * (rate + (1.0 - rate) * k));
}

std::string pair_name(const Ctmc& m, int s, int t) { return "(" + m.ids[s] + "," + m.ids[t] + ")"; }

}  // namespace

DistanceMatrix delta_op(const PairTables& pt, double lambda, const DistanceMatrix& d, std::size_t* tp_count) {
  check_discount(lambda);
  const int n = static_cast<int>(pt.size());
  if (static_cast<int>(d.size()) != n) throw std::invalid_argument("delta_op: matrix size mismatch");
  const Ctmc& m = pt.ctmc();
  DistanceMatrix out(n);
  for (int s = 0; s < n; ++s) {
    out.set(s, s, 0.0);
    for (int t = s + 1; t < n; ++t) {
      if (pt.kind(s, t) != PairKind::regular) {
        out.set(s, t, pt.trivial_value(s, t));
        continue;
      }
      double k = kantorovich(d, m.trans[s], m.trans[t]);
      if (tp_count) ++*tp_count;
      out.set(s, t, regular_value(pt, lambda, s, t, k));
    }
  }
  return out;
}

DistanceMatrix delta_op(const Ctmc& m, const LabelMetric& metric, double lambda, const DistanceMatrix& d) {
  PairTables pt(m, metric);
  return delta_op(pt, lambda, d);
}

std::size_t iteration_count(double lambda, double eps) {
  check_discount(lambda);
  if (!(eps > 0.0)) throw std::invalid_argument("accuracy must be positive");
  if (eps >= 1.0) return 0;
  double x = std::ceil(std::log(eps) / std::log(lambda));
  auto n = static_cast<std::size_t>(x);
  // guard against log rounding when eps is an exact power of lambda
  if (n > 0 && std::pow(lambda, static_cast<double>(n - 1)) <= eps) --n;
  return n;
}

DistanceMatrix iterate(const PairTables& pt, double lambda, double eps, Start start, IterateStats* stats) {
  const std::size_t steps = iteration_count(lambda, eps);
  DistanceMatrix d = DistanceMatrix::constant(pt.size(), start == Start::bottom ? 0.0 : 1.0);
  std::size_t tps = 0;
  for (std::size_t i = 0; i < steps; ++i) d = delta_op(pt, lambda, d, &tps);
  if (stats) {
    stats->iterations = steps;
    stats->tp_count = tps;
  }
  return d;
}

DistanceMatrix iterate(const Ctmc& m, const LabelMetric& metric, double lambda, double eps, Start start,
                       IterateStats* stats) {
  PairTables pt(m, metric);
  return iterate(pt, lambda, eps, start, stats);
}

DistanceMatrix gamma_op(const PairTables& pt, double lambda, const CouplingStructure& c, const DistanceMatrix& d,
                        const std::vector<StatePair>* pairs) {
  check_discount(lambda);
  const int n = static_cast<int>(pt.size());
  const Ctmc& m = pt.ctmc();
  DistanceMatrix out(n);
  auto eval = [&](int s, int t) {
    if (pt.kind(s, t) != PairKind::regular) {
      out.set(s, t, pt.trivial_value(s, t));
      return;
    }
    double k = 0.0;
    bool found = for_each_cell(c, s, t, [&](int u, int v, double mass) {
      if (!d.defined(u, v))
        throw std::invalid_argument("gamma_op: distance undefined at " + pair_name(m, u, v));
      k += mass * d(u, v);
    });
    if (!found) throw std::invalid_argument("gamma_op: no coupling for " + pair_name(m, s, t));
    out.set(s, t, regular_value(pt, lambda, s, t, k));
  };
  if (pairs) {
    for (auto p : *pairs) eval(p.first, p.second);
  } else {
    for (int s = 0; s < n; ++s)
      for (int t = s; t < n; ++t) eval(s, t);
  }
  return out;
}

std::vector<StatePair> closure(const PairTables& pt, const CouplingStructure& c, const std::vector<StatePair>& roots,
                               const DistanceMatrix* known) {
  const int n = static_cast<int>(pt.size());
  std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
  std::vector<StatePair> out, stack;
  auto visit = [&](int u, int v, double = 0.0) {
    StatePair p = StatePair{u, v}.canonical();
    if (pt.kind(p.first, p.second) != PairKind::regular) return;
    if (known && known->defined(p.first, p.second)) return;
    char& f = seen[p.first * n + p.second];
    if (f) return;
    f = 1;
    out.push_back(p);
    stack.push_back(p);
  };
  for (auto r : roots) visit(r.first, r.second);
  while (!stack.empty()) {
    StatePair p = stack.back();
    stack.pop_back();
    if (!for_each_cell(c, p.first, p.second, visit))
      throw std::invalid_argument("closure: no coupling for " + pair_name(pt.ctmc(), p.first, p.second));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DiscrepancyProgram build_discrepancy_program(const PairTables& pt, double lambda, const CouplingStructure& c,
                                             const std::vector<StatePair>& pairs, const DistanceMatrix* known) {
  check_discount(lambda);
  const int n = static_cast<int>(pt.size());
  DiscrepancyProgram prog;
  prog.variables = closure(pt, c, pairs, known);
  prog.constants = DistanceMatrix(n);
  std::vector<int> index(static_cast<std::size_t>(n) * n, -1);
  for (std::size_t i = 0; i < prog.variables.size(); ++i) {
    auto p = prog.variables[i];
    index[p.first * n + p.second] = index[p.second * n + p.first] = static_cast<int>(i);
    prog.lp.add_variable(1.0, pt.label(p.first, p.second), 1.0);
  }
  auto constant = [&](int u, int v) {
    if (pt.kind(u, v) == PairKind::regular) return (*known)(u, v);
    return pt.trivial_value(u, v);
  };
  for (auto p : pairs)
    if (index[p.first * n + p.second] < 0) prog.constants.set(p.first, p.second, constant(p.first, p.second));

  std::vector<double> coef(prog.variables.size(), 0.0);
  std::vector<int> touched;
  for (std::size_t i = 0; i < prog.variables.size(); ++i) {
    auto [s, t] = prog.variables[i];
    const double rate = pt.rate(s, t);
    const double scale = lambda * (1.0 - rate);
    double rhs = lambda * rate;
    touched.clear();
    for_each_cell(c, s, t, [&](int u, int v, double mass) {
      int j = index[u * n + v];
      if (j < 0) {
        double value = constant(u, v);
        prog.constants.set(u, v, value);
        rhs += scale * mass * value;
        return;
      }
      if (coef[j] == 0.0) touched.push_back(j);
      coef[j] -= scale * mass;
    });
    if (coef[i] == 0.0) touched.push_back(static_cast<int>(i));
    coef[i] += 1.0;
    std::sort(touched.begin(), touched.end());
    std::vector<LpTerm> terms;
    for (int j : touched) {
      if (coef[j] != 0.0) terms.push_back({j, coef[j]});
      coef[j] = 0.0;
    }
    prog.lp.add_row(std::move(terms), Relation::greater_equal, rhs);
  }
  return prog;
}

Discrepancy discrepancy(const PairTables& pt, double lambda, const CouplingStructure& c,
                        const std::vector<StatePair>& pairs, const DistanceMatrix* known) {
  DiscrepancyProgram prog = build_discrepancy_program(pt, lambda, c, pairs, known);
  Discrepancy out;
  out.d = prog.constants;
  out.variables = std::move(prog.variables);
  if (out.variables.empty()) return out;
  LpSolution sol = solve_lp(prog.lp);
  if (sol.status != LpStatus::optimal)
    throw std::runtime_error(std::string("discrepancy program not solved: ") + to_string(sol.status));
  out.lp_iterations = sol.iterations;
  for (std::size_t i = 0; i < out.variables.size(); ++i) {
    auto p = out.variables[i];
    double v = std::clamp(sol.values[i], pt.label(p.first, p.second), 1.0);
    out.d.set(p.first, p.second, v);
  }
  return out;
}

}  // namespace ctmcdist
