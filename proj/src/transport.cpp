#include "ctmcdist/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctmcdist {

namespace {

constexpr double kMarginalTolerance = 1e-9;
constexpr double kReducedCostTolerance = 1e-9;

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TransportProblem make_tp(const Distribution& mu, const Distribution& nu,
                         const std::function<double(int, int)>& cost) {
  TransportProblem p;
  for (const auto& e : mu) {
    p.rows.push_back(e.state);
    p.left.push_back(e.prob);
  }
  for (const auto& e : nu) {
    p.cols.push_back(e.state);
    p.right.push_back(e.prob);
  }
  p.cost.resize(p.rows.size() * p.cols.size());
  for (std::size_t i = 0; i < p.rows.size(); ++i)
    for (std::size_t j = 0; j < p.cols.size(); ++j)
      p.cost[i * p.cols.size() + j] = cost(p.rows[i], p.cols[j]);
  return p;
}

double Coupling::mass_of(int u, int v) const {
  auto i = std::find(rows.begin(), rows.end(), u);
  auto j = std::find(cols.begin(), cols.end(), v);
  if (i == rows.end() || j == cols.end()) return 0.0;
  return at(i - rows.begin(), j - cols.begin());
}

std::size_t Coupling::positive_count() const {
  return static_cast<std::size_t>(std::count_if(mass.begin(), mass.end(), [](double x) { return x > 0; }));
}

Coupling Coupling::transposed() const {
  Coupling t;
  t.rows = cols;
  t.cols = rows;
  t.mass.resize(mass.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) t.mass[j * rows.size() + i] = at(i, j);
  return t;
}

Coupling northwest_corner(const Distribution& mu, const Distribution& nu) {
  Coupling w;
  std::vector<double> r, c;
  for (const auto& e : mu) {
    w.rows.push_back(e.state);
    r.push_back(e.prob);
  }
  for (const auto& e : nu) {
    w.cols.push_back(e.state);
    c.push_back(e.prob);
  }
  const std::size_t a = r.size(), b = c.size();
  w.mass.assign(a * b, 0.0);
  if (a == 0 || b == 0) return w;
  std::size_t i = 0, j = 0;
  for (;;) {
    double q = std::min(r[i], c[j]);
    w.mass[i * b + j] = q;
    r[i] -= q;
    c[j] -= q;
    if (i == a - 1 && j == b - 1) break;
    if (i == a - 1) ++j;
    else if (j == b - 1) ++i;
    else if (r[i] <= c[j]) ++i;
    else ++j;
  }
  return w;
}

TpResult solve_tp(const TransportProblem& p) {
  const std::size_t a = p.rows.size(), b = p.cols.size();
  if (p.left.size() != a || p.right.size() != b || p.cost.size() != a * b)
    throw std::invalid_argument("solve_tp: inconsistent problem dimensions");
  for (double x : p.left)
    if (!(x >= 0.0)) throw std::invalid_argument("solve_tp: negative marginal mass");
  for (double x : p.right)
    if (!(x >= 0.0)) throw std::invalid_argument("solve_tp: negative marginal mass");
  if (std::fabs(sum(p.left) - sum(p.right)) > kMarginalTolerance)
    throw std::invalid_argument("solve_tp: marginal sums differ");

  TpResult res;
  res.coupling.rows = p.rows;
  res.coupling.cols = p.cols;
  res.coupling.mass.assign(a * b, 0.0);
  res.value = 0.0;
  res.pivots = 0;
  if (a == 0 || b == 0) return res;

  std::vector<double>& x = res.coupling.mass;
  std::vector<char> basic(a * b, 0);
  {
    std::vector<double> r = p.left, c = p.right;
    std::size_t i = 0, j = 0;
    for (;;) {
      double q = std::min(r[i], c[j]);
      x[i * b + j] = q;
      basic[i * b + j] = 1;
      r[i] -= q;
      c[j] -= q;
      if (i == a - 1 && j == b - 1) break;
      if (i == a - 1) ++j;
      else if (j == b - 1) ++i;
      else if (r[i] <= c[j]) ++i;
      else ++j;
    }
  }

  // Tree nodes: rows 0..a-1, columns a..a+b-1.
  const std::size_t nodes = a + b;
  std::vector<double> pot(nodes);
  std::vector<char> seen(nodes);
  std::vector<std::size_t> queue(nodes), parent_cell(nodes), parent_node(nodes);
  std::vector<std::vector<std::size_t>> adj(nodes);  // cell indices
  std::vector<std::size_t> cycle;

  auto build_adj = [&] {
    for (auto& l : adj) l.clear();
    for (std::size_t k = 0; k < a * b; ++k)
      if (basic[k]) {
        adj[k / b].push_back(k);
        adj[a + k % b].push_back(k);
      }
  };
  auto other = [&](std::size_t cell, std::size_t node) {
    return node < a ? a + cell % b : cell / b;
  };

  const std::size_t max_pivots = 64 * (a * b + 16);
  for (;;) {
    build_adj();
    // Potentials u_i + v_j = c_ij on basic cells; u_0 = 0.
    std::fill(seen.begin(), seen.end(), 0);
    pot[0] = 0.0;
    seen[0] = 1;
    std::size_t head = 0, tail = 0;
    queue[tail++] = 0;
    while (head < tail) {
      std::size_t node = queue[head++];
      for (std::size_t cell : adj[node]) {
        std::size_t nb = other(cell, node);
        if (seen[nb]) continue;
        seen[nb] = 1;
        pot[nb] = p.cost[cell] - pot[node];
        queue[tail++] = nb;
      }
    }
    if (tail != nodes) throw std::logic_error("solve_tp: basis is not a spanning tree");

    std::size_t enter = a * b;
    for (std::size_t k = 0; k < a * b; ++k) {
      if (basic[k]) continue;
      double rc = p.cost[k] - pot[k / b] - pot[a + k % b];
      if (rc < -kReducedCostTolerance) {
        enter = k;
        break;
      }
    }
    if (enter == a * b) break;
    if (++res.pivots > max_pivots) throw std::logic_error("solve_tp: pivot limit exceeded");

    // Tree path from the entering row to the entering column.
    const std::size_t src = enter / b, dst = a + enter % b;
    std::fill(seen.begin(), seen.end(), 0);
    seen[src] = 1;
    head = tail = 0;
    queue[tail++] = src;
    while (head < tail && !seen[dst]) {
      std::size_t node = queue[head++];
      for (std::size_t cell : adj[node]) {
        std::size_t nb = other(cell, node);
        if (seen[nb]) continue;
        seen[nb] = 1;
        parent_cell[nb] = cell;
        parent_node[nb] = node;
        queue[tail++] = nb;
      }
    }
    cycle.clear();
    for (std::size_t node = dst; node != src; node = parent_node[node])
      cycle.push_back(parent_cell[node]);
    // Walking back from the column, cells alternate -, +, -, ...
    double theta = INFINITY;
    for (std::size_t k = 0; k < cycle.size(); k += 2) theta = std::min(theta, x[cycle[k]]);
    std::size_t leave = a * b;
    for (std::size_t k = 0; k < cycle.size(); k += 2)
      if (x[cycle[k]] == theta && cycle[k] < leave) leave = cycle[k];

    x[enter] = theta;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      double& v = x[cycle[k]];
      v = (k % 2 == 0) ? v - theta : v + theta;
      if (v < 0.0) v = 0.0;
    }
    x[leave] = 0.0;
    basic[enter] = 1;
    basic[leave] = 0;
  }

  for (std::size_t k = 0; k < a * b; ++k) res.value += p.cost[k] * x[k];
  return res;
}

double coupling_cost(const TransportProblem& p, const Coupling& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.rows.size(); ++i) {
    auto pi = std::find(p.rows.begin(), p.rows.end(), w.rows[i]);
    for (std::size_t j = 0; j < w.cols.size(); ++j) {
      double m = w.at(i, j);
      if (m == 0.0) continue;
      auto pj = std::find(p.cols.begin(), p.cols.end(), w.cols[j]);
      if (pi == p.rows.end() || pj == p.cols.end())
        throw std::invalid_argument("coupling puts mass outside the problem support");
      total += m * p.c(pi - p.rows.begin(), pj - p.cols.begin());
    }
  }
  return total;
}

bool is_optimal(const TransportProblem& p, const Coupling& w) {
  Distribution mu, nu;
  for (std::size_t i = 0; i < p.rows.size(); ++i) mu.push_back({p.rows[i], p.left[i]});
  for (std::size_t j = 0; j < p.cols.size(); ++j) nu.push_back({p.cols[j], p.right[j]});
  auto by_state = [](const Entry& x, const Entry& y) { return x.state < y.state; };
  std::sort(mu.begin(), mu.end(), by_state);
  std::sort(nu.begin(), nu.end(), by_state);
  check_coupling(w, mu, nu);
  return coupling_cost(p, w) <= solve_tp(p).value + kReducedCostTolerance;
}

void check_coupling(const Coupling& w, const Distribution& mu, const Distribution& nu) {
  if (w.mass.size() != w.rows.size() * w.cols.size())
    throw std::invalid_argument("coupling: mass table has wrong size");
  for (double m : w.mass)
    if (!(m >= 0.0) || !(m <= 1.0 + kMarginalTolerance))
      throw std::invalid_argument("coupling: mass outside [0,1]");
  std::vector<double> rs(w.rows.size(), 0.0), cs(w.cols.size(), 0.0);
  for (std::size_t i = 0; i < w.rows.size(); ++i)
    for (std::size_t j = 0; j < w.cols.size(); ++j) {
      rs[i] += w.at(i, j);
      cs[j] += w.at(i, j);
    }
  auto check_side = [](const std::vector<int>& ids, const std::vector<double>& sums,
                       const Distribution& marg, const char* side) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (std::fabs(sums[i] - mass(marg, ids[i])) > kMarginalTolerance)
        throw std::invalid_argument(std::string("coupling: ") + side + " marginal mismatch at state " +
                                    std::to_string(ids[i]));
    for (const auto& e : marg)
      if (std::find(ids.begin(), ids.end(), e.state) == ids.end() && e.prob > kMarginalTolerance)
        throw std::invalid_argument(std::string("coupling: ") + side +
                                    " marginal mass missing for state " + std::to_string(e.state));
  };
  check_side(w.rows, rs, mu, "left");
  check_side(w.cols, cs, nu, "right");
}

const Coupling* CouplingStructure::find(int s, int t) const {
  auto it = map_.find(key(s, t));
  return it == map_.end() ? nullptr : &it->second;
}

void CouplingStructure::set(const Ctmc& m, int s, int t, Coupling w) {
  if (m.size() != n_) throw std::invalid_argument("coupling structure: model size mismatch");
  if (m.is_absorbing(s) || m.is_absorbing(t))
    throw std::invalid_argument("coupling structure: pair has an absorbing state");
  check_coupling(w, m.trans[s], m.trans[t]);
  set_unchecked(s, t, std::move(w));
}

void CouplingStructure::set_unchecked(int s, int t, Coupling w) { map_[key(s, t)] = std::move(w); }

std::vector<StatePair> CouplingStructure::pairs() const {
  std::vector<StatePair> out;
  out.reserve(map_.size());
  for (const auto& [k, w] : map_)
    out.push_back({static_cast<int>(k / n_), static_cast<int>(k % n_)});
  std::sort(out.begin(), out.end());
  return out;
}

CouplingStructure update(const CouplingStructure& c, const Ctmc& m, StatePair pair, Coupling w) {
  CouplingStructure out = c;
  out.set(m, pair.first, pair.second, std::move(w));
  return out;
}

}  // namespace ctmcdist
