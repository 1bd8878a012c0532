#include <doctest.h>

#include <cmath>

#include "ctmcdist/prob_metrics.hpp"
#include "ctmcdist/transport.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ctmcdist;

namespace {

// Integer weights make coinciding partial sums, hence degenerate bases, common.
Distribution random_distribution(SplitMix64& rng, int n, int support, bool integer = false) {
  std::vector<int> states(n);
  for (int i = 0; i < n; ++i) states[i] = i;
  rng.shuffle(states);
  states.resize(support);
  std::sort(states.begin(), states.end());
  Distribution d;
  double sum = 0;
  for (int s : states) {
    double w = integer ? 1.0 + rng.below(3) : rng.uniform_open0();
    d.push_back({s, w});
    sum += w;
  }
  for (auto& e : d) e.prob /= sum;
  return d;
}

void check_vertex_coupling(const TransportProblem& p, const Coupling& w) {
  double rs, cs;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    rs = 0;
    for (std::size_t j = 0; j < p.cols.size(); ++j) {
      CHECK(w.at(i, j) >= 0.0);
      rs += w.at(i, j);
    }
    CHECK(std::fabs(rs - p.left[i]) <= 1e-9);
  }
  for (std::size_t j = 0; j < p.cols.size(); ++j) {
    cs = 0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) cs += w.at(i, j);
    CHECK(std::fabs(cs - p.right[j]) <= 1e-9);
  }
  CHECK(w.positive_count() <= p.rows.size() + p.cols.size() - 1);
}

// Indices in four_state.json.
constexpr int s1 = 0, s2 = 1, s3 = 2, s4 = 3;

Coupling table(std::vector<int> rows, std::vector<int> cols, std::vector<double> mass) {
  return Coupling{std::move(rows), std::move(cols), std::move(mass)};
}

}  // namespace

TEST_CASE("transport solver against vertex enumeration") {
  SplitMix64 rng(17);
  int degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int a = 1 + static_cast<int>(rng.below(4)), b = 1 + static_cast<int>(rng.below(4));
    bool integer = trial % 2 == 0;
    Distribution mu = random_distribution(rng, 6, a, integer), nu = random_distribution(rng, 6, b, integer);
    std::vector<double> cost(36);
    for (auto& c : cost) c = rng.below(5) ? rng.uniform() : 0.5;
    TransportProblem p = make_tp(mu, nu, [&](int u, int v) { return cost[u * 6 + v]; });
    TpResult r = solve_tp(p);
    CAPTURE(trial);
    CHECK(std::fabs(r.value - oracle::tp_vertex_minimum(p)) <= 1e-9);
    check_vertex_coupling(p, r.coupling);
    CHECK(std::fabs(coupling_cost(p, r.coupling) - r.value) <= 1e-12);
    if (r.coupling.positive_count() < p.rows.size() + p.cols.size() - 1) ++degenerate;

    // Raising a cost never lowers the optimum.
    TransportProblem q = p;
    q.cost[rng.below(q.cost.size())] += rng.uniform();
    CHECK(solve_tp(q).value >= r.value - 1e-12);
  }
  CHECK(degenerate > 20);
}

TEST_CASE("transport corner cases") {
  Distribution mu{{0, 0.5}, {1, 0.5}}, nu{{0, 0.25}, {2, 0.75}};
  TransportProblem zero = make_tp(mu, nu, [](int, int) { return 0.0; });
  TpResult r = solve_tp(zero);
  CHECK(r.value == 0.0);
  check_vertex_coupling(zero, r.coupling);

  TransportProblem same = make_tp(mu, mu, [](int u, int v) { return u == v ? 0.0 : 1.0; });
  r = solve_tp(same);
  CHECK(r.value == 0.0);
  CHECK(r.coupling.mass_of(0, 0) == 0.5);
  CHECK(r.coupling.mass_of(1, 1) == 0.5);

  Distribution bad{{0, 0.5}, {1, 0.4}};
  CHECK_THROWS_AS(solve_tp(make_tp(bad, nu, [](int, int) { return 0.0; })), std::invalid_argument);
}

TEST_CASE("transport on the four-state example") {
  Model m = load_model(test_data("four_state.json"));
  const Ctmc& c = m.ctmc;
  for (double c43 : {1.0 / 6.0, 0.5, 1.0}) {
    DistanceMatrix d(4, 1.0);
    d.set(s2, s2, 0);
    d.set(s4, s4, 0);
    d.set(s2, s3, 0.5);
    d.set(s2, s4, 2.0 / 3.0);
    d.set(s4, s3, c43);
    TransportProblem p = make_tp(c.trans[s1], c.trans[s4], [&](int u, int v) { return d(u, v); });
    TpResult r = solve_tp(p);
    CHECK(std::fabs(r.value - 62.0 / 189.0) <= 1e-12);
    CHECK(std::fabs(oracle::tp_vertex_minimum(p) - 62.0 / 189.0) <= 1e-12);
    Coupling omega_prime = table({s2, s4}, {s2, s3, s4}, {1.0 / 9, 4.0 / 9, 10.0 / 63, 0, 0, 2.0 / 7});
    CHECK(is_optimal(p, omega_prime));
    CHECK(std::fabs(kantorovich(d, c.trans[s1], c.trans[s4]) - 62.0 / 189.0) <= 1e-12);
  }

  // Under the first discrepancy the guessed coupling is not optimal.
  DistanceMatrix d0(4, 1.0);
  d0.set(s2, s2, 0);
  d0.set(s4, s4, 0);
  d0.set(s2, s3, 0.5);
  d0.set(s2, s4, 2.0 / 3.0);
  d0.set(s4, s3, 0.5);
  TransportProblem p0 = make_tp(c.trans[s1], c.trans[s4], [&](int u, int v) { return d0(u, v); });
  Coupling omega = table({s2, s4}, {s2, s3, s4}, {0, 4.0 / 9, 17.0 / 63, 1.0 / 9, 0, 11.0 / 63});
  CHECK(std::fabs(coupling_cost(p0, omega) - 10.0 / 21.0) <= 1e-12);
  CHECK_FALSE(is_optimal(p0, omega));

  TransportProblem zero = make_tp(c.trans[s1], c.trans[s4], [](int, int) { return 0.0; });
  CHECK(is_optimal(zero, omega));
  Coupling broken = omega;
  broken.mass[1] += 0.01;
  CHECK_THROWS_AS(is_optimal(zero, broken), std::invalid_argument);
}

TEST_CASE("coupling structure updates") {
  Model m = load_model(test_data("four_state.json"));
  const Ctmc& c = m.ctmc;
  Coupling w14 = table({s2, s4}, {s2, s3, s4}, {0, 4.0 / 9, 17.0 / 63, 1.0 / 9, 0, 11.0 / 63});
  Coupling w12 = table({s2, s4}, {s1, s2}, {0, 5.0 / 7, 1.0 / 4, 1.0 / 28});
  Coupling w23 = table({s1, s2}, {s2, s4}, {1.0 / 4, 0, 1.0 / 4, 1.0 / 2});
  Coupling w24 = table({s1, s2}, {s2, s3, s4}, {1.0 / 9, 0, 5.0 / 36, 0, 4.0 / 9, 11.0 / 36});

  CouplingStructure empty(4);
  CouplingStructure one = update(empty, c, {s1, s4}, w14);
  CHECK(one.size() == 1);
  CHECK(empty.size() == 0);
  CHECK(*one.find(s1, s4) == w14);

  CouplingStructure c0(4);
  c0.set(c, s1, s4, w14);
  c0.set(c, s1, s2, w12);
  c0.set(c, s2, s3, w23);
  c0.set(c, s2, s4, w24);
  Coupling w14p = table({s2, s4}, {s2, s3, s4}, {1.0 / 9, 4.0 / 9, 10.0 / 63, 0, 0, 2.0 / 7});
  CouplingStructure c1 = update(c0, c, {s1, s4}, w14p);
  CHECK(*c1.find(s1, s4) == w14p);
  CHECK(*c0.find(s1, s4) == w14);
  for (auto pr : c0.pairs())
    if (pr != StatePair{s1, s4}) CHECK(*c1.find(pr.first, pr.second) == *c0.find(pr.first, pr.second));
  CHECK(c1.pairs() == c0.pairs());

  CHECK_THROWS_AS(update(c0, c, {s1, s2}, w14), std::invalid_argument);
  CHECK_FALSE(c0.contains(s4, s1));
}

TEST_CASE("northwest corner is a vertex") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Distribution mu = random_distribution(rng, 8, 1 + rng.below(6));
    Distribution nu = random_distribution(rng, 8, 1 + rng.below(6));
    Coupling w = northwest_corner(mu, nu);
    TransportProblem p = make_tp(mu, nu, [](int, int) { return 0.0; });
    check_vertex_coupling(p, w);
    CHECK_NOTHROW(check_coupling(w, mu, nu));
  }
}
