#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "ctmcdist/fixpoint.hpp"
#include "ctmcdist/global_lp.hpp"
#include "ctmcdist/onthefly.hpp"
#include "test_util.hpp"

using namespace ctmcdist;

namespace {

constexpr int s1 = 0, s2 = 1, s3 = 2, s4 = 3;

Coupling table(std::vector<int> rows, std::vector<int> cols, std::vector<double> mass) {
  return Coupling{std::move(rows), std::move(cols), std::move(mass)};
}

CouplingStructure first_structure(const Ctmc& c) {
  CouplingStructure c0(4);
  c0.set(c, s1, s4, table({s2, s4}, {s2, s3, s4}, {0, 4.0 / 9, 17.0 / 63, 1.0 / 9, 0, 11.0 / 63}));
  c0.set(c, s1, s2, table({s2, s4}, {s1, s2}, {0, 5.0 / 7, 1.0 / 4, 1.0 / 28}));
  c0.set(c, s2, s3, table({s1, s2}, {s2, s4}, {1.0 / 4, 0, 1.0 / 4, 1.0 / 2}));
  c0.set(c, s2, s4, table({s1, s2}, {s2, s3, s4}, {1.0 / 9, 0, 5.0 / 36, 0, 4.0 / 9, 11.0 / 36}));
  return c0;
}

double alpha() { return std::pow(0.6, 1.5) - std::pow(0.6, 2.5); }
double first_value() { return alpha() / 2 + 5 * (1 - alpha()) / 21; }
double final_value() { return alpha() / 2 + 31 * (1 - alpha()) / 189; }

// Least fixed point of Δ with the known pairs held at their values.
DistanceMatrix constrained_fixpoint(const PairTables& pt, double lam, const DistanceMatrix& known) {
  const int n = static_cast<int>(pt.size());
  DistanceMatrix d = DistanceMatrix::constant(n, 0.0);
  for (std::size_t i = 0; i < iteration_count(lam, 1e-12); ++i) {
    d = delta_op(pt, lam, d);
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t)
        if (known.defined(s, t) && pt.kind(s, t) == PairKind::regular) d.set(s, t, known(s, t));
  }
  return d;
}

}  // namespace

TEST_CASE("on-the-fly on the four-state example, step by step") {
  Model m = load_model(test_data("four_state.json"));
  CouplingStructure c0 = first_structure(m.ctmc);
  OtfOptions opt;
  opt.initial_guesses = &c0;
  OnTheFly otf(m.ctmc, m.metric, 0.5, opt);

  REQUIRE(otf.begin({s1, s4}));
  CHECK(std::fabs(otf.values()(s1, s4) - first_value()) <= 1e-12);
  // Pairs at their label distance are settled by the first discrepancy.
  for (auto [a, b] : std::vector<StatePair>{{s2, s3}, {s2, s4}, {s1, s2}, {s2, s2}, {s4, s4}}) CHECK(otf.exact(a, b));
  CHECK(otf.values()(s2, s3) == 0.5);
  CHECK(otf.values()(s2, s4) == 2.0 / 3.0);
  CHECK(otf.values()(s1, s2) == 0.5);
  CHECK(otf.working_set() == std::vector<StatePair>{{s1, s4}});
  CHECK_FALSE(otf.couplings().contains(s2, s3));
  CHECK(otf.settled_couplings().contains(s2, s3));

  CHECK(otf.improve_step({s1, s4}));
  CHECK(std::fabs(otf.values()(s1, s4) - final_value()) <= 1e-12);
  CHECK(otf.stats().improvements == 1);
  Coupling omega_prime = table({s2, s4}, {s2, s3, s4}, {1.0 / 9, 4.0 / 9, 10.0 / 63, 0, 0, 2.0 / 7});
  const Coupling* w = otf.couplings().find(s1, s4);
  REQUIRE(w != nullptr);
  for (std::size_t i = 0; i < w->mass.size(); ++i) CHECK(std::fabs(w->mass[i] - omega_prime.mass[i]) <= 1e-12);

  const DistanceMatrix before = otf.values();
  CHECK_FALSE(otf.improve_step({s1, s4}));
  CHECK(std::memcmp(otf.values().data().data(), before.data().data(), 16 * sizeof(double)) == 0);
  CHECK(otf.stats().improvements == 1);
  otf.finish();
  CHECK(otf.exact(s1, s4));
  CHECK(otf.settled_couplings().contains(s1, s4));
  CHECK(otf.couplings().size() == 0);
}

TEST_CASE("on-the-fly query on the four-state example") {
  Model m = load_model(test_data("four_state.json"));
  CouplingStructure c0 = first_structure(m.ctmc);
  std::ostringstream trace;
  OtfOptions opt;
  opt.initial_guesses = &c0;
  opt.trace = &trace;
  OnTheFly seeded(m.ctmc, m.metric, 0.5, opt);
  DistanceMatrix d = seeded.run({{s4, s1}});
  CHECK(std::fabs(d(s1, s4) - final_value()) <= 1e-9);
  CHECK(std::fabs(d(s1, s4) - 0.2264807049695) <= 1e-12);
  CHECK(seeded.stats().improvements == 1);
  const std::string lines = trace.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 1);
  CHECK(lines.find("pair=(s1,s4)") != std::string::npos);

  OnTheFly plain(m.ctmc, m.metric, 0.5);
  CHECK(std::fabs(plain.distance(s1, s4) - final_value()) <= 1e-9);
  CHECK(std::fabs(plain.distance(s1, s4) - iterate(m.ctmc, m.metric, 0.5, 1e-12, Start::bottom)(s1, s4)) <= 1e-9);

  OtfOptions capped = opt;
  capped.trace = nullptr;
  capped.max_improvements = 0;
  OnTheFly stuck(m.ctmc, m.metric, 0.5, capped);
  CHECK_THROWS_AS(stuck.run({{s1, s4}}), std::runtime_error);
  CHECK_THROWS_AS(plain.run({{s1, 9}}), std::invalid_argument);
}

TEST_CASE("set_pair and reachable") {
  Model m = load_model(test_data("four_state.json"));
  CouplingStructure c0 = first_structure(m.ctmc);
  OnTheFly otf(m.ctmc, m.metric, 0.5);
  otf.set_pair({s1, s4}, *c0.find(s1, s4));
  for (auto [a, b] : std::vector<StatePair>{{s1, s4}, {s2, s3}, {s2, s4}, {s1, s2}}) CHECK(otf.visited(a, b));
  CHECK(otf.exact(s2, s2));
  CHECK(otf.exact(s4, s4));
  CHECK(otf.values()(s2, s2) == 0.0);
  CHECK(otf.values()(s4, s4) == 0.0);
  CHECK_FALSE(otf.exact(s1, s4));

  // A visited successor keeps its guess.
  Coupling g23 = *otf.couplings().find(s2, s3);
  otf.set_pair({s1, s4}, table({s2, s4}, {s2, s3, s4}, {1.0 / 9, 4.0 / 9, 10.0 / 63, 0, 0, 2.0 / 7}));
  CHECK(*otf.couplings().find(s2, s3) == g23);
  CHECK_THROWS_AS(otf.set_pair({s1, s2}, *c0.find(s1, s4)), std::invalid_argument);
  CHECK_THROWS_AS(otf.set_pair({s2, s2}, *c0.find(s1, s4)), std::invalid_argument);

  OtfOptions opt;
  opt.initial_guesses = &c0;
  OnTheFly seeded(m.ctmc, m.metric, 0.5, opt);
  seeded.set_pair({s1, s4}, *c0.find(s1, s4));
  CHECK(seeded.reachable({s1, s4}) == std::vector<StatePair>{{s1, s2}, {s1, s4}, {s2, s3}, {s2, s4}});
  CHECK(seeded.reachable({s4, s1}) == seeded.reachable({s1, s4}));

  // Successors on the diagonal only.
  Model tiny;
  int a = tiny.ctmc.add_state("a", "x", 1.0);
  int b = tiny.ctmc.add_state("b", "x", 2.0);
  int c = tiny.ctmc.add_state("c", "x", 1.0);
  tiny.ctmc.add_transition(a, c, 1.0);
  tiny.ctmc.add_transition(b, c, 1.0);
  tiny.ctmc.add_transition(c, c, 1.0);
  tiny.metric = LabelMetric::discrete({"x"});
  OnTheFly t(tiny.ctmc, tiny.metric, 0.5);
  t.set_pair({a, b}, table({c}, {c}, {1.0}));
  CHECK(t.visited_count() == 3);
  CHECK(t.exact(c, c));
  CHECK(t.reachable({a, b}) == std::vector<StatePair>{{a, b}});
  CHECK(std::fabs(t.distance(a, b) - 0.5 * tv_exp(1, 2)) <= 1e-12);
}

TEST_CASE("trivial queries") {
  Model m = load_model(test_data("perturb_left.json"));
  OnTheFly a(m.ctmc, m.metric, 0.5);
  CHECK(a.distance(1, 1) == 0.0);
  CHECK(a.visited_count() == 1);
  CHECK(a.visited(1, 1));

  OnTheFly b(m.ctmc, m.metric, 0.5);
  CHECK(b.distance(0, 2) == 1.0);
  CHECK(b.couplings().size() == 0);
  CHECK(b.settled_couplings().size() == 0);
  CHECK(b.visited_count() == 2);

  OnTheFly c(m.ctmc, m.metric, 0.5);
  DistanceMatrix d = c.run({{0, 1}, {3, 4}});
  CHECK(std::fabs(d(0, 1)) <= 1e-9);
  CHECK(std::fabs(d(3, 4)) <= 1e-9);
}

TEST_CASE("on-the-fly against the distance program") {
  SplitMix64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    Model r = random_model(rng, 2, 8);
    const double lam = rng.uniform(0.2, 0.9);
    const std::size_t n = r.ctmc.size();
    DistanceMatrix lp = solve_distance_lp(r.ctmc, r.metric, lam);
    OnTheFly otf(r.ctmc, r.metric, lam);
    DistanceMatrix d = otf.run(all_pairs(n));
    CHECK(sup_distance(d, lp) <= 1e-6);
    CHECK(d.total());
    CHECK(is_symmetric(d));
    CHECK(triangle_violation(d) <= 1e-7);
    CHECK(otf.exact_count() == n * n);
    CHECK(otf.couplings().size() == 0);

    // The structure the run ends with attains δ.
    PairTables pt(r.ctmc, r.metric);
    // Pairs at label distance 1 are settled without a coupling; any will do.
    CouplingStructure final_c = otf.settled_couplings();
    for (auto [a, b] : all_pairs(n))
      if (pt.kind(a, b) == PairKind::regular && !final_c.contains(a, b)) {
        CHECK(pt.label(a, b) == 1.0);
        final_c.set(r.ctmc, a, b, northwest_corner(r.ctmc.trans[a], r.ctmc.trans[b]));
      }
    Discrepancy g = discrepancy(pt, lam, final_c, final_c.pairs());
    for (auto p : g.variables) CHECK(std::fabs(g.d(p.first, p.second) - lp(p.first, p.second)) <= 1e-7);

    // single pairs on a fresh instance
    int s = static_cast<int>(rng.below(n)), t = static_cast<int>(rng.below(n));
    OnTheFly one(r.ctmc, r.metric, lam);
    CHECK(std::fabs(one.distance(s, t) - lp(s, t)) <= 1e-6);
    CHECK(one.visited_count() <= n * n);
  }
}

TEST_CASE("progress of the improvement loop") {
  SplitMix64 rng(71);
  int improved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Model r = random_model(rng, 4, 10);
    const double lam = 0.5;
    const int n = static_cast<int>(r.ctmc.size());
    std::ostringstream trace;
    OtfOptions opt;
    opt.trace = &trace;
    OnTheFly otf(r.ctmc, r.metric, lam, opt);
    for (auto p : all_pairs(n)) {
      if (!otf.begin(p)) continue;
      for (;;) {
        const DistanceMatrix before = otf.values();
        const std::vector<StatePair> w = otf.working_set();
        if (!otf.improve_step(p)) break;
        ++improved;
        for (auto q : w) CHECK(otf.values()(q.first, q.second) <= before(q.first, q.second) + 1e-9);
      }
      otf.finish();
    }
    // Each replacement lowers the replaced pair and never raises the pivot.
    std::istringstream lines(trace.str());
    std::string line;
    while (std::getline(lines, line)) {
      auto field = [&](const std::string& key) {
        return std::stod(line.substr(line.find(key + "=") + key.size() + 1));
      };
      CAPTURE(line);
      CHECK(field("pair_new") < field("pair_old"));
      CHECK(field("pivot_new") <= field("pivot_old") + 1e-12);
    }
    CHECK(sup_distance(otf.values(), solve_distance_lp(r.ctmc, r.metric, lam)) <= 1e-6);
  }
  CHECK(improved > 0);
}

TEST_CASE("exact values are written once") {
  SplitMix64 rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    Model r = random_model(rng, 3, 9);
    const int n = static_cast<int>(r.ctmc.size());
    OnTheFly otf(r.ctmc, r.metric, 0.5);
    std::map<StatePair, double> seen;
    auto pairs = all_pairs(n);
    rng.shuffle(pairs);
    for (auto p : pairs) {
      otf.run({p});
      for (auto [q, v] : seen) CHECK(otf.values()(q.first, q.second) == v);
      for (auto q : all_pairs(n))
        if (otf.exact(q.first, q.second)) seen.emplace(q, otf.values()(q.first, q.second));
    }
  }
}

TEST_CASE("known over-estimates") {
  SplitMix64 rng(79);
  for (int trial = 0; trial < 25; ++trial) {
    Model r = random_model(rng, 3, 8);
    const int n = static_cast<int>(r.ctmc.size());
    const double lam = rng.uniform(0.3, 0.8);
    PairTables pt(r.ctmc, r.metric);
    DistanceMatrix delta = solve_distance_lp(r.ctmc, r.metric, lam);
    DistanceMatrix known(n);
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t)
        if (rng.below(4) == 0) known.set(s, t, std::min(1.0, delta(s, t) + rng.uniform(0, 0.4)));
    OtfOptions opt;
    opt.known = &known;
    OnTheFly otf(r.ctmc, r.metric, lam, opt);
    DistanceMatrix d = otf.run(all_pairs(n));
    CHECK(leq(delta, d, 1e-9));
    CHECK(sup_distance(d, constrained_fixpoint(pt, lam, known)) <= 1e-7);
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t)
        if (known.defined(s, t) && pt.kind(s, t) == PairKind::regular) CHECK(d(s, t) == known(s, t));
  }
  Model m = load_model(test_data("four_state.json"));
  DistanceMatrix wrong(3);
  OtfOptions opt;
  opt.known = &wrong;
  CHECK_THROWS_AS(OnTheFly(m.ctmc, m.metric, 0.5, opt), std::invalid_argument);
}

TEST_CASE("one replacement per step and batched replacement agree") {
  SplitMix64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    Model r = random_model(rng, 4, 10);
    const int n = static_cast<int>(r.ctmc.size());
    const double lam = rng.uniform(0.3, 0.9);
    DistanceMatrix it = iterate(r.ctmc, r.metric, lam, 1e-12, Start::bottom);
    OtfOptions single;
    single.replace_all = false;
    OnTheFly a(r.ctmc, r.metric, lam, single);
    OnTheFly b(r.ctmc, r.metric, lam);
    DistanceMatrix da = a.run(all_pairs(n)), db = b.run(all_pairs(n));
    CHECK(sup_distance(da, it) <= 1e-7);
    CHECK(sup_distance(db, it) <= 1e-7);
    CHECK(b.stats().rounds <= b.stats().improvements);
    CHECK(a.stats().rounds == a.stats().improvements);
  }
}
