#include <doctest.h>

#include "ctmcdist/bisim.hpp"
#include "ctmcdist/fixpoint.hpp"
#include "ctmcdist/onthefly.hpp"
#include "test_util.hpp"

using namespace ctmcdist;

TEST_CASE("bisimulation classes of the perturbation example") {
  Model left = load_model(test_data("perturb_left.json"));
  Partition p = bisim_classes(left.ctmc, left.metric);
  REQUIRE(p.size() == 3);
  CHECK(p.blocks[0] == std::vector<int>{0, 1});
  CHECK(p.blocks[1] == std::vector<int>{2});
  CHECK(p.blocks[2] == std::vector<int>{3, 4});
  CHECK(bisimilar(left.ctmc, left.metric, 3, 4));
  CHECK_FALSE(bisimilar(left.ctmc, left.metric, 0, 2));
  CHECK(bisimilar(left.ctmc, left.metric, 2, 2));
  CHECK_THROWS_AS(bisimilar(left.ctmc, left.metric, 0, 5), std::invalid_argument);

  Model right = load_model(test_data("perturb_right.json"));
  Partition q = bisim_classes(right.ctmc, right.metric);
  CHECK(q.block_of[0] != q.block_of[1]);
  CHECK(q.block_of[3] == q.block_of[4]);
}

TEST_CASE("bisimulation classes of absorbing states") {
  Model m;
  m.ctmc.add_state("a", "x", std::nullopt);
  m.ctmc.add_state("b", "y", std::nullopt);
  m.ctmc.add_state("c", "z", std::nullopt);
  m.metric = LabelMetric::discrete({"x", "y", "z"});
  Partition p = bisim_classes(m.ctmc, m.metric);
  CHECK(p.size() == 3);
  CHECK(last_bisim_rounds() <= 3);

  m.ctmc.add_state("d", "x", std::nullopt);
  p = bisim_classes(m.ctmc, m.metric);
  CHECK(p.size() == 3);
  CHECK(p.block_of[0] == p.block_of[3]);
}

TEST_CASE("rates separate states") {
  Model m;
  int a = m.ctmc.add_state("a", "x", 2.0);
  int b = m.ctmc.add_state("b", "x", 2.0 * (1 + 1e-14));
  int c = m.ctmc.add_state("c", "x", 2.0 * (1 + 1e-9));
  for (int s : {a, b, c}) m.ctmc.add_transition(s, s, 1.0);
  m.metric = LabelMetric::discrete({"x"});
  CHECK(bisimilar(m.ctmc, m.metric, a, b));
  CHECK_FALSE(bisimilar(m.ctmc, m.metric, a, c));
}

TEST_CASE("zero distance matches bisimilarity") {
  SplitMix64 rng(89);
  int related = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Model base = random_model(rng, 3, 8, 3);
    Model r = with_clones(rng, base, 1 + static_cast<int>(rng.below(3)));
    const int n = static_cast<int>(r.ctmc.size());
    REQUIRE(validate(r.ctmc, r.metric).empty());
    Partition p = bisim_classes(r.ctmc, r.metric);
    CHECK(last_bisim_rounds() <= n);
    OnTheFly otf(r.ctmc, r.metric, 0.5);
    DistanceMatrix d = otf.run(all_pairs(n));
    DistanceMatrix it = iterate(r.ctmc, r.metric, 0.5, 1e-10, Start::bottom);
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t) {
        bool same = p.block_of[s] == p.block_of[t];
        related += same;
        CHECK(same == (d(s, t) <= 1e-7));
        CHECK(same == (it(s, t) <= 1e-7));
      }
  }
  CHECK(related >= 40);
}
