#pragma once

#include <vector>

#include "ctmcdist/ctmc.hpp"

namespace ctmcdist {

struct Partition {
  std::vector<std::vector<int>> blocks;  // each sorted, ordered by first state
  std::vector<int> block_of;

  std::size_t size() const { return blocks.size(); }
};

struct BisimOptions {
  double rate_tolerance = 1e-12;  // relative
  double prob_tolerance = 1e-9;
};

// Coarsest stochastic bisimulation. Labels are compared by name; the label
// metric is not consulted.
Partition bisim_classes(const Ctmc& m, BisimOptions opt = {});
Partition bisim_classes(const Ctmc& m, const LabelMetric& metric, BisimOptions opt = {});

bool bisimilar(const Ctmc& m, const LabelMetric& metric, int s, int t);

// Number of refinement rounds of the last call on this thread, for tests.
int last_bisim_rounds();

}  // namespace ctmcdist
