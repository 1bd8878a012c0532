#pragma once

#include <cstddef>
#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"
#include "ctmcdist/lp.hpp"
#include "ctmcdist/prob_metrics.hpp"
#include "ctmcdist/transport.hpp"

namespace ctmcdist {

// Throws std::invalid_argument unless 0 < lambda < 1.
void check_discount(double lambda);

// Calls f(u, v, mass) for every positive cell of the coupling attached to
// (s, t), reading the stored (t, s) entry transposed when only that exists.
// Returns false when neither orientation is stored.
template <class F>
bool for_each_cell(const CouplingStructure& c, int s, int t, F&& f) {
  if (const Coupling* w = c.find(s, t)) {
    for (std::size_t i = 0; i < w->rows.size(); ++i)
      for (std::size_t j = 0; j < w->cols.size(); ++j)
        if (double m = w->at(i, j); m > 0.0) f(w->rows[i], w->cols[j], m);
    return true;
  }
  if (const Coupling* w = c.find(t, s)) {
    for (std::size_t j = 0; j < w->cols.size(); ++j)
      for (std::size_t i = 0; i < w->rows.size(); ++i)
        if (double m = w->at(i, j); m > 0.0) f(w->cols[j], w->rows[i], m);
    return true;
  }
  return false;
}

DistanceMatrix delta_op(const PairTables& pt, double lambda, const DistanceMatrix& d,
                        std::size_t* tp_count = nullptr);
DistanceMatrix delta_op(const Ctmc& m, const LabelMetric& metric, double lambda, const DistanceMatrix& d);

enum class Start { bottom, top };

struct IterateStats {
  std::size_t iterations = 0;
  std::size_t tp_count = 0;
};

// ⌈log_λ eps⌉, the number of Δ applications that guarantees accuracy eps.
std::size_t iteration_count(double lambda, double eps);

DistanceMatrix iterate(const PairTables& pt, double lambda, double eps, Start start = Start::bottom,
                       IterateStats* stats = nullptr);
DistanceMatrix iterate(const Ctmc& m, const LabelMetric& metric, double lambda, double eps,
                       Start start = Start::bottom, IterateStats* stats = nullptr);

// Γ^C_λ(d). With `pairs`, only those entries are evaluated; otherwise every
// pair. Throws std::invalid_argument when a regular pair has no coupling.
DistanceMatrix gamma_op(const PairTables& pt, double lambda, const CouplingStructure& c,
                        const DistanceMatrix& d, const std::vector<StatePair>* pairs = nullptr);

// Pairs demanded from `roots` through positive coupling mass, stopping at
// pairs that are not regular or are fixed by `known`. Canonical, sorted.
std::vector<StatePair> closure(const PairTables& pt, const CouplingStructure& c,
                               const std::vector<StatePair>& roots, const DistanceMatrix* known = nullptr);

struct DiscrepancyProgram {
  LpProblem lp;                      // one variable per entry of `variables`
  std::vector<StatePair> variables;  // canonical regular pairs of the closure
  DistanceMatrix constants;          // trivial and known values met in the closure
};

DiscrepancyProgram build_discrepancy_program(const PairTables& pt, double lambda, const CouplingStructure& c,
                                             const std::vector<StatePair>& pairs,
                                             const DistanceMatrix* known = nullptr);

struct Discrepancy {
  DistanceMatrix d;  // defined on the closure and the constants it touches
  std::vector<StatePair> variables;
  std::size_t lp_iterations = 0;
};

// Least fixed point of Γ^C_λ on the closure of `pairs`, with `known`
// entries substituted as constants.
Discrepancy discrepancy(const PairTables& pt, double lambda, const CouplingStructure& c,
                        const std::vector<StatePair>& pairs, const DistanceMatrix* known = nullptr);

}  // namespace ctmcdist
