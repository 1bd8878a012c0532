#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"
#include "ctmcdist/prob_metrics.hpp"
#include "ctmcdist/transport.hpp"

namespace ctmcdist {

struct OtfOptions {
  // Over-estimates of δ_λ taken as settled values.
  const DistanceMatrix* known = nullptr;
  // Couplings used instead of the northwest corner when a pair is first met.
  const CouplingStructure* initial_guesses = nullptr;
  // One line per coupling replacement.
  std::ostream* trace = nullptr;
  std::size_t max_improvements = 1000000;
  // Replace every non-optimal coupling of the closure before recomputing the
  // discrepancy. When false, one coupling per step, in pair order.
  bool replace_all = true;
};

struct OtfStats {
  std::size_t tp_count = 0;      // transportation problems solved
  std::size_t lp_count = 0;      // discrepancy programs solved
  std::size_t improvements = 0;  // coupling replacements
  std::size_t rounds = 0;        // improve_step calls that replaced something
  std::size_t extensions = 0;    // closure extensions forced by unexplored pairs
};

// On-the-fly computation of δ_λ over canonical pairs (s <= t). A coupling
// stored for (s,t) serves (t,s) transposed, and d is kept symmetric.
class OnTheFly {
 public:
  OnTheFly(const Ctmc& m, const LabelMetric& metric, double lambda, OtfOptions options = {});

  // δ_λ on the query pairs, processed in lexicographic order. Entries outside
  // the query are undefined in the result.
  DistanceMatrix run(const std::vector<StatePair>& query);
  double distance(int s, int t);

  // Stores w at (s,t) and guesses couplings for newly demanded pairs.
  void set_pair(StatePair p, Coupling w);
  // Pairs reachable from `p` through positive coupling mass, avoiding Exact.
  std::vector<StatePair> reachable(StatePair p) const;
  // Recomputes the discrepancy of the closure of the current roots and moves
  // pairs whose value is 0 or ℓ to Exact.
  void refresh();
  // Starts a query at p: guesses its coupling when unvisited and computes
  // the first discrepancy. Returns false when p needs no improvement loop.
  bool begin(StatePair p);
  // One improvement for the current roots. Replaces non-optimal couplings and
  // returns true, or returns false once every coupling in the closure is
  // optimal. Unexplored pairs that could matter are explored first.
  bool improve_step(StatePair pivot);
  // The closure of the current roots becomes exact.
  void finish();

  const Ctmc& ctmc() const { return tables_.ctmc(); }
  const PairTables& tables() const { return tables_; }
  const CouplingStructure& couplings() const { return c_; }
  // Couplings of exact pairs at the moment they were settled.
  const CouplingStructure& settled_couplings() const { return settled_; }
  const DistanceMatrix& values() const { return d_; }
  bool exact(int s, int t) const { return exact_[index(s, t)] != 0; }
  bool visited(int s, int t) const { return visited_[index(s, t)] != 0; }
  // Unordered pairs counted once per orientation, the diagonal once.
  std::size_t visited_count() const;
  std::size_t exact_count() const;
  const OtfStats& stats() const { return stats_; }
  const std::vector<StatePair>& roots() const { return roots_; }
  // Closure of the roots at the last refresh.
  const std::vector<StatePair>& working_set() const { return closure_; }

 private:
  std::size_t index(int s, int t) const {
    return s <= t ? static_cast<std::size_t>(s) * n_ + t : static_cast<std::size_t>(t) * n_ + s;
  }
  bool settled(int u, int v) const;
  void mark_exact(int u, int v, double value);
  Coupling guess(StatePair p) const;
  void explore(const Coupling& w);
  bool certify_or_improve(StatePair pivot, std::vector<StatePair>& extend);

  PairTables tables_;
  double lambda_;
  OtfOptions opt_;
  std::size_t n_;
  CouplingStructure c_;
  CouplingStructure settled_;
  DistanceMatrix d_;
  std::vector<char> exact_;
  std::vector<char> visited_;
  DistanceMatrix fixed_;  // values of exact regular pairs
  std::vector<StatePair> roots_;
  std::vector<StatePair> closure_;
  OtfStats stats_;
};

}  // namespace ctmcdist
