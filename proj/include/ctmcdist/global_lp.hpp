#pragma once

#include <cstddef>
#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"
#include "ctmcdist/lp.hpp"

namespace ctmcdist {

// Variable indexing of the program D: d (all ordered pairs), then y (one
// block of n per ordered pair of non-absorbing states), then k, then m.
struct GlobalLpLayout {
  std::size_t n = 0;
  std::size_t h = 0;
  std::vector<int> live;      // non-absorbing states, increasing
  std::vector<int> live_pos;  // state -> position in `live`, or -1

  int d(int s, int t) const { return static_cast<int>(s * n + t); }
  int y(int s, int t, int u) const { return static_cast<int>(n * n + (pair(s, t)) * n + u); }
  int k(int s, int t) const { return static_cast<int>(n * n + h * h * n + pair(s, t)); }
  int m(int s, int t) const { return static_cast<int>(n * n + h * h * n + h * h + pair(s, t)); }
  std::size_t num_vars() const { return n * n + h * h * n + 2 * h * h; }

 private:
  std::size_t pair(int s, int t) const { return static_cast<std::size_t>(live_pos[s]) * h + live_pos[t]; }
};

struct DProgram {
  LpProblem lp;
  GlobalLpLayout layout;
  std::size_t core_rows = 0;  // rows before the first y_u - y_v <= d_uv row
};

// The full program. y rows with u = v are left out: they read 0 <= d_uu,
// which the bounds already give.
DProgram build_d_program(const Ctmc& m, const LabelMetric& metric, double lambda);

struct DistanceLpStats {
  std::size_t rows_total = 0;   // rows of the full program
  std::size_t rows_used = 0;    // rows in the final restricted program
  std::size_t rounds = 0;       // row-generation rounds
  std::size_t iterations = 0;   // simplex iterations over all rounds
};

// δ_λ from an optimal solution of D. The y rows enter lazily: the program is
// solved over a subset, violated rows are appended, and the solve is resumed
// until the full program is satisfied. `values`, when given, receives the
// optimal assignment of every variable of D.
DistanceMatrix solve_distance_lp(const Ctmc& m, const LabelMetric& metric, double lambda,
                                 DistanceLpStats* stats = nullptr, std::vector<double>* values = nullptr);

}  // namespace ctmcdist
