#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/distance_matrix.hpp"

namespace ctmcdist {

struct TransportProblem {
  std::vector<int> rows;       // identifiers of the left support
  std::vector<int> cols;       // identifiers of the right support
  std::vector<double> left;    // mass per row
  std::vector<double> right;   // mass per column
  std::vector<double> cost;    // rows x cols, row-major

  double c(std::size_t i, std::size_t j) const { return cost[i * cols.size() + j]; }
};

// Builds the problem on supp(mu) x supp(nu) with cost(u, v).
TransportProblem make_tp(const Distribution& mu, const Distribution& nu,
                         const std::function<double(int, int)>& cost);

struct Coupling {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> mass;  // rows x cols, row-major

  double at(std::size_t i, std::size_t j) const { return mass[i * cols.size() + j]; }
  // Mass on (u, v) by identifier; 0 when u or v is outside the support.
  double mass_of(int u, int v) const;
  std::size_t positive_count() const;
  Coupling transposed() const;

  bool operator==(const Coupling&) const = default;
};

struct TpResult {
  Coupling coupling;
  double value;
  std::size_t pivots;
};

// Transportation simplex: northwest corner start, MODI pricing,
// stepping-stone pivots, smallest-index entering and leaving cells.
TpResult solve_tp(const TransportProblem& p);

double coupling_cost(const TransportProblem& p, const Coupling& w);
bool is_optimal(const TransportProblem& p, const Coupling& w);

// Northwest-corner vertex of Ω(mu, nu) on the supports.
Coupling northwest_corner(const Distribution& mu, const Distribution& nu);

// Throws std::invalid_argument unless w is a coupling of (mu, nu).
void check_coupling(const Coupling& w, const Distribution& mu, const Distribution& nu);

// Partial map from ordered state pairs to couplings of (τ(s), τ(t)).
class CouplingStructure {
 public:
  CouplingStructure() = default;
  explicit CouplingStructure(std::size_t n) : n_(n) {}

  std::size_t states() const { return n_; }
  std::size_t size() const { return map_.size(); }
  bool contains(int s, int t) const { return map_.count(key(s, t)) != 0; }
  const Coupling* find(int s, int t) const;

  // Validates w against the marginals (τ(s), τ(t)) of m.
  void set(const Ctmc& m, int s, int t, Coupling w);
  void set_unchecked(int s, int t, Coupling w);
  bool erase(int s, int t) { return map_.erase(key(s, t)) != 0; }

  std::vector<StatePair> pairs() const;  // sorted

 private:
  std::uint64_t key(int s, int t) const { return static_cast<std::uint64_t>(s) * n_ + t; }
  std::size_t n_ = 0;
  std::unordered_map<std::uint64_t, Coupling> map_;
};

// C[(s,t)/w].
CouplingStructure update(const CouplingStructure& c, const Ctmc& m, StatePair pair, Coupling w);

}  // namespace ctmcdist
