#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace ctmcdist {

namespace lp_tolerance {
inline constexpr double feasibility = 1e-7;
inline constexpr double reduced_cost = 1e-9;
inline constexpr double pivot = 1e-10;
}  // namespace lp_tolerance

inline constexpr double lp_infinity = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LpTerm {
  int var;
  double coef;
};

struct LpRow {
  std::vector<LpTerm> terms;
  Relation rel;
  double rhs;
};

struct LpProblem {
  Sense sense = Sense::minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  std::size_t num_vars() const { return objective.size(); }
  int add_variable(double obj, double lo, double hi);
  void add_row(std::vector<LpTerm> terms, Relation rel, double rhs);
  // Dense coefficient vector; must have num_vars() entries.
  void add_dense_row(const std::vector<double>& coefs, Relation rel, double rhs);
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Largest violation of any row or bound at x.
double max_violation(const LpProblem& p, const std::vector<double>& x);
double row_activity(const LpRow& row, const std::vector<double>& x);

// CPLEX LP text format. Variables are named x<j> unless names are supplied.
void write_lp_format(const LpProblem& p, std::ostream& out,
                     const std::vector<std::string>* names = nullptr);

// Dense bounded-variable tableau simplex. Rows may be added between solves;
// the next solve then restarts from the previous basis with dual simplex.
class Simplex {
 public:
  Simplex(Sense sense, std::vector<double> objective, std::vector<double> lower,
          std::vector<double> upper);

  std::size_t num_vars() const { return n_; }
  std::size_t num_rows() const { return m_; }
  void add_row(const LpRow& row);

  LpStatus solve();
  std::vector<double> values() const;
  double objective() const;
  std::size_t iterations() const { return iterations_; }

 private:
  enum Status : unsigned char { kBasic, kLower, kUpper, kFree, kDead };
  static constexpr int kArtificial = -1;

  double* row(std::size_t i) { return &tab_[i * width_]; }
  const double* row(std::size_t i) const { return &tab_[i * width_]; }
  void ensure_width(std::size_t w);
  void append_tableau_row(const LpRow& r);
  double basic_lower(std::size_t i) const;
  double basic_upper(std::size_t i) const;
  double basic_value(std::size_t i) const;
  void set_basic_value(std::size_t i, double v);
  std::size_t order_key(std::size_t i) const;

  void cold_start();
  bool place_dual_feasible();
  void place_primal();
  void compute_reduced_costs(bool phase_one);
  void recompute_basic_values();
  void pivot(std::size_t r, std::size_t q);
  LpStatus primal(bool phase_one);
  LpStatus dual();
  void drive_out_artificials();
  double artificial_sum() const;
  bool dual_feasible() const;
  double primal_infeasibility() const;
  LpStatus run_from_cold();

  std::size_t n_ = 0;  // structural variables
  std::size_t m_ = 0;  // rows (each with a slack variable n_ + i)
  std::size_t width_ = 0;
  std::vector<double> cost_;  // internal minimisation costs, size n_
  bool maximize_ = false;
  std::vector<double> lb_, ub_;  // per variable (structural + slack)
  std::vector<double> x_;        // per variable
  std::vector<Status> status_;   // per variable
  std::vector<int> pos_;         // per variable: row where basic, else -1
  std::vector<int> head_;        // per row: basic variable or kArtificial
  std::vector<double> art_;      // per row: artificial value when basic
  std::vector<double> tab_;      // m_ x width_
  std::vector<double> beta_;     // transformed right-hand side
  std::vector<double> d_;        // reduced costs, size width_
  std::vector<LpRow> rows_;      // original rows
  std::vector<std::size_t> nz_;  // scratch
  bool warm_ = false;
  bool phase_one_ = false;
  std::size_t iterations_ = 0;
  std::size_t limit_ = 0;
};

LpSolution solve_lp(const LpProblem& p);

}  // namespace ctmcdist
