#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctmcdist {

struct Entry {
  int state;
  double prob;
  bool operator==(const Entry&) const = default;
};

// Sparse distribution over state indices, sorted by state, zero entries omitted.
using Distribution = std::vector<Entry>;

double mass(const Distribution& mu, int state);
double total_mass(const Distribution& mu);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class LabelMetric {
 public:
  enum class Kind { discrete, table };

  struct TableEntry {
    std::string a, b;
    double d;
  };

  LabelMetric() = default;
  static LabelMetric discrete(std::vector<std::string> alphabet);
  static LabelMetric table(std::vector<TableEntry> entries);

  Kind kind() const { return kind_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  int index_of(std::string_view label) const;
  double dist(int a, int b) const;
  // Entries as given, in input order (table kind only).
  const std::vector<TableEntry>& entries() const { return entries_; }
  // Structural problems found while building the table (missing pairs,
  // conflicting duplicates). Reported by validate().
  const std::vector<std::string>& problems() const { return problems_; }

  bool operator==(const LabelMetric& o) const;

 private:
  Kind kind_ = Kind::discrete;
  std::vector<std::string> alphabet_;  // sorted
  std::vector<double> values_;         // |alphabet|^2, row-major
  std::vector<TableEntry> entries_;
  std::vector<std::string> problems_;
};

double label_dist(std::string_view a, std::string_view b, const LabelMetric& metric);

struct Ctmc {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<char> absorbing;
  std::vector<double> rates;         // 0 for absorbing states
  std::vector<Distribution> trans;   // empty for absorbing states

  std::size_t size() const { return ids.size(); }
  bool is_absorbing(int s) const { return absorbing[s] != 0; }
  int index_of(std::string_view id) const;  // -1 when absent
  int require(std::string_view id) const;   // throws std::invalid_argument
  double prob(int s, int u) const;

  int add_state(std::string id, std::string label, std::optional<double> rate);
  // Adds mass to τ(from)(to); repeated calls for the same pair throw.
  void add_transition(int from, int to, double p);

  bool operator==(const Ctmc&) const = default;
};

struct Model {
  Ctmc ctmc;
  LabelMetric metric;
};

// Empty result means valid.
std::vector<std::string> validate(const Ctmc& m, const LabelMetric& metric);

// Throws ParseError on malformed input, ValidationError on invariant violations.
Model parse_model(std::string_view text);
Model parse_model_unchecked(std::string_view text);
Model load_model(const std::string& path);
std::string serialize_model(const Model& model);

// Parses a probability or rate literal: number, decimal string or "p/q".
double parse_quantity(std::string_view text);

struct RandomParams {
  int n = 10;
  int out_degree = 3;
  int label_count = 2;
  int absorbing_count = 0;
  double rate_lo = 1.0;
  double rate_hi = 10.0;
  std::uint64_t seed = 0;
};

// Labels "l0".."l{k-1}" under the discrete metric, state ids "s0".."s{n-1}".
Model random_ctmc(const RandomParams& p);

struct PerturbEdit {
  int state;
  int target_a;
  int target_b;
  std::optional<double> eps;  // drawn from the admissible range when empty
};

Ctmc perturb(const Ctmc& m, const std::vector<PerturbEdit>& edits, std::uint64_t seed);

}  // namespace ctmcdist
