#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ctmcdist {

enum class QueryKind { all_pairs, single_pair };

struct BenchConfig {
  std::vector<int> sizes{10};
  std::vector<int> out_degrees{3};
  std::uint64_t first_seed = 1;
  std::uint64_t seed_count = 5;
  QueryKind query = QueryKind::all_pairs;
  double lambda = 0.5;
  int label_count = 2;
  int absorbing_count = 0;
  double rate_lo = 1.0;
  double rate_hi = 10.0;
};

// One row per instance. The on-the-fly run gives the exact values and the
// time budget; the iterative method then gets the same budget and is scored
// against them.
struct BenchRow {
  int n = 0;
  int out_degree = 0;
  std::uint64_t seed = 0;
  QueryKind query = QueryKind::all_pairs;
  std::string method = "otf";
  double time_ms = 0.0;
  std::size_t tp_count = 0;
  std::size_t iterations = 0;  // Δ applications the iterative method fit in time_ms
  double error = 0.0;          // sup over the queried pairs of |δ - d_iter|
  long visited = -1;           // single-pair only, ordered pairs
  long reachable = -1;         // single-pair only, closure size at termination
};

extern const char* const bench_csv_header;

// The query pair for a single-pair instance, two distinct states drawn from
// the seed.
std::pair<int, int> bench_query_pair(int n, std::uint64_t seed);

BenchRow bench_instance(const BenchConfig& config, int n, int out_degree, std::uint64_t seed);
std::vector<BenchRow> run_bench(const BenchConfig& config);

void write_csv_row(std::ostream& out, const BenchRow& row);
void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace ctmcdist
