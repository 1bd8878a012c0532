#include "ctmcdist/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/fixpoint.hpp"
#include "ctmcdist/onthefly.hpp"
#include "ctmcdist/random.hpp"

namespace ctmcdist {

const char* const bench_csv_header = "n,out_degree,seed,query_kind,method,time_ms,tp_count,iterations,error,visited,reachable";

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

std::pair<int, int> bench_query_pair(int n, std::uint64_t seed) {
  SplitMix64 rng(seed ^ 0x5bd1e995u);
  int s = static_cast<int>(rng.below(n));
  if (n < 2) return {s, s};
  int t = static_cast<int>(rng.below(n - 1));
  return {s, t < s ? t : t + 1};
}

BenchRow bench_instance(const BenchConfig& config, int n, int out_degree, std::uint64_t seed) {
  RandomParams p;
  p.n = n;
  p.out_degree = out_degree;
  p.label_count = config.label_count;
  p.absorbing_count = config.absorbing_count;
  p.rate_lo = config.rate_lo;
  p.rate_hi = config.rate_hi;
  p.seed = seed;
  Model m = random_ctmc(p);

  BenchRow row;
  row.n = n;
  row.out_degree = out_degree;
  row.seed = seed;
  row.query = config.query;

  PairTables pt(m.ctmc, m.metric);
  std::vector<StatePair> query;
  if (config.query == QueryKind::all_pairs) {
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t) query.push_back({s, t});
  } else {
    auto [s, t] = bench_query_pair(n, seed);
    query.push_back({s, t});
  }

  auto t0 = Clock::now();
  OnTheFly otf(m.ctmc, m.metric, config.lambda);
  DistanceMatrix exact;
  if (config.query == QueryKind::all_pairs) {
    exact = otf.run(query);
  } else {
    StatePair q = query.front();
    std::size_t closure = 0;
    if (otf.begin(q)) {
      while (otf.improve_step(q)) {
      }
      closure = otf.working_set().size();
      otf.finish();
    }
    exact = otf.values();
    row.reachable = static_cast<long>(closure);
  }
  row.time_ms = ms_since(t0);
  row.tp_count = otf.stats().tp_count;
  if (config.query == QueryKind::single_pair) row.visited = static_cast<long>(otf.visited_count());

  // Iteration from the bottom under the same budget.
  auto t1 = Clock::now();
  DistanceMatrix d = DistanceMatrix::constant(n, 0.0);
  while (ms_since(t1) < row.time_ms) {
    d = delta_op(pt, config.lambda, d);
    ++row.iterations;
  }
  for (auto q : query) row.error = std::max(row.error, std::fabs(exact(q.first, q.second) - d(q.first, q.second)));
  return row;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (!(config.lambda > 0.0 && config.lambda < 1.0)) throw std::invalid_argument("bench: lambda must be in (0,1)");
  for (int n : config.sizes)
    if (n < 1) throw std::invalid_argument("bench: state count must be positive");
  for (int n : config.sizes)
    for (int k : config.out_degrees)
      if (k < 1 || k > n) throw std::invalid_argument("bench: out-degree must be in [1, n]");
  std::vector<BenchRow> rows;
  for (int n : config.sizes)
    for (int k : config.out_degrees)
      for (std::uint64_t i = 0; i < config.seed_count; ++i)
        rows.push_back(bench_instance(config, n, k, config.first_seed + i));
  return rows;
}

void write_csv_row(std::ostream& out, const BenchRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%llu,%s,%s,%.3f,%zu,%zu,%.12g,", r.n, r.out_degree,
                static_cast<unsigned long long>(r.seed), r.query == QueryKind::all_pairs ? "all" : "single",
                r.method.c_str(), r.time_ms, r.tp_count, r.iterations, r.error);
  out << buf;
  if (r.visited >= 0) out << r.visited;
  out << ',';
  if (r.reachable >= 0) out << r.reachable;
  out << '\n';
}

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << bench_csv_header << '\n';
  for (const auto& r : rows) write_csv_row(out, r);
}

}  // namespace ctmcdist
