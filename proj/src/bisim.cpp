#include "ctmcdist/bisim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ctmcdist {

namespace {

thread_local int rounds_used = 0;

bool close_rate(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

Partition normalize(std::vector<std::vector<int>> blocks, std::size_t n) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end());
  Partition p;
  p.blocks = std::move(blocks);
  p.block_of.assign(n, -1);
  for (std::size_t i = 0; i < p.blocks.size(); ++i)
    for (int s : p.blocks[i]) p.block_of[s] = static_cast<int>(i);
  return p;
}

}  // namespace

Partition bisim_classes(const Ctmc& m, BisimOptions opt) {
  const std::size_t n = m.size();
  rounds_used = 0;
  if (n == 0) return {};

  // Absorbing flag and label group exactly; rates group by tolerance against
  // the first state of each group, in increasing rate order.
  std::map<std::pair<char, std::string>, std::vector<int>> coarse;
  for (std::size_t s = 0; s < n; ++s) coarse[{m.absorbing[s], m.labels[s]}].push_back(static_cast<int>(s));
  std::vector<std::vector<int>> blocks;
  for (auto& [key, states] : coarse) {
    std::stable_sort(states.begin(), states.end(), [&](int a, int b) { return m.rates[a] < m.rates[b]; });
    std::vector<int> cur;
    for (int s : states) {
      if (!cur.empty() && !close_rate(m.rates[cur.front()], m.rates[s], opt.rate_tolerance)) {
        blocks.push_back(std::move(cur));
        cur.clear();
      }
      cur.push_back(s);
    }
    blocks.push_back(std::move(cur));
  }
  Partition p = normalize(std::move(blocks), n);

  for (;;) {
    ++rounds_used;
    const std::size_t k = p.size();
    std::vector<std::vector<int>> next;
    std::vector<double> sig(k);
    for (const auto& block : p.blocks) {
      std::vector<std::vector<double>> reps;
      std::vector<std::vector<int>> parts;
      for (int s : block) {
        std::fill(sig.begin(), sig.end(), 0.0);
        for (auto e : m.trans[s]) sig[p.block_of[e.state]] += e.prob;
        std::size_t j = 0;
        for (; j < reps.size(); ++j) {
          bool same = true;
          for (std::size_t b = 0; b < k && same; ++b) same = std::fabs(reps[j][b] - sig[b]) <= opt.prob_tolerance;
          if (same) break;
        }
        if (j == reps.size()) {
          reps.push_back(sig);
          parts.emplace_back();
        }
        parts[j].push_back(s);
      }
      for (auto& part : parts) next.push_back(std::move(part));
    }
    if (next.size() == k) break;
    p = normalize(std::move(next), n);
  }
  return p;
}

Partition bisim_classes(const Ctmc& m, const LabelMetric&, BisimOptions opt) { return bisim_classes(m, opt); }

bool bisimilar(const Ctmc& m, const LabelMetric& metric, int s, int t) {
  const int n = static_cast<int>(m.size());
  if (s < 0 || t < 0 || s >= n || t >= n) throw std::invalid_argument("bisimilar: unknown state");
  if (s == t) return true;
  Partition p = bisim_classes(m, metric);
  return p.block_of[s] == p.block_of[t];
}

int last_bisim_rounds() { return rounds_used; }

}  // namespace ctmcdist
