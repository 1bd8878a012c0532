#include "ctmcdist/onthefly.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ctmcdist/fixpoint.hpp"

namespace ctmcdist {

namespace {

constexpr double kTolerance = 1e-9;

}  // namespace

OnTheFly::OnTheFly(const Ctmc& m, const LabelMetric& metric, double lambda, OtfOptions options)
    : tables_(m, metric),
      lambda_(lambda),
      opt_(options),
      n_(m.size()),
      c_(m.size()),
      settled_(m.size()),
      d_(m.size()),
      exact_(m.size() * m.size(), 0),
      visited_(m.size() * m.size(), 0),
      fixed_(m.size()) {
  check_discount(lambda);
  if (opt_.known && opt_.known->size() != n_) throw std::invalid_argument("known distances: size mismatch");
}

bool OnTheFly::settled(int u, int v) const {
  return tables_.kind(u, v) != PairKind::regular || exact(u, v) || tables_.label(u, v) >= 1.0 ||
         (opt_.known && opt_.known->defined(u, v));
}

void OnTheFly::mark_exact(int u, int v, double value) {
  StatePair p = StatePair{u, v}.canonical();
  exact_[index(u, v)] = 1;
  visited_[index(u, v)] = 1;
  d_.set(u, v, value);
  if (tables_.kind(u, v) == PairKind::regular) fixed_.set(u, v, value);
  if (const Coupling* w = c_.find(p.first, p.second)) {
    settled_.set_unchecked(p.first, p.second, *w);
    c_.erase(p.first, p.second);
  }
}

Coupling OnTheFly::guess(StatePair p) const {
  if (opt_.initial_guesses) {
    if (const Coupling* w = opt_.initial_guesses->find(p.first, p.second)) return *w;
    if (const Coupling* w = opt_.initial_guesses->find(p.second, p.first)) return w->transposed();
  }
  const Ctmc& m = ctmc();
  return northwest_corner(m.trans[p.first], m.trans[p.second]);
}

void OnTheFly::explore(const Coupling& first) {
  std::vector<StatePair> work;
  auto demand = [&](const Coupling& w) {
    for (std::size_t i = 0; i < w.rows.size(); ++i)
      for (std::size_t j = 0; j < w.cols.size(); ++j) {
        if (!(w.at(i, j) > 0.0)) continue;
        StatePair q = StatePair{w.rows[i], w.cols[j]}.canonical();
        if (exact(q.first, q.second)) continue;
        if (tables_.kind(q.first, q.second) != PairKind::regular) {
          mark_exact(q.first, q.second, tables_.trivial_value(q.first, q.second));
        } else if (tables_.label(q.first, q.second) >= 1.0) {
          mark_exact(q.first, q.second, 1.0);
        } else if (opt_.known && opt_.known->defined(q.first, q.second)) {
          mark_exact(q.first, q.second, (*opt_.known)(q.first, q.second));
        } else if (!visited(q.first, q.second)) {
          visited_[index(q.first, q.second)] = 1;
          work.push_back(q);
        }
      }
  };
  demand(first);
  while (!work.empty()) {
    StatePair q = work.back();
    work.pop_back();
    Coupling w = guess(q);
    c_.set(ctmc(), q.first, q.second, w);
    demand(w);
  }
}

void OnTheFly::set_pair(StatePair p, Coupling w) {
  p = p.canonical();
  if (tables_.kind(p.first, p.second) != PairKind::regular)
    throw std::invalid_argument("set_pair: pair is not a pair of distinct non-absorbing states");
  if (exact(p.first, p.second)) throw std::invalid_argument("set_pair: pair is already exact");
  c_.set(ctmc(), p.first, p.second, std::move(w));
  visited_[index(p.first, p.second)] = 1;
  explore(*c_.find(p.first, p.second));
}

std::vector<StatePair> OnTheFly::reachable(StatePair p) const {
  p = p.canonical();
  if (exact(p.first, p.second)) return {};
  return closure(tables_, c_, {p}, &fixed_);
}

void OnTheFly::refresh() {
  roots_.erase(std::remove_if(roots_.begin(), roots_.end(),
                              [this](StatePair q) { return exact(q.first, q.second); }),
               roots_.end());
  Discrepancy res = discrepancy(tables_, lambda_, c_, roots_, &fixed_);
  ++stats_.lp_count;
  bool promoted = false;
  for (auto q : res.variables) {
    double v = res.d(q.first, q.second), l = tables_.label(q.first, q.second);
    if (v - l <= kTolerance) {
      mark_exact(q.first, q.second, l);
      promoted = true;
    } else {
      d_.set(q.first, q.second, v);
    }
  }
  if (promoted) {
    roots_.erase(std::remove_if(roots_.begin(), roots_.end(),
                                [this](StatePair q) { return exact(q.first, q.second); }),
                 roots_.end());
    closure_ = closure(tables_, c_, roots_, &fixed_);
  } else {
    closure_ = std::move(res.variables);
  }
}

bool OnTheFly::begin(StatePair p) {
  p = p.canonical();
  roots_.clear();
  closure_.clear();
  if (exact(p.first, p.second)) return false;
  if (tables_.kind(p.first, p.second) != PairKind::regular) {
    mark_exact(p.first, p.second, tables_.trivial_value(p.first, p.second));
    return false;
  }
  if (tables_.label(p.first, p.second) >= 1.0) {
    mark_exact(p.first, p.second, 1.0);
    return false;
  }
  if (opt_.known && opt_.known->defined(p.first, p.second)) {
    mark_exact(p.first, p.second, (*opt_.known)(p.first, p.second));
    return false;
  }
  if (!visited(p.first, p.second)) set_pair(p, guess(p));
  roots_.push_back(p);
  refresh();
  return !exact(p.first, p.second);
}

// Tests the couplings of the closure against transport optima. Cells whose
// value is not known yet are priced at a lower bound of δ for the optimality
// test and at an upper bound of any discrepancy for the improvement test;
// when neither decides, the cells the lower optimum uses go to `extend`.
bool OnTheFly::certify_or_improve(StatePair pivot, std::vector<StatePair>& extend) {
  const Ctmc& m = ctmc();
  std::vector<char> in_closure(n_ * n_, 0);
  for (auto q : closure_) in_closure[index(q.first, q.second)] = 1;
  auto determined = [&](int a, int b) {
    return settled(a, b) || in_closure[index(a, b)] != 0;
  };
  auto value = [&](int a, int b) {
    if (tables_.kind(a, b) != PairKind::regular) return tables_.trivial_value(a, b);
    if (tables_.label(a, b) >= 1.0) return 1.0;
    if (!exact(a, b) && opt_.known && opt_.known->defined(a, b)) return (*opt_.known)(a, b);
    return d_(a, b);
  };
  std::vector<std::pair<StatePair, Coupling>> replace;
  for (auto [u, v] : closure_) {
    bool unknown = false;
    auto lo = [&](int a, int b) {
      if (determined(a, b)) return value(a, b);
      unknown = true;
      return std::max(tables_.label(a, b), lambda_ * tables_.rate(a, b));
    };
    auto hi = [&](int a, int b) {
      if (determined(a, b)) return value(a, b);
      return std::max(tables_.label(a, b), lambda_);
    };
    double current = 0.0;
    for_each_cell(c_, u, v, [&](int a, int b, double mass) { current += mass * value(a, b); });
    TpResult best = solve_tp(make_tp(m.trans[u], m.trans[v], lo));
    ++stats_.tp_count;
    if (current <= best.value + kTolerance) continue;

    bool improve = !unknown;
    if (unknown) {
      TpResult upper = solve_tp(make_tp(m.trans[u], m.trans[v], hi));
      ++stats_.tp_count;
      if (current > upper.value + kTolerance) {
        best = std::move(upper);
        improve = true;
      } else {
        bool open = false;
        const Coupling& w = best.coupling;
        for (std::size_t i = 0; i < w.rows.size(); ++i)
          for (std::size_t j = 0; j < w.cols.size(); ++j)
            if (w.at(i, j) > 0.0 && !determined(w.rows[i], w.cols[j])) {
              open = true;
              StatePair q = StatePair{w.rows[i], w.cols[j]}.canonical();
              if (std::find(extend.begin(), extend.end(), q) == extend.end()) extend.push_back(q);
            }
        // The lower optimum only uses determined cells, so it already beats the
        // current coupling under any completion.
        improve = !open;
      }
    }
    if (!improve) {
      if (!opt_.replace_all) return false;
      continue;
    }
    replace.emplace_back(StatePair{u, v}, std::move(best.coupling));
    if (!opt_.replace_all) break;
  }
  if (replace.empty()) return false;

  if ((stats_.improvements += replace.size()) > opt_.max_improvements)
    throw std::runtime_error("on-the-fly: improvement limit reached");
  const DistanceMatrix old = d_;
  for (auto& [q, w] : replace) c_.set_unchecked(q.first, q.second, w);
  for (auto& [q, w] : replace) explore(w);
  ++stats_.rounds;
  refresh();
  if (opt_.trace) {
    // Replaced pairs that left the closure keep their old d; report their
    // value under the new couplings instead.
    std::vector<StatePair> left;
    for (auto& [q, w] : replace)
      if (!exact(q.first, q.second) && !std::binary_search(closure_.begin(), closure_.end(), q)) left.push_back(q);
    DistanceMatrix now = d_;
    if (!left.empty()) {
      Discrepancy res = discrepancy(tables_, lambda_, c_, left, &fixed_);
      for (auto q : left) now.set(q.first, q.second, res.d(q.first, q.second));
    }
    const auto precision = opt_.trace->precision(17);
    for (auto& [q, w] : replace)
      *opt_.trace << "improve pivot=(" << m.ids[pivot.first] << "," << m.ids[pivot.second] << ") pair=("
                  << m.ids[q.first] << "," << m.ids[q.second] << ") pair_old=" << old(q.first, q.second)
                  << " pair_new=" << now(q.first, q.second) << " pivot_old=" << old(pivot.first, pivot.second)
                  << " pivot_new=" << d_(pivot.first, pivot.second) << '\n';
    opt_.trace->precision(precision);
  }
  return true;
}

bool OnTheFly::improve_step(StatePair pivot) {
  pivot = pivot.canonical();
  for (;;) {
    if (closure_.empty()) return false;
    std::vector<StatePair> extend;
    if (certify_or_improve(pivot, extend)) return true;
    if (extend.empty()) return false;
    ++stats_.extensions;
    for (auto q : extend) {
      if (!visited(q.first, q.second)) set_pair(q, guess(q));
      roots_.push_back(q);
    }
    refresh();
  }
}

void OnTheFly::finish() {
  for (auto q : closure_)
    if (!exact(q.first, q.second)) mark_exact(q.first, q.second, d_(q.first, q.second));
  roots_.clear();
  closure_.clear();
}

DistanceMatrix OnTheFly::run(const std::vector<StatePair>& query) {
  std::vector<StatePair> order;
  for (auto p : query) {
    if (p.first < 0 || p.second < 0 || static_cast<std::size_t>(p.first) >= n_ ||
        static_cast<std::size_t>(p.second) >= n_)
      throw std::invalid_argument("query pair refers to an unknown state");
    order.push_back(p.canonical());
  }
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  DistanceMatrix out(n_);
  for (auto p : order) {
    if (begin(p)) {
      while (improve_step(p)) {
      }
      finish();
    }
    out.set(p.first, p.second, d_(p.first, p.second));
  }
  return out;
}

double OnTheFly::distance(int s, int t) { return run({{s, t}})(s, t); }

std::size_t OnTheFly::visited_count() const {
  std::size_t c = 0;
  for (std::size_t s = 0; s < n_; ++s)
    for (std::size_t t = s; t < n_; ++t)
      if (visited_[s * n_ + t]) c += s == t ? 1 : 2;
  return c;
}

std::size_t OnTheFly::exact_count() const {
  std::size_t c = 0;
  for (std::size_t s = 0; s < n_; ++s)
    for (std::size_t t = s; t < n_; ++t)
      if (exact_[s * n_ + t]) c += s == t ? 1 : 2;
  return c;
}

}  // namespace ctmcdist
