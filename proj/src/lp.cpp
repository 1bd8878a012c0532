#include "ctmcdist/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ctmcdist {

namespace {

constexpr double kDrop = 1e-14;        // entries below this are flushed to zero
constexpr double kTie = 1e-12;         // ratio-test tie window
constexpr double kBasicSlack = 1e-9;   // bound violation treated as infeasible
constexpr std::size_t kBlandAfter = 50;  // consecutive degenerate pivots

double slack_lower(Relation r) { return r == Relation::greater_equal ? -lp_infinity : 0.0; }
double slack_upper(Relation r) { return r == Relation::less_equal ? lp_infinity : 0.0; }

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration limit";
  }
  return "?";
}

int LpProblem::add_variable(double obj, double lo, double hi) {
  objective.push_back(obj);
  lower.push_back(lo);
  upper.push_back(hi);
  return static_cast<int>(objective.size() - 1);
}

void LpProblem::add_row(std::vector<LpTerm> terms, Relation rel, double rhs) {
  rows.push_back({std::move(terms), rel, rhs});
}

void LpProblem::add_dense_row(const std::vector<double>& coefs, Relation rel, double rhs) {
  if (coefs.size() != num_vars()) throw std::invalid_argument("LP row dimension mismatch");
  LpRow r{{}, rel, rhs};
  for (std::size_t j = 0; j < coefs.size(); ++j)
    if (coefs[j] != 0.0) r.terms.push_back({static_cast<int>(j), coefs[j]});
  rows.push_back(std::move(r));
}

double row_activity(const LpRow& row, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& t : row.terms) s += t.coef * x[t.var];
  return s;
}

double max_violation(const LpProblem& p, const std::vector<double>& x) {
  double v = 0.0;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    v = std::max(v, p.lower[j] - x[j]);
    v = std::max(v, x[j] - p.upper[j]);
  }
  for (const auto& r : p.rows) {
    double a = row_activity(r, x);
    if (r.rel != Relation::greater_equal) v = std::max(v, a - r.rhs);
    if (r.rel != Relation::less_equal) v = std::max(v, r.rhs - a);
  }
  return v;
}

void write_lp_format(const LpProblem& p, std::ostream& out, const std::vector<std::string>* names) {
  auto name = [&](int j) { return names ? (*names)[j] : "x" + std::to_string(j); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto terms = [&](const std::vector<LpTerm>& ts) {
    if (ts.empty()) {
      out << " 0 " << name(0);
      return;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double c = ts[i].coef;
      out << (c < 0 ? " - " : (i ? " + " : " ")) << num(std::fabs(c)) << ' ' << name(ts[i].var);
    }
  };
  out << (p.sense == Sense::maximize ? "Maximize\n" : "Minimize\n") << " obj:";
  std::vector<LpTerm> obj;
  for (std::size_t j = 0; j < p.num_vars(); ++j)
    if (p.objective[j] != 0.0) obj.push_back({static_cast<int>(j), p.objective[j]});
  terms(obj);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    out << " c" << i << ':';
    terms(p.rows[i].terms);
    const char* rel = p.rows[i].rel == Relation::less_equal ? " <= "
                      : p.rows[i].rel == Relation::equal    ? " = "
                                                            : " >= ";
    out << rel << num(p.rows[i].rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    double lo = p.lower[j], hi = p.upper[j];
    if (std::isinf(lo) && std::isinf(hi)) {
      out << ' ' << name(j) << " free\n";
    } else {
      out << ' ' << (std::isinf(lo) ? "-inf" : num(lo)) << " <= " << name(j) << " <= "
          << (std::isinf(hi) ? "+inf" : num(hi)) << '\n';
    }
  }
  out << "End\n";
}

// ---------------------------------------------------------------- Simplex

Simplex::Simplex(Sense sense, std::vector<double> objective, std::vector<double> lower,
                 std::vector<double> upper)
    : n_(objective.size()), maximize_(sense == Sense::maximize) {
  if (lower.size() != n_ || upper.size() != n_)
    throw std::invalid_argument("LP bounds dimension mismatch");
  for (std::size_t j = 0; j < n_; ++j)
    if (lower[j] > upper[j]) throw std::invalid_argument("LP variable with empty bound range");
  cost_ = std::move(objective);
  if (maximize_)
    for (double& c : cost_) c = -c;
  lb_ = std::move(lower);
  ub_ = std::move(upper);
  x_.assign(n_, 0.0);
  status_.assign(n_, kLower);
  pos_.assign(n_, -1);
  ensure_width(n_ + 16);
}

void Simplex::ensure_width(std::size_t w) {
  if (w <= width_) return;
  std::size_t nw = std::max({w, 2 * width_, std::size_t{16}});
  std::vector<double> t(m_ * nw, 0.0);
  for (std::size_t i = 0; i < m_; ++i)
    std::copy(tab_.begin() + i * width_, tab_.begin() + i * width_ + n_ + m_, t.begin() + i * nw);
  tab_ = std::move(t);
  width_ = nw;
  d_.resize(width_, 0.0);
}

void Simplex::add_row(const LpRow& r) {
  for (const auto& t : r.terms)
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= n_)
      throw std::invalid_argument("LP row references unknown variable");
  rows_.push_back(r);
  append_tableau_row(r);
}

void Simplex::append_tableau_row(const LpRow& r) {
  ensure_width(n_ + m_ + 1);
  const std::size_t i = m_++;
  const std::size_t s = n_ + i;
  tab_.resize(m_ * width_, 0.0);
  double* t = row(i);
  std::fill(t, t + width_, 0.0);
  double b = r.rhs;
  for (const auto& term : r.terms) t[term.var] += term.coef;
  t[s] = 1.0;
  // Express the row over the current nonbasic variables.
  for (const auto& term : r.terms) {
    int k = pos_[term.var];
    if (k < 0) continue;
    double f = t[term.var];
    if (f == 0.0) continue;
    const double* tk = row(k);
    for (std::size_t j = 0; j < n_ + m_ - 1; ++j)
      if (tk[j] != 0.0) t[j] -= f * tk[j];
    t[term.var] = 0.0;
    b -= f * beta_[k];
  }
  beta_.push_back(b);
  lb_.push_back(slack_lower(r.rel));
  ub_.push_back(slack_upper(r.rel));
  status_.push_back(kBasic);
  pos_.push_back(static_cast<int>(i));
  head_.push_back(static_cast<int>(s));
  art_.push_back(0.0);
  x_.push_back(r.rhs - row_activity(r, x_));
  d_[s] = 0.0;
}

double Simplex::basic_lower(std::size_t i) const {
  return head_[i] == kArtificial ? 0.0 : lb_[head_[i]];
}

double Simplex::basic_upper(std::size_t i) const {
  return head_[i] == kArtificial ? (phase_one_ ? lp_infinity : 0.0) : ub_[head_[i]];
}

double Simplex::basic_value(std::size_t i) const {
  return head_[i] == kArtificial ? art_[i] : x_[head_[i]];
}

void Simplex::set_basic_value(std::size_t i, double v) {
  if (head_[i] == kArtificial) art_[i] = v;
  else x_[head_[i]] = v;
}

std::size_t Simplex::order_key(std::size_t i) const {
  return head_[i] == kArtificial ? n_ + m_ + i : static_cast<std::size_t>(head_[i]);
}

bool Simplex::place_dual_feasible() {
  for (std::size_t j = 0; j < n_; ++j) {
    double c = cost_[j];
    if (c > lp_tolerance::reduced_cost) {
      if (std::isinf(lb_[j])) return false;
      status_[j] = kLower;
      x_[j] = lb_[j];
    } else if (c < -lp_tolerance::reduced_cost) {
      if (std::isinf(ub_[j])) return false;
      status_[j] = kUpper;
      x_[j] = ub_[j];
    } else if (!std::isinf(lb_[j])) {
      status_[j] = kLower;
      x_[j] = lb_[j];
    } else if (!std::isinf(ub_[j])) {
      status_[j] = kUpper;
      x_[j] = ub_[j];
    } else {
      status_[j] = kFree;
      x_[j] = 0.0;
    }
  }
  return true;
}

void Simplex::place_primal() {
  for (std::size_t j = 0; j < n_; ++j) {
    if (!std::isinf(lb_[j])) {
      status_[j] = kLower;
      x_[j] = lb_[j];
    } else if (!std::isinf(ub_[j])) {
      status_[j] = kUpper;
      x_[j] = ub_[j];
    } else {
      status_[j] = kFree;
      x_[j] = 0.0;
    }
  }
}

void Simplex::cold_start() {
  m_ = 0;
  tab_.clear();
  beta_.clear();
  head_.clear();
  art_.clear();
  lb_.resize(n_);
  ub_.resize(n_);
  x_.resize(n_);
  status_.resize(n_);
  pos_.assign(n_, -1);
  std::fill(d_.begin(), d_.end(), 0.0);
  for (const auto& r : rows_) append_tableau_row(r);
}

void Simplex::compute_reduced_costs(bool phase_one) {
  const std::size_t total = n_ + m_;
  std::fill(d_.begin(), d_.end(), 0.0);
  if (!phase_one)
    for (std::size_t j = 0; j < n_; ++j) d_[j] = cost_[j];
  for (std::size_t i = 0; i < m_; ++i) {
    double cb;
    if (head_[i] == kArtificial) cb = phase_one ? 1.0 : 0.0;
    else cb = (!phase_one && static_cast<std::size_t>(head_[i]) < n_) ? cost_[head_[i]] : 0.0;
    if (cb == 0.0) continue;
    const double* t = row(i);
    for (std::size_t j = 0; j < total; ++j)
      if (t[j] != 0.0) d_[j] -= cb * t[j];
  }
  for (std::size_t i = 0; i < m_; ++i)
    if (head_[i] != kArtificial) d_[head_[i]] = 0.0;
}

void Simplex::recompute_basic_values() {
  const std::size_t total = n_ + m_;
  for (std::size_t i = 0; i < m_; ++i) {
    const double* t = row(i);
    double v = beta_[i];
    for (std::size_t j = 0; j < total; ++j) {
      if (t[j] == 0.0 || status_[j] == kBasic || status_[j] == kDead) continue;
      v -= t[j] * x_[j];
    }
    set_basic_value(i, v);
  }
}

void Simplex::pivot(std::size_t r, std::size_t q) {
  const std::size_t total = n_ + m_;
  double* tr = row(r);
  const double inv = 1.0 / tr[q];
  nz_.clear();
  for (std::size_t j = 0; j < total; ++j) {
    if (tr[j] == 0.0) continue;
    tr[j] *= inv;
    nz_.push_back(j);
  }
  tr[q] = 1.0;
  beta_[r] *= inv;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* ti = row(i);
    const double f = ti[q];
    if (f == 0.0) continue;
    for (std::size_t j : nz_) {
      double v = ti[j] - f * tr[j];
      ti[j] = std::fabs(v) < kDrop ? 0.0 : v;
    }
    ti[q] = 0.0;
    beta_[i] -= f * beta_[r];
  }
  const double f = d_[q];
  if (f != 0.0) {
    for (std::size_t j : nz_) d_[j] -= f * tr[j];
  }
  d_[q] = 0.0;
}

double Simplex::artificial_sum() const {
  double s = 0.0;
  for (std::size_t i = 0; i < m_; ++i)
    if (head_[i] == kArtificial) s += art_[i];
  return s;
}

double Simplex::primal_infeasibility() const {
  double v = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    double x = basic_value(i);
    v = std::max({v, basic_lower(i) - x, x - basic_upper(i)});
  }
  return v;
}

bool Simplex::dual_feasible() const {
  const double tol = lp_tolerance::reduced_cost;
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    switch (status_[j]) {
      case kLower:
        if (lb_[j] < ub_[j] && d_[j] < -tol) return false;
        break;
      case kUpper:
        if (lb_[j] < ub_[j] && d_[j] > tol) return false;
        break;
      case kFree:
        if (std::fabs(d_[j]) > tol) return false;
        break;
      default: break;
    }
  }
  return true;
}

LpStatus Simplex::primal(bool phase_one) {
  phase_one_ = phase_one;
  const double tol = lp_tolerance::reduced_cost;
  std::size_t degenerate = 0;
  for (;;) {
    if (++iterations_ > limit_) return LpStatus::iteration_limit;
    const bool bland = degenerate > kBlandAfter;
    const std::size_t total = n_ + m_;

    std::size_t q = total;
    int dir = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      Status st = status_[j];
      if (st == kBasic || st == kDead) continue;
      double dj = d_[j];
      int dj_dir = 0;
      if (dj < -tol && (st == kFree || (st == kLower && ub_[j] > lb_[j]))) dj_dir = 1;
      else if (dj > tol && (st == kFree || (st == kUpper && lb_[j] < ub_[j]))) dj_dir = -1;
      if (!dj_dir) continue;
      if (bland) {
        q = j;
        dir = dj_dir;
        break;
      }
      if (std::fabs(dj) > best) {
        best = std::fabs(dj);
        q = j;
        dir = dj_dir;
      }
    }
    if (q == total) return LpStatus::optimal;

    double t_best = ub_[q] - lb_[q];  // bound flip
    std::size_t r = m_;
    double r_alpha = 0.0;
    bool r_to_lower = false;
    for (std::size_t i = 0; i < m_; ++i) {
      double a = row(i)[q];
      if (std::fabs(a) <= lp_tolerance::pivot) continue;
      double rate = -a * dir;
      double xb = basic_value(i), t;
      bool to_lower;
      if (rate < 0) {
        double lo = basic_lower(i);
        if (std::isinf(lo)) continue;
        t = (xb - lo) / -rate;
        to_lower = true;
      } else {
        double hi = basic_upper(i);
        if (std::isinf(hi)) continue;
        t = (hi - xb) / rate;
        to_lower = false;
      }
      if (t < 0) t = 0;
      bool take;
      if (r == m_) take = t < t_best;  // ties with a bound flip keep the flip
      else if (t < t_best - kTie) take = true;
      else if (t > t_best + kTie) take = false;
      else take = bland ? order_key(i) < order_key(r) : std::fabs(a) > std::fabs(r_alpha);
      if (take) {
        t_best = t;
        r = i;
        r_alpha = a;
        r_to_lower = to_lower;
      }
    }
    if (std::isinf(t_best)) return LpStatus::unbounded;

    const double step = dir * t_best;
    if (step != 0.0) {
      x_[q] += step;
      for (std::size_t i = 0; i < m_; ++i) {
        double a = row(i)[q];
        if (a != 0.0) set_basic_value(i, basic_value(i) - a * step);
      }
    }
    degenerate = t_best <= kTie ? degenerate + 1 : 0;

    if (r == m_) {  // bound flip
      if (dir > 0) {
        x_[q] = ub_[q];
        status_[q] = kUpper;
      } else {
        x_[q] = lb_[q];
        status_[q] = kLower;
      }
      continue;
    }
    int leaving = head_[r];
    if (leaving == kArtificial) {
      art_[r] = 0.0;
    } else {
      x_[leaving] = r_to_lower ? lb_[leaving] : ub_[leaving];
      status_[leaving] = r_to_lower ? kLower : kUpper;
      pos_[leaving] = -1;
    }
    pivot(r, q);
    head_[r] = static_cast<int>(q);
    pos_[q] = static_cast<int>(r);
    status_[q] = kBasic;
  }
}

LpStatus Simplex::dual() {
  phase_one_ = false;
  for (;;) {
    std::size_t r = m_;
    double worst = kBasicSlack;
    bool raise = false;
    for (std::size_t i = 0; i < m_; ++i) {
      double x = basic_value(i);
      double lo = basic_lower(i), hi = basic_upper(i);
      if (lo - x > worst) {
        worst = lo - x;
        r = i;
        raise = true;
      } else if (x - hi > worst) {
        worst = x - hi;
        r = i;
        raise = false;
      }
    }
    if (r == m_) return LpStatus::optimal;
    if (++iterations_ > limit_) return LpStatus::iteration_limit;

    const double* tr = row(r);
    const std::size_t total = n_ + m_;
    std::size_t q = total;
    double best_ratio = lp_infinity, best_alpha = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      Status st = status_[j];
      if (st == kBasic || st == kDead) continue;
      double a = tr[j];
      if (std::fabs(a) <= lp_tolerance::pivot) continue;
      if (lb_[j] == ub_[j]) continue;
      // x_B(r) moves by -a per unit increase of x_j.
      double ratio;
      if (st == kFree) {
        ratio = std::fabs(d_[j]) / std::fabs(a);
      } else if (st == kLower) {
        if (raise ? !(a < 0) : !(a > 0)) continue;
        ratio = std::max(d_[j], 0.0) / std::fabs(a);
      } else {
        if (raise ? !(a > 0) : !(a < 0)) continue;
        ratio = std::max(-d_[j], 0.0) / std::fabs(a);
      }
      if (ratio < best_ratio - kTie ||
          (ratio <= best_ratio + kTie && std::fabs(a) > std::fabs(best_alpha))) {
        best_ratio = ratio;
        best_alpha = a;
        q = j;
      }
    }
    if (q == total) return LpStatus::infeasible;

    const double target = raise ? basic_lower(r) : basic_upper(r);
    const double delta = (basic_value(r) - target) / tr[q];
    x_[q] += delta;
    for (std::size_t i = 0; i < m_; ++i) {
      double a = row(i)[q];
      if (a != 0.0) set_basic_value(i, basic_value(i) - a * delta);
    }
    int leaving = head_[r];
    if (leaving == kArtificial) {
      art_[r] = 0.0;
    } else {
      x_[leaving] = target;
      status_[leaving] = raise ? kLower : kUpper;
      pos_[leaving] = -1;
    }
    pivot(r, q);
    head_[r] = static_cast<int>(q);
    pos_[q] = static_cast<int>(r);
    status_[q] = kBasic;
  }
}

void Simplex::drive_out_artificials() {
  const std::size_t total = n_ + m_;
  for (std::size_t i = 0; i < m_; ++i) {
    if (head_[i] != kArtificial) continue;
    const double* t = row(i);
    std::size_t q = total;
    double best = 1e-7;
    for (std::size_t j = 0; j < total; ++j) {
      if (status_[j] == kBasic || status_[j] == kDead) continue;
      if (std::fabs(t[j]) > best) {
        best = std::fabs(t[j]);
        q = j;
      }
    }
    if (q == total) continue;  // redundant row; the artificial stays fixed at zero
    art_[i] = 0.0;
    pivot(i, q);
    head_[i] = static_cast<int>(q);
    pos_[q] = static_cast<int>(i);
    status_[q] = kBasic;
  }
  recompute_basic_values();
}

LpStatus Simplex::run_from_cold() {
  cold_start();
  if (place_dual_feasible()) {
    recompute_basic_values();
    compute_reduced_costs(false);
    LpStatus st = dual();
    if (st == LpStatus::optimal) return primal(false);
    if (st == LpStatus::infeasible) return st;
    cold_start();
  }
  place_primal();
  recompute_basic_values();

  bool any_art = false;
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t s = n_ + i;
    double v = x_[s];
    if (v >= lb_[s] - kBasicSlack && v <= ub_[s] + kBasicSlack) continue;
    double bound = v < lb_[s] ? lb_[s] : ub_[s];
    double sigma = v > bound ? 1.0 : -1.0;
    x_[s] = bound;
    status_[s] = bound == lb_[s] ? kLower : kUpper;
    pos_[s] = -1;
    double* t = row(i);
    for (std::size_t j = 0; j < n_ + m_; ++j) t[j] *= sigma;
    beta_[i] *= sigma;
    head_[i] = kArtificial;
    art_[i] = std::fabs(v - bound);
    any_art = true;
  }
  if (any_art) {
    compute_reduced_costs(true);
    LpStatus st = primal(true);
    if (st != LpStatus::optimal) return st == LpStatus::unbounded ? LpStatus::iteration_limit : st;
    if (artificial_sum() > lp_tolerance::feasibility) return LpStatus::infeasible;
    drive_out_artificials();
  }
  compute_reduced_costs(false);
  return primal(false);
}

LpStatus Simplex::solve() {
  limit_ = iterations_ + 50 * (n_ + m_) + 10000;
  LpStatus st;
  if (warm_) {
    st = dual();
    if (st == LpStatus::optimal) st = primal(false);
    if (st == LpStatus::iteration_limit) {
      limit_ = iterations_ + 50 * (n_ + m_) + 10000;
      st = run_from_cold();
    }
  } else {
    st = run_from_cold();
  }
  // Refresh basic values from the transformed right-hand side and repair drift.
  for (int round = 0; st == LpStatus::optimal && round < 3; ++round) {
    recompute_basic_values();
    if (primal_infeasibility() <= kBasicSlack) break;
    st = dual();
    if (st == LpStatus::optimal) st = primal(false);
  }
  warm_ = st == LpStatus::optimal;
  return st;
}

std::vector<double> Simplex::values() const { return {x_.begin(), x_.begin() + n_}; }

double Simplex::objective() const {
  double v = 0.0;
  for (std::size_t j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return maximize_ ? -v : v;
}

LpSolution solve_lp(const LpProblem& p) {
  const std::size_t n = p.num_vars();
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("LP bounds dimension mismatch");
  LpSolution sol;
  for (std::size_t j = 0; j < n; ++j)
    if (p.lower[j] > p.upper[j]) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
  Simplex sx(p.sense, p.objective, p.lower, p.upper);
  for (const auto& r : p.rows) sx.add_row(r);
  sol.status = sx.solve();
  sol.iterations = sx.iterations();
  if (sol.status == LpStatus::optimal) {
    sol.values = sx.values();
    sol.objective = sx.objective();
  }
  return sol;
}

}  // namespace ctmcdist
