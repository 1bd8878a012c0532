#include "ctmcdist/ctmc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctmcdist/random.hpp"

namespace ctmcdist {

using nlohmann::json;

namespace {

constexpr double kSumTolerance = 1e-12;

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double mass(const Distribution& mu, int state) {
  auto it = std::lower_bound(mu.begin(), mu.end(), state,
                             [](const Entry& e, int s) { return e.state < s; });
  return it != mu.end() && it->state == state ? it->prob : 0.0;
}

double total_mass(const Distribution& mu) {
  double sum = 0;
  for (const auto& e : mu) sum += e.prob;
  return sum;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join(violations, "; ")), violations_(std::move(violations)) {}

// ---------------------------------------------------------------- LabelMetric

LabelMetric LabelMetric::discrete(std::vector<std::string> alphabet) {
  LabelMetric m;
  m.kind_ = Kind::discrete;
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  m.alphabet_ = std::move(alphabet);
  std::size_t k = m.alphabet_.size();
  m.values_.assign(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) m.values_[i * k + i] = 0.0;
  return m;
}

LabelMetric LabelMetric::table(std::vector<TableEntry> entries) {
  LabelMetric m;
  m.kind_ = Kind::table;
  for (const auto& e : entries) {
    m.alphabet_.push_back(e.a);
    m.alphabet_.push_back(e.b);
  }
  std::sort(m.alphabet_.begin(), m.alphabet_.end());
  m.alphabet_.erase(std::unique(m.alphabet_.begin(), m.alphabet_.end()), m.alphabet_.end());
  std::size_t k = m.alphabet_.size();
  m.values_.assign(k * k, std::nan(""));
  for (std::size_t i = 0; i < k; ++i) m.values_[i * k + i] = 0.0;
  for (const auto& e : entries) {
    int a = m.index_of(e.a), b = m.index_of(e.b);
    if (a == b) {
      if (e.d != 0.0) m.problems_.push_back("label metric: d(" + e.a + "," + e.a + ") must be 0");
      continue;
    }
    double& v = m.values_[a * k + b];
    if (!std::isnan(v) && v != e.d) {
      m.problems_.push_back("label metric: conflicting entries for (" + e.a + "," + e.b + ")");
      continue;
    }
    v = e.d;
    m.values_[b * k + a] = e.d;
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (std::isnan(m.values_[a * k + b]))
        m.problems_.push_back("label metric: missing entry for (" + m.alphabet_[a] + "," +
                              m.alphabet_[b] + ")");
  m.entries_ = std::move(entries);
  return m;
}

int LabelMetric::index_of(std::string_view label) const {
  auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), label);
  if (it == alphabet_.end() || *it != label) return -1;
  return static_cast<int>(it - alphabet_.begin());
}

double LabelMetric::dist(int a, int b) const { return values_[a * alphabet_.size() + b]; }

bool LabelMetric::operator==(const LabelMetric& o) const {
  if (kind_ != o.kind_ || alphabet_ != o.alphabet_ || values_.size() != o.values_.size())
    return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    bool na = std::isnan(values_[i]), nb = std::isnan(o.values_[i]);
    if (na != nb || (!na && values_[i] != o.values_[i])) return false;
  }
  return true;
}

double label_dist(std::string_view a, std::string_view b, const LabelMetric& metric) {
  int i = metric.index_of(a), j = metric.index_of(b);
  if (i < 0) throw std::invalid_argument("unknown label '" + std::string(a) + "'");
  if (j < 0) throw std::invalid_argument("unknown label '" + std::string(b) + "'");
  return metric.dist(i, j);
}

// ---------------------------------------------------------------- Ctmc

int Ctmc::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<int>(i);
  return -1;
}

int Ctmc::require(std::string_view id) const {
  int i = index_of(id);
  if (i < 0) throw std::invalid_argument("unknown state '" + std::string(id) + "'");
  return i;
}

double Ctmc::prob(int s, int u) const { return mass(trans[s], u); }

int Ctmc::add_state(std::string id, std::string label, std::optional<double> rate) {
  ids.push_back(std::move(id));
  labels.push_back(std::move(label));
  absorbing.push_back(rate ? 0 : 1);
  rates.push_back(rate ? *rate : 0.0);
  trans.emplace_back();
  return static_cast<int>(ids.size() - 1);
}

void Ctmc::add_transition(int from, int to, double p) {
  if (from < 0 || from >= static_cast<int>(size()) || to < 0 || to >= static_cast<int>(size()))
    throw std::invalid_argument("transition endpoint out of range");
  auto& row = trans[from];
  auto it = std::lower_bound(row.begin(), row.end(), to,
                             [](const Entry& e, int s) { return e.state < s; });
  if (it != row.end() && it->state == to)
    throw std::invalid_argument("duplicate transition " + ids[from] + " -> " + ids[to]);
  if (p == 0.0) return;
  row.insert(it, Entry{to, p});
}

// ---------------------------------------------------------------- validation

std::vector<std::string> validate(const Ctmc& m, const LabelMetric& metric) {
  std::vector<std::string> out;
  const std::size_t n = m.size();
  if (n == 0) out.push_back("empty state set");
  if (m.labels.size() != n || m.absorbing.size() != n || m.rates.size() != n ||
      m.trans.size() != n) {
    out.push_back("inconsistent state tables");
    return out;
  }
  {
    std::set<std::string> seen;
    for (const auto& id : m.ids)
      if (!seen.insert(id).second) out.push_back("duplicate state id '" + id + "'");
  }
  for (std::size_t s = 0; s < n; ++s) {
    const std::string who = "state '" + m.ids[s] + "': ";
    if (metric.index_of(m.labels[s]) < 0)
      out.push_back(who + "label '" + m.labels[s] + "' not in metric alphabet");
    if (m.absorbing[s]) {
      if (!m.trans[s].empty()) out.push_back(who + "absorbing state has outgoing transitions");
      continue;
    }
    if (!std::isfinite(m.rates[s]))
      out.push_back(who + "exit rate must be finite");
    else if (!(m.rates[s] > 0.0))
      out.push_back(who + "exit rate must be strictly positive");
    double sum = 0.0;
    int prev = -1;
    bool bad = false;
    for (const auto& e : m.trans[s]) {
      if (e.state < 0 || e.state >= static_cast<int>(n)) {
        out.push_back(who + "transition target out of range");
        bad = true;
        continue;
      }
      if (e.state <= prev) out.push_back(who + "transition targets not sorted or repeated");
      prev = e.state;
      if (!std::isfinite(e.prob)) {
        out.push_back(who + "probability must be finite");
        bad = true;
      } else if (e.prob < 0.0) {
        out.push_back(who + "negative probability to '" + m.ids[e.state] + "'");
      } else if (e.prob > 1.0) {
        out.push_back(who + "probability above 1 to '" + m.ids[e.state] + "'");
      }
      sum += e.prob;
    }
    if (!bad && std::fabs(sum - 1.0) > kSumTolerance)
      out.push_back(who + "distribution does not sum to 1 (sum = " + fmt(sum) + ")");
  }

  for (const auto& p : metric.problems()) out.push_back(p);
  const auto& alpha = metric.alphabet();
  const std::size_t k = alpha.size();
  bool complete = metric.problems().empty();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      double d = metric.dist(a, b);
      if (std::isnan(d)) continue;
      if (!(d >= 0.0 && d <= 1.0))
        out.push_back("label metric: d(" + alpha[a] + "," + alpha[b] + ") outside [0,1]");
      else if (d == 0.0)
        out.push_back("label metric: distinct labels " + alpha[a] + ", " + alpha[b] +
                      " at distance 0");
    }
  if (complete) {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t c = 0; c < k; ++c) {
          if (a >= b || c == a || c == b) continue;
          if (metric.dist(a, b) > metric.dist(a, c) + metric.dist(c, b) + 1e-12)
            out.push_back("label metric: triangle inequality fails for (" + alpha[a] + "," +
                          alpha[b] + ") via " + alpha[c]);
        }
  }
  return out;
}

// ---------------------------------------------------------------- parsing

double parse_quantity(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto num = trim(text.substr(0, slash)), den = trim(text.substr(slash + 1));
    long long p = 0, q = 0;
    auto r1 = std::from_chars(num.data(), num.data() + num.size(), p);
    auto r2 = std::from_chars(den.data(), den.data() + den.size(), q);
    if (r1.ec != std::errc() || r1.ptr != num.data() + num.size() || r2.ec != std::errc() ||
        r2.ptr != den.data() + den.size())
      throw ParseError("malformed rational '" + std::string(text) + "'");
    if (q == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    return static_cast<double>(p) / static_cast<double>(q);
  }
  double v = 0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw ParseError("malformed number '" + std::string(text) + "'");
  return v;
}

namespace {

double quantity(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_quantity(j.get<std::string>());
  throw ParseError(where + ": expected number or string");
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing \"" + key + "\"");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

Model parse_model_unchecked(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("model document must be a JSON object");

  Model model;
  Ctmc& m = model.ctmc;
  const json& states = field(doc, "states", "model");
  if (!states.is_array()) throw ParseError("\"states\" must be an array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const json& st = states[i];
    std::string where = "states[" + std::to_string(i) + "]";
    if (!st.is_object()) throw ParseError(where + ": expected object");
    std::string id = string_field(st, "id", where);
    std::string label = string_field(st, "label", where);
    std::optional<double> rate;
    auto r = st.find("rate");
    if (r != st.end() && !r->is_null()) rate = quantity(*r, where + ".rate");
    m.add_state(std::move(id), std::move(label), rate);
  }

  auto tr = doc.find("transitions");
  if (tr != doc.end()) {
    if (!tr->is_array()) throw ParseError("\"transitions\" must be an array");
    for (std::size_t i = 0; i < tr->size(); ++i) {
      const json& t = (*tr)[i];
      std::string where = "transitions[" + std::to_string(i) + "]";
      if (!t.is_object()) throw ParseError(where + ": expected object");
      std::string from = string_field(t, "from", where), to = string_field(t, "to", where);
      int f = m.index_of(from), g = m.index_of(to);
      if (f < 0) throw ParseError(where + ": unknown state '" + from + "'");
      if (g < 0) throw ParseError(where + ": unknown state '" + to + "'");
      double p = quantity(field(t, "prob", where), where + ".prob");
      try {
        m.add_transition(f, g, p);
      } catch (const std::invalid_argument& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
  }

  auto lm = doc.find("label_metric");
  std::string kind = "discrete";
  if (lm != doc.end()) {
    if (!lm->is_object()) throw ParseError("\"label_metric\" must be an object");
    kind = string_field(*lm, "kind", "label_metric");
  }
  if (kind == "discrete") {
    std::vector<std::string> alphabet = m.labels;
    if (lm != doc.end()) {
      auto al = lm->find("alphabet");
      if (al != lm->end()) {
        if (!al->is_array()) throw ParseError("label_metric.alphabet must be an array");
        for (const auto& a : *al) {
          if (!a.is_string()) throw ParseError("label_metric.alphabet entries must be strings");
          alphabet.push_back(a.get<std::string>());
        }
      }
    }
    model.metric = LabelMetric::discrete(std::move(alphabet));
  } else if (kind == "table") {
    const json& entries = field(*lm, "entries", "label_metric");
    if (!entries.is_array()) throw ParseError("label_metric.entries must be an array");
    std::vector<LabelMetric::TableEntry> table;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::string where = "label_metric.entries[" + std::to_string(i) + "]";
      const json& e = entries[i];
      if (!e.is_object()) throw ParseError(where + ": expected object");
      table.push_back({string_field(e, "a", where), string_field(e, "b", where),
                       quantity(field(e, "d", where), where + ".d")});
    }
    model.metric = LabelMetric::table(std::move(table));
  } else {
    throw ParseError("unknown label_metric kind '" + kind + "'");
  }
  return model;
}

Model parse_model(std::string_view text) {
  Model model = parse_model_unchecked(text);
  auto violations = validate(model.ctmc, model.metric);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const Model& model) {
  const Ctmc& m = model.ctmc;
  json doc;
  json states = json::array();
  for (std::size_t s = 0; s < m.size(); ++s) {
    json st = {{"id", m.ids[s]}, {"label", m.labels[s]}};
    st["rate"] = m.absorbing[s] ? json(nullptr) : json(m.rates[s]);
    states.push_back(std::move(st));
  }
  json transitions = json::array();
  for (std::size_t s = 0; s < m.size(); ++s)
    for (const auto& e : m.trans[s])
      transitions.push_back({{"from", m.ids[s]}, {"to", m.ids[e.state]}, {"prob", e.prob}});
  doc["states"] = std::move(states);
  doc["transitions"] = std::move(transitions);

  const LabelMetric& metric = model.metric;
  if (metric.kind() == LabelMetric::Kind::discrete) {
    json lm = {{"kind", "discrete"}};
    std::vector<std::string> used = m.labels;
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    if (used != metric.alphabet()) lm["alphabet"] = metric.alphabet();
    doc["label_metric"] = std::move(lm);
  } else {
    json entries = json::array();
    for (const auto& e : metric.entries())
      entries.push_back({{"a", e.a}, {"b", e.b}, {"d", e.d}});
    doc["label_metric"] = {{"kind", "table"}, {"entries", std::move(entries)}};
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- generation

Model random_ctmc(const RandomParams& p) {
  if (p.n < 1) throw std::invalid_argument("n must be at least 1");
  if (p.out_degree < 1 || p.out_degree > p.n)
    throw std::invalid_argument("out_degree must lie in [1, n]");
  if (p.absorbing_count < 0 || p.absorbing_count >= p.n)
    throw std::invalid_argument("absorbing_count must lie in [0, n)");
  if (p.label_count < 1) throw std::invalid_argument("label_count must be at least 1");
  if (!(p.rate_lo > 0.0) || !(p.rate_hi >= p.rate_lo) || !std::isfinite(p.rate_hi))
    throw std::invalid_argument("rate range must satisfy 0 < lo <= hi");

  SplitMix64 rng(p.seed);
  std::vector<int> order(p.n);
  for (int i = 0; i < p.n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<char> absorbing(p.n, 0);
  for (int i = 0; i < p.absorbing_count; ++i) absorbing[order[i]] = 1;

  std::vector<std::string> alphabet;
  for (int i = 0; i < p.label_count; ++i) alphabet.push_back("l" + std::to_string(i));

  Model model;
  Ctmc& m = model.ctmc;
  std::vector<int> targets(p.n);
  std::vector<double> weights(p.out_degree);
  std::vector<std::vector<Entry>> pending(p.n);
  for (int s = 0; s < p.n; ++s) {
    std::string label = alphabet[rng.below(p.label_count)];
    if (absorbing[s]) {
      m.add_state("s" + std::to_string(s), std::move(label), std::nullopt);
      continue;
    }
    double rate = rng.uniform(p.rate_lo, p.rate_hi);
    m.add_state("s" + std::to_string(s), std::move(label), rate);
    for (int i = 0; i < p.n; ++i) targets[i] = i;
    rng.shuffle(targets);
    double sum = 0;
    for (int i = 0; i < p.out_degree; ++i) sum += weights[i] = rng.uniform_open0();
    for (int i = 0; i < p.out_degree; ++i) pending[s].push_back({targets[i], weights[i] / sum});
  }
  for (int s = 0; s < p.n; ++s)
    for (const auto& e : pending[s]) m.add_transition(s, e.state, e.prob);
  model.metric = LabelMetric::discrete(std::move(alphabet));
  return model;
}

Ctmc perturb(const Ctmc& m, const std::vector<PerturbEdit>& edits, std::uint64_t seed) {
  Ctmc out = m;
  SplitMix64 rng(seed);
  const int n = static_cast<int>(m.size());
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const PerturbEdit& e = edits[i];
    std::string where = "edit " + std::to_string(i) + ": ";
    if (e.state < 0 || e.state >= n || e.target_a < 0 || e.target_a >= n || e.target_b < 0 ||
        e.target_b >= n)
      throw std::invalid_argument(where + "state out of range");
    if (out.is_absorbing(e.state))
      throw std::invalid_argument(where + "state '" + out.ids[e.state] + "' is absorbing");
    if (e.target_a == e.target_b) continue;
    Distribution& row = out.trans[e.state];
    double pa = mass(row, e.target_a), pb = mass(row, e.target_b);
    double eps;
    if (e.eps) {
      eps = *e.eps;
    } else {
      double hi = std::min(1.0 - pa, pb);
      if (!(hi > 0.0)) throw std::invalid_argument(where + "no admissible epsilon");
      eps = hi * rng.uniform_open0();
    }
    if (!std::isfinite(eps)) throw std::invalid_argument(where + "epsilon must be finite");
    if (pa + eps > 1.0 || pb - eps < 0.0 || pa + eps < 0.0 || pb - eps > 1.0)
      throw std::invalid_argument(where + "epsilon " + fmt(eps) +
                                  " leaves the probability range");
    auto set = [&row](int state, double p) {
      auto it = std::lower_bound(row.begin(), row.end(), state,
                                 [](const Entry& x, int s) { return x.state < s; });
      bool present = it != row.end() && it->state == state;
      if (p == 0.0) {
        if (present) row.erase(it);
      } else if (present) {
        it->prob = p;
      } else {
        row.insert(it, Entry{state, p});
      }
    };
    set(e.target_a, pa + eps);
    set(e.target_b, pb - eps);
  }
  return out;
}

}  // namespace ctmcdist
