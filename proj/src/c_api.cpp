#include "ctmcdist/ctmcdist.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ctmcdist/bench.hpp"
#include "ctmcdist/bisim.hpp"
#include "ctmcdist/ctmc.hpp"
#include "ctmcdist/fixpoint.hpp"
#include "ctmcdist/global_lp.hpp"
#include "ctmcdist/onthefly.hpp"

struct ctmcdist_model {
  ctmcdist::Model model;
  std::vector<std::string> violations;
};

struct ctmcdist_result {
  ctmcdist::DistanceMatrix d;
  ctmcdist_stats stats{};
};

namespace {

thread_local std::string last_error;

ctmcdist_status fail(ctmcdist_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
ctmcdist_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const ctmcdist::ValidationError& e) {
    std::string msg;
    for (const auto& v : e.violations()) msg += (msg.empty() ? "" : "\n") + v;
    return fail(CTMCDIST_E_INVALID, msg);
  } catch (const ctmcdist::ParseError& e) {
    return fail(CTMCDIST_E_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CTMCDIST_E_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(CTMCDIST_E_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CTMCDIST_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CTMCDIST_E_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ctmcdist_status read_file(const char* path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail(CTMCDIST_E_IO, std::string("cannot open '") + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  text = buf.str();
  return CTMCDIST_OK;
}

ctmcdist_status parse(const char* text, bool checked, ctmcdist_model** out) {
  if (!text || !out) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto m = std::make_unique<ctmcdist_model>();
    m->model = checked ? ctmcdist::parse_model(text) : ctmcdist::parse_model_unchecked(text);
    *out = m.release();
    return CTMCDIST_OK;
  });
}

ctmcdist_status load(const char* path, bool checked, ctmcdist_model** out) {
  if (!path || !out) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  std::string text;
  if (auto st = read_file(path, text); st != CTMCDIST_OK) return st;
  return parse(text.c_str(), checked, out);
}

int state_index(const ctmcdist_model* m, size_t i) {
  if (i >= m->model.ctmc.size()) throw std::invalid_argument("state index out of range");
  return static_cast<int>(i);
}

}  // namespace

extern "C" {

const char* ctmcdist_last_error(void) { return last_error.c_str(); }

const char* ctmcdist_status_name(ctmcdist_status status) {
  switch (status) {
    case CTMCDIST_OK: return "ok";
    case CTMCDIST_E_ARGUMENT: return "invalid argument";
    case CTMCDIST_E_PARSE: return "parse error";
    case CTMCDIST_E_INVALID: return "invalid model";
    case CTMCDIST_E_IO: return "i/o error";
    case CTMCDIST_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ctmcdist_string_free(char* s) { std::free(s); }

ctmcdist_status ctmcdist_model_parse(const char* text, ctmcdist_model** out) { return parse(text, true, out); }
ctmcdist_status ctmcdist_model_parse_unchecked(const char* text, ctmcdist_model** out) {
  return parse(text, false, out);
}
ctmcdist_status ctmcdist_model_load(const char* path, ctmcdist_model** out) { return load(path, true, out); }
ctmcdist_status ctmcdist_model_load_unchecked(const char* path, ctmcdist_model** out) {
  return load(path, false, out);
}

void ctmcdist_model_free(ctmcdist_model* model) { delete model; }

size_t ctmcdist_model_size(const ctmcdist_model* model) { return model ? model->model.ctmc.size() : 0; }

const char* ctmcdist_model_state_id(const ctmcdist_model* model, size_t index) {
  if (!model || index >= model->model.ctmc.size()) return nullptr;
  return model->model.ctmc.ids[index].c_str();
}

ctmcdist_status ctmcdist_model_index(const ctmcdist_model* model, const char* id, size_t* index) {
  if (!model || !id || !index) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  int i = model->model.ctmc.index_of(id);
  if (i < 0) return fail(CTMCDIST_E_ARGUMENT, std::string("unknown state '") + id + "'");
  *index = static_cast<size_t>(i);
  return CTMCDIST_OK;
}

ctmcdist_status ctmcdist_model_validate(ctmcdist_model* model, size_t* violation_count) {
  if (!model || !violation_count) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    model->violations = ctmcdist::validate(model->model.ctmc, model->model.metric);
    *violation_count = model->violations.size();
    return CTMCDIST_OK;
  });
}

const char* ctmcdist_model_violation(const ctmcdist_model* model, size_t i) {
  if (!model || i >= model->violations.size()) return nullptr;
  return model->violations[i].c_str();
}

ctmcdist_status ctmcdist_model_serialize(const ctmcdist_model* model, char** out) {
  if (!model || !out) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    *out = copy_string(ctmcdist::serialize_model(model->model));
    return CTMCDIST_OK;
  });
}

void ctmcdist_random_params_init(ctmcdist_random_params* params) {
  if (!params) return;
  ctmcdist::RandomParams p;
  params->n = p.n;
  params->out_degree = p.out_degree;
  params->label_count = p.label_count;
  params->absorbing_count = p.absorbing_count;
  params->rate_lo = p.rate_lo;
  params->rate_hi = p.rate_hi;
  params->seed = p.seed;
}

ctmcdist_status ctmcdist_model_random(const ctmcdist_random_params* params, ctmcdist_model** out) {
  if (!params || !out) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    ctmcdist::RandomParams p;
    p.n = params->n;
    p.out_degree = params->out_degree;
    p.label_count = params->label_count;
    p.absorbing_count = params->absorbing_count;
    p.rate_lo = params->rate_lo;
    p.rate_hi = params->rate_hi;
    p.seed = params->seed;
    auto m = std::make_unique<ctmcdist_model>();
    m->model = ctmcdist::random_ctmc(p);
    *out = m.release();
    return CTMCDIST_OK;
  });
}

ctmcdist_status ctmcdist_model_perturb(const ctmcdist_model* model, const ctmcdist_edit* edits, size_t count,
                                       uint64_t seed, ctmcdist_model** out) {
  if (!model || !out || (count > 0 && !edits)) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    const ctmcdist::Ctmc& c = model->model.ctmc;
    std::vector<ctmcdist::PerturbEdit> list;
    for (size_t i = 0; i < count; ++i) {
      const ctmcdist_edit& e = edits[i];
      if (!e.state || !e.target_a || !e.target_b) throw std::invalid_argument("perturb: null state id");
      ctmcdist::PerturbEdit pe{c.require(e.state), c.require(e.target_a), c.require(e.target_b), std::nullopt};
      if (e.has_eps) pe.eps = e.eps;
      list.push_back(pe);
    }
    auto m = std::make_unique<ctmcdist_model>();
    m->model.ctmc = ctmcdist::perturb(c, list, seed);
    m->model.metric = model->model.metric;
    *out = m.release();
    return CTMCDIST_OK;
  });
}

void ctmcdist_options_init(ctmcdist_options* options) {
  if (!options) return;
  options->lambda = 0.5;
  options->method = CTMCDIST_METHOD_OTF;
  options->eps = 1e-7;
  options->known = nullptr;
  options->known_count = 0;
}

ctmcdist_status ctmcdist_distance(const ctmcdist_model* model, const ctmcdist_options* options,
                                  const ctmcdist_pair* pairs, size_t count, ctmcdist_result** out) {
  if (!model || !options || !out || (count > 0 && !pairs)) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    using namespace ctmcdist;
    const Ctmc& c = model->model.ctmc;
    const LabelMetric& metric = model->model.metric;
    const std::size_t n = c.size();
    check_discount(options->lambda);

    std::vector<StatePair> query;
    if (pairs) {
      for (size_t i = 0; i < count; ++i) query.push_back({state_index(model, pairs[i].s), state_index(model, pairs[i].t)});
    } else {
      for (int s = 0; s < static_cast<int>(n); ++s)
        for (int t = s; t < static_cast<int>(n); ++t) query.push_back({s, t});
    }
    if (options->known_count > 0 && options->method != CTMCDIST_METHOD_OTF)
      throw std::invalid_argument("known over-estimates apply to the on-the-fly method only");
    if (options->known_count > 0 && !options->known) throw std::invalid_argument("null known list");

    auto r = std::make_unique<ctmcdist_result>();
    r->d = DistanceMatrix(n);
    DistanceMatrix full;
    switch (options->method) {
      case CTMCDIST_METHOD_OTF: {
        DistanceMatrix known(n);
        for (size_t i = 0; i < options->known_count; ++i) {
          const ctmcdist_known& k = options->known[i];
          if (!(k.d >= 0.0 && k.d <= 1.0)) throw std::invalid_argument("known distance outside [0,1]");
          known.set(state_index(model, k.s), state_index(model, k.t), k.d);
        }
        OtfOptions opt;
        if (options->known_count > 0) opt.known = &known;
        OnTheFly otf(c, metric, options->lambda, opt);
        full = otf.run(query);
        r->stats.tp_count = otf.stats().tp_count;
        r->stats.lp_count = otf.stats().lp_count;
        r->stats.improvements = otf.stats().improvements;
        r->stats.visited = otf.visited_count();
        break;
      }
      case CTMCDIST_METHOD_ITER: {
        if (!(options->eps > 0.0 && options->eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
        IterateStats st;
        full = iterate(c, metric, options->lambda, options->eps, Start::bottom, &st);
        r->stats.tp_count = st.tp_count;
        r->stats.iterations = st.iterations;
        break;
      }
      case CTMCDIST_METHOD_LP: {
        DistanceLpStats st;
        full = solve_distance_lp(c, metric, options->lambda, &st);
        r->stats.lp_count = st.rounds;
        r->stats.iterations = st.iterations;
        break;
      }
      default:
        throw std::invalid_argument("unknown method");
    }
    for (auto q : query) r->d.set(q.first, q.second, full(q.first, q.second));
    *out = r.release();
    return CTMCDIST_OK;
  });
}

void ctmcdist_result_free(ctmcdist_result* result) { delete result; }

ctmcdist_status ctmcdist_result_value(const ctmcdist_result* result, size_t s, size_t t, double* value) {
  if (!result || !value) return fail(CTMCDIST_E_ARGUMENT, "null argument");
  if (s >= result->d.size() || t >= result->d.size()) return fail(CTMCDIST_E_ARGUMENT, "state index out of range");
  if (!result->d.defined(static_cast<int>(s), static_cast<int>(t)))
    return fail(CTMCDIST_E_ARGUMENT, "pair not covered by the query");
  *value = result->d(static_cast<int>(s), static_cast<int>(t));
  return CTMCDIST_OK;
}

void ctmcdist_result_stats(const ctmcdist_result* result, ctmcdist_stats* stats) {
  if (result && stats) *stats = result->stats;
}

ctmcdist_status ctmcdist_bisim(const ctmcdist_model* model, size_t* block_of, size_t* block_count) {
  if (!model || !block_count || (!block_of && model->model.ctmc.size() > 0))
    return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    ctmcdist::Partition p = ctmcdist::bisim_classes(model->model.ctmc, model->model.metric);
    for (size_t s = 0; s < p.block_of.size(); ++s) block_of[s] = static_cast<size_t>(p.block_of[s]);
    *block_count = p.size();
    return CTMCDIST_OK;
  });
}

void ctmcdist_bench_config_init(ctmcdist_bench_config* config) {
  if (!config) return;
  static const int sizes[] = {10};
  static const int degrees[] = {3};
  config->sizes = sizes;
  config->size_count = 1;
  config->out_degrees = degrees;
  config->out_degree_count = 1;
  config->first_seed = 1;
  config->seed_count = 5;
  config->single_pair = 0;
  config->lambda = 0.5;
  config->label_count = 2;
}

ctmcdist_status ctmcdist_bench(const ctmcdist_bench_config* config, char** csv) {
  if (!config || !csv || (config->size_count > 0 && !config->sizes) ||
      (config->out_degree_count > 0 && !config->out_degrees))
    return fail(CTMCDIST_E_ARGUMENT, "null argument");
  return guarded([&] {
    ctmcdist::BenchConfig bc;
    bc.sizes.assign(config->sizes, config->sizes + config->size_count);
    bc.out_degrees.assign(config->out_degrees, config->out_degrees + config->out_degree_count);
    bc.first_seed = config->first_seed;
    bc.seed_count = config->seed_count;
    bc.query = config->single_pair ? ctmcdist::QueryKind::single_pair : ctmcdist::QueryKind::all_pairs;
    bc.lambda = config->lambda;
    bc.label_count = config->label_count;
    std::ostringstream out;
    ctmcdist::write_csv(out, ctmcdist::run_bench(bc));
    *csv = copy_string(out.str());
    return CTMCDIST_OK;
  });
}

}  // extern "C"
