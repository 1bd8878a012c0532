// Command-line front end. Talks to the library through the C API only.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ctmcdist/ctmcdist.h"

namespace {

constexpr int kUsage = 1;
constexpr int kInvalid = 2;

struct Failure {
  int code;
  std::string message;
};

using ModelPtr = std::unique_ptr<ctmcdist_model, decltype(&ctmcdist_model_free)>;
using ResultPtr = std::unique_ptr<ctmcdist_result, decltype(&ctmcdist_result_free)>;

int exit_code(ctmcdist_status st) { return st == CTMCDIST_E_ARGUMENT ? kUsage : kInvalid; }

void check(ctmcdist_status st) {
  if (st != CTMCDIST_OK) throw Failure{exit_code(st), ctmcdist_last_error()};
}

ModelPtr load(const std::string& path) {
  ctmcdist_model* m = nullptr;
  check(ctmcdist_model_load(path.c_str(), &m));
  return ModelPtr(m, ctmcdist_model_free);
}

size_t index_of(const ctmcdist_model* m, const std::string& id) {
  size_t i = 0;
  check(ctmcdist_model_index(m, id.c_str(), &i));
  return i;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kInvalid, "cannot write '" + path + "'"};
  out << text;
}

std::string serialize(const ctmcdist_model* m) {
  char* text = nullptr;
  check(ctmcdist_model_serialize(m, &text));
  std::string s(text);
  ctmcdist_string_free(text);
  return s;
}

int cmd_validate(const std::string& path) {
  ctmcdist_model* raw = nullptr;
  check(ctmcdist_model_load_unchecked(path.c_str(), &raw));
  ModelPtr m(raw, ctmcdist_model_free);
  size_t count = 0;
  check(ctmcdist_model_validate(m.get(), &count));
  if (count == 0) {
    std::cout << "ok\n";
    return 0;
  }
  for (size_t i = 0; i < count; ++i) std::cout << ctmcdist_model_violation(m.get(), i) << '\n';
  return kInvalid;
}

struct DistanceArgs {
  std::string model, pairs, method = "otf", known;
  double lambda = 0.0;
  double eps = 1e-7;
  bool all = false;
};

std::vector<ctmcdist_known> read_known(const std::string& path, const ctmcdist_model* m) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kInvalid, "cannot open '" + path + "'"};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Failure{kInvalid, "known file: " + std::string(e.what())};
  }
  if (!doc.is_array()) throw Failure{kInvalid, "known file: expected a list of {a, b, d}"};
  std::vector<ctmcdist_known> out;
  for (const auto& e : doc) {
    if (!e.is_object() || !e.contains("a") || !e.contains("b") || !e.contains("d") || !e["a"].is_string() ||
        !e["b"].is_string() || !e["d"].is_number())
      throw Failure{kInvalid, "known file: entry must be {\"a\": id, \"b\": id, \"d\": number}"};
    size_t a = 0, b = 0;
    if (ctmcdist_model_index(m, e["a"].get<std::string>().c_str(), &a) != CTMCDIST_OK ||
        ctmcdist_model_index(m, e["b"].get<std::string>().c_str(), &b) != CTMCDIST_OK)
      throw Failure{kInvalid, std::string("known file: ") + ctmcdist_last_error()};
    out.push_back({a, b, e["d"].get<double>()});
  }
  return out;
}

int cmd_distance(const DistanceArgs& a) {
  ModelPtr m = load(a.model);
  const size_t n = ctmcdist_model_size(m.get());
  std::vector<ctmcdist_pair> pairs;
  if (a.all) {
    for (size_t s = 0; s < n; ++s)
      for (size_t t = s + 1; t < n; ++t) pairs.push_back({s, t});
  } else {
    for (const auto& item : split(a.pairs, ',')) {
      auto ends = split(item, ':');
      if (ends.size() != 2) throw Failure{kUsage, "--pairs: expected a:b, got '" + item + "'"};
      pairs.push_back({index_of(m.get(), ends[0]), index_of(m.get(), ends[1])});
    }
    if (pairs.empty()) throw Failure{kUsage, "--pairs: no pairs given"};
  }

  ctmcdist_options opt;
  ctmcdist_options_init(&opt);
  opt.lambda = a.lambda;
  opt.eps = a.eps;
  opt.method = a.method == "iter" ? CTMCDIST_METHOD_ITER : a.method == "lp" ? CTMCDIST_METHOD_LP : CTMCDIST_METHOD_OTF;
  std::vector<ctmcdist_known> known;
  if (!a.known.empty()) {
    known = read_known(a.known, m.get());
    opt.known = known.data();
    opt.known_count = known.size();
  }

  ctmcdist_result* raw = nullptr;
  check(ctmcdist_distance(m.get(), &opt, pairs.data(), pairs.size(), &raw));
  ResultPtr r(raw, ctmcdist_result_free);
  for (auto p : pairs) {
    double v = 0.0;
    check(ctmcdist_result_value(r.get(), p.s, p.t, &v));
    std::printf("%s %s %.12g\n", ctmcdist_model_state_id(m.get(), p.s), ctmcdist_model_state_id(m.get(), p.t), v);
  }
  ctmcdist_stats st;
  ctmcdist_result_stats(r.get(), &st);
  std::fprintf(stderr, "tp=%zu lp=%zu iterations=%zu improvements=%zu visited=%zu\n", st.tp_count, st.lp_count,
               st.iterations, st.improvements, st.visited);
  return 0;
}

int cmd_bisim(const std::string& path) {
  ModelPtr m = load(path);
  const size_t n = ctmcdist_model_size(m.get());
  std::vector<size_t> block_of(n);
  size_t count = 0;
  check(ctmcdist_bisim(m.get(), block_of.data(), &count));
  std::vector<std::vector<size_t>> blocks(count);
  for (size_t s = 0; s < n; ++s) blocks[block_of[s]].push_back(s);
  for (const auto& b : blocks) {
    for (size_t i = 0; i < b.size(); ++i) std::cout << (i ? " " : "") << ctmcdist_model_state_id(m.get(), b[i]);
    std::cout << '\n';
  }
  return 0;
}

int cmd_gen(const ctmcdist_random_params& p, const std::string& out) {
  ctmcdist_model* raw = nullptr;
  check(ctmcdist_model_random(&p, &raw));
  ModelPtr m(raw, ctmcdist_model_free);
  write_text(out, serialize(m.get()));
  return 0;
}

int cmd_perturb(const std::string& path, const std::vector<std::string>& edits, uint64_t seed, const std::string& out) {
  ModelPtr m = load(path);
  std::vector<std::vector<std::string>> parts;
  std::vector<ctmcdist_edit> list;
  for (const auto& e : edits) parts.push_back(split(e, ':'));
  for (size_t i = 0; i < parts.size(); ++i) {
    const auto& f = parts[i];
    if (f.size() != 3 && f.size() != 4) throw Failure{kUsage, "--edit: expected state:a:b[:eps], got '" + edits[i] + "'"};
    ctmcdist_edit e{f[0].c_str(), f[1].c_str(), f[2].c_str(), 0.0, 0};
    if (f.size() == 4) {
      try {
        size_t used = 0;
        e.eps = std::stod(f[3], &used);
        if (used != f[3].size()) throw std::invalid_argument(f[3]);
      } catch (const std::exception&) {
        throw Failure{kUsage, "--edit: bad eps '" + f[3] + "'"};
      }
      e.has_eps = 1;
    }
    list.push_back(e);
  }
  ctmcdist_model* raw = nullptr;
  ctmcdist_status st = ctmcdist_model_perturb(m.get(), list.data(), list.size(), seed, &raw);
  // A violated precondition is a problem with the edit, not with the flags.
  if (st == CTMCDIST_E_ARGUMENT) throw Failure{kInvalid, ctmcdist_last_error()};
  check(st);
  ModelPtr p(raw, ctmcdist_model_free);
  write_text(out, serialize(p.get()));
  return 0;
}

int cmd_bench(std::vector<int> sizes, std::vector<int> degrees, uint64_t first_seed, uint64_t seeds, bool single,
              double lambda, int labels) {
  ctmcdist_bench_config c;
  ctmcdist_bench_config_init(&c);
  c.sizes = sizes.data();
  c.size_count = sizes.size();
  c.out_degrees = degrees.data();
  c.out_degree_count = degrees.size();
  c.first_seed = first_seed;
  c.seed_count = seeds;
  c.single_pair = single ? 1 : 0;
  c.lambda = lambda;
  c.label_count = labels;
  char* csv = nullptr;
  check(ctmcdist_bench(&c, &csv));
  std::cout << csv;
  ctmcdist_string_free(csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bisimilarity distances on continuous-time Markov chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ctmcdist 0.1.0");

  std::string model_path;
  auto* validate = app.add_subcommand("validate", "Check a model document");
  validate->add_option("--model", model_path, "Model file")->required();

  DistanceArgs da;
  auto* distance = app.add_subcommand("distance", "Distances between states");
  distance->add_option("--model", da.model, "Model file")->required();
  distance->add_option("--lambda", da.lambda, "Discount factor in (0,1)")->required();
  auto* pairs_opt = distance->add_option("--pairs", da.pairs, "Pairs a:b[,c:d...]");
  auto* all_opt = distance->add_flag("--all", da.all, "Every pair of distinct states");
  pairs_opt->excludes(all_opt);
  distance->add_option("--method", da.method, "otf, iter or lp")
      ->check(CLI::IsMember({"otf", "iter", "lp"}))
      ->capture_default_str();
  distance->add_option("--eps", da.eps, "Accuracy of the iterative method")->capture_default_str();
  distance->add_option("--known", da.known, "JSON list of {a, b, d} over-estimates (otf only)");

  std::string bisim_path;
  auto* bisim = app.add_subcommand("bisim", "Bisimulation classes");
  bisim->add_option("--model", bisim_path, "Model file")->required();

  ctmcdist_random_params rp;
  ctmcdist_random_params_init(&rp);
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Random model");
  gen->add_option("--n", rp.n, "State count")->capture_default_str();
  gen->add_option("--out-degree", rp.out_degree, "Successors per state")->capture_default_str();
  gen->add_option("--labels", rp.label_count, "Label count")->capture_default_str();
  gen->add_option("--absorbing", rp.absorbing_count, "Absorbing states")->capture_default_str();
  gen->add_option("--rate-lo", rp.rate_lo, "Smallest exit rate")->capture_default_str();
  gen->add_option("--rate-hi", rp.rate_hi, "Exit rates stay below this")->capture_default_str();
  gen->add_option("--seed", rp.seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file, stdout when absent");

  std::string perturb_path, perturb_out;
  std::vector<std::string> edits;
  uint64_t perturb_seed = 0;
  auto* perturb = app.add_subcommand("perturb", "Move probability mass between two successors");
  perturb->add_option("--model", perturb_path, "Model file")->required();
  perturb->add_option("--edit", edits, "state:a:b[:eps], moves eps from b to a")->required();
  perturb->add_option("--seed", perturb_seed, "Seed for omitted eps")->capture_default_str();
  perturb->add_option("--out", perturb_out, "Output file, stdout when absent");

  std::vector<int> sizes{10}, degrees{3};
  uint64_t first_seed = 1, seeds = 5;
  bool single = false;
  double bench_lambda = 0.5;
  int bench_labels = 2;
  auto* bench = app.add_subcommand("bench", "Compare the on-the-fly and iterative methods, CSV on stdout");
  bench->add_option("--sizes", sizes, "State counts")->delimiter(',')->capture_default_str();
  bench->add_option("--out-degrees", degrees, "Out-degrees")->delimiter(',')->capture_default_str();
  bench->add_option("--first-seed", first_seed, "First seed")->capture_default_str();
  bench->add_option("--seeds", seeds, "Seeds per (n, out-degree)")->capture_default_str();
  bench->add_flag("--single", single, "One random pair per instance instead of all pairs");
  bench->add_option("--lambda", bench_lambda, "Discount factor")->capture_default_str();
  bench->add_option("--labels", bench_labels, "Label count")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  if (distance->parsed() && da.pairs.empty() && !da.all) {
    std::cerr << "distance: one of --pairs or --all is required\n";
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(model_path);
    if (distance->parsed()) return cmd_distance(da);
    if (bisim->parsed()) return cmd_bisim(bisim_path);
    if (gen->parsed()) return cmd_gen(rp, gen_out);
    if (perturb->parsed()) return cmd_perturb(perturb_path, edits, perturb_seed, perturb_out);
    if (bench->parsed()) return cmd_bench(sizes, degrees, first_seed, seeds, single, bench_lambda, bench_labels);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  }
  return kUsage;
}
