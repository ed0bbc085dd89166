// cmln: command-line front end for complex MLN inference.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cmln/expressivity.hpp"
#include "cmln/fourier.hpp"
#include "cmln/mln.hpp"
#include "cmln/model_io.hpp"
#include "cmln/parse.hpp"
#include "cmln/polytope.hpp"
#include "cmln/wfomc.hpp"

using namespace cmln;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitSize = 3;
constexpr int kExitImproper = 4;
constexpr int kExitSelfcheck = 5;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string model_path;
  std::string engine = "auto";
  std::string backend;
  std::string out;
  std::string format = "text";
  std::string method = "dft";
  std::string query;
  std::string point;
  std::string target;
  std::uint64_t budget = kDefaultCallBudget;
  std::size_t domain_size = 0;
  bool log10 = false;
  bool verbose = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct LoadedModel {
  ModelFile file;
  Domain domain = Domain::of_size(1);
  BackendKind backend = BackendKind::exact;
};

LoadedModel load(const Options& opt) {
  LoadedModel m;
  m.file = parse_model(read_file(opt.model_path));
  if (opt.domain_size)
    m.domain = Domain::of_size(opt.domain_size);
  else
    m.domain = m.file.require_domain();
  m.backend = m.file.inferred_backend();
  if (opt.backend == "float") {
    m.backend = BackendKind::floating;
  } else if (opt.backend == "exact") {
    if (m.file.has_nonzero_float()) throw UsageError("model has real log-weights; the exact backend needs cw weights");
    m.backend = BackendKind::exact;
  } else if (!opt.backend.empty()) {
    throw UsageError("unknown backend '" + opt.backend + "' (exact|float)");
  }
  if (m.file.entries.empty()) throw UsageError("model has no weighted formulas");
  return m;
}

Engine engine_of(const Options& opt) {
  try {
    return parse_engine(opt.engine);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
}

// log10 of a positive rational without overflowing doubles
double log10_rational(const Rational& q) {
  auto log10_int = [](const Integer& z) {
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log10(mant) + static_cast<double>(exp) * std::log10(2.0);
  };
  return log10_int(q.get_num()) - log10_int(q.get_den());
}

template <class R>
double log10_real(const R& v) {
  if constexpr (std::is_same_v<R, Rational>)
    return v > 0 ? log10_rational(v) : -std::numeric_limits<double>::infinity();
  else
    return v > 0 ? std::log10(v) : -std::numeric_limits<double>::infinity();
}

template <class R>
std::string real_text(const R& v, bool log10) {
  if (log10) return format_double(log10_real(v));
  if constexpr (std::is_same_v<R, Rational>)
    return v.get_str();
  else
    return format_double(v);
}

template <class R>
json real_json(const R& v, bool log10) {
  if (log10) {
    double l = log10_real(v);
    return std::isfinite(l) ? json(l) : json(nullptr);
  }
  if constexpr (std::is_same_v<R, Rational>)
    return v.get_str();
  else
    return v;
}

json oracle_json(const OracleStats& s) {
  return {{"calls", s.calls()}, {"lifted", s.calls_with(Engine::lifted)}, {"brute", s.calls_with(Engine::brute)}};
}

void report_stats(const Options& opt, const OracleStats& s) {
  if (opt.verbose)
    std::cerr << "oracle calls " << s.calls() << " (lifted " << s.calls_with(Engine::lifted) << ", brute "
              << s.calls_with(Engine::brute) << "), " << format_double(s.total_seconds()) << " s\n";
}

template <class V>
void write_grid_text(std::ostream& os, const CountGrid<V>& g, bool log10) {
  for (std::uint64_t i = 0; i < g.size(); ++i) os << format_target_line(g.shape.point(i), real_text(g.values[i], log10)) << "\n";
}

template <class V>
void write_grid_csv(std::ostream& os, const CountGrid<V>& g, bool log10) {
  const auto& mods = g.shape.moduli();
  if (mods.size() == 2) {
    for (std::uint64_t r = 0; r < mods[0]; ++r) {
      for (std::uint64_t c = 0; c < mods[1]; ++c) os << (c ? "," : "") << real_text(g.values[r * mods[1] + c], log10);
      os << "\n";
    }
    return;
  }
  for (std::uint64_t i = 0; i < g.size(); ++i) {
    for (auto n : g.shape.point(i)) os << n << ",";
    os << real_text(g.values[i], log10) << "\n";
  }
}

template <class V>
void emit_grid(const Options& opt, const std::vector<Formula>& formulas, const Domain& domain, const CountGrid<V>& g,
               const std::string& partition, const OracleStats* stats) {
  Sink sink(opt.out);
  auto& os = sink.os();
  V mass = 0;
  for (const auto& v : g.values) mass += v;
  if (opt.format == "csv") {
    write_grid_csv(os, g, opt.log10);
    return;
  }
  if (opt.format == "json") {
    json axes = json::array();
    for (std::size_t i = 0; i < formulas.size(); ++i)
      axes.push_back({{"formula", to_string(formulas[i])}, {"modulus", g.shape.moduli()[i]}});
    json values = json::array();
    for (const auto& v : g.values) values.push_back(real_json(v, opt.log10));
    json j = {{"command", "countdist"},
              {"method", opt.method},
              {"backend", std::is_same_v<V, Rational> ? "exact" : "float"},
              {"engine", opt.engine},
              {"domain_size", domain.size()},
              {"axes", axes},
              {"shape", g.shape.moduli()},
              {"log10", opt.log10},
              {"values", values},
              {"mass", real_json(mass, false)},
              {"partition", partition}};
    if (stats) {
      j["oracle"] = oracle_json(*stats);
      j["call_accounting"] = {{"grid_calls", stats->calls()},
                       {"closed_form_calls", closed_form_call_count(formulas, domain).get_str()}};
    }
    os << j.dump(2) << "\n";
    return;
  }
  write_grid_text(os, g, opt.log10);
  os << "# mass " << real_text(mass, false) << "\n";
  os << "# partition " << partition << "\n";
  if (stats) {
    os << "# oracle_calls " << stats->calls() << "\n";
    os << "# closed_form_calls " << closed_form_call_count(formulas, domain).get_str() << "\n";
  }
}

void emit_value(const Options& opt, const char* command, const std::string& value, const OracleStats& stats) {
  Sink sink(opt.out);
  if (opt.format == "json") {
    json j = {{"command", command}, {"value", value}, {"oracle", oracle_json(stats)}};
    sink.os() << j.dump(2) << "\n";
  } else {
    sink.os() << value << "\n";
  }
}

template <class T>
struct Typed;
template <>
struct Typed<Cyclotomic> {
  static CMln<Cyclotomic> model(const ModelFile& f) { return f.exact_model(); }
};
template <>
struct Typed<FloatComplex> {
  static CMln<FloatComplex> model(const ModelFile& f) { return f.float_model(); }
};

template <class T>
int run_partition(const Options& opt, const LoadedModel& lm) {
  Oracle<T> oracle(engine_of(opt));
  auto z = checked_partition_value(partition_function(Typed<T>::model(lm.file), lm.domain, oracle));
  emit_value(opt, "partition", real_text(z, opt.log10), oracle.stats());
  report_stats(opt, oracle.stats());
  return 0;
}

template <class T>
int run_marginal(const Options& opt, const LoadedModel& lm) {
  if (opt.query.empty()) throw UsageError("marginal needs --query");
  Formula q = parse_formula(opt.query);
  Oracle<T> oracle(engine_of(opt));
  auto p = marginal(Typed<T>::model(lm.file), lm.domain, q, oracle);
  emit_value(opt, "marginal", real_text(p, opt.log10), oracle.stats());
  report_stats(opt, oracle.stats());
  return 0;
}

template <class T>
int run_countdist(const Options& opt, const LoadedModel& lm) {
  auto mln = Typed<T>::model(lm.file);
  if (opt.method == "brute") {
    auto u = unnormalized_count_distribution_bruteforce(mln, lm.domain);
    auto z = grid_total(u);
    auto dist = normalize_count_grid(u, z);
    emit_grid(opt, mln.formulas(), lm.domain, dist, real_text(checked_partition_value(z), false), nullptr);
    return 0;
  }
  if (opt.method != "dft") throw UsageError("unknown method '" + opt.method + "' (dft|brute)");
  Oracle<T> oracle(engine_of(opt));
  auto r = count_distribution_via_wfomc(mln, lm.domain, oracle, opt.budget);
  emit_grid(opt, mln.formulas(), lm.domain, r.distribution, real_text(checked_partition_value(r.partition), false),
            &oracle.stats());
  report_stats(opt, oracle.stats());
  return 0;
}

void emit_points(const Options& opt, const char* command, const std::vector<CountVector>& pts,
                 const OracleStats* stats) {
  Sink sink(opt.out);
  auto& os = sink.os();
  if (opt.format == "json") {
    json j = {{"command", command}, {"points", pts}};
    if (stats) j["oracle"] = oracle_json(*stats);
    os << j.dump(2) << "\n";
    return;
  }
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << "\n";
  }
}

int run_support(const Options& opt, const LoadedModel& lm) {
  auto formulas = lm.file.formulas();
  if (opt.method == "brute") {
    emit_points(opt, "support", support_bruteforce(formulas, lm.domain), nullptr);
    return 0;
  }
  if (opt.method != "dft") throw UsageError("unknown method '" + opt.method + "' (dft|brute)");
  Oracle<Cyclotomic> oracle(engine_of(opt));
  auto s = support_via_wfomc(formulas, lm.domain, oracle, opt.budget, lm.file.signature);
  emit_points(opt, "support", s.points, &oracle.stats());
  report_stats(opt, oracle.stats());
  return 0;
}

int run_polytope(const Options& opt, const LoadedModel& lm) {
  auto formulas = lm.file.formulas();
  Oracle<Cyclotomic> oracle(engine_of(opt));
  auto r = relational_marginal_polytope(formulas, lm.domain, oracle, opt.budget, lm.file.signature);
  Sink sink(opt.out);
  auto& os = sink.os();
  auto point_strings = [](const RationalPoint& p) {
    std::vector<std::string> s;
    for (const auto& c : p) s.push_back(c.get_str());
    return s;
  };
  if (opt.format == "json") {
    json verts = json::array(), pts = json::array();
    for (const auto& v : r.polytope.vertices) verts.push_back(point_strings(v));
    for (const auto& v : r.polytope.all_points) pts.push_back(point_strings(v));
    json j = {{"command", "polytope"},
              {"dimension", r.polytope.dimension},
              {"vertices", verts},
              {"points", pts},
              {"oracle", oracle_json(oracle.stats())},
              {"call_accounting", {{"grid_calls", r.grid_size}, {"closed_form_calls", r.formula_calls.get_str()}}}};
    os << j.dump(2) << "\n";
  } else {
    for (const auto& v : r.polytope.vertices) {
      auto s = point_strings(v);
      for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
      os << "\n";
    }
    os << "# support_points " << r.polytope.all_points.size() << "\n";
    os << "# oracle_calls " << oracle.stats().calls() << "\n";
    os << "# grid_size " << r.grid_size << "\n";
    os << "# closed_form_calls " << r.formula_calls.get_str() << "\n";
  }
  report_stats(opt, oracle.stats());
  return 0;
}

CountVector parse_point(const std::string& text) {
  auto t = parse_target(text + " : 1");
  return t.begin()->first;
}

int run_compile_delta(const Options& opt, const LoadedModel& lm) {
  if (opt.point.empty()) throw UsageError("compile-delta needs --point");
  auto m = compile_delta(lm.file.formulas(), lm.domain, parse_point(opt.point), lm.file.signature);
  Sink sink(opt.out);
  sink.os() << write_model(m, lm.domain);
  return 0;
}

int run_compile_dist(const Options& opt, const LoadedModel& lm) {
  if (opt.target.empty()) throw UsageError("compile-dist needs --target");
  auto target = parse_target(read_file(opt.target));
  Oracle<Cyclotomic> oracle(engine_of(opt));
  auto m = compile_distribution(lm.file.formulas(), lm.domain, target, oracle, lm.file.signature);
  Sink sink(opt.out);
  sink.os() << write_model(m, lm.domain);
  report_stats(opt, oracle.stats());
  return 0;
}

// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

CMln<Cyclotomic> builtin(const std::vector<std::pair<std::string, std::vector<Cyclotomic>>>& entries) {
  CMln<Cyclotomic> m;
  for (const auto& [f, w] : entries) m.add(parse_formula(f), w);
  return m;
}

Check check_countdist(const std::string& name, const CMln<Cyclotomic>& m, const Domain& d, Engine engine) {
  try {
    Oracle<Cyclotomic> oracle(engine);
    auto via = count_distribution_via_wfomc(m, d, oracle);
    auto brute = count_distribution_bruteforce(m, d);
    bool ok = via.distribution.values == brute.values;
    return {name, ok, ok ? "" : "dft and brute count distributions differ"};
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

Check check_lifted(const std::string& name, const CMln<Cyclotomic>& m, const Domain& d, std::mt19937_64& rng) {
  try {
    auto red = mln_to_wfomc(m);
    static const std::uint64_t orders[] = {1, 2, 3, 4, 6};
    for (int trial = 0; trial < 3; ++trial) {
      WfomcTask<Cyclotomic> t{red.theory, {}, d};
      for (const auto& p : red.theory.signature().predicates()) {
        auto o = orders[rng() % 5];
        auto w = Cyclotomic::root_of_unity(static_cast<std::int64_t>(rng() % o), o).scaled(make_rational(1 + rng() % 3, 1 + rng() % 2));
        t.weights.set(p, w, Cyclotomic(make_rational(1 + rng() % 2, 1)));
      }
      if (wfomc_lifted_fo2(t) != wfomc_bruteforce(t)) return {name, false, "lifted and brute WFOMC differ"};
    }
    return {name, true, ""};
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

int run_selfcheck(const Options& opt) {
  std::vector<Check> checks;
  std::mt19937_64 rng(1);
  Engine engine = engine_of(opt);
  auto alt = builtin({{"heads(x)", {Cyclotomic(1L), Cyclotomic(-1L)}}});
  auto fs = builtin({{"sm(x)", {Cyclotomic(1L)}}, {"sm(x) & fr(x,y) => sm(y)", {Cyclotomic(1L)}}});
  auto mixed = builtin({{"p(x) | r(x,y)", {Cyclotomic(make_rational(3, 2)), Cyclotomic::root_of_unity(1, 4).scaled(make_rational(1, 2))}},
                        {"~r(x,x)", {Cyclotomic(1L), Cyclotomic::root_of_unity(1, 4).scaled(make_rational(1, 2))}}});
  for (std::size_t n = 1; n <= 3; ++n) {
    auto d = Domain::of_size(n);
    std::string tag = " |D|=" + std::to_string(n);
    checks.push_back(check_countdist("countdist dft=brute alternating coins" + tag, alt, d, engine));
    checks.push_back(check_countdist("countdist dft=brute friends-smokers" + tag, fs, d, engine));
    checks.push_back(check_lifted("wfomc lifted=brute friends-smokers" + tag, fs, d, rng));
    checks.push_back(check_lifted("wfomc lifted=brute p|r, ~r(x,x)" + tag, mixed, d, rng));
  }
  if (!opt.model_path.empty()) {
    auto file = parse_model(read_file(opt.model_path));
    if (file.inferred_backend() == BackendKind::exact && !file.entries.empty()) {
      auto m = file.exact_model();
      for (std::size_t n = 1; n <= 3; ++n) {
        auto d = Domain::of_size(n);
        std::string tag = " |D|=" + std::to_string(n);
        checks.push_back(check_countdist("countdist dft=brute model" + tag, m, d, engine));
        checks.push_back(check_lifted("wfomc lifted=brute model" + tag, m, d, rng));
      }
    }
  }
  Sink sink(opt.out);
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.ok;
    sink.os() << (c.ok ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
  }
  return all ? 0 : kExitSelfcheck;
}

int dispatch(const std::string& command, const Options& opt) {
  if (opt.format != "text" && opt.format != "json" && opt.format != "csv")
    throw UsageError("unknown format '" + opt.format + "' (text|json|csv)");
  if (command == "selfcheck") return run_selfcheck(opt);
  auto lm = load(opt);
  bool exact = lm.backend == BackendKind::exact;
  if (command == "partition") return exact ? run_partition<Cyclotomic>(opt, lm) : run_partition<FloatComplex>(opt, lm);
  if (command == "marginal") return exact ? run_marginal<Cyclotomic>(opt, lm) : run_marginal<FloatComplex>(opt, lm);
  if (command == "countdist") return exact ? run_countdist<Cyclotomic>(opt, lm) : run_countdist<FloatComplex>(opt, lm);
  if (command == "support") return run_support(opt, lm);
  if (command == "polytope") return run_polytope(opt, lm);
  if (command == "compile-delta") return run_compile_delta(opt, lm);
  if (command == "compile-dist") return run_compile_dist(opt, lm);
  throw UsageError("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference for Markov logic networks with complex weights"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub, bool model_required) {
    auto* m = sub->add_option("model", opt.model_path, "model file");
    if (model_required) m->required();
    sub->add_option("--engine", opt.engine, "WFOMC engine: brute|lifted|auto")->capture_default_str();
    sub->add_option("--backend", opt.backend, "numeric backend: exact|float (default: inferred from weights)");
    sub->add_option("--out", opt.out, "write the result to FILE");
    sub->add_option("--format", opt.format, "output format: text|json|csv")->capture_default_str();
    sub->add_option("--budget", opt.budget, "maximum number of oracle calls")->capture_default_str();
    sub->add_option("--domain", opt.domain_size, "override the domain with A1..AN");
    sub->add_flag("--log10", opt.log10, "emit log10 of numeric values");
    sub->add_flag("-v,--verbose", opt.verbose, "print oracle statistics to stderr");
  };

  auto* partition = app.add_subcommand("partition", "partition function Z");
  common(partition, true);
  auto* marg = app.add_subcommand("marginal", "marginal probability of a ground query");
  common(marg, true);
  marg->add_option("--query", opt.query, "ground formula")->required();
  auto* countdist = app.add_subcommand("countdist", "count distribution of the model formulas");
  common(countdist, true);
  countdist->add_option("--method", opt.method, "dft|brute")->capture_default_str();
  auto* support = app.add_subcommand("support", "count vectors reachable by some world");
  common(support, true);
  support->add_option("--method", opt.method, "dft|brute")->capture_default_str();
  auto* polytope = app.add_subcommand("polytope", "vertices of the relational marginal polytope");
  common(polytope, true);
  auto* cdelta = app.add_subcommand("compile-delta", "model whose count distribution is a point mass");
  common(cdelta, true);
  cdelta->add_option("--point", opt.point, "count vector, e.g. 2 or 1,3")->required();
  auto* cdist = app.add_subcommand("compile-dist", "model reproducing a target count distribution");
  common(cdist, true);
  cdist->add_option("--target", opt.target, "target file with 'n1,n2 : p/q' lines")->required();
  auto* selfcheck = app.add_subcommand("selfcheck", "cross-validate engines at small domains");
  common(selfcheck, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, opt);
  } catch (const ParseError& e) {
    std::cerr << opt.model_path << ":" << e.what() << "\n";
    return kExitParse;
  } catch (const LogicError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UnreachableCountVectorError& e) {
    std::cerr << "degenerate model: " << e.what() << "\n";
    return kExitImproper;
  } catch (const SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSize;
  } catch (const ImproperModelError& e) {
    std::cerr << "improper model: " << e.what() << "\n";
    return kExitImproper;
  } catch (const DegenerateModelError& e) {
    std::cerr << "degenerate model: " << e.what() << "\n";
    return kExitImproper;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
