#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ofd/discovery.hpp"
#include "ofd/inference.hpp"
#include "ofd/oracle.hpp"
#include "ofd/relation.hpp"
#include "ofd/repair.hpp"
#include "ofd/sense_assignment.hpp"
#include "ofd/synth.hpp"

using namespace ofd;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInfeasible = 2;

unsigned default_threads() {
  if (const char* env = std::getenv("OFDKIT_THREADS")) {
    try {
      auto n = std::stoul(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return 1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Relation drop_columns(const Relation& r, const std::vector<std::string>& ignore) {
  if (ignore.empty()) return r;
  std::set<AttrId> skip;
  for (const auto& name : ignore) skip.insert(r.index_of(name));
  std::vector<AttrId> keep;
  for (AttrId a = 0; a < r.arity(); ++a)
    if (!skip.count(a)) keep.push_back(a);
  return r.project(keep);
}

// "12" is an absolute count; "40%" is a share of the unconstrained repair cost.
std::size_t resolve_tau(const std::string& spec, std::size_t free_cost) {
  if (spec.empty()) return kNoLimit;
  try {
    if (spec.back() == '%') {
      double pct = std::stod(spec.substr(0, spec.size() - 1));
      if (pct < 0) throw InputError("negative tau");
      return static_cast<std::size_t>(std::floor(pct / 100.0 * static_cast<double>(free_cost) + 1e-9));
    }
    std::size_t pos = 0;
    long long v = std::stoll(spec, &pos);
    if (pos != spec.size() || v < 0) throw InputError("bad tau '" + spec + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw InputError("bad tau '" + spec + "'");
  }
}

struct DiscoverArgs {
  std::string data, onto, out, stats;
  std::vector<std::string> ignore;
  std::vector<std::string> kinds{"syn"};
  std::uint32_t theta = 0;
  double kappa = 1.0;
  bool no_opt2 = false, no_opt3 = false, no_opt4 = false, verify = false;
  std::size_t max_level = 0;
  std::optional<std::string> opts;
};

int run_discover(const DiscoverArgs& a, unsigned threads) {
  auto r = drop_columns(load_csv(a.data), a.ignore);
  Ontology o = a.onto.empty() ? Ontology{} : load_ontology(a.onto);
  DiscoveryConfig cfg;
  cfg.synonym = cfg.inheritance = cfg.traditional = false;
  for (const auto& k : a.kinds) {
    if (k == "syn") cfg.synonym = true;
    else if (k == "inh") cfg.inheritance = true;
    else if (k == "fd") cfg.traditional = true;
    else throw InputError("unknown kind '" + k + "'");
  }
  cfg.theta = a.theta;
  cfg.kappa = a.kappa;
  cfg.opt2 = !a.no_opt2;
  cfg.opt3 = !a.no_opt3;
  cfg.opt4 = !a.no_opt4;
  if (a.opts) {
    if (a.opts->find_first_not_of("0234") != std::string::npos) throw InputError("--opts takes digits from 2, 3, 4");
    cfg.opt2 = a.opts->find('2') != std::string::npos;
    cfg.opt3 = a.opts->find('3') != std::string::npos;
    cfg.opt4 = a.opts->find('4') != std::string::npos;
  }
  cfg.max_level = a.max_level;
  cfg.threads = threads;
  auto res = fastofd(r, o, cfg);

  std::ostringstream text;
  write_ofds(text, res.ofds, r.schema());
  if (a.out.empty()) std::cout << text.str();
  else write_text(a.out, text.str());
  const auto& s = res.stats;
  std::cerr << res.ofds.size() << " OFDs; generated " << s.generated << ", verified " << s.verified << ", pruned "
            << s.pruned() << " (opt2 " << s.pruned_opt2 << ", opt3 " << s.pruned_opt3 << "), lookups " << s.lookups
            << ", " << std::fixed << std::setprecision(3) << s.seconds << " s\n";
  if (!a.stats.empty()) {
    json j{{"ofds", res.ofds.size()},       {"generated", s.generated},   {"verified", s.verified},
           {"pruned_opt2", s.pruned_opt2},  {"pruned_opt3", s.pruned_opt3}, {"key_shortcuts", s.key_shortcuts},
           {"lookups", s.lookups},          {"seconds", s.seconds},       {"max_senses_per_value", s.max_senses_per_value},
           {"mean_senses_per_value", s.mean_senses_per_value}};
    j["levels"] = json::array();
    for (const auto& l : s.levels)
      j["levels"].push_back({{"level", l.level}, {"nodes", l.nodes}, {"generated", l.generated},
                             {"verified", l.verified}, {"ofds", l.ofds}, {"seconds", l.seconds}});
    write_text(a.stats, j.dump(2) + "\n");
  }
  if (a.verify) {
    oracle::Budget budget;
    budget.max_tuples = 200;
    budget.max_arity = 8;
    auto expected = oracle::enumerate_ofds(r, o, cfg, budget);
    auto key = [&](const OfdSet& s) {
      std::set<std::string> out;
      for (const auto& phi : s) out.insert(format_ofd(phi, r.schema()));
      return out;
    };
    if (key(expected) != key(res.ofds)) {
      std::cerr << "oracle mismatch: brute force found " << expected.size() << " OFDs\n";
      return kInputError;
    }
    std::cerr << "oracle agrees\n";
  }
  return kOk;
}

struct InferArgs {
  std::string data, ofds, closure, implies, out;
  bool cover = false;
};

int run_infer(const InferArgs& a) {
  auto schema = load_csv(a.data).schema();
  auto sigma = load_ofds(a.ofds, schema);
  if (!a.closure.empty()) {
    AttrSet x = 0;
    std::stringstream ss(a.closure);
    for (std::string name; std::getline(ss, name, ',');) {
      auto t = name.find_first_not_of(' ');
      name = t == std::string::npos ? "" : name.substr(t, name.find_last_not_of(' ') - t + 1);
      if (name.empty()) continue;
      auto it = std::find(schema.begin(), schema.end(), name);
      if (it == schema.end()) throw InputError("unknown attribute '" + name + "'");
      x |= attr_bit(static_cast<AttrId>(it - schema.begin()));
    }
    AttrSet c;
    try {
      c = closure(x, sigma);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    bool first = true;
    for (auto b : attr_members(c)) {
      std::cout << (first ? "" : ",") << schema[b];
      first = false;
    }
    std::cout << "\n";
  }
  if (!a.implies.empty()) {
    auto phi = parse_ofd(a.implies, schema);
    try {
      std::cout << (implies(sigma, phi) ? "implied" : "not implied") << "\n";
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  if (a.cover || (a.closure.empty() && a.implies.empty())) {
    auto result = a.cover ? minimal_cover(sigma) : sigma;
    std::ostringstream text;
    write_ofds(text, result, schema);
    if (a.out.empty()) std::cout << text.str();
    else write_text(a.out, text.str());
  }
  return kOk;
}

struct SenseArgs {
  std::string data, onto, ofds, out;
  double theta_emd = 10.0;
};

int run_assign(const SenseArgs& a) {
  auto r = load_csv(a.data);
  auto o = load_ontology(a.onto);
  auto sigma = load_ofds(a.ofds, r.schema());
  RefinementTrace trace;
  auto lambda = sense_assignment(r, sigma, o, a.theta_emd, &trace);
  auto text = lambda_to_json(lambda, o);
  if (a.out.empty()) std::cout << text;
  else write_text(a.out, text);
  std::size_t committed = 0;
  for (const auto& s : trace.steps) committed += s.committed;
  std::cerr << trace.steps.size() << " refinement steps, " << committed << " reassignments\n";
  return kOk;
}

struct CleanArgs {
  std::string data, onto, ofds, lambda, out, tau, repaired_data, repaired_onto, strategy = "best";
  std::optional<std::size_t> beam, kmax;
  double theta_emd = 10.0;
  bool first_feasible = false, verify = false;
};

int run_clean(const CleanArgs& a, unsigned threads) {
  auto r = load_csv(a.data);
  auto o = load_ontology(a.onto);
  auto sigma = load_ofds(a.ofds, r.schema());
  validate_repair_sigma(sigma);
  auto lambda = a.lambda.empty() ? sense_assignment(r, sigma, o, a.theta_emd)
                                 : lambda_from_json(read_text(a.lambda), r, sigma, o);
  BeamConfig cfg;
  cfg.beam = a.beam;
  cfg.k_max = a.kmax;
  cfg.threads = threads;
  cfg.stop_at_first_feasible = a.first_feasible;
  if (a.strategy == "cover") cfg.strategy = RepairStrategy::Cover;
  else if (a.strategy == "largest-group") cfg.strategy = RepairStrategy::LargestGroup;
  else if (a.strategy != "best") throw InputError("unknown strategy '" + a.strategy + "'");
  std::size_t free_cost = 0;
  if (!a.tau.empty() && a.tau.back() == '%') {
    auto d = repair_data(r, sigma, o, lambda, kNoLimit, cfg.strategy);
    free_cost = d.consistent ? d.dist() : 0;
  }
  cfg.tau = resolve_tau(a.tau, free_cost);

  auto result = ontology_repair_search(r, sigma, o, lambda, cfg);
  auto front = pareto_front(result.pairs());
  std::cout << "candidates: " << result.pool.size() << ", beam " << result.beam << "\n";
  for (const auto& p : front) {
    std::cout << "repair: dist_S=" << p.dist_s << " dist_I=" << p.dist_i << " delta_P=" << p.delta_p << "\n";
    for (const auto& ins : p.ontology.insertions)
      std::cout << "  insert '" << ins.value << "' (" << o.sense_name(ins.sense) << ") into "
                << o.concept_class(ins.target).name << "\n";
    for (const auto& c : p.data)
      std::cout << "  t" << c.tuple << "." << r.schema()[c.attr] << ": '" << c.old_value << "' -> '" << c.new_value
                << "'\n";
  }
  if (!a.out.empty()) write_text(a.out, repairs_to_json(result, front, r, o));
  if (front.empty()) {
    std::cerr << "no repair within tau\n";
    return kInfeasible;
  }
  bool sound = true;
  for (const auto& p : front) sound = sound && verify_pair(r, sigma, o, lambda, p, cfg.tau);
  if (!sound) {
    std::cerr << "a repair failed re-verification\n";
    return kInputError;
  }
  const auto& chosen = front.front();  // fewest ontology changes within tau
  if (!a.repaired_data.empty() || !a.repaired_onto.empty()) {
    Ontology s2 = o;
    s2.apply(chosen.ontology.insertions);
    std::vector<CellUpdate> ups;
    for (const auto& c : chosen.data) ups.push_back({c.tuple, c.attr, c.new_value});
    if (!a.repaired_data.empty()) save_csv(a.repaired_data, apply_cell_updates(r, ups).relation);
    if (!a.repaired_onto.empty()) save_ontology(a.repaired_onto, s2);
  }
  if (a.verify) {
    auto exact = oracle::exhaustive_repair(r, sigma, o, lambda, result.pool);
    std::vector<std::pair<std::size_t, std::size_t>> pts;
    for (const auto& e : exact)
      if (e.dist_i <= cfg.tau) pts.emplace_back(e.dist_s, e.dist_i);
    auto best = oracle::pareto_quadratic(pts);
    best.erase(std::unique(best.begin(), best.end()), best.end());
    std::cerr << "exact front:";
    for (auto [s, i] : best) std::cerr << " (" << s << "," << i << ")";
    std::cerr << "\n";
  }
  return kOk;
}

struct InjectArgs {
  std::string data, onto, ofds, out_data, out_onto, log;
  double err = 0, inc = 0, out_of_domain = 0.5;
  std::optional<std::uint64_t> seed;
};

int run_inject(const InjectArgs& a) {
  auto r = load_csv(a.data);
  auto o = load_ontology(a.onto);
  auto sigma = load_ofds(a.ofds, r.schema());
  AttrSet z = 0;
  for (const auto& phi : sigma) z |= phi.rhs;
  InjectionSpec spec{a.err, a.inc, a.out_of_domain, *a.seed};
  auto inj = inject_errors(r, o, z, spec);
  save_csv(a.out_data, inj.dirty);
  save_ontology(a.out_onto, inj.reduced);
  write_text(a.log, injection_log_json(inj, r, o));
  std::cerr << inj.errors.size() << " cells corrupted, " << inj.withheld.size() << " memberships withheld\n";
  return kOk;
}

struct BenchArgs {
  std::vector<std::size_t> sizes{10000, 20000, 30000, 40000, 50000};
  std::vector<std::size_t> arities{6};
  std::size_t senses = 4;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool inheritance = false;
  std::uint32_t theta = 1;
};

int run_bench(const BenchArgs& a, unsigned threads) {
  std::ostringstream csv;
  csv << "tuples,arity,ofds,generated,verified,pruned_opt2,pruned_opt3,lookups,seconds,per_level\n";
  for (auto n : a.sizes)
    for (auto m : a.arities) {
      SyntheticSpec spec;
      spec.tuples = n;
      spec.arity = m;
      spec.senses = a.senses;
      spec.seed = *a.seed;
      auto syn = make_synthetic(spec);
      DiscoveryConfig cfg;
      cfg.inheritance = a.inheritance;
      cfg.theta = a.theta;
      cfg.threads = threads;
      auto res = fastofd(syn.relation, syn.ontology, cfg);
      const auto& s = res.stats;
      std::string levels;
      for (const auto& l : s.levels) levels += (levels.empty() ? "" : ";") + std::to_string(l.ofds);
      csv << n << "," << m << "," << res.ofds.size() << "," << s.generated << "," << s.verified << ","
          << s.pruned_opt2 << "," << s.pruned_opt3 << "," << s.lookups << "," << std::setprecision(6) << s.seconds
          << "," << levels << "\n";
    }
  if (a.out.empty()) std::cout << csv.str();
  else write_text(a.out, csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology functional dependency discovery and cleaning"};
  app.require_subcommand(1);
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "worker threads (default: OFDKIT_THREADS or 1)")->check(CLI::PositiveNumber);

  DiscoverArgs da;
  auto* discover = app.add_subcommand("discover", "find minimal OFDs that hold on a CSV file");
  discover->add_option("--data", da.data, "input CSV")->required()->check(CLI::ExistingFile);
  discover->add_option("--onto", da.onto, "ontology JSON")->check(CLI::ExistingFile);
  discover->add_option("--ignore", da.ignore, "columns to leave out")->delimiter(',');
  discover->add_option("--kind,--kinds", da.kinds, "syn, inh, fd")->delimiter(',');
  discover->add_option("--theta", da.theta, "max LCA distance for inh");
  discover->add_option("--kappa", da.kappa, "minimum support")->check(CLI::Range(0.0, 1.0));
  discover->add_flag("--no-opt2", da.no_opt2, "disable candidate-set pruning");
  discover->add_flag("--no-opt3", da.no_opt3, "disable key pruning");
  discover->add_flag("--no-opt4", da.no_opt4, "disable uniform-class shortcut");
  discover->add_option("--opts", da.opts, "enabled optimizations as digits, e.g. 234 or 0 for none");
  discover->add_option("--max-level", da.max_level, "lattice depth cap");
  discover->add_option("--out", da.out, "write OFDs here instead of stdout");
  discover->add_option("--stats", da.stats, "write counters as JSON");
  discover->add_flag("--verify-with-oracle", da.verify, "cross-check against brute-force enumeration");

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "closure, implication and minimal cover");
  infer->add_option("--data", ia.data, "CSV whose header gives the schema")->required()->check(CLI::ExistingFile);
  infer->add_option("--ofds", ia.ofds, "OFD file")->required()->check(CLI::ExistingFile);
  infer->add_option("--closure", ia.closure, "comma-separated attributes");
  infer->add_option("--implies", ia.implies, "OFD to test");
  infer->add_flag("--cover", ia.cover, "print a minimal cover");
  infer->add_option("--out", ia.out, "write OFDs here instead of stdout");

  SenseArgs sa;
  auto* assign = app.add_subcommand("assign-senses", "choose a sense per equivalence class");
  assign->add_option("--data", sa.data)->required()->check(CLI::ExistingFile);
  assign->add_option("--onto", sa.onto)->required()->check(CLI::ExistingFile);
  assign->add_option("--ofds", sa.ofds)->required()->check(CLI::ExistingFile);
  assign->add_option("--theta-emd", sa.theta_emd, "edge weight threshold for refinement");
  assign->add_option("--out", sa.out);

  CleanArgs ca;
  auto* clean = app.add_subcommand("clean", "repair data and ontology");
  clean->add_option("--data", ca.data)->required()->check(CLI::ExistingFile);
  clean->add_option("--onto", ca.onto)->required()->check(CLI::ExistingFile);
  clean->add_option("--ofds", ca.ofds)->required()->check(CLI::ExistingFile);
  clean->add_option("--lambda", ca.lambda, "sense assignment JSON")->check(CLI::ExistingFile);
  clean->add_option("--tau", ca.tau, "max cell updates, a count or NN% of the data-only repair");
  clean->add_option("--beam", ca.beam, "beam width")->check(CLI::PositiveNumber);
  clean->add_option("--kmax", ca.kmax, "max ontology insertions");
  clean->add_option("--theta-emd", ca.theta_emd);
  clean->add_option("--strategy", ca.strategy, "best, cover or largest-group");
  clean->add_flag("--first-feasible", ca.first_feasible, "stop at the first level within tau");
  clean->add_option("--out", ca.out, "repairs JSON");
  clean->add_option("--repaired-data", ca.repaired_data, "CSV after the first Pareto repair");
  clean->add_option("--repaired-onto", ca.repaired_onto, "ontology after the first Pareto repair");
  clean->add_flag("--verify-with-oracle", ca.verify, "print the exhaustive Pareto front");

  InjectArgs ja;
  auto* inject = app.add_subcommand("inject-errors", "corrupt consequent cells and withhold ontology values");
  inject->add_option("--data", ja.data)->required()->check(CLI::ExistingFile);
  inject->add_option("--onto", ja.onto)->required()->check(CLI::ExistingFile);
  inject->add_option("--ofds", ja.ofds)->required()->check(CLI::ExistingFile);
  inject->add_option("--err", ja.err, "fraction of consequent cells")->check(CLI::Range(0.0, 1.0));
  inject->add_option("--inc", ja.inc, "fraction of ontology values")->check(CLI::Range(0.0, 1.0));
  inject->add_option("--fresh", ja.out_of_domain, "share of out-of-domain errors")->check(CLI::Range(0.0, 1.0));
  inject->add_option("--seed", ja.seed)->required();
  inject->add_option("--out-data", ja.out_data)->required();
  inject->add_option("--out-onto", ja.out_onto)->required();
  inject->add_option("--log", ja.log)->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "discovery runtimes on synthetic data");
  bench->add_option("--sizes", ba.sizes)->delimiter(',');
  bench->add_option("--arity", ba.arities)->delimiter(',');
  bench->add_option("--senses", ba.senses);
  bench->add_option("--seed", ba.seed)->required();
  bench->add_flag("--inh", ba.inheritance, "also discover inheritance OFDs");
  bench->add_option("--theta", ba.theta);
  bench->add_option("--out", ba.out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*discover) return run_discover(da, threads);
    if (*infer) return run_infer(ia);
    if (*assign) return run_assign(sa);
    if (*clean) return run_clean(ca, threads);
    if (*inject) return run_inject(ja);
    if (*bench) return run_bench(ba, threads);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
