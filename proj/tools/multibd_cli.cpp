// multibd: transition probabilities, oracle checks, Eyam fits and timings.
//
// Exit codes: 0 ok, 2 bad configuration, 3 computation failed,
// 4 a validation threshold failed.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "multibd/branching.hpp"
#include "multibd/inference.hpp"
#include "multibd/io.hpp"
#include "multibd/oracles.hpp"
#include "multibd/rates.hpp"
#include "multibd/solver.hpp"

using namespace multibd;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitThreshold = 4;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

double env_double(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const double x = std::strtod(v, &end);
  if (*end != '\0' || !(x > 0.0)) throw ConfigError(std::string(name) + " must be a positive number");
  return x;
}

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long x = std::strtol(v, &end, 10);
  if (*end != '\0' || x < 1) throw ConfigError(std::string(name) + " must be a positive integer");
  return static_cast<int>(x);
}

std::pair<int, int> parse_pair(const std::string& text, const char* field) {
  std::istringstream ss(text);
  int a, b;
  char comma = 0;
  std::string rest;
  if (!(ss >> a >> comma >> b) || comma != ',' || (ss >> rest) || a < 0 || b < 0) {
    throw ConfigError(std::string(field) + " must look like a,b with non-negative integers");
  }
  return {a, b};
}

// ---- options shared by the subcommands --------------------------------------

struct ModelOptions {
  std::string model;
  std::string orientation;
  std::string from;
  std::optional<double> alpha, beta;
  std::optional<double> lambda, mu, nu;
  std::optional<double> mu_l, mu_m, eta, gamma;
  std::optional<double> r_ab, r_ba, o_b;
  std::string table;
  std::optional<int> A, B;
  bool auto_B = false;
};

struct NumericOptions {
  double cf_tol = 1e-12;
  double inv_tol = 1e-12;
  int k_max = 0;
  int levin_order = 8;
  bool no_early_stop = false;
  int threads = 1;
};

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--model", m.model, "sir | parasite | bds | mono | custom-table")
      ->required()
      ->check(CLI::IsMember({"sir", "parasite", "bds", "mono", "custom-table"}));
  app->add_option("--orientation", m.orientation, "bbd | dbd (defaults to the model's own)")
      ->check(CLI::IsMember({"bbd", "dbd"}));
  app->add_option("--from", m.from, "initial state a0,b0 (mono: molecule counts of A,B)")->required();
  app->add_option("--alpha", m.alpha, "sir: removal rate");
  app->add_option("--beta", m.beta, "sir: infection rate");
  app->add_option("--lambda", m.lambda, "bds: duplication rate");
  app->add_option("--mu", m.mu, "bds: deletion rate");
  app->add_option("--nu", m.nu, "bds: shift rate");
  app->add_option("--mu-l", m.mu_l, "parasite: larval death rate");
  app->add_option("--mu-m", m.mu_m, "parasite: mature death rate");
  app->add_option("--eta", m.eta, "parasite: density-dependent larval death");
  app->add_option("--gamma", m.gamma, "parasite: maturation rate");
  app->add_option("--r-ab", m.r_ab, "mono: A -> B rate");
  app->add_option("--r-ba", m.r_ba, "mono: B -> A rate");
  app->add_option("--o-b", m.o_b, "mono: B outflow rate");
  app->add_option("--table", m.table, "custom-table: CSV of per-state rates");
  app->add_option("--A", m.A, "type-1 index bound");
  app->add_option("--B", m.B, "type-2 truncation level");
  app->add_flag("--auto-B", m.auto_B, "grow B until the tail mass is below 1e-6");
}

void add_numeric_options(CLI::App* app, NumericOptions& n) {
  app->add_option("--cf-tol", n.cf_tol, "continued-fraction tolerance (env MULTIBD_TOL)")
      ->check(CLI::PositiveNumber);
  app->add_option("--inv-tol", n.inv_tol, "inversion tolerance (env MULTIBD_TOL)")
      ->check(CLI::Range(1e-300, 0.5));
  app->add_option("--k-max", n.k_max, "largest Laplace grid index (0 = automatic)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--levin-order", n.levin_order, "Levin window order")->check(CLI::NonNegativeNumber);
  app->add_flag("--no-early-stop", n.no_early_stop, "sum every grid point up to k-max");
  app->add_option("--threads", n.threads, "worker threads (env MULTIBD_THREADS)")
      ->check(CLI::PositiveNumber);
}

template <class T>
T need(const std::optional<T>& v, const char* flag, const std::string& model) {
  if (!v) throw ConfigError(std::string(flag) + " is required for model " + model);
  return *v;
}

// A model resolved into rates, a start state and the solver's index ranges.
struct Resolved {
  std::string model;
  bool dbd = true;
  std::optional<BBDRates> bbd_rates;
  std::optional<DBDRates> dbd_rates;
  int a0 = 0, b0 = 0;  // solver coordinates
  int A = 0, B = 0;
  bool B_given = false;
  json params;
};

Resolved resolve_model(const ModelOptions& m) {
  Resolved r;
  r.model = m.model;
  const auto [x0, y0] = parse_pair(m.from, "--from");
  r.a0 = x0;
  r.b0 = y0;
  std::string natural = "dbd";

  if (m.model == "sir") {
    SirParams p{need(m.alpha, "--alpha", m.model), need(m.beta, "--beta", m.model), x0 + y0};
    validate(p);
    r.dbd_rates = sir_rates(p);
    r.A = 0;
    r.B = x0 + y0;
    r.B_given = true;
    r.params = {{"alpha", p.alpha}, {"beta", p.beta}};
  } else if (m.model == "bds") {
    BdsParams p{need(m.lambda, "--lambda", m.model), need(m.mu, "--mu", m.model),
                need(m.nu, "--nu", m.model)};
    validate(p);
    r.dbd_rates = bds_rates(p);
    r.A = 0;
    r.params = {{"lambda", p.lambda}, {"mu", p.mu}, {"nu", p.nu}};
  } else if (m.model == "parasite") {
    ParasiteParams p{need(m.mu_l, "--mu-l", m.model), need(m.mu_m, "--mu-m", m.model),
                     need(m.eta, "--eta", m.model), need(m.gamma, "--gamma", m.model)};
    validate(p);
    r.dbd_rates = parasite_rates(p);
    r.A = 0;
    r.B = x0 + y0;  // no births: mature counts never exceed this
    r.B_given = true;
    r.params = {{"mu_l", p.mu_l}, {"mu_m", p.mu_m}, {"eta", p.eta}, {"gamma", p.gamma}};
  } else if (m.model == "mono") {
    natural = "bbd";
    MonomolecularParams p{need(m.r_ab, "--r-ab", m.model), need(m.r_ba, "--r-ba", m.model),
                          need(m.o_b, "--o-b", m.model), x0, y0};
    validate(p);
    r.bbd_rates = monomolecular_rates(p);
    // Solver state (L, A): nothing has left yet and all a0 molecules are A.
    r.a0 = 0;
    r.b0 = x0;
    r.A = x0 + y0;
    r.B = x0 + y0;
    r.B_given = true;
    r.params = {{"r_ab", p.r_ab}, {"r_ba", p.r_ba}, {"o_b", p.o_b}, {"a0", x0}, {"b0", y0}};
  } else {
    if (m.table.empty()) throw ConfigError("--table is required for model custom-table");
    const RateTable table = read_rate_table(m.table);
    natural = table.death_first ? "dbd" : "bbd";
    if (table.death_first) {
      r.dbd_rates = table.dbd();
    } else {
      r.bbd_rates = table.bbd();
    }
    r.params = {{"table", m.table}};
  }

  r.dbd = natural == "dbd";
  if (!m.orientation.empty() && m.orientation != natural) {
    throw ConfigError("--orientation " + m.orientation + " does not match model " + m.model +
                      " (" + natural + ")");
  }
  if (m.A) r.A = *m.A;
  if (m.B) {
    r.B = *m.B;
    r.B_given = true;
  }
  if (m.model == "custom-table" && !m.A) throw ConfigError("--A is required for model custom-table");
  if (!r.B_given && !m.auto_B) throw ConfigError("--B (or --auto-B) is required for model " + m.model);
  if (!r.B_given) r.B = std::max(2 * r.b0, 10);
  if (r.b0 > r.B) throw ConfigError("--B must be at least the initial type-2 count");
  if (r.dbd && (r.A > r.a0 || r.A < 0)) throw ConfigError("--A must lie in 0..a0 for a death/birth-death model");
  if (!r.dbd && r.A < r.a0) throw ConfigError("--A must be >= a0 for a birth/birth-death model");
  return r;
}

ProbRequest make_request(const Resolved& r, double t, const NumericOptions& n) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("--t must be > 0");
  ProbRequest req;
  req.t = t;
  req.a0 = r.a0;
  req.b0 = r.b0;
  req.A = r.A;
  req.B = r.B;
  req.cf_tol = n.cf_tol;
  req.inv_tol = n.inv_tol;
  req.k_max = n.k_max;
  req.levin_order = n.levin_order;
  req.early_stop = !n.no_early_stop;
  req.threads = n.threads;
  return req;
}

TransitionMatrix solve(const Resolved& r, ProbRequest req, bool auto_B) {
  if (r.dbd) {
    if (auto_B) req = auto_truncate(req, *r.dbd_rates);
    return dbd_prob(req, *r.dbd_rates);
  }
  if (auto_B) req = auto_truncate(req, *r.bbd_rates);
  return bbd_prob(req, *r.bbd_rates);
}

TransitionMatrix oracle_matexp(const Resolved& r, double t, const TransitionMatrix& like) {
  const StateBounds box{like.a_min(), like.a_max(), like.B()};
  const State start{r.a0, r.b0};
  return r.dbd ? matexp_prob(*r.dbd_rates, start, box, t) : matexp_prob(*r.bbd_rates, start, box, t);
}

TransitionMatrix oracle_analytic(const ModelOptions& m, double t) {
  const auto [x0, y0] = parse_pair(m.from, "--from");
  return monomolecular_analytic(*m.r_ab, *m.r_ba, *m.o_b, x0, y0, t);
}

json numeric_json(const NumericOptions& n) {
  return {{"cf_tol", n.cf_tol},     {"inv_tol", n.inv_tol},
          {"k_max", n.k_max},       {"levin_order", n.levin_order},
          {"early_stop", !n.no_early_stop}, {"threads", n.threads}};
}

json model_json(const Resolved& r) {
  return {{"model", r.model},       {"orientation", r.dbd ? "dbd" : "bbd"},
          {"params", r.params},     {"a0", r.a0},
          {"b0", r.b0},             {"A", r.A},
          {"B", r.B}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<std::string> g_argv;

// ---- prob -------------------------------------------------------------------

struct ProbCmd {
  ModelOptions model;
  NumericOptions num;
  double t = 0.0;
  std::string out = "prob.csv";
};

int run_prob(const ProbCmd& c) {
  const Resolved r = resolve_model(c.model);
  const ProbRequest req = make_request(r, c.t, c.num);
  const TransitionMatrix m = solve(r, req, c.model.auto_B);

  std::ostringstream csv;
  write_matrix_csv(csv, m);
  write_text(c.out, csv.str());
  if (c.out != "-") {
    json side;
    side["command"] = "prob";
    side["argv"] = g_argv;
    side["config"] = model_json(r);
    side["config"]["B"] = m.B();
    side["config"]["t"] = c.t;
    side["config"]["numerics"] = numeric_json(c.num);
    side["result"] = matrix_json(m, false);
    side["timing"] = {{"seconds", m.stats.seconds}};
    write_text(c.out + ".json", side.dump(2) + "\n");
  }
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

// ---- validate ---------------------------------------------------------------

struct ValidateCmd {
  ModelOptions model;
  NumericOptions num;
  std::vector<double> t;
  std::optional<double> threshold;
  long sims = 150000;
  std::uint64_t seed = 1;
  double t_ref = 0.5;
  int top = 9;
  double min_coverage = 8.0 / 9.0;
  std::string out = "-";
};

int run_validate(const ValidateCmd& c) {
  const Resolved r = resolve_model(c.model);
  json report;
  report["command"] = "validate";
  report["argv"] = g_argv;
  report["config"] = model_json(r);
  report["config"]["numerics"] = numeric_json(c.num);
  bool pass = true;

  if (r.model == "sir") {
    // CI coverage of the CF values for the cells largest at t_ref.
    std::vector<double> times = c.t;
    const TransitionMatrix ref = solve(r, make_request(r, c.t_ref, c.num), false);
    std::vector<std::pair<double, State>> cells;
    for (int a = ref.a_min(); a <= ref.a_max(); ++a) {
      for (int b = 0; b <= ref.B(); ++b) cells.push_back({ref(a, b), State{a, b}});
    }
    std::partial_sort(cells.begin(), cells.begin() + std::min<std::size_t>(c.top, cells.size()),
                      cells.end(), [](auto& x, auto& y) { return x.first > y.first; });
    cells.resize(std::min<std::size_t>(c.top, cells.size()));

    SimConfig sim{c.sims, c.seed, c.num.threads};
    const auto mc = mc_transition_matrices(*r.dbd_rates, {r.a0, r.b0}, times, sim);
    int inside = 0, total = 0;
    json checks = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
      const TransitionMatrix m = solve(r, make_request(r, times[k], c.num), false);
      for (const auto& [p, s] : cells) {
        const auto [lo, hi] = mc[k].wilson_ci(s.a, s.b);
        const bool in = m(s.a, s.b) >= lo && m(s.a, s.b) <= hi;
        inside += in;
        ++total;
        checks.push_back({{"t", times[k]}, {"a", s.a}, {"b", s.b}, {"cf", m(s.a, s.b)},
                          {"mc", mc[k].prob(s.a, s.b)}, {"ci_low", lo}, {"ci_high", hi},
                          {"inside", in}});
      }
    }
    const double coverage = total ? double(inside) / total : 0.0;
    pass = coverage >= c.min_coverage;
    report["sims"] = c.sims;
    report["seed"] = c.seed;
    report["t_ref"] = c.t_ref;
    report["checks"] = checks;
    report["inside"] = inside;
    report["total"] = total;
    report["min_coverage"] = c.min_coverage;
  } else {
    const double threshold = c.threshold.value_or(r.model == "mono" ? 1e-8 : 1e-7);
    json checks = json::array();
    for (double t : c.t) {
      const TransitionMatrix m = solve(r, make_request(r, t, c.num), c.model.auto_B);
      const TransitionMatrix o = r.model == "mono" ? oracle_analytic(c.model, t)
                                                   : oracle_matexp(r, t, m);
      const double l1 = m.l1_distance(o);
      const bool ok = l1 <= threshold;
      pass = pass && ok;
      checks.push_back({{"t", t}, {"l1", l1}, {"pass", ok},
                        {"oracle", r.model == "mono" ? "analytic" : "uniformization"}});
    }
    report["threshold"] = threshold;
    report["checks"] = checks;
  }
  report["pass"] = pass;
  write_text(c.out, report.dump(2) + "\n");
  return pass ? kExitOk : kExitThreshold;
}

// ---- fit --------------------------------------------------------------------

struct FitCmd {
  std::string data = std::string(MULTIBD_DATA_DIR) + "/eyam.csv";
  std::string engine = "cf";
  long iters = 100000;
  long burnin = 20000;
  std::uint64_t seed = 1;
  double scale = 0.1;
  long pilot = 2000;
  std::string init;
  int B_cap = 125;
  std::optional<int> n_total;
  NumericOptions num;
  std::string out = "fit";
};

int run_fit(const FitCmd& c) {
  if (c.iters < 1) throw ConfigError("--iters must be >= 1");
  if (c.burnin < 0 || c.burnin >= c.iters) throw ConfigError("--burnin must lie in 0..iters-1");
  const ObservationSeries obs = read_observations(c.data);
  if (obs.records.size() < 2) throw ConfigError("--data needs at least two observations");
  LikelihoodOptions lik;
  lik.engine = parse_engine(c.engine);
  lik.B_cap = c.B_cap;
  lik.cf_tol = c.num.cf_tol;
  lik.inv_tol = c.num.inv_tol;
  lik.threads = c.num.threads;
  Point init{std::log(3.39), std::log(0.0212)};
  if (!c.init.empty()) {
    std::istringstream ss(c.init);
    char comma = 0;
    if (!(ss >> init[0] >> comma >> init[1]) || comma != ',') {
      throw ConfigError("--init must look like log_alpha,log_beta");
    }
  }
  const int n_total = c.n_total.value_or(obs.population());
  RwmSettings rs;
  rs.n_iter = c.iters;
  rs.scale = c.scale;
  rs.seed = c.seed;
  rs.pilot_iter = c.pilot;

  json config = {{"data", c.data},     {"engine", c.engine}, {"iters", c.iters},
                 {"burnin", c.burnin}, {"seed", c.seed},     {"scale", c.scale},
                 {"pilot", c.pilot},   {"init", init},       {"B_cap", c.B_cap},
                 {"n_total", n_total}, {"numerics", numeric_json(c.num)}};

  McmcChain chain;
  try {
    chain = rwm_sample([&](double la, double lb) { return log_posterior(la, lb, obs, lik); },
                       init, rs);
  } catch (const SamplerError& e) {
    json dump = {{"error", e.what()},
                 {"iteration", e.iteration},
                 {"last_state", {{"log_alpha", e.last_state[0]}, {"log_beta", e.last_state[1]}}},
                 {"config", config}};
    write_text(c.out + "_last_state.json", dump.dump(2) + "\n");
    throw;
  }
  chain.burn_in = c.burnin;
  const PosteriorSummary s = summarize(chain, c.burnin, n_total);

  std::ostringstream csv;
  write_chain_csv(csv, chain, n_total);
  write_text(c.out + "_chain.csv", csv.str());
  json summary;
  summary["command"] = "fit";
  summary["argv"] = g_argv;
  summary["config"] = config;
  summary["seed"] = c.seed;
  summary["summary"] = summary_json(s);
  summary["r0"] = {{"mean", s.r0.mean}, {"q025", s.r0.q025}, {"q975", s.r0.q975}, {"n_total", n_total}};
  summary["corr_log_alpha_log_beta"] = s.corr_log;
  summary["acceptance_rate"] = chain.acceptance_rate();
  summary["proposal_scale"] = chain.proposal_scale;
  summary["draws_used"] = s.draws;
  write_text(c.out + "_summary.json", summary.dump(2) + "\n");
  std::cout << summary["summary"].dump() << "\n";
  return kExitOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchCmd {
  ModelOptions model;
  NumericOptions num;
  std::vector<double> t;
  std::vector<std::string> methods{"cf", "matexp"};
  long sims = 10000;
  std::uint64_t seed = 1;
  std::string out = "-";
};

template <class F>
double wall_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

int run_bench(const BenchCmd& c) {
  const Resolved r = resolve_model(c.model);
  std::ostringstream csv;
  csv << "method,model,t,wall_ms,l1\n";
  for (double t : c.t) {
    const ProbRequest req = make_request(r, t, c.num);
    TransitionMatrix cf;
    const double cf_ms = wall_ms([&] { cf = solve(r, req, c.model.auto_B); });
    TransitionMatrix ref;
    double ref_ms = 0.0;
    const bool analytic = r.model == "mono";
    if (analytic) {
      ref_ms = wall_ms([&] { ref = oracle_analytic(c.model, t); });
    } else {
      ref_ms = wall_ms([&] { ref = oracle_matexp(r, t, cf); });
    }
    for (const auto& method : c.methods) {
      double ms = 0.0, l1 = 0.0;
      if (method == "cf") {
        ms = cf_ms;
        l1 = cf.l1_distance(ref);
      } else if (method == "matexp") {
        if (analytic) {
          TransitionMatrix u;
          ms = wall_ms([&] { u = oracle_matexp(r, t, cf); });
          l1 = u.l1_distance(ref);
        } else {
          ms = ref_ms;
        }
      } else if (method == "analytic") {
        if (!analytic) continue;
        ms = ref_ms;
      } else {  // mc
        SimConfig sim{c.sims, c.seed, c.num.threads};
        EmpiricalMatrix e;
        const State start{r.a0, r.b0};
        ms = wall_ms([&] {
          e = r.dbd ? mc_transition_matrix(*r.dbd_rates, start, t, sim)
                    : mc_transition_matrix(*r.bbd_rates, start, t, sim);
        });
        TransitionMatrix em(ref.a_min(), ref.a_max(), ref.B());
        for (const auto& [s, n] : e.counts()) {
          if (em.contains(s.a, s.b)) em.set(s.a, s.b, e.prob(s.a, s.b));
        }
        l1 = em.l1_distance(ref);
      }
      csv << method << ',' << r.model << ',' << format_double(t) << ',' << format_double(ms)
          << ',' << format_double(l1) << '\n';
    }
  }
  write_text(c.out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Transition probabilities of birth/birth-death and death/birth-death processes"};
  app.require_subcommand(1);

  NumericOptions defaults;
  try {
    const double tol = env_double("MULTIBD_TOL", 1e-12);
    defaults.cf_tol = tol;
    defaults.inv_tol = tol;
    defaults.threads = env_int("MULTIBD_THREADS", 1);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  ProbCmd prob;
  prob.num = defaults;
  auto* p = app.add_subcommand("prob", "transition probability matrix as CSV plus a JSON sidecar");
  add_model_options(p, prob.model);
  add_numeric_options(p, prob.num);
  p->add_option("--t", prob.t, "elapsed time")->required();
  p->add_option("--out", prob.out, "CSV path ('-' for stdout, no sidecar)");

  ValidateCmd val;
  val.num = defaults;
  auto* v = app.add_subcommand("validate", "compare against an independent oracle");
  add_model_options(v, val.model);
  add_numeric_options(v, val.num);
  v->add_option("--t", val.t, "elapsed times")->required()->delimiter(',');
  v->add_option("--threshold", val.threshold, "L1 threshold (default 1e-8 mono, 1e-7 otherwise)");
  v->add_option("--sims", val.sims, "sir: Monte Carlo replicates")->check(CLI::PositiveNumber);
  v->add_option("--seed", val.seed, "sir: simulation seed");
  v->add_option("--t-ref", val.t_ref, "sir: time at which the tracked cells are chosen");
  v->add_option("--top", val.top, "sir: number of tracked cells")->check(CLI::PositiveNumber);
  v->add_option("--min-coverage", val.min_coverage, "sir: required fraction inside the CIs")
      ->check(CLI::Range(0.0, 1.0));
  v->add_option("--out", val.out, "report path ('-' for stdout)");

  FitCmd fit;
  fit.num = defaults;
  auto* f = app.add_subcommand("fit", "random-walk Metropolis fit of the SIR model");
  f->add_option("--data", fit.data, "CSV with header time,S,I (default: bundled Eyam data)");
  f->add_option("--engine", fit.engine, "cf | branching")->check(CLI::IsMember({"cf", "branching"}));
  f->add_option("--iters", fit.iters, "chain length");
  f->add_option("--burnin", fit.burnin, "draws discarded before summarizing");
  f->add_option("--seed", fit.seed, "sampler seed");
  f->add_option("--scale", fit.scale, "initial proposal sd in log space")->check(CLI::PositiveNumber);
  f->add_option("--pilot", fit.pilot, "tuning iterations before the chain")->check(CLI::NonNegativeNumber);
  f->add_option("--init", fit.init, "starting log_alpha,log_beta");
  f->add_option("--B-cap", fit.B_cap, "cap on the per-interval truncation level (0 = none)")
      ->check(CLI::NonNegativeNumber);
  f->add_option("--n-total", fit.n_total, "population used for R0 (default S0 + I0)");
  add_numeric_options(f, fit.num);
  f->add_option("--out", fit.out, "output prefix for _chain.csv and _summary.json");

  BenchCmd bench;
  bench.num = defaults;
  auto* b = app.add_subcommand("bench", "wall time and accuracy per method");
  add_model_options(b, bench.model);
  add_numeric_options(b, bench.num);
  b->add_option("--t", bench.t, "elapsed times")->required()->delimiter(',');
  b->add_option("--methods", bench.methods, "cf, matexp, analytic, mc")
      ->delimiter(',')
      ->check(CLI::IsMember({"cf", "matexp", "analytic", "mc"}));
  b->add_option("--sims", bench.sims, "mc: replicates")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "mc: seed");
  b->add_option("--out", bench.out, "CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*p) return run_prob(prob);
    if (*v) return run_validate(val);
    if (*f) return run_fit(fit);
    return run_bench(bench);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return kExitCompute;
  }
}
