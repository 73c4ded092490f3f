#include "multibd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "multibd/branching.hpp"
#include "multibd/rates.hpp"
#include "multibd/solver.hpp"

namespace multibd {

void ObservationSeries::validate() const {
  for (std::size_t k = 0; k < records.size(); ++k) {
    const Observation& o = records[k];
    std::ostringstream where;
    where << "observation " << k << ": ";
    if (!std::isfinite(o.time)) throw std::invalid_argument(where.str() + "time is not finite");
    if (o.S < 0 || o.I < 0) throw std::invalid_argument(where.str() + "counts must be >= 0");
    if (k > 0) {
      if (!(o.time > records[k - 1].time)) {
        throw std::invalid_argument(where.str() + "times must strictly increase");
      }
      if (o.S > records[k - 1].S) throw std::invalid_argument(where.str() + "S increased");
    }
  }
}

int ObservationSeries::population() const {
  if (records.empty()) return 0;
  return records.front().S + records.front().I;
}

ObservationSeries eyam_observations() {
  ObservationSeries obs;
  obs.records = {{0.0, 254, 7},  {0.5, 235, 14}, {1.0, 201, 22}, {1.5, 153, 29},
                 {2.0, 121, 20}, {2.5, 110, 8},  {3.0, 97, 8},   {4.0, 83, 0}};
  return obs;
}

ObservationSeries read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open observation file " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time,S,I") throw std::invalid_argument(path + ": header must be time,S,I");
  ObservationSeries obs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    Observation o;
    char c1 = 0, c2 = 0;
    if (!(ss >> o.time >> c1 >> o.S >> c2 >> o.I) || c1 != ',' || c2 != ',') {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected time,S,I");
    }
    std::string rest;
    if (ss >> rest) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": trailing fields");
    }
    obs.records.push_back(o);
  }
  obs.validate();
  return obs;
}

const char* engine_name(Engine e) {
  return e == Engine::ContinuedFraction ? "cf" : "branching";
}

Engine parse_engine(const std::string& name) {
  if (name == "cf") return Engine::ContinuedFraction;
  if (name == "branching") return Engine::Branching;
  throw std::invalid_argument("unknown engine '" + name + "' (expected cf or branching)");
}

namespace {

double interval_log_prob(double alpha, double beta, const Observation& from, const Observation& to,
                         const LikelihoodOptions& opts) {
  if (to.S > from.S || to.S + to.I > from.S + from.I) {
    return -std::numeric_limits<double>::infinity();
  }
  const double gap = to.time - from.time;
  double p = 0.0;
  if (opts.engine == Engine::Branching) {
    p = branching_trans_prob(from.S, from.I, to.S, to.I, gap, alpha, beta);
  } else {
    const int bound = from.S + from.I;
    int B = opts.B_cap > 0 ? std::min(bound, opts.B_cap) : bound;
    B = std::max({B, from.I, to.I});
    ProbRequest req;
    req.t = gap;
    req.a0 = from.S;
    req.b0 = from.I;
    req.A = to.S;
    req.B = B;
    req.b_target = to.I;
    req.cf_tol = opts.cf_tol;
    req.inv_tol = opts.inv_tol;
    p = dbd_prob_entry(req, sir_rates({alpha, beta, std::max(1, bound)}));
  }
  if (!(p > 0.0)) return kLogProbFloor;
  return std::max(kLogProbFloor, std::log(p));
}

}  // namespace

double log_likelihood(double alpha, double beta, const ObservationSeries& obs,
                      const LikelihoodOptions& opts, LikelihoodDiagnostics* diag) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("alpha and beta must be positive and finite");
  }
  obs.validate();
  const std::size_t n = obs.records.size() < 2 ? 0 : obs.records.size() - 1;
  std::vector<double> logs(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

  auto run = [&](std::size_t k) {
    try {
      logs[k] = interval_log_prob(alpha, beta, obs.records[k], obs.records[k + 1], opts);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "interval " << k << " (t " << obs.records[k].time << " -> "
          << obs.records[k + 1].time << "): " << e.what();
      try {
        throw SolverError(msg.str());
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(opts.threads, 1, std::max<int>(1, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) run(k);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < n; k += threads) run(k);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double total = 0.0;
  int floored = 0;
  for (double v : logs) {
    total += v;
    if (v == kLogProbFloor) ++floored;
  }
  if (diag) {
    diag->interval_log_probs = logs;
    diag->floored = floored;
  }
  return total;
}

double log_prior(double log_alpha, double log_beta) {
  const double norm = -std::log(2.0 * std::numbers::pi * kPriorSd * kPriorSd);
  return norm - (log_alpha * log_alpha + log_beta * log_beta) / (2.0 * kPriorSd * kPriorSd);
}

double log_posterior(double log_alpha, double log_beta, const ObservationSeries& obs,
                     const LikelihoodOptions& opts) {
  const double prior = log_prior(log_alpha, log_beta);
  if (obs.records.size() < 2) return prior;
  return prior + log_likelihood(std::exp(log_alpha), std::exp(log_beta), obs, opts);
}

double McmcChain::acceptance_rate() const {
  return draws.empty() ? 0.0 : double(accepted) / double(draws.size());
}

McmcChain rwm_sample(const LogDensity& target, Point init, const RwmSettings& settings) {
  if (settings.n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (!(settings.scale > 0.0) || !std::isfinite(settings.scale)) {
    throw std::invalid_argument("proposal scale must be positive");
  }
  if (settings.pilot_iter < 0 || settings.pilot_block < 1) {
    throw std::invalid_argument("pilot settings must be non-negative");
  }

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  long iteration = 0;
  auto evaluate = [&](const Point& p, const Point& last) {
    double v;
    try {
      v = target(p[0], p[1]);
    } catch (const std::exception& e) {
      throw SamplerError(e.what(), last, iteration);
    }
    if (std::isnan(v)) {
      std::ostringstream msg;
      msg << "target is NaN at (" << p[0] << ", " << p[1] << ")";
      throw SamplerError(msg.str(), last, iteration);
    }
    return v;
  };

  Point x = init;
  double fx = evaluate(x, x);
  double scale = settings.scale;

  auto step = [&]() {
    const Point y{x[0] + scale * normal(rng), x[1] + scale * normal(rng)};
    const double fy = evaluate(y, x);
    const double u = unif(rng);
    bool accept = false;
    if (fy != -std::numeric_limits<double>::infinity()) {
      accept = fx == -std::numeric_limits<double>::infinity() || std::log(u) < fy - fx;
    }
    if (accept) {
      x = y;
      fx = fy;
    }
    ++iteration;
    return accept;
  };

  for (long done = 0; done < settings.pilot_iter;) {
    const long block = std::min(settings.pilot_block, settings.pilot_iter - done);
    long acc = 0;
    for (long i = 0; i < block; ++i) acc += step();
    done += block;
    const double rate = double(acc) / double(block);
    if (rate < settings.accept_low) scale *= 0.7;
    if (rate > settings.accept_high) scale *= 1.4;
  }

  McmcChain chain;
  chain.seed = settings.seed;
  chain.proposal_scale = scale;
  chain.draws.reserve(settings.n_iter);
  chain.log_target.reserve(settings.n_iter);
  for (long i = 0; i < settings.n_iter; ++i) {
    chain.accepted += step();
    chain.draws.push_back(x);
    chain.log_target.push_back(fx);
  }
  return chain;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty data");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * double(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - double(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

ParamSummary summarize_values(const std::vector<double>& v) {
  ParamSummary s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / double(v.size());
  s.q025 = quantile(v, 0.025);
  s.q975 = quantile(v, 0.975);
  return s;
}

}  // namespace

PosteriorSummary summarize(const McmcChain& chain, long burn_in, int n_total) {
  if (burn_in < 0 || burn_in >= static_cast<long>(chain.draws.size())) {
    throw std::invalid_argument("burn_in must be smaller than the chain length");
  }
  std::vector<double> alpha, beta, r0, la, lb;
  for (std::size_t i = burn_in; i < chain.draws.size(); ++i) {
    const auto& d = chain.draws[i];
    la.push_back(d[0]);
    lb.push_back(d[1]);
    alpha.push_back(std::exp(d[0]));
    beta.push_back(std::exp(d[1]));
    r0.push_back(beta.back() * n_total / alpha.back());
  }
  PosteriorSummary out;
  out.draws = static_cast<long>(alpha.size());
  out.alpha = summarize_values(alpha);
  out.beta = summarize_values(beta);
  out.r0 = summarize_values(r0);

  const double n = double(la.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    ma += la[i];
    mb += lb[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    saa += (la[i] - ma) * (la[i] - ma);
    sbb += (lb[i] - mb) * (lb[i] - mb);
    sab += (la[i] - ma) * (lb[i] - mb);
  }
  out.corr_log = (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 0.0;
  return out;
}

}  // namespace multibd
