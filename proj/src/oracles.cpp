#include "multibd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace multibd {

namespace {

struct Jump {
  double rate;
  int da, db;
};

std::array<Jump, 4> jumps(const BBDRates& r, int a, int b) {
  return {{{r.lambda1(a, b), 1, 0}, {r.lambda2(a, b), 0, 1}, {r.mu2(a, b), 0, -1},
           {r.gamma(a, b), 1, -1}}};
}

std::array<Jump, 4> jumps(const DBDRates& r, int a, int b) {
  return {{{r.mu1(a, b), -1, 0}, {r.lambda2(a, b), 0, 1}, {r.mu2(a, b), 0, -1},
           {r.gamma(a, b), -1, 1}}};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Advances `s` to the first event after `now` or returns false when the
// state is absorbing. `now` is updated to the event time.
template <class Rates>
bool next_event(const Rates& rates, State& s, double& now, double horizon, std::mt19937_64& rng,
                long& events) {
  const auto js = jumps(rates, s.a, s.b);
  double total = 0.0;
  for (const Jump& j : js) total += j.rate;
  if (!(total > 0.0)) {
    now = horizon;
    return false;
  }
  const double wait = std::exponential_distribution<double>(total)(rng);
  if (now + wait > horizon) {
    now = horizon;
    return false;
  }
  now += wait;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  int pick = 3;
  for (int i = 0; i < 4; ++i) {
    if (u < js[i].rate) {
      pick = i;
      break;
    }
    u -= js[i].rate;
  }
  while (js[pick].rate == 0.0) --pick;  // roundoff landed past the last nonzero rate
  s.a += js[pick].da;
  s.b += js[pick].db;
  if (++events > kMaxEvents) {
    std::ostringstream msg;
    msg << "simulation exceeded " << kMaxEvents << " events at state (" << s.a << ", " << s.b
        << "), time " << now;
    throw SimulationError(msg.str());
  }
  return true;
}

template <class Rates>
std::vector<State> simulate_times(const Rates& rates, State initial,
                                  const std::vector<double>& times, std::mt19937_64& rng) {
  if (initial.a < 0 || initial.b < 0) throw std::invalid_argument("initial state must be non-negative");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw std::invalid_argument("simulation times must be non-negative and increasing");
    }
  }
  std::vector<State> out;
  out.reserve(times.size());
  State s = initial;
  double now = 0.0;
  long events = 0;
  // An event drawn past the next observation time is discarded and the clock
  // restarts there; by memorylessness this leaves the law of the path intact.
  for (double t : times) {
    while (true) {
      State trial = s;
      double when = now;
      // Draw against an infinite horizon, then compare with t.
      if (!next_event(rates, trial, when, std::numeric_limits<double>::infinity(), rng, events)) {
        // Absorbing: the state never changes again.
        out.push_back(s);
        for (std::size_t k = out.size(); k < times.size(); ++k) out.push_back(s);
        return out;
      }
      if (when > t) {
        now = t;
        break;
      }
      s = trial;
      now = when;
    }
    out.push_back(s);
  }
  return out;
}

template <class Rates>
State simulate_one(const Rates& rates, State initial, double t_end, std::mt19937_64& rng) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (initial.a < 0 || initial.b < 0) throw std::invalid_argument("initial state must be non-negative");
  State s = initial;
  double now = 0.0;
  long events = 0;
  while (next_event(rates, s, now, t_end, rng, events)) {
  }
  return s;
}

template <class Rates>
std::vector<EmpiricalMatrix> run_replicates(const Rates& rates, State initial,
                                            const std::vector<double>& times,
                                            const SimConfig& cfg) {
  if (cfg.n_replicates < 1) throw std::invalid_argument("n_replicates must be >= 1");
  if (times.empty()) throw std::invalid_argument("at least one time is required");
  const int threads = static_cast<int>(
      std::clamp<long>(cfg.threads, 1, std::max<long>(1, cfg.n_replicates)));
  const long n = cfg.n_replicates;

  std::vector<std::vector<EmpiricalMatrix>> partial(
      threads, std::vector<EmpiricalMatrix>(times.size()));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](int w) {
    try {
      const long lo = n * w / threads;
      const long hi = n * (w + 1) / threads;
      for (long i = lo; i < hi; ++i) {
        auto rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(i));
        if (times.size() == 1) {
          partial[w][0].add(simulate_one(rates, initial, times[0], rng));
        } else {
          const auto states = simulate_times(rates, initial, times, rng);
          for (std::size_t k = 0; k < times.size(); ++k) partial[w][k].add(states[k]);
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<EmpiricalMatrix> out(times.size(), EmpiricalMatrix(n));
  for (int w = 0; w < threads; ++w) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (const auto& [s, c] : partial[w][k].counts()) out[k].add(s, c);
    }
  }
  return out;
}

// Poisson(rate*t) weights, consumed in order k = 0, 1, ...
class PoissonWeights {
 public:
  explicit PoissonWeights(double mean) : mean_(mean), log_mean_(std::log(mean)) {}
  double weight(long k) const {
    if (mean_ == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-mean_ + k * log_mean_ - std::lgamma(k + 1.0));
  }
  long cap() const { return static_cast<long>(mean_ + 40.0 * std::sqrt(mean_) + 100.0); }

 private:
  double mean_, log_mean_;
};

constexpr double kPoissonTail = 1e-12;

template <class Rates>
TransitionMatrix uniformize(const Rates& rates, State initial, const StateBounds& box, double t,
                            UniformizationInfo* info) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be >= 0");
  if (box.a_max < box.a_min || box.a_min < 0 || box.B < 0) {
    throw std::invalid_argument("empty or negative state bounds");
  }
  if (box.size() > kMaxUniformizationStates) {
    std::ostringstream msg;
    msg << "state space of " << box.size() << " states exceeds the uniformization limit of "
        << kMaxUniformizationStates << "; use the continued-fraction solver";
    throw std::invalid_argument(msg.str());
  }
  if (initial.a < box.a_min || initial.a > box.a_max || initial.b < 0 || initial.b > box.B) {
    throw std::invalid_argument("initial state outside the state bounds");
  }

  const int width = box.B + 1;
  const std::size_t n = box.size();
  auto index = [&](int a, int b) { return static_cast<std::size_t>(a - box.a_min) * width + b; };
  constexpr std::size_t kCemetery = static_cast<std::size_t>(-1);

  // Sparse generator: up to four targets per state.
  std::vector<std::array<std::pair<std::size_t, double>, 4>> out_edges(n);
  std::vector<double> exit(n, 0.0);
  double lambda = 0.0;
  for (int a = box.a_min; a <= box.a_max; ++a) {
    for (int b = 0; b <= box.B; ++b) {
      const std::size_t i = index(a, b);
      const auto js = jumps(rates, a, b);
      for (int e = 0; e < 4; ++e) {
        const int na = a + js[e].da, nb = b + js[e].db;
        const bool inside = na >= box.a_min && na <= box.a_max && nb >= 0 && nb <= box.B;
        out_edges[i][e] = {inside ? index(na, nb) : kCemetery, js[e].rate};
        exit[i] += js[e].rate;
      }
      lambda = std::max(lambda, exit[i]);
    }
  }

  std::vector<double> v(n, 0.0), next(n, 0.0), acc(n, 0.0);
  v[index(initial.a, initial.b)] = 1.0;
  double cemetery = 0.0, cemetery_acc = 0.0;

  const PoissonWeights pw(lambda * t);
  double mass = 0.0, mass_c = 0.0;  // Kahan-summed Poisson weight
  long k = 0;
  for (;; ++k) {
    const double w = pw.weight(k);
    if (w > 0.0) {
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
      cemetery_acc += w * cemetery;
    }
    const double y = w - mass_c;
    const double tsum = mass + y;
    mass_c = (tsum - mass) - y;
    mass = tsum;
    if ((k >= static_cast<long>(lambda * t) && 1.0 - mass <= kPoissonTail) || k >= pw.cap() ||
        lambda == 0.0) {
      break;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      next[i] += vi * (1.0 - exit[i] / lambda);
      for (const auto& [j, rate] : out_edges[i]) {
        if (rate == 0.0) continue;
        const double flow = vi * rate / lambda;
        if (j == kCemetery) {
          cemetery += flow;
        } else {
          next[j] += flow;
        }
      }
    }
    v.swap(next);
  }

  TransitionMatrix out(box.a_min, box.a_max, box.B);
  for (int a = box.a_min; a <= box.a_max; ++a) {
    for (int b = 0; b <= box.B; ++b) out.set(a, b, acc[index(a, b)]);
  }
  if (info) {
    info->rate = lambda;
    info->terms = k + 1;
    info->weight_mass = mass;
    info->cemetery = cemetery_acc;
  }
  return out;
}

// log of the trinomial probability n! / (x! y! z!) p^x q^y r^z.
double log_trinomial(int n, int x, int y, double p, double q) {
  const int z = n - x - y;
  const double r = std::max(0.0, 1.0 - p - q);
  auto term = [](int c, double prob) {
    if (c == 0) return 0.0;
    if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
    return c * std::log(prob);
  };
  return std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(y + 1.0) -
         std::lgamma(z + 1.0) + term(x, p) + term(y, q) + term(z, r);
}

// Joint law of (#A, #B) among n molecules with per-molecule probabilities
// (p, q); index [x * (n+1) + y].
std::vector<double> trinomial_table(int n, double p, double q) {
  std::vector<double> out(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
  for (int x = 0; x <= n; ++x) {
    for (int y = 0; x + y <= n; ++y) out[x * (n + 1) + y] = std::exp(log_trinomial(n, x, y, p, q));
  }
  return out;
}

}  // namespace

std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t i) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(i)));
}

State simulate_path(const BBDRates& rates, State initial, double t_end, std::mt19937_64& rng) {
  return simulate_one(rates, initial, t_end, rng);
}
State simulate_path(const DBDRates& rates, State initial, double t_end, std::mt19937_64& rng) {
  return simulate_one(rates, initial, t_end, rng);
}
std::vector<State> simulate_path(const BBDRates& rates, State initial,
                                 const std::vector<double>& times, std::mt19937_64& rng) {
  return simulate_times(rates, initial, times, rng);
}
std::vector<State> simulate_path(const DBDRates& rates, State initial,
                                 const std::vector<double>& times, std::mt19937_64& rng) {
  return simulate_times(rates, initial, times, rng);
}

long EmpiricalMatrix::count(int a, int b) const {
  const auto it = counts_.find(State{a, b});
  return it == counts_.end() ? 0 : it->second;
}

double EmpiricalMatrix::prob(int a, int b) const {
  return n_ > 0 ? double(count(a, b)) / double(n_) : 0.0;
}

std::pair<double, double> EmpiricalMatrix::ci(int a, int b, double z) const {
  const double p = prob(a, b);
  if (n_ == 0) return {0.0, 1.0};
  const double half = z * std::sqrt(p * (1.0 - p) / double(n_));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

std::pair<double, double> EmpiricalMatrix::wilson_ci(int a, int b, double z) const {
  if (n_ == 0) return {0.0, 1.0};
  const double n = double(n_);
  const double p = prob(a, b);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

EmpiricalMatrix mc_transition_matrix(const BBDRates& rates, State initial, double t,
                                     const SimConfig& cfg) {
  return run_replicates(rates, initial, {t}, cfg).front();
}
EmpiricalMatrix mc_transition_matrix(const DBDRates& rates, State initial, double t,
                                     const SimConfig& cfg) {
  return run_replicates(rates, initial, {t}, cfg).front();
}
std::vector<EmpiricalMatrix> mc_transition_matrices(const DBDRates& rates, State initial,
                                                    const std::vector<double>& times,
                                                    const SimConfig& cfg) {
  return run_replicates(rates, initial, times, cfg);
}
std::vector<EmpiricalMatrix> mc_transition_matrices(const BBDRates& rates, State initial,
                                                    const std::vector<double>& times,
                                                    const SimConfig& cfg) {
  return run_replicates(rates, initial, times, cfg);
}

TransitionMatrix matexp_prob(const BBDRates& rates, State initial, const StateBounds& box,
                             double t, UniformizationInfo* info) {
  return uniformize(rates, initial, box, t, info);
}
TransitionMatrix matexp_prob(const DBDRates& rates, State initial, const StateBounds& box,
                             double t, UniformizationInfo* info) {
  return uniformize(rates, initial, box, t, info);
}

std::vector<double> uniformized_expm(const std::vector<double>& Q, int n, double t) {
  if (n < 1 || Q.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("Q must be n x n");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  double lambda = 0.0;
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      const double q = Q[i * n + j];
      if (i != j && q < 0.0) throw std::invalid_argument("negative off-diagonal generator entry");
      if (i != j) off += q;
    }
    lambda = std::max(lambda, -Q[i * n + i]);
    lambda = std::max(lambda, off);
  }
  std::vector<double> U(Q.size(), 0.0), P(Q.size(), 0.0), power(Q.size(), 0.0), tmp(Q.size());
  for (int i = 0; i < n; ++i) {
    power[i * n + i] = 1.0;
    for (int j = 0; j < n; ++j) {
      U[i * n + j] = (i == j ? 1.0 : 0.0) + (lambda > 0.0 ? Q[i * n + j] / lambda : 0.0);
    }
  }
  const PoissonWeights pw(lambda * t);
  double mass = 0.0;
  for (long k = 0;; ++k) {
    const double w = pw.weight(k);
    for (std::size_t i = 0; i < P.size(); ++i) P[i] += w * power[i];
    mass += w;
    if ((k >= static_cast<long>(lambda * t) && 1.0 - mass <= kPoissonTail) || k >= pw.cap() ||
        lambda == 0.0) {
      break;
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        const double x = power[i * n + l];
        if (x == 0.0) continue;
        for (int j = 0; j < n; ++j) tmp[i * n + j] += x * U[l * n + j];
      }
    }
    power.swap(tmp);
  }
  return P;
}

std::array<double, 4> monomolecular_kernel(double r_ab, double r_ba, double o_b, double t) {
  // M = [[-r_ab, r_ab], [r_ba, -(r_ba + o_b)]] has real eigenvalues l1 >= l2.
  // With N = M - l2 I, N^2 = (l1 - l2) N, so exp(Mt) = e^{l2 t}(I + N g) with
  // g = (e^{(l1-l2)t} - 1)/(l1 - l2).
  const double m00 = -r_ab, m01 = r_ab, m10 = r_ba, m11 = -(r_ba + o_b);
  const double half_trace = 0.5 * (m00 + m11);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (m00 - m11) * (m00 - m11) + m01 * m10));
  const double l2 = half_trace - disc;
  const double delta = 2.0 * disc;
  const double g = delta > 0.0 ? std::expm1(delta * t) / delta : t;
  const double e = std::exp(l2 * t);
  return {e * (1.0 + (m00 - l2) * g), e * m01 * g, e * m10 * g, e * (1.0 + (m11 - l2) * g)};
}

TransitionMatrix monomolecular_analytic(double r_ab, double r_ba, double o_b, int a0, int b0,
                                        double t) {
  if (r_ab < 0.0 || r_ba < 0.0 || o_b < 0.0) throw std::invalid_argument("rates must be >= 0");
  if (a0 < 0 || b0 < 0) throw std::invalid_argument("molecule counts must be >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  const int N = a0 + b0;
  const auto K = monomolecular_kernel(r_ab, r_ba, o_b, t);
  const auto from_a = trinomial_table(a0, K[0], K[1]);
  const auto from_b = trinomial_table(b0, K[2], K[3]);

  TransitionMatrix out(0, N, N);
  std::vector<double> joint(static_cast<std::size_t>(N + 1) * (N + 1), 0.0);  // [nA][nB]
  for (int x1 = 0; x1 <= a0; ++x1) {
    for (int y1 = 0; x1 + y1 <= a0; ++y1) {
      const double pa = from_a[x1 * (a0 + 1) + y1];
      if (pa == 0.0) continue;
      for (int x2 = 0; x2 <= b0; ++x2) {
        for (int y2 = 0; x2 + y2 <= b0; ++y2) {
          joint[(x1 + x2) * (N + 1) + (y1 + y2)] += pa * from_b[x2 * (b0 + 1) + y2];
        }
      }
    }
  }
  for (int nA = 0; nA <= N; ++nA) {
    for (int nB = 0; nA + nB <= N; ++nB) {
      const int L = N - nA - nB;
      out.set(L, nA, joint[nA * (N + 1) + nB]);
    }
  }
  return out;
}

}  // namespace multibd
