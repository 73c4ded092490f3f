#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace multibd {

struct Observation {
  double time = 0.0;
  int S = 0;
  int I = 0;
};

/// Discrete SIR observations. Times strictly increase, counts are
/// non-negative and S never increases.
struct ObservationSeries {
  std::vector<Observation> records;

  void validate() const;
  /// S + I at the first record.
  int population() const;
};

/// Eyam, 1666: months since mid-June, susceptibles and infectives.
ObservationSeries eyam_observations();

/// Reads a CSV with header time,S,I.
ObservationSeries read_observations(const std::string& path);

enum class Engine { ContinuedFraction, Branching };

const char* engine_name(Engine e);
Engine parse_engine(const std::string& name);  // "cf" or "branching"

struct LikelihoodOptions {
  Engine engine = Engine::ContinuedFraction;
  /// Interval k uses B = min(S_k + I_k, B_cap), never below the infective
  /// counts at either end. S + I bounds I exactly; the cap trims columns
  /// that hold no mass over the observation gaps. 0 disables the cap.
  int B_cap = 125;
  double cf_tol = 1e-12;
  double inv_tol = 1e-12;
  /// Intervals are evaluated concurrently on up to this many threads.
  int threads = 1;
};

/// Log-probabilities at or below this are floored to it.
inline constexpr double kLogProbFloor = -700.0;

struct LikelihoodDiagnostics {
  std::vector<double> interval_log_probs;
  int floored = 0;  // intervals whose probability was floored
};

/// Sum over consecutive records of log P(S_{k+1}, I_{k+1} | S_k, I_k; gap).
/// A transition the SIR model cannot make (S or S + I increasing) gives
/// -infinity. Solver failures are rethrown naming the interval.
double log_likelihood(double alpha, double beta, const ObservationSeries& obs,
                      const LikelihoodOptions& opts = {},
                      LikelihoodDiagnostics* diag = nullptr);

/// Independent Normal(0, 100^2) priors on log alpha and log beta.
inline constexpr double kPriorSd = 100.0;
double log_prior(double log_alpha, double log_beta);

double log_posterior(double log_alpha, double log_beta, const ObservationSeries& obs,
                     const LikelihoodOptions& opts = {});

// ---- random-walk Metropolis ---------------------------------------------

using LogDensity = std::function<double(double, double)>;
using Point = std::array<double, 2>;

struct RwmSettings {
  long n_iter = 1000;
  double scale = 0.1;  // sd of the isotropic Gaussian proposal
  std::uint64_t seed = 1;
  /// Tuning iterations run before the chain proper, in blocks of
  /// `pilot_block`; the scale is shrunk or grown after each block to bring
  /// acceptance into [accept_low, accept_high]. Not part of the chain.
  long pilot_iter = 0;
  long pilot_block = 200;
  double accept_low = 0.2;
  double accept_high = 0.4;
};

struct McmcChain {
  std::vector<Point> draws;
  std::vector<double> log_target;
  long accepted = 0;
  double proposal_scale = 0.0;  // after tuning
  std::uint64_t seed = 0;
  long burn_in = 0;  // recorded by the caller

  double acceptance_rate() const;
};

/// Target evaluation failure mid-chain; carries the last accepted state.
class SamplerError : public std::runtime_error {
 public:
  SamplerError(const std::string& what, Point last, long iteration)
      : std::runtime_error(what), last_state(last), iteration(iteration) {}
  Point last_state;
  long iteration;
};

/// Metropolis with symmetric Gaussian proposals. -infinity targets are
/// rejected; NaN aborts.
McmcChain rwm_sample(const LogDensity& target, Point init, const RwmSettings& settings);

// ---- summaries -------------------------------------------------------------

struct ParamSummary {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct PosteriorSummary {
  ParamSummary alpha, beta, r0;
  double corr_log = 0.0;  // sample correlation of log alpha and log beta
  long draws = 0;
};

/// Linear-interpolation quantile of unsorted data.
double quantile(std::vector<double> values, double p);

/// Natural-scale summaries of the draws after `burn_in`, with
/// R0 = beta * n_total / alpha per draw.
PosteriorSummary summarize(const McmcChain& chain, long burn_in, int n_total);

}  // namespace multibd
