#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "multibd/rates.hpp"
#include "multibd/solver.hpp"

namespace multibd {

struct State {
  int a = 0;
  int b = 0;
  auto operator<=>(const State&) const = default;
};

// ---- exact simulation ----------------------------------------------------

struct SimConfig {
  long n_replicates = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Generator for replicate i. Streams are derived from (seed, i) alone, so a
/// replicate draws the same path however replicates are scheduled.
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t i);

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest number of events one replicate may take before it is abandoned.
inline constexpr long kMaxEvents = 10'000'000;

/// Event-by-event simulation to t_end; returns the state at t_end.
State simulate_path(const BBDRates& rates, State initial, double t_end, std::mt19937_64& rng);
State simulate_path(const DBDRates& rates, State initial, double t_end, std::mt19937_64& rng);

/// State at each of the increasing `times` along one path.
std::vector<State> simulate_path(const BBDRates& rates, State initial,
                                 const std::vector<double>& times, std::mt19937_64& rng);
std::vector<State> simulate_path(const DBDRates& rates, State initial,
                                 const std::vector<double>& times, std::mt19937_64& rng);

/// Counts of final states over n replicates.
class EmpiricalMatrix {
 public:
  explicit EmpiricalMatrix(long n = 0) : n_(n) {}

  long n() const { return n_; }
  long count(int a, int b) const;
  double prob(int a, int b) const;
  /// Normal approximation to the binomial: p +- z sqrt(p(1-p)/n), clipped to
  /// [0, 1]. The default z gives 95% intervals.
  std::pair<double, double> ci(int a, int b, double z = 1.959963984540054) const;
  /// Wilson score interval. Unlike the plain normal interval it does not
  /// collapse to {0} for cells no replicate reached.
  std::pair<double, double> wilson_ci(int a, int b, double z = 1.959963984540054) const;
  const std::map<State, long>& counts() const { return counts_; }

  void add(State s, long c = 1) { counts_[s] += c; }
  void set_n(long n) { n_ = n; }

 private:
  long n_;
  std::map<State, long> counts_;
};

EmpiricalMatrix mc_transition_matrix(const BBDRates& rates, State initial, double t,
                                     const SimConfig& cfg);
EmpiricalMatrix mc_transition_matrix(const DBDRates& rates, State initial, double t,
                                     const SimConfig& cfg);
/// One empirical matrix per entry of `times`, all from the same paths.
std::vector<EmpiricalMatrix> mc_transition_matrices(const DBDRates& rates, State initial,
                                                    const std::vector<double>& times,
                                                    const SimConfig& cfg);
std::vector<EmpiricalMatrix> mc_transition_matrices(const BBDRates& rates, State initial,
                                                    const std::vector<double>& times,
                                                    const SimConfig& cfg);

// ---- uniformization ------------------------------------------------------

/// Bounding box for the uniformization oracle. Jumps that leave the box go
/// to an absorbing cemetery state, so the box rows may sum to less than 1.
struct StateBounds {
  int a_min = 0;
  int a_max = 0;
  int B = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(a_max - a_min + 1) * static_cast<std::size_t>(B + 1);
  }
};

inline constexpr std::size_t kMaxUniformizationStates = 20'000;

struct UniformizationInfo {
  double rate = 0.0;         // uniformization constant
  long terms = 0;            // Poisson terms summed
  double weight_mass = 0.0;  // total Poisson weight summed
  double cemetery = 0.0;     // probability absorbed outside the box
};

/// Row of exp(Qt) for the start state, by Poisson-weighted powers of the
/// uniformized jump matrix, truncated once the remaining Poisson weight is
/// below 1e-12.
TransitionMatrix matexp_prob(const BBDRates& rates, State initial, const StateBounds& box,
                             double t, UniformizationInfo* info = nullptr);
TransitionMatrix matexp_prob(const DBDRates& rates, State initial, const StateBounds& box,
                             double t, UniformizationInfo* info = nullptr);

/// exp(Qt) for a dense n x n generator (row-major), by the same method.
std::vector<double> uniformized_expm(const std::vector<double>& Q, int n, double t);

// ---- analytic monomolecular solution -----------------------------------

/// exp(Mt) for the per-molecule sub-generator on {A, B}, row-major 2x2.
std::array<double, 4> monomolecular_kernel(double r_ab, double r_ba, double o_b, double t);

/// Law of (L, A) = (outflow count, A count) at time t for the reaction system
/// A <-> B -> *, on rows L = 0..N and columns A = 0..N with N = a0 + b0.
TransitionMatrix monomolecular_analytic(double r_ab, double r_ba, double o_b, int a0, int b0,
                                        double t);

}  // namespace multibd
