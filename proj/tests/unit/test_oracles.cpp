#include <cmath>
#include <vector>

#include "doctest.h"
#include "multibd/oracles.hpp"
#include "multibd/rates.hpp"

using namespace multibd;
using doctest::Approx;

namespace {
const RateFn kZero = [](int, int) { return 0.0; };
}

TEST_CASE("two-state chain closed form") {
  const double a = 0.8, b = 1.7, t = 0.9;
  const auto P = uniformized_expm({-a, a, b, -b}, 2, t);
  const double e = std::exp(-(a + b) * t);
  CHECK(std::abs(P[1] - a / (a + b) * (1.0 - e)) < 1e-12);
  CHECK(std::abs(P[2] - b / (a + b) * (1.0 - e)) < 1e-12);
  CHECK(std::abs(P[0] + P[1] - 1.0) < 1e-12);
}

TEST_CASE("zero generator gives the identity") {
  const auto P = uniformized_expm(std::vector<double>(9, 0.0), 3, 5.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(P[i * 3 + j] == (i == j ? 1.0 : 0.0));
  }
  const TransitionMatrix m = matexp_prob(BBDRates(kZero, kZero, kZero, kZero), {1, 1}, {0, 3, 3}, 2.0);
  CHECK(m(1, 1) == 1.0);
  CHECK(m.total_mass() == 1.0);
}

TEST_CASE("uniformization rows sum to one on a closed box") {
  UniformizationInfo info;
  const TransitionMatrix m = matexp_prob(sir_rates({3.2, 0.025, 45}), {35, 10}, {0, 35, 45}, 0.5, &info);
  CHECK(std::abs(m.total_mass() - 1.0) < 1e-10);
  CHECK(info.cemetery == 0.0);
  CHECK(info.weight_mass > 1.0 - 1e-12);
}

TEST_CASE("boxes that are too large are refused") {
  CHECK_THROWS_AS(matexp_prob(sir_rates({3.2, 0.025, 300}), {200, 10}, {0, 200, 200}, 0.5),
                  std::invalid_argument);
}

TEST_CASE("pure death extinction frequency") {
  const double alpha = 1.3, t = 0.6;
  const DBDRates death(kZero, kZero, [alpha](int, int b) { return alpha * b; }, kZero);
  const long n = 100000;
  const EmpiricalMatrix e = mc_transition_matrix(death, {0, 1}, t, SimConfig{n, 42, 1});
  const double p = 1.0 - std::exp(-alpha * t);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(e.prob(0, 0) - p) <= 3.0 * sigma);
}

TEST_CASE("empirical matrix bookkeeping") {
  const DBDRates sir = sir_rates({3.2, 0.025, 125});
  const EmpiricalMatrix one = mc_transition_matrix(sir, {110, 15}, 0.5, SimConfig{1, 9, 1});
  CHECK(one.counts().size() == 1);
  CHECK(one.counts().begin()->second == 1);

  const EmpiricalMatrix e = mc_transition_matrix(sir, {110, 15}, 0.5, SimConfig{5000, 9, 1});
  long total = 0;
  for (const auto& [s, c] : e.counts()) {
    total += c;
    const auto [lo, hi] = e.ci(s.a, s.b);
    CHECK(lo <= e.prob(s.a, s.b));
    CHECK(hi >= e.prob(s.a, s.b));
  }
  CHECK(total == 5000);

  const EmpiricalMatrix still = mc_transition_matrix(DBDRates(kZero, kZero, kZero, kZero), {4, 2}, 3.0,
                                                     SimConfig{200, 1, 1});
  CHECK(still.prob(4, 2) == 1.0);
  CHECK(still.ci(4, 2) == std::pair{1.0, 1.0});

  // Unvisited cell: Wald collapses, Wilson keeps an upper end of z^2 / (n + z^2).
  const double z = 1.959963984540054;
  CHECK(still.ci(0, 0) == std::pair{0.0, 0.0});
  const auto [wlo, whi] = still.wilson_ci(0, 0);
  CHECK(wlo == 0.0);
  CHECK(whi == doctest::Approx(z * z / (200.0 + z * z)).epsilon(1e-12));
  CHECK(still.wilson_ci(4, 2).first == doctest::Approx(200.0 / (200.0 + z * z)).epsilon(1e-12));
  for (const auto& [s, c] : e.counts()) {
    const auto [lo, hi] = e.wilson_ci(s.a, s.b);
    CHECK(lo <= e.prob(s.a, s.b));
    CHECK(hi >= e.prob(s.a, s.b));
  }
}

TEST_CASE("simulation is reproducible from the seed") {
  const DBDRates sir = sir_rates({3.2, 0.025, 125});
  const SimConfig cfg{3000, 2024, 1};
  const EmpiricalMatrix a = mc_transition_matrix(sir, {110, 15}, 0.5, cfg);
  const EmpiricalMatrix b = mc_transition_matrix(sir, {110, 15}, 0.5, cfg);
  CHECK(a.counts() == b.counts());
  SimConfig threaded = cfg;
  threaded.threads = 3;
  CHECK(mc_transition_matrix(sir, {110, 15}, 0.5, threaded).counts() == a.counts());
  SimConfig other = cfg;
  other.seed = 2025;
  CHECK(mc_transition_matrix(sir, {110, 15}, 0.5, other).counts() != a.counts());

  auto r1 = replicate_stream(5, 17);
  auto r2 = replicate_stream(5, 17);
  CHECK(r1() == r2());

  const auto path_a = mc_transition_matrices(sir, {110, 15}, {0.25, 0.5}, cfg);
  const auto path_b = mc_transition_matrices(sir, {110, 15}, {0.25, 0.5}, threaded);
  CHECK(path_a[1].counts() == path_b[1].counts());
}

TEST_CASE("zero rates leave a path where it started") {
  std::mt19937_64 rng(1);
  const State s = simulate_path(BBDRates(kZero, kZero, kZero, kZero), {3, 4}, 10.0, rng);
  CHECK(s == State{3, 4});
  const auto many = simulate_path(DBDRates(kZero, kZero, kZero, kZero), {3, 4}, {1.0, 2.0, 3.0}, rng);
  CHECK(many.size() == 3);
  for (const State& x : many) CHECK(x == State{3, 4});
  CHECK_THROWS_AS(simulate_path(DBDRates(kZero, kZero, kZero, kZero), {3, 4}, {2.0, 1.0}, rng),
                  std::invalid_argument);
}

TEST_CASE("monomolecular analytic solution") {
  const TransitionMatrix m = monomolecular_analytic(2.0, 0.5, 1.0, 20, 0, 1.0);
  CHECK(m.total_mass() == Approx(1.0).epsilon(1e-12));
  // Start state at t = 0.
  const TransitionMatrix zero = monomolecular_analytic(2.0, 0.5, 1.0, 20, 3, 0.0);
  CHECK(zero(0, 20) == Approx(1.0));
  // Without outflow each molecule is a two-state chain.
  const auto K = monomolecular_kernel(0.8, 1.7, 0.0, 0.9);
  const double e = std::exp(-2.5 * 0.9);
  CHECK(K[1] == Approx(0.8 / 2.5 * (1.0 - e)).epsilon(1e-13));
  CHECK(K[0] + K[1] == Approx(1.0).epsilon(1e-14));
  // A single A molecule: P(still A) = K[0].
  const TransitionMatrix single = monomolecular_analytic(0.8, 1.7, 0.4, 1, 0, 0.9);
  CHECK(single(0, 1) == Approx(monomolecular_kernel(0.8, 1.7, 0.4, 0.9)[0]).epsilon(1e-14));
}
