#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "multibd/ode.hpp"
#include "multibd/rates.hpp"
#include "multibd/regularity.hpp"

using namespace multibd;
using doctest::Approx;

TEST_CASE("sir rates") {
  const DBDRates r = sir_rates({3.2, 0.025, 125});
  CHECK(r.mu2(110, 15) == Approx(48.0));
  CHECK(r.gamma(110, 15) == Approx(41.25));
  CHECK(r.mu1(110, 15) == 0.0);
  CHECK(r.lambda2(110, 15) == 0.0);
  for (int i = 0; i < 50; ++i) {
    CHECK(r.gamma(0, i) == 0.0);
    CHECK(r.mu2(i, 0) == 0.0);
  }
  const DBDRates eyam = sir_rates({3.39, 0.0212, 261});
  CHECK(eyam.gamma(254, 7) == Approx(37.6936).epsilon(1e-12));
}

TEST_CASE("monomolecular rates") {
  const BBDRates r = monomolecular_rates({2.0, 0.5, 1.0, 20, 0});
  CHECK(r.lambda1(0, 5) == Approx(15.0));
  CHECK(r.mu2(0, 5) == Approx(10.0));
  CHECK(r.lambda2(10, 10) == 0.0);
  CHECK(r.gamma(3, 4) == 0.0);
  for (int i = 0; i <= 30; ++i) {
    for (int j = 0; j <= 30; ++j) {
      if (i + j > 20) {
        CHECK(r.lambda1(i, j) == 0.0);
        CHECK(r.lambda2(i, j) == 0.0);
      }
    }
  }
}

TEST_CASE("birth-death-shift and parasite rates") {
  const DBDRates bds = bds_rates({0.0188, 0.0147, 0.00268});
  CHECK(bds.lambda2(10, 0) == Approx(0.188));
  CHECK(bds.gamma(10, 5) == Approx(0.0268));
  for (int b = 0; b < 20; ++b) CHECK(bds.gamma(0, b) == 0.0);

  const DBDRates par = parasite_rates({0.0682, 0.0015, 0.0009, 0.04});
  CHECK(par.mu1(100, 0) == Approx(15.82));
  CHECK(par.gamma(100, 0) == Approx(4.0));
  CHECK(par.mu2(50, 20) == Approx(0.03));
}

TEST_CASE("boundary zeros hold on a 200x200 lattice") {
  const DBDRates sir = sir_rates({3.2, 0.025, 300});
  const DBDRates bds = bds_rates({0.3, 0.2, 0.1});
  const DBDRates par = parasite_rates({0.0682, 0.0015, 0.0009, 0.04});
  const BBDRates mono = monomolecular_rates({2.0, 0.5, 1.0, 150, 40});
  for (int k = 0; k < 200; ++k) {
    for (const DBDRates* r : {&sir, &bds, &par}) {
      CHECK(r->mu1(0, k) == 0.0);
      CHECK(r->gamma(0, k) == 0.0);
      CHECK(r->mu2(k, 0) == 0.0);
    }
    CHECK(mono.mu2(k, 0) == 0.0);
    CHECK(mono.gamma(k, 0) == 0.0);
  }
}

TEST_CASE("rate evaluation repeats bit for bit") {
  const DBDRates par = parasite_rates({0.0682, 0.0015, 0.0009, 0.04});
  for (int a = 0; a < 60; a += 7) {
    for (int b = 0; b < 60; b += 5) {
      CHECK(par.mu1(a, b) == par.mu1(a, b));
      CHECK(par.total(a, b) == par.total(a, b));
    }
  }
}

TEST_CASE("negative or non-finite rates are rejected") {
  const BBDRates bad([](int, int) { return -1.0; }, [](int, int) { return 0.0; },
                     [](int, int) { return 0.0; }, [](int, int) { return NAN; });
  CHECK_THROWS(bad.lambda1(1, 1));
  CHECK_THROWS(bad.gamma(1, 1));
  CHECK(bad.gamma(1, 0) == 0.0);  // boundary wins
  CHECK_THROWS_AS(validate(SirParams{0.0, 0.1, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SirParams{1.0, 0.1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(BdsParams{-0.1, 0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("regularity: linear pure birth gives harmonic numbers") {
  const double c = 0.7;
  const BBDRates r([c](int a, int b) { return c * (a + b); }, [](int, int) { return 0.0; },
                   [](int, int) { return 0.0; }, [](int, int) { return 0.0; });
  const RegularityReport rep = regularity_diagnostic(r, 0, 100);
  double h = 0.0;
  for (int k = 1; k <= 100; ++k) h += 1.0 / k;
  CHECK(rep.partial_sum == Approx(h / c).epsilon(1e-13));
  CHECK_FALSE(rep.diverged_early);
  for (std::size_t k = 1; k < rep.partial_sums.size(); ++k) {
    CHECK(rep.partial_sums[k] >= rep.partial_sums[k - 1]);
  }
}

TEST_CASE("regularity: monomolecular against a scalar loop") {
  const MonomolecularParams p{2.0, 0.5, 1.0, 20, 0};
  const BBDRates r = monomolecular_rates(p);
  const RegularityReport rep = regularity_diagnostic(r, 0, 50);
  // On a + b = k every state has lambda1 + lambda2 = (o_b + r_ba)(N - k)+.
  double sum = 0.0;
  for (int k = 1; k < 20; ++k) {
    sum += 1.0 / ((p.o_b + p.r_ba) * (20 - k));
    CHECK(rep.partial_sums[k - 1] == Approx(sum).epsilon(1e-13));
  }
  CHECK(rep.diverged_early);
  CHECK(rep.diverged_at == 20);
  CHECK(std::isinf(rep.partial_sum));
}

TEST_CASE("regularity: the empty state absorbs the birth-death-shift model") {
  const RegularityReport rep = regularity_diagnostic(bds_rates({0.3, 0.2, 0.1}), 10, 60);
  CHECK(rep.diverged_early);
  CHECK(rep.diverged_at == 0);
}

TEST_CASE("regularity: SIR has no type-2 births") {
  const RegularityReport rep = regularity_diagnostic(sir_rates({3.2, 0.025, 125}), 110, 10);
  CHECK(rep.diverged_early);
  CHECK(rep.diverged_at == 0);
}

TEST_CASE("regularity: death/birth-death partial sums are monotone") {
  // Immigration keeps every diagonal's birth bound positive.
  const DBDRates r([](int a, int) { return 0.2 * a; }, [](int, int b) { return 1.0 + 0.5 * b; },
                   [](int, int b) { return 0.7 * b; }, [](int, int) { return 0.0; });
  const RegularityReport rep = regularity_diagnostic(r, 10, 60);
  CHECK_FALSE(rep.diverged_early);
  CHECK(rep.partial_sum > 0.0);
  for (std::size_t k = 1; k < rep.partial_sums.size(); ++k) {
    CHECK(rep.partial_sums[k] >= rep.partial_sums[k - 1]);
  }
}

TEST_CASE("ode: zero rates keep the state") {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto traj = sir_ode({0.0, 0.0, 10}, {9.0, 1.0, 0.0}, grid);
  REQUIRE(traj.size() == 3);
  CHECK(traj.back() == std::vector<double>{9.0, 1.0, 0.0});
}

TEST_CASE("ode: SIR without infection decays exponentially and conserves N") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  const auto traj = sir_ode({1.3, 0.0, 100}, {90.0, 10.0, 0.0}, grid);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(traj[g][0] == 90.0);
    CHECK(traj[g][1] == Approx(10.0 * std::exp(-1.3 * grid[g])).epsilon(1e-9));
  }
  const auto epi = sir_ode({3.2, 0.025, 125}, {110.0, 15.0, 0.0}, grid);
  for (const auto& y : epi) CHECK(std::abs(y[0] + y[1] + y[2] - 125.0) <= 1e-9 * 125.0);
}

TEST_CASE("ode: parasite larvae decay while mature counts rise then fall") {
  std::vector<double> grid;
  for (int i = 0; i <= 400; i += 10) grid.push_back(i);
  const auto traj = parasite_ode({0.0682, 0.0015, 0.0009, 0.04}, {100.0, 0.0}, grid);
  for (std::size_t g = 1; g < traj.size(); ++g) CHECK(traj[g][0] < traj[g - 1][0]);
  std::size_t peak = 0;
  for (std::size_t g = 0; g < traj.size(); ++g) {
    if (traj[g][1] > traj[peak][1]) peak = g;
  }
  CHECK(peak > 0);
  CHECK(peak < traj.size() - 1);
  CHECK(traj.back()[1] < traj[peak][1]);
}
