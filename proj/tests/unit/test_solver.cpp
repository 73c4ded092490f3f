#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "multibd/oracles.hpp"
#include "multibd/rates.hpp"
#include "multibd/solver.hpp"

using namespace multibd;
using doctest::Approx;

namespace {

RateFn table_fn(std::shared_ptr<std::map<std::pair<int, int>, double>> t) {
  return [t](int a, int b) {
    const auto it = t->find({a, b});
    return it == t->end() ? 0.0 : it->second;
  };
}

// Random rates on a (rows x cols) box whose jumps never leave the box.
BBDRates random_bbd(int a0, int rows, int B, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, hi);
  auto l1 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto l2 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto m2 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto g = std::make_shared<std::map<std::pair<int, int>, double>>();
  const int a_max = a0 + rows - 1;
  for (int a = a0; a <= a_max; ++a) {
    for (int b = 0; b <= B; ++b) {
      (*l1)[{a, b}] = a < a_max ? u(rng) : 0.0;
      (*l2)[{a, b}] = b < B ? u(rng) : 0.0;
      (*m2)[{a, b}] = u(rng);
      (*g)[{a, b}] = a < a_max ? u(rng) : 0.0;
    }
  }
  return BBDRates(table_fn(l1), table_fn(l2), table_fn(m2), table_fn(g));
}

DBDRates random_dbd(int a0, int B, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, hi);
  auto m1 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto l2 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto m2 = std::make_shared<std::map<std::pair<int, int>, double>>();
  auto g = std::make_shared<std::map<std::pair<int, int>, double>>();
  for (int a = 0; a <= a0; ++a) {
    for (int b = 0; b <= B; ++b) {
      (*m1)[{a, b}] = u(rng);
      (*l2)[{a, b}] = b < B ? u(rng) : 0.0;
      (*m2)[{a, b}] = u(rng);
      (*g)[{a, b}] = b < B ? u(rng) : 0.0;
    }
  }
  return DBDRates(table_fn(m1), table_fn(l2), table_fn(m2), table_fn(g));
}

ProbRequest request(double t, int a0, int b0, int A, int B) {
  ProbRequest r;
  r.t = t;
  r.a0 = a0;
  r.b0 = b0;
  r.A = A;
  r.B = B;
  return r;
}

}  // namespace

TEST_CASE("monomolecular system matches the analytic convolution") {
  const MonomolecularParams p{2.0, 0.5, 1.0, 20, 0};
  const TransitionMatrix cf = bbd_prob(request(1.0, 0, 20, 20, 20), monomolecular_rates(p));
  const TransitionMatrix exact = monomolecular_analytic(2.0, 0.5, 1.0, 20, 0, 1.0);
  CHECK(cf.l1_distance(exact) < 4.7e-9);
  CHECK(cf.warnings.empty());
}

TEST_CASE("tiny t concentrates on the start state") {
  const BBDRates r = random_bbd(2, 6, 5, 100.0, 5);
  const TransitionMatrix m = bbd_prob(request(1e-8, 2, 3, 7, 5), r);
  CHECK(m(2, 3) >= 1.0 - 1e-5);
  CHECK(m.total_mass() - m.raw(2, 3) <= 1e-5);

  const DBDRates d = sir_rates({3.2, 0.025, 125});
  const TransitionMatrix s = dbd_prob(request(1e-8, 20, 5, 15, 25), d);
  CHECK(s(20, 5) >= 1.0 - 1e-5);
}

TEST_CASE("zero rates give the indicator of the start") {
  const RateFn zero = [](int, int) { return 0.0; };
  const TransitionMatrix m = bbd_prob(request(2.0, 1, 2, 4, 6), BBDRates(zero, zero, zero, zero));
  for (int a = 1; a <= 4; ++a) {
    for (int b = 0; b <= 6; ++b) {
      CHECK(m(a, b) == Approx(a == 1 && b == 2 ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("random 6x6 birth/birth-death and death/birth-death vs uniformization") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const BBDRates r = random_bbd(0, 6, 5, 2.0, seed);
    const TransitionMatrix cf = bbd_prob(request(0.7, 0, 2, 5, 5), r);
    const TransitionMatrix ex = matexp_prob(r, {0, 2}, {0, 5, 5}, 0.7);
    CHECK(cf.l1_distance(ex) <= 1e-8);

    const DBDRates d = random_dbd(5, 5, 2.0, seed);
    const TransitionMatrix cd = dbd_prob(request(0.7, 5, 1, 0, 5), d);
    const TransitionMatrix ed = matexp_prob(d, {5, 1}, {0, 5, 5}, 0.7);
    CHECK(cd.l1_distance(ed) <= 1e-8);
  }
}

TEST_CASE("bounded-support models are normalized") {
  const TransitionMatrix sir = dbd_prob(request(0.5, 30, 8, 0, 38), sir_rates({3.2, 0.025, 38}));
  CHECK(sir.total_mass() == Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sir.tail_mass()) < 1e-9);

  const TransitionMatrix mono = bbd_prob(request(0.3, 0, 12, 15, 15),
                                         monomolecular_rates({1.0, 2.0, 0.5, 12, 3}));
  CHECK(mono.total_mass() == Approx(1.0).epsilon(1e-6));

  const TransitionMatrix par = dbd_prob(request(50.0, 20, 0, 0, 20),
                                        parasite_rates({0.0682, 0.0015, 0.0009, 0.04}));
  CHECK(par.total_mass() == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Chapman-Kolmogorov on a small SIR instance") {
  const int s0 = 12, i0 = 4, B = s0 + i0;
  const DBDRates rates = sir_rates({1.5, 0.12, B});
  const double t1 = 0.2, t2 = 0.3;
  const TransitionMatrix direct = dbd_prob(request(t1 + t2, s0, i0, 0, B), rates);
  const TransitionMatrix first = dbd_prob(request(t1, s0, i0, 0, B), rates);
  TransitionMatrix composed(0, s0, B);
  for (int c = 0; c <= s0; ++c) {
    for (int d = 0; d <= B; ++d) {
      const double w = first.raw(c, d);
      if (std::abs(w) < 1e-300) continue;
      if (c + d > B) continue;  // unreachable
      const TransitionMatrix second = dbd_prob(request(t2, c, d, 0, B), rates);
      for (int a = 0; a <= c; ++a) {
        for (int b = 0; b <= B; ++b) composed.set(a, b, composed.raw(a, b) + w * second.raw(a, b));
      }
    }
  }
  double worst = 0.0;
  for (int a = 0; a <= s0; ++a) {
    for (int b = 0; b <= B; ++b) worst = std::max(worst, std::abs(composed.raw(a, b) - direct.raw(a, b)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("truncation level: differences shrink and settle") {
  const DBDRates rates = bds_rates({0.3, 0.2, 0.1});
  const std::vector<int> levels{8, 12, 16, 24, 32, 48};
  std::vector<TransitionMatrix> m;
  for (int B : levels) m.push_back(dbd_prob(request(1.0, 5, 0, 0, B), rates));
  const TransitionMatrix& ref = m.back();
  auto restricted = [&](const TransitionMatrix& x) {
    double l1 = 0.0;
    for (int a = x.a_min(); a <= x.a_max(); ++a) {
      for (int b = 0; b < x.B(); ++b) l1 += std::abs(x.raw(a, b) - ref.raw(a, b));
    }
    return l1;
  };
  double prev = INFINITY;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double d = restricted(m[i]);
    CAPTURE(levels[i]);
    CHECK(d <= prev);
    prev = d;
  }
  CHECK(restricted(m[m.size() - 2]) <= 1e-8);
}

TEST_CASE("auto truncation") {
  // Pure death: the start column already bounds the support.
  const DBDRates death([](int, int) { return 0.0; }, [](int, int) { return 0.0; },
                       [](int, int b) { return 1.0 * b; }, [](int, int) { return 0.0; });
  const ProbRequest pd = auto_truncate(request(1.0, 0, 6, 0, 6), death);
  CHECK(pd.B == 6);

  const DBDRates sir = sir_rates({3.2, 0.025, 38});
  const ProbRequest ps = auto_truncate(request(0.5, 30, 8, 0, 38), sir);
  CHECK(ps.B == 38);

  // Birth-death-shift from a small B: the returned level holds, and doubling it barely moves.
  const DBDRates bds = bds_rates({0.3, 0.2, 0.1});
  const ProbRequest pb = auto_truncate(request(1.0, 5, 0, 0, 4), bds);
  CHECK(pb.B > 4);
  const TransitionMatrix at = dbd_prob(pb, bds);
  CHECK(at.tail_mass() <= 1e-6);
  ProbRequest twice = pb;
  twice.B = 2 * pb.B;
  const TransitionMatrix wide = dbd_prob(twice, bds);
  double beyond = 0.0;
  for (int a = wide.a_min(); a <= wide.a_max(); ++a) {
    for (int b = pb.B; b <= wide.B(); ++b) beyond += wide.raw(a, b);
  }
  CHECK(beyond <= 1e-5);

  // Explosive births never settle.
  const DBDRates boom([](int, int) { return 0.0; }, [](int, int b) { return 5.0 * (b + 1); },
                      [](int, int) { return 0.0; }, [](int, int) { return 0.0; });
  CHECK_THROWS_AS(auto_truncate(request(3.0, 0, 1, 0, 4), boom), SolverError);
}

TEST_CASE("threads and assembly path do not change the answer") {
  const DBDRates rates = sir_rates({3.2, 0.025, 45});
  ProbRequest r = request(0.5, 35, 10, 10, 45);
  const TransitionMatrix one = dbd_prob(r, rates);
  r.threads = 4;
  const TransitionMatrix four = dbd_prob(r, rates);
  for (int a = one.a_min(); a <= one.a_max(); ++a) {
    for (int b = 0; b <= one.B(); ++b) CHECK(one.raw(a, b) == four.raw(a, b));
  }
  r.threads = 1;
  r.direct_assembly = true;
  const TransitionMatrix direct = dbd_prob(r, rates);
  CHECK(direct.l1_distance(one) < 1e-10);
}

TEST_CASE("single-entry solver agrees with the full matrix") {
  const DBDRates rates = sir_rates({3.39, 0.0212, 261});
  ProbRequest r = request(0.5, 60, 7, 50, 67);
  const TransitionMatrix full = dbd_prob(r, rates);
  for (int b : {0, 5, 12}) {
    r.b_target = b;
    SolverStats st;
    const double p = dbd_prob_entry(r, rates, &st);
    CHECK(std::abs(p - full.raw(50, b)) < 1e-11);
    CHECK(st.inversion_converged);
  }
}

TEST_CASE("bad requests") {
  const DBDRates rates = sir_rates({3.2, 0.025, 20});
  CHECK_THROWS_AS(dbd_prob(request(0.0, 10, 2, 0, 12), rates), std::invalid_argument);
  CHECK_THROWS_AS(dbd_prob(request(1.0, 10, 2, 11, 12), rates), std::invalid_argument);
  CHECK_THROWS_AS(dbd_prob(request(1.0, 10, 13, 0, 12), rates), std::invalid_argument);
  CHECK_THROWS_AS(bbd_prob(request(1.0, 3, 0, 2, 4), monomolecular_rates({1, 1, 1, 3, 1})),
                  std::invalid_argument);
}
