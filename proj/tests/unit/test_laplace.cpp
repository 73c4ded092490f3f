#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "multibd/laplace.hpp"

using namespace multibd;
using doctest::Approx;

namespace {

struct Pair {
  const char* name;
  Complex (*F)(Complex);
  double (*f)(double);
};

const Pair kPairs[] = {
    {"1/s", [](Complex s) { return 1.0 / s; }, [](double) { return 1.0; }},
    {"1/(s+1)", [](Complex s) { return 1.0 / (s + 1.0); }, [](double t) { return std::exp(-t); }},
    {"1/s^2", [](Complex s) { return 1.0 / (s * s); }, [](double t) { return t; }},
};

}  // namespace

TEST_CASE("grid construction") {
  CHECK(make_grid(1.0, 1e-12).H == Approx(27.7));
  CHECK(make_grid(1.0, 0.5).H == Approx(1.1));
  LaplaceGrid g;
  g.t = 2.0;
  g.H = 28.0;
  CHECK(g.point(1).real() == Approx(7.0));
  CHECK(g.point(1).imag() == Approx(std::numbers::pi / 2.0));
  CHECK(g.weight(0) == Approx(0.5 * std::exp(14.0) / 2.0));
  CHECK(g.weight(3) == -g.weight(2));
  CHECK(make_grid(1.0, 1e-12).error_bound() <= 1e-12);
}

TEST_CASE("analytic transform pairs") {
  CHECK(invert(kPairs[0].F, make_grid(1.0)).value == Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(invert(kPairs[1].F, make_grid(1.0)).value - std::exp(-1.0)) < 1e-9);
  CHECK(std::abs(invert(kPairs[2].F, make_grid(3.0)).value - 3.0) < 1e-8);
}

TEST_CASE("pairs stay within ten times the discretization bound") {
  for (const Pair& p : kPairs) {
    for (double t : {0.1, 1.0, 10.0}) {
      const LaplaceGrid g = make_grid(t);
      const InversionResult r = invert(p.F, g);
      CAPTURE(p.name);
      CAPTURE(t);
      CHECK(r.converged);
      // The discretization error of the ramp grows with f(3t); bound it relative to f.
      CHECK(std::abs(r.value - p.f(t)) <= 10.0 * g.error_bound() * std::max(1.0, 3.0 * p.f(t)));
    }
  }
}

TEST_CASE("acceleration does not lose to the plain sum") {
  for (const Pair& p : kPairs) {
    for (double t : {0.1, 1.0, 10.0}) {
      LaplaceGrid g = make_grid(t);
      const double fast = invert(p.F, g).value;
      g.early_stop = false;
      const double plain = invert(p.F, g, AcceleratorState(0)).value;
      const double exact = p.f(t);
      CAPTURE(p.name);
      CAPTURE(t);
      CHECK(std::abs(fast - exact) <= 2.0 * std::abs(plain - exact) + 1e-13 * std::max(1.0, exact));
    }
  }
}

TEST_CASE("early stop can be switched off") {
  LaplaceGrid g = make_grid(1.0, 1e-12, 250);
  g.early_stop = false;
  const InversionResult r = invert(kPairs[1].F, g);
  CHECK(r.terms == 251);
  CHECK(std::abs(r.value - std::exp(-1.0)) < 1e-9);
  g.early_stop = true;
  CHECK(invert(kPairs[1].F, g).terms < 251);
}

TEST_CASE("vector inversion is independent of threads") {
  const VectorTransform F = [](int, Complex s, std::span<Complex> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (s + double(i));
  };
  const LaplaceGrid g = make_grid(0.7);
  const VectorInversion one = invert_vector(F, 6, g, 8, 1);
  const VectorInversion four = invert_vector(F, 6, g, 8, 4);
  CHECK(one.values == four.values);
  CHECK(one.terms == four.terms);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(one.values[i] - std::exp(-0.7 * i)) < 1e-9);
}

TEST_CASE("levin on classic alternating series") {
  std::vector<double> ln2, leibniz, geom;
  for (int k = 0; k < 12; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    if (k < 10) ln2.push_back(sign / (k + 1));
    leibniz.push_back(sign / (2 * k + 1));
    if (k < 8) geom.push_back(std::pow(-0.5, k));
  }
  CHECK(std::abs(levin_accelerate(ln2, 8) - std::log(2.0)) < 1e-8);
  CHECK(std::abs(levin_accelerate(leibniz, 10) - std::numbers::pi / 4.0) < 1e-8);
  CHECK(std::abs(levin_accelerate(geom, 2) - 2.0 / 3.0) < 1e-14);
}

TEST_CASE("accelerator falls back when terms do not alternate") {
  AcceleratorState acc(4);
  for (int k = 0; k < 10; ++k) acc.push(1.0 / ((k + 1.0) * (k + 1.0)));
  const auto e = acc.estimate();
  CHECK_FALSE(e.accelerated);
  CHECK(e.value < acc.partial_sum());
}
