#include "multibd/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace multibd {

namespace {

// (e^{-alpha t} - e^{-rate t}) / (rate - alpha), exact at rate = alpha.
double difference_quotient(double t, double alpha, double rate) {
  const double delta = rate - alpha;
  if (std::abs(delta) < 1e-8 * alpha) return t * std::exp(-alpha * t);
  return std::exp(-alpha * t) * -std::expm1(-delta * t) / delta;
}

double log_or_zero(int count, double p) {
  if (count == 0) return 0.0;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return count * std::log(p);
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace

void BranchingParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be >= 0");
  if (!(i0 >= 0.0) || !std::isfinite(i0)) throw std::invalid_argument("i0 must be >= 0");
}

BranchingKernel branching_kernel(double t, const BranchingParams& p) {
  p.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  const double rate = p.beta * p.i0;
  BranchingKernel k;
  k.stay_s = std::exp(-rate * t);
  k.become_i = rate * difference_quotient(t, p.alpha, rate);
  k.removed = std::max(0.0, 1.0 - k.stay_s - k.become_i);
  k.keep_i = std::exp(-p.alpha * t);
  return k;
}

std::complex<double> pgf_phi2(double t, std::complex<double> s2, double alpha) {
  return 1.0 + (s2 - 1.0) * std::exp(-alpha * t);
}

std::complex<double> pgf_phi1(double t, std::complex<double> s1, std::complex<double> s2,
                              double alpha, double beta, double i0) {
  const double rate = beta * i0;
  return 1.0 + rate * (s2 - 1.0) * difference_quotient(t, alpha, rate) +
         std::exp(-rate * t) * (s1 - 1.0);
}

double branching_trans_prob(int m, int n, int k, int l, double t, double alpha, double beta) {
  if (m < 0 || n < 0 || k < 0 || l < 0) throw std::invalid_argument("counts must be >= 0");
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (k > m) return 0.0;
  const BranchingKernel q = branching_kernel(t, {alpha, beta, double(n)});

  // Susceptibles: multinomial over (still S = k, now I = j, removed).
  // Infecteds: binomial count i still infected. l = i + j.
  const double log_mk = log_factorial(m) - log_factorial(k) + log_or_zero(k, q.stay_s);
  double sum = 0.0;
  for (int i = std::max(0, l - (m - k)); i <= std::min(l, n); ++i) {
    const int j = l - i;
    const double log_s = log_mk - log_factorial(j) - log_factorial(m - k - j) +
                         log_or_zero(j, q.become_i) + log_or_zero(m - k - j, q.removed);
    const double log_i = log_factorial(n) - log_factorial(i) - log_factorial(n - i) +
                         log_or_zero(i, q.keep_i) + log_or_zero(n - i, -std::expm1(-alpha * t));
    sum += std::exp(log_s + log_i);
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace multibd
