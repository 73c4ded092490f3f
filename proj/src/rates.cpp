#include "multibd/rates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace multibd {

namespace {

double checked(const RateFn& fn, const char* name, int a, int b) {
  const double r = fn(a, b);
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::domain_error(std::string("rate ") + name + "(" + std::to_string(a) + "," +
                            std::to_string(b) + ") = " + std::to_string(r) +
                            " is negative or not finite");
  }
  return r;
}

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

BBDRates::BBDRates(RateFn lambda1, RateFn lambda2, RateFn mu2, RateFn gamma)
    : lambda1_(std::move(lambda1)),
      lambda2_(std::move(lambda2)),
      mu2_(std::move(mu2)),
      gamma_(std::move(gamma)) {}

double BBDRates::lambda1(int a, int b) const {
  if (a < 0 || b < 0) return 0.0;
  return checked(lambda1_, "lambda1", a, b);
}

double BBDRates::lambda2(int a, int b) const {
  if (a < 0 || b < 0) return 0.0;
  return checked(lambda2_, "lambda2", a, b);
}

double BBDRates::mu2(int a, int b) const {
  if (a < 0 || b <= 0) return 0.0;
  return checked(mu2_, "mu2", a, b);
}

double BBDRates::gamma(int a, int b) const {
  if (a < 0 || b <= 0) return 0.0;
  return checked(gamma_, "gamma", a, b);
}

DBDRates::DBDRates(RateFn mu1, RateFn lambda2, RateFn mu2, RateFn gamma)
    : mu1_(std::move(mu1)),
      lambda2_(std::move(lambda2)),
      mu2_(std::move(mu2)),
      gamma_(std::move(gamma)) {}

double DBDRates::mu1(int a, int b) const {
  if (a <= 0 || b < 0) return 0.0;
  return checked(mu1_, "mu1", a, b);
}

double DBDRates::lambda2(int a, int b) const {
  if (a < 0 || b < 0) return 0.0;
  return checked(lambda2_, "lambda2", a, b);
}

double DBDRates::mu2(int a, int b) const {
  if (a < 0 || b <= 0) return 0.0;
  return checked(mu2_, "mu2", a, b);
}

double DBDRates::gamma(int a, int b) const {
  if (a <= 0 || b < 0) return 0.0;
  return checked(gamma_, "gamma", a, b);
}

void validate(const SirParams& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) throw std::invalid_argument("beta must be > 0");
  if (p.n_total < 1) throw std::invalid_argument("n_total must be >= 1");
}

void validate(const MonomolecularParams& p) {
  require_nonneg(p.r_ab, "r_ab");
  require_nonneg(p.r_ba, "r_ba");
  require_nonneg(p.o_b, "o_b");
  if (p.a0 < 0 || p.b0 < 0) throw std::invalid_argument("initial molecule counts must be >= 0");
}

void validate(const BdsParams& p) {
  require_nonneg(p.lambda, "lambda");
  require_nonneg(p.mu, "mu");
  require_nonneg(p.nu, "nu");
}

void validate(const ParasiteParams& p) {
  require_nonneg(p.mu_l, "mu_l");
  require_nonneg(p.mu_m, "mu_m");
  require_nonneg(p.eta, "eta");
  require_nonneg(p.gamma, "gamma");
}

DBDRates sir_rates(const SirParams& p) {
  validate(p);
  const double alpha = p.alpha;
  const double beta = p.beta;
  return DBDRates([](int, int) { return 0.0; },
                  [](int, int) { return 0.0; },
                  [alpha](int, int i) { return alpha * i; },
                  [beta](int s, int i) { return beta * s * i; });
}

BBDRates monomolecular_rates(const MonomolecularParams& p) {
  validate(p);
  const int n = p.a0 + p.b0;
  const double ob = p.o_b, rba = p.r_ba, rab = p.r_ab;
  return BBDRates([n, ob](int i, int j) { return ob * positive_part(n - i - j); },
                  [n, rba](int i, int j) { return rba * positive_part(n - i - j); },
                  [rab](int, int j) { return rab * j; },
                  [](int, int) { return 0.0; });
}

DBDRates bds_rates(const BdsParams& p) {
  validate(p);
  const double lambda = p.lambda, mu = p.mu, nu = p.nu;
  return DBDRates([mu](int a, int) { return mu * a; },
                  [lambda](int a, int b) { return lambda * (a + b); },
                  [mu](int, int b) { return mu * b; },
                  [nu](int a, int) { return nu * a; });
}

DBDRates parasite_rates(const ParasiteParams& p) {
  validate(p);
  const double mu_l = p.mu_l, mu_m = p.mu_m, eta = p.eta, gamma = p.gamma;
  return DBDRates([mu_l, eta](int i, int) { return mu_l * i + eta * double(i) * i; },
                  [](int, int) { return 0.0; },
                  [mu_m](int, int j) { return mu_m * j; },
                  [gamma](int i, int) { return gamma * i; });
}

}  // namespace multibd
