#pragma once

#include <functional>
#include <string>

namespace multibd {

/// Rate of one event type as a function of the lattice state (a, b).
/// Must be pure and re-entrant: the solver and simulators call it from
/// several threads.
using RateFn = std::function<double(int, int)>;

/// Birth/birth-death process: the type-1 count `a` never decreases.
///
/// Events from state (a, b):
///   lambda1: (a+1, b)     lambda2: (a, b+1)
///   mu2:     (a, b-1)     gamma:   (a+1, b-1)
///
/// Boundary zeros (mu2(a,0), gamma(a,0), anything at a negative index) are
/// enforced here, whatever the supplied functions return. Every evaluation is
/// checked to be finite and non-negative.
class BBDRates {
 public:
  BBDRates(RateFn lambda1, RateFn lambda2, RateFn mu2, RateFn gamma);

  double lambda1(int a, int b) const;
  double lambda2(int a, int b) const;
  double mu2(int a, int b) const;
  double gamma(int a, int b) const;
  double total(int a, int b) const {
    return lambda1(a, b) + lambda2(a, b) + mu2(a, b) + gamma(a, b);
  }

 private:
  RateFn lambda1_, lambda2_, mu2_, gamma_;
};

/// Death/birth-death process: the type-1 count `a` never increases.
///
/// Events from state (a, b):
///   mu1:     (a-1, b)     lambda2: (a, b+1)
///   mu2:     (a, b-1)     gamma:   (a-1, b+1)
///
/// Boundary zeros: mu1(0,b) = gamma(0,b) = 0, mu2(a,0) = 0.
class DBDRates {
 public:
  DBDRates(RateFn mu1, RateFn lambda2, RateFn mu2, RateFn gamma);

  double mu1(int a, int b) const;
  double lambda2(int a, int b) const;
  double mu2(int a, int b) const;
  double gamma(int a, int b) const;
  double total(int a, int b) const {
    return mu1(a, b) + lambda2(a, b) + mu2(a, b) + gamma(a, b);
  }

 private:
  RateFn mu1_, lambda2_, mu2_, gamma_;
};

/// Stochastic SIR model. Rates are per month in the Eyam analysis.
struct SirParams {
  double alpha = 0.0;  // removal rate per infective
  double beta = 0.0;   // infection rate per susceptible-infective pair
  int n_total = 1;     // conserved population size, used for R0

  double r0() const { return beta * n_total / alpha; }
};

/// Reaction system A -> B (r_ab), B -> A (r_ba), B -> * (o_b) started from
/// a0 molecules of A and b0 of B.
struct MonomolecularParams {
  double r_ab = 0.0;
  double r_ba = 0.0;
  double o_b = 0.0;
  int a0 = 0;
  int b0 = 0;
};

/// Linear birth-death-shift model for transposable elements.
struct BdsParams {
  double lambda = 0.0;  // duplication
  double mu = 0.0;      // deletion
  double nu = 0.0;      // shift
};

/// Within-host macro-parasite model under the immunity pseudoequilibrium.
struct ParasiteParams {
  double mu_l = 0.0;   // larval death
  double mu_m = 0.0;   // mature death
  double eta = 0.0;    // density-dependent larval death
  double gamma = 0.0;  // maturation
};

void validate(const SirParams& p);
void validate(const MonomolecularParams& p);
void validate(const BdsParams& p);
void validate(const ParasiteParams& p);

/// (S, I) as a death/birth-death process: mu2 = alpha*i, gamma = beta*s*i.
DBDRates sir_rates(const SirParams& p);

/// (L, A) as a birth/birth-death process, L = cumulative outflow and A the
/// count of species A. The B count is a0 + b0 - L - A.
BBDRates monomolecular_rates(const MonomolecularParams& p);

/// (old, new) occupied sites as a death/birth-death process.
DBDRates bds_rates(const BdsParams& p);

/// (larvae, mature) counts as a death/birth-death process.
DBDRates parasite_rates(const ParasiteParams& p);

}  // namespace multibd
