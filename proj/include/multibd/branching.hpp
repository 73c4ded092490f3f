#pragma once

#include <complex>

namespace multibd {

/// Two-type branching approximation to SIR over one interval: susceptibles
/// are infected at the frozen per-capita rate beta * i0 and infecteds recover
/// at rate alpha, each individual independently.
struct BranchingParams {
  double alpha = 0.0;
  double beta = 0.0;
  double i0 = 0.0;

  void validate() const;
};

/// Per-individual outcome probabilities after time t.
struct BranchingKernel {
  double stay_s = 1.0;    // susceptible still susceptible
  double become_i = 0.0;  // susceptible now infected
  double removed = 0.0;   // susceptible infected and already recovered
  double keep_i = 1.0;    // infected still infected
};

/// Kernel for (t, params). Uses (e^{-alpha t} - e^{-beta i0 t}) / (beta i0 - alpha)
/// through expm1, which is also the value of the removable singularity at
/// beta i0 = alpha.
BranchingKernel branching_kernel(double t, const BranchingParams& p);

/// PGF of one infected individual: 1 + (s2 - 1) e^{-alpha t}.
std::complex<double> pgf_phi2(double t, std::complex<double> s2, double alpha);

/// PGF of one susceptible individual under the frozen infection rate.
std::complex<double> pgf_phi1(double t, std::complex<double> s1, std::complex<double> s2,
                              double alpha, double beta, double i0);

/// P{(S, I)(t) = (k, l) | (m, n)} for the branching approximation with i0 = n:
/// the coefficient of s1^k s2^l in phi1^m phi2^n. Zero when k > m or l
/// exceeds the reachable count.
double branching_trans_prob(int m, int n, int k, int l, double t, double alpha, double beta);

}  // namespace multibd
