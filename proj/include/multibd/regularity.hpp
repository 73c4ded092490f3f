#pragma once

#include <vector>

#include "multibd/rates.hpp"

namespace multibd {

/// Finite-horizon view of the sufficient regularity conditions. The
/// conditions are divergence statements about infinite series, so this only
/// reports partial sums up to a horizon; it never claims "regular".
struct RegularityReport {
  int horizon = 0;
  /// Sum of the first `horizon` terms; +inf once a term is infinite.
  double partial_sum = 0.0;
  /// partial_sums[k-1] is the sum after k steps (k = 1..horizon).
  std::vector<double> partial_sums;
  /// A zero birth bound was hit, so the series diverges from that step on.
  bool diverged_early = false;
  int diverged_at = -1;
  /// Death/birth-death only: the product sigma_k left the double range.
  /// Partial sums stay valid because they are accumulated from ratios.
  bool sigma_overflow = false;
};

/// Birth/birth-death diagnostic: sum over k = 1..K of 1/lambda_k, with
/// lambda_k the largest lambda1 + lambda2 on the diagonal a + b = k
/// restricted to a >= a0 (states below a0 are unreachable). Diagonals with
/// no reachable state contribute nothing.
RegularityReport regularity_diagnostic(const BBDRates& rates, int a0, int K);

/// Death/birth-death diagnostic: sum over k = 0..K-1 of
/// (sigma_0 + ... + sigma_k) / (lambda_k sigma_k) on the diagonals
/// a + b = k with a <= a0. lambda_k is the largest lambda2 there, mu_k the
/// smallest mu1 + mu2, and sigma_k = lambda_0...lambda_{k-1} / mu_1...mu_k.
RegularityReport regularity_diagnostic(const DBDRates& rates, int a0, int K);

}  // namespace multibd
