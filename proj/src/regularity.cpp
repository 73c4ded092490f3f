#include "multibd/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace multibd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RegularityReport regularity_diagnostic(const BBDRates& rates, int a0, int K) {
  if (K < 1) throw std::invalid_argument("regularity horizon K must be >= 1");
  if (a0 < 0) throw std::invalid_argument("a0 must be >= 0");

  RegularityReport rep;
  rep.horizon = K;
  rep.partial_sums.reserve(K);
  double sum = 0.0;
  for (int k = 1; k <= K; ++k) {
    if (!rep.diverged_early && k >= a0) {
      double lambda_k = 0.0;
      for (int a = a0; a <= k; ++a) {
        lambda_k = std::max(lambda_k, rates.lambda1(a, k - a) + rates.lambda2(a, k - a));
      }
      if (lambda_k == 0.0) {
        rep.diverged_early = true;
        rep.diverged_at = k;
        sum = kInf;
      } else {
        sum += 1.0 / lambda_k;
      }
    }
    rep.partial_sums.push_back(sum);
  }
  rep.partial_sum = sum;
  return rep;
}

RegularityReport regularity_diagnostic(const DBDRates& rates, int a0, int K) {
  if (K < 1) throw std::invalid_argument("regularity horizon K must be >= 1");
  if (a0 < 0) throw std::invalid_argument("a0 must be >= 0");

  RegularityReport rep;
  rep.horizon = K;
  rep.partial_sums.reserve(K);

  auto lambda_at = [&](int k) {
    double v = 0.0;
    for (int a = 0; a <= std::min(k, a0); ++a) v = std::max(v, rates.lambda2(a, k - a));
    return v;
  };
  auto mu_at = [&](int k) {
    double v = kInf;
    for (int a = 0; a <= std::min(k, a0); ++a) {
      v = std::min(v, rates.mu1(a, k - a) + rates.mu2(a, k - a));
    }
    return v;
  };

  // rho_k = (sigma_0 + ... + sigma_k) / sigma_k = 1 + rho_{k-1} mu_k / lambda_{k-1}
  double sum = 0.0;
  double rho = 1.0;
  double log_sigma = 0.0;
  double lambda_prev = 0.0;
  for (int k = 0; k < K; ++k) {
    const double lambda_k = lambda_at(k);
    if (!rep.diverged_early) {
      if (k > 0) {
        const double mu_k = mu_at(k);
        rho = 1.0 + rho * mu_k / lambda_prev;
        log_sigma += std::log(lambda_prev) - std::log(mu_k);
        if (!std::isfinite(log_sigma) || std::abs(log_sigma) > 709.0) rep.sigma_overflow = true;
      }
      if (lambda_k == 0.0) {
        rep.diverged_early = true;
        rep.diverged_at = k;
        sum = kInf;
      } else if (!std::isfinite(rho)) {
        rep.sigma_overflow = true;
        rep.diverged_early = true;
        rep.diverged_at = k;
        sum = kInf;
      } else {
        sum += rho / lambda_k;
      }
    }
    lambda_prev = lambda_k;
    rep.partial_sums.push_back(sum);
  }
  rep.partial_sum = sum;
  return rep;
}

}  // namespace multibd
