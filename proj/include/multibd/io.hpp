#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "json.hpp"
#include "multibd/inference.hpp"
#include "multibd/oracles.hpp"
#include "multibd/rates.hpp"
#include "multibd/solver.hpp"

namespace multibd {

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Columns a,b,prob with prob clamped to [0, 1].
void write_matrix_csv(std::ostream& out, const TransitionMatrix& m);

/// tail_mass, total_mass, ranges, warnings and inversion statistics.
/// Timing is included only when `with_timing` is set.
nlohmann::json matrix_json(const TransitionMatrix& m, bool with_timing = true);

/// Columns a,b,prob,count,ci_low,ci_high.
void write_empirical_csv(std::ostream& out, const EmpiricalMatrix& m, double z = 1.959963984540054);

/// Columns iter,log_alpha,log_beta,alpha,beta,r0,log_target.
void write_chain_csv(std::ostream& out, const McmcChain& chain, int n_total);

/// [{param, mean, q025, q975}, ...] for alpha, beta and R0.
nlohmann::json summary_json(const PosteriorSummary& s);

/// Rates listed per state in a CSV. The header is either
///   a,b,lambda1,lambda2,mu2,gamma  (birth/birth-death) or
///   a,b,mu1,lambda2,mu2,gamma      (death/birth-death).
/// States missing from the table have all rates zero.
struct RateTable {
  bool death_first = false;  // header names mu1
  std::map<std::pair<int, int>, std::array<double, 4>> rows;

  BBDRates bbd() const;
  DBDRates dbd() const;
};

RateTable read_rate_table(const std::string& path);

}  // namespace multibd
