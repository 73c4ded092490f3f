#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "multibd/contfrac.hpp"
#include "multibd/rates.hpp"

namespace multibd {

/// One transition-probability computation: start (a0, b0), elapsed time t,
/// type-1 index bound A and type-2 truncation level B.
///
/// For a birth/birth-death process rows run a0..A (A >= a0); for a
/// death/birth-death process they run A..a0 (A <= a0). Columns are 0..B in
/// both cases. B only needs to be large enough that little mass sits at
/// b = B; the result is exact when type-2 counts cannot exceed B.
struct ProbRequest {
  double t = 1.0;
  int a0 = 0;
  int b0 = 0;
  int A = 0;
  int B = 0;
  /// Column read by the single-entry solvers; their row is always A.
  int b_target = 0;

  double cf_tol = 1e-12;
  int cf_max_depth = 10000;
  double inv_tol = 1e-12;  // sets H through 1/(e^H - 1) <= inv_tol
  /// Largest grid index. 0 picks max(400, 2 t q / pi + 200) with q the
  /// largest total exit rate on the grid: the alternating series only
  /// settles into its asymptotic regime once Im s_k exceeds the rates.
  int k_max = 0;
  int levin_order = 8;
  /// Stop once the inverted values settle; false sums all k_max + 1 points.
  bool early_stop = true;
  int threads = 1;
  /// Sum over m of source_m * phi^(m)_b term by term (O(B^2) per row)
  /// instead of the telescoped sweeps. Reference path for tests.
  bool direct_assembly = false;
};

struct SolverStats {
  int grid_terms = 0;
  bool inversion_converged = false;
  double last_change = 0.0;
  double imag_residual = 0.0;
  int max_cf_iterations = 0;
  double seconds = 0.0;
};

/// Transition probabilities P_{ab}(t) on rows [a_min, a_max] x columns [0, B].
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(int a_min, int a_max, int B);

  int a_min() const { return a_min_; }
  int a_max() const { return a_max_; }
  int B() const { return B_; }
  int rows() const { return a_max_ - a_min_ + 1; }
  bool contains(int a, int b) const { return a >= a_min_ && a <= a_max_ && b >= 0 && b <= B_; }

  /// Value clamped to [0, 1]; 0 outside the stored range.
  double operator()(int a, int b) const;
  /// Unclamped value as produced by the inversion.
  double raw(int a, int b) const;
  void set(int a, int b, double value);

  /// Sum over rows of the unclamped column b = B.
  double tail_mass() const;
  /// Sum of all unclamped entries.
  double total_mass() const;
  /// Sum of |this - other| over the union of both ranges (unclamped).
  double l1_distance(const TransitionMatrix& other) const;

  std::vector<std::string> warnings;
  SolverStats stats;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a - a_min_) * (B_ + 1) + b;
  }
  int a_min_ = 0, a_max_ = -1, B_ = -1;
  std::vector<double> values_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entry tolerance for the [0, 1] sanity check on inverted values.
inline constexpr double kEntrySlack = 1e-9;

/// Birth/birth-death transition probabilities. Rows are built upward from
/// a0; each row solves its truncated tridiagonal Laplace system through the
/// continued-fraction quantities phi^(m)_{ab}(s), fed by the previous row,
/// and every entry is inverted on a shared grid.
TransitionMatrix bbd_prob(const ProbRequest& req, const BBDRates& rates);

/// Death/birth-death transition probabilities via the reflection
/// (a0 - X1, B - X2), which is a birth/birth-death process.
TransitionMatrix dbd_prob(const ProbRequest& req, const DBDRates& rates);

/// P_{A, b_target}(t) alone. All rows are still assembled, but only this
/// cell is inverted, and the inversion stops as soon as it has settled.
double bbd_prob_entry(const ProbRequest& req, const BBDRates& rates, SolverStats* stats = nullptr);
double dbd_prob_entry(const ProbRequest& req, const DBDRates& rates, SolverStats* stats = nullptr);

/// Rates of the reflected process (a0 - X1, B - X2).
BBDRates reflect(const DBDRates& rates, int a0, int B);

/// Grows B by factors of 1.5 (at most 8 times) until the mass in column B
/// is at most `tail_threshold`. A B that no event can cross (no type-2
/// births out of column B) is returned as is. Throws SolverError at the cap.
ProbRequest auto_truncate(ProbRequest req, const BBDRates& rates, double tail_threshold = 1e-6);
ProbRequest auto_truncate(ProbRequest req, const DBDRates& rates, double tail_threshold = 1e-6);

}  // namespace multibd
