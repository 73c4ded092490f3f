#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace multibd {

using Complex = std::complex<double>;

/// Evaluation points s_k = (H + 2 k pi i) / (2t), k = 0..k_max, of the
/// alternating Riemann-sum inversion
///   f(t) ~ e^{H/2}/(2t) Re F(s_0) + e^{H/2}/t sum_{k>=1} (-1)^k Re F(s_k),
/// whose discretization error is bounded by 1/(e^H - 1).
struct LaplaceGrid {
  double t = 1.0;
  double H = 27.7;
  double tol = 1e-12;  // requested accuracy; also the early-stop tolerance
  int k_max = 400;
  /// When false every grid point up to k_max is summed.
  bool early_stop = true;

  Complex point(int k) const;
  std::vector<Complex> points() const;
  /// Weight of Re F(s_k) in the sum, including the alternating sign.
  double weight(int k) const;
  double error_bound() const;
};

/// H = ln(1/tol + 1) rounded up to one decimal.
LaplaceGrid make_grid(double t, double tol = 1e-12, int k_max = 400);

/// Sliding-window Levin t-transform over a series fed one term at a time.
///
/// The transform with remainder estimates omega_n = a_n is applied to the
/// last order+1 partial sums. It is used only while the terms in that window
/// strictly alternate in sign; otherwise (or when a remainder estimate
/// vanishes) the estimate falls back to the mean of the last two partial
/// sums.
class AcceleratorState {
 public:
  explicit AcceleratorState(int order = 8);

  int order() const { return order_; }
  int terms() const { return count_; }
  double partial_sum() const { return sum_; }
  void reset();

  void push(double term);

  struct Estimate {
    double value = 0.0;
    bool accelerated = false;
  };
  Estimate estimate() const;

 private:
  int order_;
  int count_ = 0;
  double sum_ = 0.0;
  std::vector<double> sums_;   // ring of partial sums
  std::vector<double> terms_;  // ring of terms
};

/// Levin t-transform estimate of sum(terms) from its last order+1 partial
/// sums. Needs at least order+2 terms; degenerate input returns the plain
/// partial sum.
double levin_accelerate(std::span<const double> terms, int order);

struct InversionResult {
  double value = 0.0;
  int terms = 0;          // grid points consumed
  bool converged = false; // accelerated estimates stabilized before k_max
  double imag_residual = 0.0;  // |Im F(s_0)|, which should vanish
};

/// Inverts a scalar transform. Stops at the first k where two successive
/// estimates agree within grid.tol.
InversionResult invert(const std::function<Complex(Complex)>& F, const LaplaceGrid& grid,
                       const AcceleratorState& accel = AcceleratorState{});

/// Writes F(s_k) for a block of n transforms evaluated at grid point k.
using VectorTransform = std::function<void(int k, Complex s, std::span<Complex> out)>;

struct VectorInversion {
  std::vector<double> values;
  int terms = 0;
  bool converged = false;
  double imag_residual = 0.0;  // max over components of |Im F(s_0)|
  double last_change = 0.0;    // max change between the final two estimates
};

/// Inverts n transforms sharing one grid. Grid points are evaluated in
/// batches across `threads` workers; the series reduction always runs in
/// increasing k on one thread, so the result does not depend on `threads`.
/// Stops when every component's successive estimates agree within grid.tol.
VectorInversion invert_vector(const VectorTransform& F, std::size_t n, const LaplaceGrid& grid,
                              int levin_order = 8, int threads = 1);

}  // namespace multibd
