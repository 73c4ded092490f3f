#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace multibd {

using Complex = std::complex<double>;

/// Continued fraction x1 / (y1 + x2 / (y2 + x3 / (y3 + ...))), terms indexed from 1.
struct CfTerms {
  std::function<Complex(int)> x;
  std::function<Complex(int)> y;
};

struct CfSettings {
  double tol = 1e-12;      // relative, scaled by the Craviotto factor
  int max_depth = 10000;   // iteration cap
  double tiny = 1e-16;     // substitute for a zero Lentz ratio
};

struct CfResult {
  Complex value{};
  int iterations = 0;
  bool converged = false;
  /// Last relative update times |1/B_n| / |Im(1/B_n)|, or the bare relative
  /// update when 1/B_n is real.
  double residual = std::numeric_limits<double>::infinity();
};

namespace detail {
[[noreturn]] void throw_non_finite_term(const char* which, int k, Complex v);
inline bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
}  // namespace detail

/// Modified Lentz evaluation.
///
/// The leading numerator x1 is pulled out and the remainder
/// y1 + x2/(y2 + ...) is run through the Lentz recursions, so the ratio
/// C_n tracked here equals Y_n / Y_{n-1} = 1/B_n of the full fraction and
/// provides the Craviotto error factor directly. A zero partial numerator
/// terminates the fraction exactly. Reaching max_depth is reported through
/// `converged`, not thrown; non-finite terms throw.
template <class XGen, class YGen>
CfResult lentz_eval(XGen&& x, YGen&& y, const CfSettings& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("continued fraction tolerance must be > 0");
  if (cfg.max_depth < 1) throw std::invalid_argument("continued fraction max_depth must be >= 1");

  const Complex x1 = x(1);
  const Complex y1 = y(1);
  if (!detail::finite(x1)) detail::throw_non_finite_term("x", 1, x1);
  if (!detail::finite(y1)) detail::throw_non_finite_term("y", 1, y1);

  CfResult res;
  if (x1 == Complex{}) {
    res.value = 0.0;
    res.iterations = 1;
    res.converged = true;
    res.residual = 0.0;
    return res;
  }

  const Complex tiny{cfg.tiny, 0.0};
  Complex f = (y1 == Complex{}) ? tiny : y1;
  Complex c = f;
  Complex d = 0.0;
  res.value = x1 / f;
  res.iterations = 1;

  for (int n = 2; n <= cfg.max_depth; ++n) {
    const Complex xn = x(n);
    const Complex yn = y(n);
    if (!detail::finite(xn)) detail::throw_non_finite_term("x", n, xn);
    if (!detail::finite(yn)) detail::throw_non_finite_term("y", n, yn);
    res.iterations = n;
    if (xn == Complex{}) {
      res.converged = true;
      res.residual = 0.0;
      return res;
    }
    d = yn + xn * d;
    if (d == Complex{}) d = tiny;
    c = yn + xn / c;
    if (c == Complex{}) c = tiny;
    d = 1.0 / d;
    f *= c * d;

    const Complex next = x1 / f;
    const double rel = std::abs(next - res.value) / std::abs(next);
    const double im = std::abs(c.imag());
    res.residual = im > 0.0 ? std::abs(c) / im * rel : rel;
    res.value = next;
    if (res.residual <= cfg.tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

CfResult lentz_eval(const CfTerms& terms, double tol = 1e-12, int max_depth = 10000);

/// Denominators Y_0..Y_n of the convergents, Y_k = y_k Y_{k-1} + x_k Y_{k-2},
/// Y_0 = 1, Y_{-1} = 0. Stored as mantissa * 2^exponent; rescaling is by
/// powers of two, so ratios are unaffected by it.
class ConvergentDenominators {
 public:
  int size() const { return static_cast<int>(mantissa_.size()); }
  Complex mantissa(int k) const { return mantissa_.at(k); }
  int exponent(int k) const { return exponent_.at(k); }
  /// Y_k itself; may overflow where the scaled form does not.
  Complex value(int k) const;
  /// Y_i / Y_j.
  Complex ratio(int i, int j) const;

  void push(Complex mantissa, int exponent) {
    mantissa_.push_back(mantissa);
    exponent_.push_back(exponent);
  }
  void reserve(int n) {
    mantissa_.reserve(n);
    exponent_.reserve(n);
  }

 private:
  std::vector<Complex> mantissa_;
  std::vector<int> exponent_;
};

namespace detail {
constexpr int kRescaleBits = 256;
Complex scale2(Complex z, int e);
}  // namespace detail

template <class XGen, class YGen>
ConvergentDenominators denominators(XGen&& x, YGen&& y, int n) {
  if (n < 0) throw std::invalid_argument("denominators: n must be >= 0");
  static const double hi = std::ldexp(1.0, detail::kRescaleBits);
  static const double lo = std::ldexp(1.0, -detail::kRescaleBits);

  ConvergentDenominators out;
  out.reserve(n + 1);
  Complex prev2 = 0.0;  // Y_{k-2}
  Complex prev1 = 1.0;  // Y_{k-1}
  int scale = 0;        // shared exponent of prev1 and prev2
  out.push(prev1, 0);
  for (int k = 1; k <= n; ++k) {
    const Complex cur = y(k) * prev1 + x(k) * prev2;
    prev2 = prev1;
    prev1 = cur;
    const double mag = std::max(std::abs(prev1), std::abs(prev2));
    if (mag > hi) {
      prev1 = detail::scale2(prev1, -detail::kRescaleBits);
      prev2 = detail::scale2(prev2, -detail::kRescaleBits);
      scale += detail::kRescaleBits;
    } else if (mag > 0.0 && mag < lo) {
      prev1 = detail::scale2(prev1, detail::kRescaleBits);
      prev2 = detail::scale2(prev2, detail::kRescaleBits);
      scale -= detail::kRescaleBits;
    }
    out.push(prev1, scale);
  }
  return out;
}

ConvergentDenominators denominators(const CfTerms& terms, int n);

/// Rates along one row a of a birth/birth-death process for b = 0..B.
/// The caller applies truncation (lambda2[B] = 0) before building the table.
struct RowRates {
  std::vector<double> lambda1, lambda2, mu2, gamma;

  int B() const { return static_cast<int>(lambda2.size()) - 1; }
  double total(int b) const { return lambda1[b] + lambda2[b] + mu2[b] + gamma[b]; }
};

/// The shifted Laplace-domain quantities phi^(m)_b(s) of one row: the
/// response in column b to a unit source in column m of
///   (s + q_b) f_b - lambda2_{b-1} f_{b-1} - mu2_{b+1} f_{b+1} = source_b.
/// One pass of convergent denominators and one Lentz tail per column are
/// shared by every (m, b) pair.
class PhiTable {
 public:
  PhiTable() = default;
  /// `with_denominators = false` skips the scaled denominators, which only
  /// operator() needs.
  PhiTable(Complex s, const RowRates& row, const CfSettings& cfg, bool with_denominators = true);

  /// Rebuilds for another (s, row), reusing storage. The row must outlive
  /// the table.
  void rebuild(Complex s, const RowRates& row, const CfSettings& cfg,
               bool with_denominators = true);

  int B() const { return B_; }

  /// phi^(m)_b in the reparametrized closed form: a product of mu2 (b <= m)
  /// or lambda2 (b >= m) rates times a ratio of convergent denominators over
  /// the continued-fraction tail.
  Complex operator()(int m, int b) const;

  /// out_b = sum_m source_m phi^(m)_b for all b, in O(B): the products in
  /// phi telescope, so the double sum reduces to one forward and one
  /// backward sweep.
  void apply(std::span<const Complex> source, std::span<Complex> out) const;

  bool converged() const { return first_unconverged_ < 0; }
  /// Column m whose tail failed to converge first, or -1.
  int first_unconverged() const { return first_unconverged_; }
  int max_tail_iterations() const { return max_tail_iterations_; }

 private:
  Complex x_term(int j) const;
  Complex y_term(int j) const;

  const RowRates* row_ = nullptr;
  Complex s_;
  int B_ = -1;
  bool has_denominators_ = false;
  ConvergentDenominators Y_;
  std::vector<Complex> ratio_;  // ratio_[k] = Y_k / Y_{k-1}, k = 1..B+1
  std::vector<Complex> inv_ratio_;
  std::vector<Complex> tail_;   // tail_[j] = x_j / (y_j + x_{j+1} / ...), j = 2..B+2
  std::vector<Complex> diag_;   // diag_[m] = phi^(m)_m
  int first_unconverged_ = -1;
  int max_tail_iterations_ = 0;
};

struct PhiResult {
  Complex value{};
  bool converged = false;
};

/// phi^(m)_b(s) for a single (m, b). Builds a PhiTable; use the table
/// directly when many pairs of the same row are needed.
PhiResult phi(Complex s, const RowRates& row, int m, int b, const CfSettings& cfg = {});

}  // namespace multibd
