#include "multibd/contfrac.hpp"

#include <algorithm>
#include <sstream>

namespace multibd {

namespace detail {

void throw_non_finite_term(const char* which, int k, Complex v) {
  std::ostringstream msg;
  msg << "continued fraction term " << which << "(" << k << ") = " << v << " is not finite";
  throw std::domain_error(msg.str());
}

Complex scale2(Complex z, int e) { return {std::ldexp(z.real(), e), std::ldexp(z.imag(), e)}; }

}  // namespace detail

CfResult lentz_eval(const CfTerms& terms, double tol, int max_depth) {
  CfSettings cfg;
  cfg.tol = tol;
  cfg.max_depth = max_depth;
  return lentz_eval(terms.x, terms.y, cfg);
}

Complex ConvergentDenominators::value(int k) const {
  return detail::scale2(mantissa_.at(k), exponent_.at(k));
}

Complex ConvergentDenominators::ratio(int i, int j) const {
  return detail::scale2(mantissa_.at(i) / mantissa_.at(j), exponent_.at(i) - exponent_.at(j));
}

ConvergentDenominators denominators(const CfTerms& terms, int n) {
  return denominators(terms.x, terms.y, n);
}

Complex PhiTable::x_term(int j) const {
  if (j == 1) return 1.0;
  if (j > B_ + 1) return 0.0;
  return -row_->lambda2[j - 2] * row_->mu2[j - 1];
}

Complex PhiTable::y_term(int j) const {
  if (j > B_ + 1) return s_;
  return s_ + row_->total(j - 1);
}

PhiTable::PhiTable(Complex s, const RowRates& row, const CfSettings& cfg,
                   bool with_denominators) {
  rebuild(s, row, cfg, with_denominators);
}

void PhiTable::rebuild(Complex s, const RowRates& row, const CfSettings& cfg,
                       bool with_denominators) {
  row_ = &row;
  s_ = s;
  B_ = row.B();
  if (B_ < 0) throw std::invalid_argument("PhiTable: empty row");
  const int B = B_;
  first_unconverged_ = -1;
  max_tail_iterations_ = 0;

  has_denominators_ = with_denominators;
  if (with_denominators) {
    Y_ = denominators([this](int j) { return x_term(j); }, [this](int j) { return y_term(j); },
                      B + 1);
  }

  // Y_k / Y_{k-1} = y_k + x_k / (Y_{k-1} / Y_{k-2}), with Y_1 / Y_0 = y_1.
  ratio_.resize(B + 2);
  inv_ratio_.resize(B + 2);
  ratio_[0] = inv_ratio_[0] = 0.0;
  ratio_[1] = y_term(1);
  inv_ratio_[1] = 1.0 / ratio_[1];
  for (int k = 2; k <= B + 1; ++k) {
    ratio_[k] = y_term(k) + x_term(k) * inv_ratio_[k - 1];
    inv_ratio_[k] = 1.0 / ratio_[k];
  }

  tail_.assign(B + 3, Complex{});
  for (int j = 2; j <= B + 1; ++j) {
    const CfResult r = lentz_eval([this, j](int k) { return x_term(j + k - 1); },
                                  [this, j](int k) { return y_term(j + k - 1); }, cfg);
    tail_[j] = r.value;
    max_tail_iterations_ = std::max(max_tail_iterations_, r.iterations);
    if (!r.converged && first_unconverged_ < 0) first_unconverged_ = j - 2;
  }

  diag_.resize(B + 1);
  for (int m = 0; m <= B; ++m) diag_[m] = 1.0 / (ratio_[m + 1] + tail_[m + 2]);
}

Complex PhiTable::operator()(int m, int b) const {
  if (m < 0 || m > B_ || b < 0 || b > B_) throw std::out_of_range("PhiTable: index outside 0..B");
  if (!has_denominators_) throw std::logic_error("PhiTable built without denominators");
  if (b <= m) {
    double prefactor = 1.0;
    for (int i = b + 1; i <= m; ++i) prefactor *= row_->mu2[i];
    if (prefactor == 0.0) return 0.0;
    return prefactor / (Y_.ratio(m + 1, b) + Y_.ratio(m, b) * tail_[m + 2]);
  }
  double prefactor = 1.0;
  for (int i = m; i < b; ++i) prefactor *= row_->lambda2[i];
  if (prefactor == 0.0) return 0.0;
  return prefactor / (Y_.ratio(b + 1, m) + Y_.ratio(b, m) * tail_[b + 2]);
}

void PhiTable::apply(std::span<const Complex> source, std::span<Complex> out) const {
  const int B = B_;
  if (static_cast<int>(source.size()) != B + 1 || static_cast<int>(out.size()) != B + 1) {
    throw std::invalid_argument("PhiTable::apply: size mismatch");
  }
  const auto& lambda2 = row_->lambda2;
  const auto& mu2 = row_->mu2;

  // lower[b] = sum_{m<=b} source_m prod_{i=m}^{b-1} lambda2_i / R_{i+1}
  Complex lower = 0.0;
  for (int b = 0; b <= B; ++b) {
    if (b > 0) lower *= lambda2[b - 1] * inv_ratio_[b];
    lower += source[b];
    out[b] = diag_[b] * lower;
  }
  // upper[b] = sum_{m>b} source_m phi^(m)_m prod_{i=b+1}^{m} mu2_i / R_i
  Complex upper = 0.0;
  for (int b = B - 1; b >= 0; --b) {
    upper = (mu2[b + 1] * inv_ratio_[b + 1]) * (source[b + 1] * diag_[b + 1] + upper);
    out[b] += upper;
  }
}

PhiResult phi(Complex s, const RowRates& row, int m, int b, const CfSettings& cfg) {
  const PhiTable table(s, row, cfg);
  return {table(m, b), table.converged()};
}

}  // namespace multibd
