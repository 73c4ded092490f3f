#include "multibd/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace multibd {

namespace {

// Levin t-transform weights for the window n..n+k (beta = 1):
// w_j = (-1)^j C(k, j) ((n + j + 1) / (n + k + 1))^(k-1).
std::vector<double> levin_weights(int n, int k) {
  std::vector<double> w(k + 1);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) binom = binom * (k - j + 1) / j;
    const double ratio = double(n + j + 1) / double(n + k + 1);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    w[j] = sign * binom * std::pow(ratio, k - 1);
  }
  return w;
}

// Window values are read through `at(j)` -> (partial sum, term) for j = 0..k.
template <class At>
bool levin_window(const std::vector<double>& w, At&& at, double& out) {
  const int k = static_cast<int>(w.size()) - 1;
  double num = 0.0, den = 0.0;
  double prev_term = 0.0;
  for (int j = 0; j <= k; ++j) {
    const auto [sum, term] = at(j);
    if (term == 0.0 || !std::isfinite(term)) return false;
    if (j > 0 && !(prev_term * term < 0.0)) return false;
    prev_term = term;
    num += w[j] * sum / term;
    den += w[j] / term;
  }
  if (!std::isfinite(num) || !std::isfinite(den) || den == 0.0) return false;
  const double v = num / den;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

// Series state for n components sharing a window length of order+1.
class SeriesBank {
 public:
  SeriesBank(std::size_t n, int order)
      : n_(n), order_(order), window_(order + 1), sums_(window_ * n, 0.0),
        terms_(window_ * n, 0.0), current_(n, 0.0), previous_(n, 0.0), estimate_(n, 0.0) {}

  // Appends term index `count_` for every component.
  void push(std::span<const double> terms) {
    const int slot = count_ % window_;
    for (std::size_t i = 0; i < n_; ++i) {
      previous_[i] = current_[i];
      current_[i] += terms[i];
      sums_[slot * n_ + i] = current_[i];
      terms_[slot * n_ + i] = terms[i];
    }
    ++count_;
  }

  // Refreshes estimates; returns the largest change from the previous ones.
  double refresh() {
    const bool can_accelerate = order_ > 0 && count_ >= order_ + 2;
    std::vector<double> w;
    int first = 0;
    if (can_accelerate) {
      first = count_ - 1 - order_;
      w = levin_weights(first, order_);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double est = count_ >= 2 ? 0.5 * (current_[i] + previous_[i]) : current_[i];
      if (can_accelerate) {
        double lv;
        const bool ok = levin_window(w,
                                     [&](int j) {
                                       const int slot = (first + j) % window_;
                                       return std::pair{sums_[slot * n_ + i], terms_[slot * n_ + i]};
                                     },
                                     lv);
        if (ok) est = lv;
      } else if (order_ == 0) {
        est = current_[i];
      }
      change = std::max(change, std::abs(est - estimate_[i]));
      estimate_[i] = est;
    }
    return change;
  }

  const std::vector<double>& estimates() const { return estimate_; }
  int count() const { return count_; }

 private:
  std::size_t n_;
  int order_;
  int window_;
  int count_ = 0;
  std::vector<double> sums_, terms_;
  std::vector<double> current_, previous_, estimate_;
};

}  // namespace

Complex LaplaceGrid::point(int k) const {
  return {H / (2.0 * t), k * std::numbers::pi / t};
}

std::vector<Complex> LaplaceGrid::points() const {
  std::vector<Complex> pts;
  pts.reserve(k_max + 1);
  for (int k = 0; k <= k_max; ++k) pts.push_back(point(k));
  return pts;
}

double LaplaceGrid::weight(int k) const {
  const double c = std::exp(H / 2.0) / t;
  if (k == 0) return 0.5 * c;
  return (k % 2 == 0) ? c : -c;
}

double LaplaceGrid::error_bound() const { return 1.0 / std::expm1(H); }

LaplaceGrid make_grid(double t, double tol, int k_max) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("inversion time t must be > 0");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("inversion tolerance must lie in (0, 1)");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  LaplaceGrid g;
  g.t = t;
  g.tol = tol;
  g.k_max = k_max;
  g.H = std::ceil(std::log(1.0 / tol + 1.0) * 10.0 - 1e-9) / 10.0;
  return g;
}

AcceleratorState::AcceleratorState(int order) : order_(order) {
  if (order < 0) throw std::invalid_argument("Levin order must be >= 0");
  sums_.assign(order + 1, 0.0);
  terms_.assign(order + 1, 0.0);
}

void AcceleratorState::reset() {
  count_ = 0;
  sum_ = 0.0;
  std::fill(sums_.begin(), sums_.end(), 0.0);
  std::fill(terms_.begin(), terms_.end(), 0.0);
}

void AcceleratorState::push(double term) {
  sum_ += term;
  const int slot = count_ % (order_ + 1);
  sums_[slot] = sum_;
  terms_[slot] = term;
  ++count_;
}

AcceleratorState::Estimate AcceleratorState::estimate() const {
  if (order_ == 0) return {sum_, false};
  const double fallback =
      count_ >= 2 ? 0.5 * (sum_ + sums_[(count_ - 2) % (order_ + 1)]) : sum_;
  if (count_ < order_ + 2) return {fallback, false};
  const int first = count_ - 1 - order_;
  const auto w = levin_weights(first, order_);
  double v;
  const bool ok = levin_window(
      w,
      [&](int j) {
        const int slot = (first + j) % (order_ + 1);
        return std::pair{sums_[slot], terms_[slot]};
      },
      v);
  if (!ok) return {fallback, false};
  return {v, true};
}

double levin_accelerate(std::span<const double> terms, int order) {
  if (order < 0) throw std::invalid_argument("Levin order must be >= 0");
  if (static_cast<int>(terms.size()) < order + 2) {
    throw std::invalid_argument("levin_accelerate needs at least order+2 terms");
  }
  AcceleratorState acc(order);
  for (double a : terms) acc.push(a);
  return acc.estimate().value;
}

InversionResult invert(const std::function<Complex(Complex)>& F, const LaplaceGrid& grid,
                       const AcceleratorState& accel) {
  VectorTransform vf = [&F](int, Complex s, std::span<Complex> out) { out[0] = F(s); };
  const VectorInversion r = invert_vector(vf, 1, grid, accel.order(), 1);
  InversionResult out;
  out.value = r.values[0];
  out.terms = r.terms;
  out.converged = r.converged;
  out.imag_residual = r.imag_residual;
  return out;
}

VectorInversion invert_vector(const VectorTransform& F, std::size_t n, const LaplaceGrid& grid,
                              int levin_order, int threads) {
  if (levin_order < 0) throw std::invalid_argument("Levin order must be >= 0");
  threads = std::max(1, threads);
  const int batch = threads;

  SeriesBank bank(n, levin_order);
  std::vector<std::vector<Complex>> values(batch, std::vector<Complex>(n));
  std::vector<double> terms(n);
  VectorInversion out;
  const int min_terms = std::max(levin_order + 2, 3);

  auto check_finite = [&](int k, const std::vector<Complex>& v) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
        std::ostringstream msg;
        msg << "transform is not finite at s = " << grid.point(k) << " (component " << i << ")";
        throw std::domain_error(msg.str());
      }
    }
  };

  for (int k0 = 0; k0 <= grid.k_max; k0 += batch) {
    const int count = std::min(batch, grid.k_max + 1 - k0);
    if (count == 1 || threads == 1) {
      for (int j = 0; j < count; ++j) F(k0 + j, grid.point(k0 + j), values[j]);
    } else {
      std::vector<std::jthread> workers;
      workers.reserve(count);
      std::vector<std::exception_ptr> errors(count);
      for (int j = 0; j < count; ++j) {
        workers.emplace_back([&, j] {
          try {
            F(k0 + j, grid.point(k0 + j), values[j]);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      }
      workers.clear();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    for (int j = 0; j < count; ++j) {
      const int k = k0 + j;
      check_finite(k, values[j]);
      const double w = grid.weight(k);
      for (std::size_t i = 0; i < n; ++i) terms[i] = w * values[j][i].real();
      if (k == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          out.imag_residual = std::max(out.imag_residual, std::abs(values[j][i].imag()));
        }
      }
      bank.push(terms);
      const double change = bank.refresh();
      out.terms = k + 1;
      out.last_change = change;
      if (grid.early_stop && bank.count() >= min_terms && change <= grid.tol) {
        out.converged = true;
        out.values = bank.estimates();
        return out;
      }
    }
  }
  out.values = bank.estimates();
  return out;
}

}  // namespace multibd
