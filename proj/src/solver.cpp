#include "multibd/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "multibd/laplace.hpp"

namespace multibd {

TransitionMatrix::TransitionMatrix(int a_min, int a_max, int B)
    : a_min_(a_min), a_max_(a_max), B_(B) {
  if (a_max < a_min || B < 0) throw std::invalid_argument("TransitionMatrix: empty range");
  values_.assign(static_cast<std::size_t>(rows()) * (B + 1), 0.0);
}

double TransitionMatrix::operator()(int a, int b) const {
  if (!contains(a, b)) return 0.0;
  return std::clamp(values_[index(a, b)], 0.0, 1.0);
}

double TransitionMatrix::raw(int a, int b) const {
  if (!contains(a, b)) return 0.0;
  return values_[index(a, b)];
}

void TransitionMatrix::set(int a, int b, double value) {
  if (!contains(a, b)) throw std::out_of_range("TransitionMatrix::set outside range");
  values_[index(a, b)] = value;
}

double TransitionMatrix::tail_mass() const {
  double sum = 0.0;
  for (int a = a_min_; a <= a_max_; ++a) sum += raw(a, B_);
  return sum;
}

double TransitionMatrix::total_mass() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum;
}

double TransitionMatrix::l1_distance(const TransitionMatrix& other) const {
  const int lo = std::min(a_min_, other.a_min_);
  const int hi = std::max(a_max_, other.a_max_);
  const int bmax = std::max(B_, other.B_);
  double sum = 0.0;
  for (int a = lo; a <= hi; ++a) {
    for (int b = 0; b <= bmax; ++b) sum += std::abs(raw(a, b) - other.raw(a, b));
  }
  return sum;
}

namespace {

void validate_common(const ProbRequest& req) {
  if (!(req.t > 0.0) || !std::isfinite(req.t)) throw std::invalid_argument("t must be > 0");
  if (req.a0 < 0) throw std::invalid_argument("a0 must be >= 0");
  if (req.B < 0) throw std::invalid_argument("B must be >= 0");
  if (req.b0 < 0 || req.b0 > req.B) throw std::invalid_argument("b0 must lie in 0..B");
  if (!(req.cf_tol > 0.0)) throw std::invalid_argument("cf_tol must be > 0");
  if (req.cf_max_depth < 1) throw std::invalid_argument("cf_max_depth must be >= 1");
  if (req.levin_order < 0) throw std::invalid_argument("levin_order must be >= 0");
}

// Builds the row table at one grid point, raising max_depth tenfold up to
// twice before giving up.
void build_table(PhiTable& table, Complex s, const RowRates& row, const ProbRequest& req, int a) {
  CfSettings cfg;
  cfg.tol = req.cf_tol;
  cfg.max_depth = req.cf_max_depth;
  for (int attempt = 0;; ++attempt) {
    table.rebuild(s, row, cfg, req.direct_assembly);
    if (table.converged()) return;
    if (attempt == 2) {
      std::ostringstream msg;
      msg << "continued fraction did not converge at (a=" << a
          << ", b=" << table.first_unconverged() << ", s=" << s << ") with max_depth "
          << cfg.max_depth;
      throw SolverError(msg.str());
    }
    cfg.max_depth *= 10;
  }
}

int resolve_k_max(const ProbRequest& req, const std::vector<RowRates>& rows) {
  if (req.k_max > 0) return req.k_max;
  double q = 0.0;
  for (const RowRates& row : rows) {
    for (int b = 0; b <= row.B(); ++b) q = std::max(q, row.total(b));
  }
  const double k = 2.0 * req.t * q / std::numbers::pi + 200.0;
  return static_cast<int>(std::clamp(k, 400.0, 1e6));
}

struct Target {
  int row;  // offset from a0
  int b;
};

struct Assembled {
  VectorInversion inv;
  int max_cf_iterations = 0;
  int k_max = 0;
};

// Inverts every cell of rows a0..A, or only `target` when given. The rows
// are still built in full at every grid point.
Assembled assemble_and_invert(const ProbRequest& req, const BBDRates& rates,
                              std::optional<Target> target) {
  const int B = req.B;
  const int nrows = req.A - req.a0 + 1;
  const std::size_t width = static_cast<std::size_t>(B) + 1;

  std::vector<RowRates> rows(nrows);
  for (int r = 0; r < nrows; ++r) {
    const int a = req.a0 + r;
    RowRates& row = rows[r];
    row.lambda1.resize(width);
    row.lambda2.resize(width);
    row.mu2.resize(width);
    row.gamma.resize(width);
    for (int b = 0; b <= B; ++b) {
      row.lambda1[b] = rates.lambda1(a, b);
      row.lambda2[b] = b < B ? rates.lambda2(a, b) : 0.0;  // truncated at B
      row.mu2[b] = rates.mu2(a, b);
      row.gamma[b] = rates.gamma(a, b);
    }
  }

  LaplaceGrid grid = make_grid(req.t, req.inv_tol, resolve_k_max(req, rows));
  grid.early_stop = req.early_stop;
  std::vector<int> cf_iterations(grid.k_max + 1, 0);

  auto transform = [&](int k, Complex s, std::span<Complex> out) {
    std::vector<Complex> source(width), current(width);
    std::vector<Complex> previous;
    PhiTable table;
    int iters = 0;
    for (int r = 0; r < nrows; ++r) {
      const RowRates& row = rows[r];
      if (r == 0) {
        std::fill(source.begin(), source.end(), Complex{});
        source[req.b0] = 1.0;
      } else {
        const RowRates& below = rows[r - 1];
        for (int m = 0; m <= B; ++m) {
          Complex v = below.lambda1[m] * previous[m];
          if (m < B) v += below.gamma[m + 1] * previous[m + 1];
          source[m] = v;
        }
      }
      build_table(table, s, row, req, req.a0 + r);
      iters = std::max(iters, table.max_tail_iterations());
      if (req.direct_assembly) {
        for (int b = 0; b <= B; ++b) {
          Complex acc = 0.0;
          for (int m = 0; m <= B; ++m) {
            if (source[m] != Complex{}) acc += source[m] * table(m, b);
          }
          current[b] = acc;
        }
      } else {
        table.apply(source, current);
      }
      if (!target) std::copy(current.begin(), current.end(), out.begin() + r * width);
      previous.swap(current);
      current.resize(width);
    }
    if (target) out[0] = previous[target->b];
    cf_iterations[k] = iters;
  };

  Assembled result;
  result.k_max = grid.k_max;
  result.inv = invert_vector(transform, target ? 1 : static_cast<std::size_t>(nrows) * width,
                             grid, req.levin_order, req.threads);
  result.max_cf_iterations = *std::max_element(cf_iterations.begin(), cf_iterations.end());
  return result;
}

void fill_stats(SolverStats& stats, const Assembled& run,
                std::chrono::steady_clock::time_point start) {
  stats.grid_terms = run.inv.terms;
  stats.inversion_converged = run.inv.converged;
  stats.last_change = run.inv.last_change;
  stats.imag_residual = run.inv.imag_residual;
  stats.max_cf_iterations = run.max_cf_iterations;
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_bbd(const ProbRequest& req) {
  validate_common(req);
  if (req.A < req.a0) throw std::invalid_argument("birth/birth-death request needs A >= a0");
}

void check_dbd(const ProbRequest& req) {
  validate_common(req);
  if (req.A > req.a0 || req.A < 0) {
    throw std::invalid_argument("death/birth-death request needs 0 <= A <= a0");
  }
}

ProbRequest reflected_request(const ProbRequest& req) {
  ProbRequest flipped = req;
  flipped.a0 = 0;
  flipped.b0 = req.B - req.b0;
  flipped.A = req.a0 - req.A;
  flipped.B = req.B;
  return flipped;
}

}  // namespace

TransitionMatrix bbd_prob(const ProbRequest& req, const BBDRates& rates) {
  check_bbd(req);
  const auto start = std::chrono::steady_clock::now();
  const int B = req.B;
  const std::size_t width = static_cast<std::size_t>(B) + 1;
  const Assembled run = assemble_and_invert(req, rates, std::nullopt);

  TransitionMatrix out(req.a0, req.A, B);
  double worst = 0.0;
  for (int r = 0; r < out.rows(); ++r) {
    for (int b = 0; b <= B; ++b) {
      const double v = run.inv.values[r * width + b];
      out.set(req.a0 + r, b, v);
      worst = std::max(worst, std::max(-v, v - 1.0));
    }
  }
  fill_stats(out.stats, run, start);

  if (!run.inv.converged) {
    std::ostringstream msg;
    msg << "inversion did not stabilize within " << run.k_max + 1
        << " grid points (last change " << run.inv.last_change << ")";
    out.warnings.push_back(msg.str());
  }
  if (worst > kEntrySlack) {
    std::ostringstream msg;
    msg << "entry outside [0,1] by " << worst;
    out.warnings.push_back(msg.str());
  }
  if (out.total_mass() > 1.0 + 1e-6) {
    std::ostringstream msg;
    msg << "total mass " << out.total_mass() << " exceeds 1";
    out.warnings.push_back(msg.str());
  }
  return out;
}

double bbd_prob_entry(const ProbRequest& req, const BBDRates& rates, SolverStats* stats) {
  check_bbd(req);
  if (req.b_target < 0 || req.b_target > req.B) throw std::invalid_argument("b_target must lie in 0..B");
  const auto start = std::chrono::steady_clock::now();
  const Assembled run = assemble_and_invert(req, rates, Target{req.A - req.a0, req.b_target});
  if (stats) fill_stats(*stats, run, start);
  return run.inv.values[0];
}

BBDRates reflect(const DBDRates& rates, int a0, int B) {
  // The pointer keeps the closures valid independent of the caller's object.
  auto src = std::make_shared<const DBDRates>(rates);
  return BBDRates([src, a0, B](int y1, int y2) { return src->mu1(a0 - y1, B - y2); },
                  [src, a0, B](int y1, int y2) { return src->mu2(a0 - y1, B - y2); },
                  [src, a0, B](int y1, int y2) { return src->lambda2(a0 - y1, B - y2); },
                  [src, a0, B](int y1, int y2) { return src->gamma(a0 - y1, B - y2); });
}

TransitionMatrix dbd_prob(const ProbRequest& req, const DBDRates& rates) {
  check_dbd(req);
  const TransitionMatrix y = bbd_prob(reflected_request(req), reflect(rates, req.a0, req.B));

  TransitionMatrix out(req.A, req.a0, req.B);
  for (int a = req.A; a <= req.a0; ++a) {
    for (int b = 0; b <= req.B; ++b) out.set(a, b, y.raw(req.a0 - a, req.B - b));
  }
  out.warnings = y.warnings;
  out.stats = y.stats;
  return out;
}

double dbd_prob_entry(const ProbRequest& req, const DBDRates& rates, SolverStats* stats) {
  check_dbd(req);
  if (req.b_target < 0 || req.b_target > req.B) throw std::invalid_argument("b_target must lie in 0..B");
  ProbRequest flipped = reflected_request(req);
  flipped.b_target = req.B - req.b_target;
  return bbd_prob_entry(flipped, reflect(rates, req.a0, req.B), stats);
}

namespace {

// True when no event can push the type-2 count above B from the rows in
// play, so truncating there is exact whatever mass sits in column B.
bool closed_above(const ProbRequest& req, const BBDRates& rates) {
  for (int a = req.a0; a <= req.A; ++a) {
    if (rates.lambda2(a, req.B) > 0.0) return false;
  }
  return true;
}

bool closed_above(const ProbRequest& req, const DBDRates& rates) {
  for (int a = req.A; a <= req.a0; ++a) {
    if (rates.lambda2(a, req.B) > 0.0 || rates.gamma(a, req.B) > 0.0) return false;
  }
  return true;
}

template <class Rates, class Solve>
ProbRequest grow_until_small_tail(ProbRequest req, const Rates& rates, double threshold,
                                  Solve&& solve) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("tail threshold must lie in (0, 1)");
  req.B = std::max(req.B, req.b0);
  constexpr int kMaxGrowth = 8;
  for (int step = 0; step <= kMaxGrowth; ++step) {
    if (closed_above(req, rates)) return req;
    const TransitionMatrix m = solve(req, rates);
    if (std::abs(m.tail_mass()) <= threshold) return req;
    if (step == kMaxGrowth) break;
    req.B = std::max(req.B + 1, static_cast<int>(std::ceil(1.5 * req.B)));
  }
  std::ostringstream msg;
  msg << "tail mass still above " << threshold << " at B = " << req.B
      << "; set B manually";
  throw SolverError(msg.str());
}

}  // namespace

ProbRequest auto_truncate(ProbRequest req, const BBDRates& rates, double tail_threshold) {
  return grow_until_small_tail(req, rates, tail_threshold,
                               [](const ProbRequest& r, const BBDRates& x) { return bbd_prob(r, x); });
}

ProbRequest auto_truncate(ProbRequest req, const DBDRates& rates, double tail_threshold) {
  return grow_until_small_tail(req, rates, tail_threshold,
                               [](const ProbRequest& r, const DBDRates& x) { return dbd_prob(r, x); });
}

}  // namespace multibd
