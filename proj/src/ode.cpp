#include "multibd/ode.hpp"

#include <stdexcept>

namespace multibd {

std::vector<std::vector<double>> integrate_rk4(const OdeRhs& rhs, std::vector<double> y0,
                                               std::span<const double> t_grid, int substeps) {
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw std::invalid_argument("t_grid must start at 0");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("t_grid must be strictly increasing");
  }
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  for (double v : y0) {
    if (v < 0.0) throw std::invalid_argument("initial state must be non-negative");
  }

  const std::size_t n = y0.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<std::vector<double>> out;
  out.reserve(t_grid.size());
  out.push_back(y0);

  std::vector<double> y = std::move(y0);
  for (std::size_t g = 1; g < t_grid.size(); ++g) {
    const double h = (t_grid[g] - t_grid[g - 1]) / substeps;
    double t = t_grid[g - 1];
    for (int step = 0; step < substeps; ++step) {
      rhs(t, y, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      rhs(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      rhs(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      rhs(t + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      t += h;
    }
    out.push_back(y);
  }
  return out;
}

std::vector<std::vector<double>> sir_ode(const SirParams& p, std::vector<double> initial,
                                         std::span<const double> t_grid) {
  if (!(p.alpha >= 0.0) || !(p.beta >= 0.0)) throw std::invalid_argument("SIR rates must be >= 0");
  if (initial.size() != 3) throw std::invalid_argument("SIR state is (S, I, R)");
  const double alpha = p.alpha, beta = p.beta;
  auto rhs = [alpha, beta](double, std::span<const double> y, std::span<double> dy) {
    const double infection = beta * y[0] * y[1];
    const double removal = alpha * y[1];
    dy[0] = -infection;
    dy[1] = infection - removal;
    dy[2] = removal;
  };
  return integrate_rk4(rhs, std::move(initial), t_grid);
}

std::vector<std::vector<double>> parasite_ode(const ParasiteParams& p,
                                              std::vector<double> initial,
                                              std::span<const double> t_grid) {
  validate(p);
  if (initial.size() != 2) throw std::invalid_argument("parasite state is (L, M)");
  auto rhs = [p](double, std::span<const double> y, std::span<double> dy) {
    const double larvae = y[0];
    dy[0] = -p.mu_l * larvae - p.eta * larvae * larvae - p.gamma * larvae;
    dy[1] = p.gamma * larvae - p.mu_m * y[1];
  };
  return integrate_rk4(rhs, std::move(initial), t_grid);
}

}  // namespace multibd
