#pragma once

#include <functional>
#include <span>
#include <vector>

#include "multibd/rates.hpp"

namespace multibd {

/// dy/dt = f(t, y), written into `dydt`.
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Classical fixed-step RK4. Each interval of `t_grid` is split into
/// `substeps` equal steps. Returns one state per grid time; the first is y0.
/// `t_grid` must start at 0 and be strictly increasing.
std::vector<std::vector<double>> integrate_rk4(const OdeRhs& rhs, std::vector<double> y0,
                                               std::span<const double> t_grid,
                                               int substeps = 100);

/// Deterministic SIR; state is (S, I, R).
std::vector<std::vector<double>> sir_ode(const SirParams& p, std::vector<double> initial,
                                         std::span<const double> t_grid);

/// Deterministic larvae/mature parasite dynamics; state is (L, M).
std::vector<std::vector<double>> parasite_ode(const ParasiteParams& p,
                                              std::vector<double> initial,
                                              std::span<const double> t_grid);

}  // namespace multibd
