#pragma once

#include "fairdag/rate_graph.hpp"

#include <vector>

namespace fairdag {

/// Floating-point primal of the fair-rate program, computed without the
/// water-filling code path.
struct OracleRates {
    std::vector<double> z;  // per edge
    std::vector<double> L;  // per left vertex
    std::vector<double> R;  // per right vertex
    double objective = 0.0;
    double projected_gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient ascent on z with Armijo backtracking. Each step is
/// projected exactly (in the Euclidean sense) onto {z >= 0, L <= 1,
/// sum L <= m}. `converged` is false if the iteration budget ran out before
/// the projected gradient fell below `gradient_tol`.
OracleRates brute_oracle_rates(const BipartiteRateGraph& graph, const std::vector<Rational>& weights,
                               int iterations = 20000, double gradient_tol = 1e-10);

/// Euclidean projection used by the oracle; exposed for testing. `blocks`
/// lists the coordinate indices of each left vertex.
std::vector<double> project_rate_polytope(const std::vector<double>& y,
                                          const std::vector<std::vector<std::size_t>>& blocks, double machines);

}  // namespace fairdag
