#pragma once

#include "fairdag/audit_report.hpp"
#include "fairdag/rate_solver.hpp"

namespace fairdag {

/// Job j on the right side is active when some left neighbour runs below rate 1.
std::vector<bool> active_right(const BipartiteRateGraph& graph, const RateSolution& sol);

/// Primal feasibility, stationarity, complementary slackness, and the
/// derived rate/multiplier relations, each as a named check. With tol = 0
/// every residual must vanish exactly. Throws std::invalid_argument when the
/// solution's vectors do not match the graph.
AuditReport kkt_audit(const BipartiteRateGraph& graph, const RateSolution& sol,
                      const std::vector<Rational>& weights, double tol = 0.0);

}  // namespace fairdag
