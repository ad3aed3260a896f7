#pragma once

#include "fairdag/duals.hpp"
#include "fairdag/trace_tools.hpp"

namespace fairdag {

/// Σ w_j chain_j. Bounds total flow time only on instances without surprises.
Rational chain_lb(const Instance& inst);
/// Σ w_j r_j for completion time; 0 for flow time.
Rational release_lb(const Instance& inst, ObjectiveKind kind = ObjectiveKind::completion);

/// Exact offline optimum over schedules that change their job set only at
/// integer times, on m unit-speed machines. None when the instance has more
/// than `job_limit` jobs, non-integral sizes or releases, or too many states.
std::optional<Rational> exhaustive_opt(const Instance& inst, ObjectiveKind kind, std::size_t job_limit = 8);

struct PolicyRun {
    PolicyConfig config;
    SimulationResult result;  // must carry rate history
};

struct PolicyBound {
    std::string policy;
    ObjectiveKind kind = ObjectiveKind::completion;
    Rational objective;
    std::optional<Rational> dual_objective;  // scaled to a lower bound when feasible
    bool dual_feasible = false;
    double worst_dual_slack = 0.0;  // largest lhs − rhs of the dual constraint
    Rational best_lower_bound;
    double ratio = 0.0;
    std::optional<double> ratio_vs_opt;
    std::optional<Rational> theorem_constant;  // 5 for ct-a, 10 for ct-b
};

struct BoundsReport {
    Rational chain_lb;
    Rational release_lb;
    std::optional<Rational> exhaustive_completion;
    std::optional<Rational> exhaustive_flow;
    std::vector<PolicyBound> policies;
    AuditReport checks;

    bool ok() const { return checks.ok(); }
    std::string to_json() const;
};

/// For a CT run reports both A and its slow-down B (cost(B) = 2 cost(A),
/// cost(B) ≤ 2(2D + chain + 2 release), ratios ≤ 5 and ≤ 10). For flow runs the dual
/// lower bound is the certificate objective divided by 2 (FT) or k·e (LAPS).
/// Every lower bound is checked against the exhaustive optimum when known.
BoundsReport competitive_report(const Instance& inst, const std::vector<PolicyRun>& runs, std::size_t job_limit = 8);

}  // namespace fairdag
