#pragma once

#include "fairdag/audit_report.hpp"
#include "fairdag/simulator.hpp"

#include <map>

namespace fairdag {

enum class DualMode { ct, ft, laps };

std::string to_string(DualMode mode);

/// Dual densities on one trace segment; every quantity is constant there.
struct SegmentDuals {
    Rational start;
    Rational end;
    bool idle = false;
    Rational beta;
    Rational eta;                      // multiplier of the machine budget
    std::vector<JobId> waiting;        // sorted
    std::vector<JobId> active;         // sorted
    std::map<JobId, Rational> alpha;   // per waiting job
    std::map<DagEdge, Rational> gamma;  // per precedence edge, non-zero entries
    std::map<JobId, Rational> net;     // γ_out − γ_in per waiting job
    std::map<JobId, Rational> eta_job;  // flow modes: w(J_{⪯j}) / m
    bool nice = true;                  // laps mode gating

    Rational length() const { return end - start; }
};

struct DualCertificate {
    DualMode mode = DualMode::ct;
    std::optional<Rational> epsilon;
    int machines = 1;
    std::vector<SegmentDuals> segments;
    std::map<JobId, Rational> alpha_total;  // ∫ α over all segments
    Rational beta_integral;                 // ∫ β
};

/// Σ_j α_j − m ∫ β.
Rational dual_objective(const DualCertificate& cert);

/// Completion-time certificate for a CT run at its native speed. Throws
/// std::invalid_argument when the run carries no rate history or was not
/// produced by the CT policy.
DualCertificate build_ct_duals(const Instance& inst, const SimulationResult& run);

/// Dual constraint α_j − w_j t + ∫_t^∞ (γ_out − γ_in) ≤ p_j β_t for every
/// job and every t ≥ r_j, evaluated at both ends of each segment and after
/// the makespan. Check names: dual_constraint, dual_nonnegativity.
AuditReport check_ct_dual_feasibility(const Instance& inst, const DualCertificate& cert, double tol = 1e-9);

/// Per-segment structure of the CT certificate and the cost inequality:
/// eta_bounds, pre_start_cancellation, post_start_bound,
/// residual_chain_progress, inactive_time_bound, cost_inequality.
AuditReport ct_structure_audit(const Instance& inst, const SimulationResult& run, const DualCertificate& cert,
                               double tol = 1e-9);

/// Flow-time certificate for an FT or LAPS run. FT orders jobs by component
/// release and then completion time; LAPS uses the order recorded with each
/// rate decision. Throws std::invalid_argument on missing history or a
/// mode/policy mismatch.
DualCertificate build_flow_duals(const Instance& inst, const SimulationResult& run, DualMode mode,
                                 const Rational& epsilon);

/// Every per-segment inequality of the flow analysis plus the relaxed dual
/// constraint and the end-to-end flow bound. Rational checks use `tol`,
/// float-evaluated ones use `float_tol`.
AuditReport flow_dual_audit(const Instance& inst, const SimulationResult& run, DualMode mode,
                            const Rational& epsilon, double tol = 1e-9, double float_tol = 1e-6);

/// Same, on a prebuilt certificate (for fault injection).
AuditReport flow_dual_audit(const Instance& inst, const SimulationResult& run, const DualCertificate& cert,
                            double tol = 1e-9, double float_tol = 1e-6);

}  // namespace fairdag
