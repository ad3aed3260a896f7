#include "fairdag/duals.hpp"

#include "fairdag/kkt.hpp"
#include "fairdag/trace_tools.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace fairdag {

std::string to_string(DualMode mode) {
    switch (mode) {
        case DualMode::ct: return "ct";
        case DualMode::ft: return "ft";
        case DualMode::laps: return "laps";
    }
    return "unknown";
}

Rational dual_objective(const DualCertificate& cert) {
    Rational total = 0;
    for (const auto& [id, a] : cert.alpha_total) total += a;
    return total - cert.machines * cert.beta_integral;
}

namespace {

struct JobTable {
    std::map<JobId, const JobSpec*> spec;
    explicit JobTable(const Instance& inst) {
        for (const auto& j : inst.jobs) spec[j.id] = &j;
    }
    const Rational& w(JobId id) const { return spec.at(id)->weight; }
    const Rational& p(JobId id) const { return spec.at(id)->size; }
    const Rational& r(JobId id) const { return spec.at(id)->release; }
};

std::string span(const SegmentDuals& seg) {
    return "[" + to_fraction_string(seg.start) + "," + to_fraction_string(seg.end) + ")";
}

std::string at(JobId id, const SegmentDuals& seg) { return "job " + std::to_string(id) + " on " + span(seg); }

std::string at_time(JobId id, const Rational& t) {
    return "job " + std::to_string(id) + " at t=" + to_fraction_string(t);
}

void require_history(const SimulationResult& run) {
    if (run.history.size() != run.trace.segments.size()) {
        throw std::invalid_argument("dual certificate needs the per-segment rate history of the run");
    }
}

// Routes every H-edge's assignment along its fixed DAG path with the given
// per-edge multiplier, then nets the result per job.
void route_gamma(const RateSnapshot& snap, const std::vector<Rational>& multiplier, SegmentDuals& seg) {
    const auto& g = snap.graph;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const Rational amount = multiplier[e] * snap.solution.z[e];
        if (amount == 0) continue;
        for (const auto& d : g.paths[e]) seg.gamma[d] += amount;
    }
    for (JobId id : seg.waiting) seg.net[id] = 0;
    for (const auto& [edge, value] : seg.gamma) {
        seg.net[edge.first] += value;
        seg.net[edge.second] -= value;
    }
}

void accumulate(DualCertificate& cert, const SegmentDuals& seg) {
    for (const auto& [id, a] : seg.alpha) cert.alpha_total[id] += a * seg.length();
    cert.beta_integral += seg.beta * seg.length();
}

// Σ_{k ≥ i} net_j(k)·len_k for every segment index i (size segments+1).
std::vector<Rational> suffix_net(const DualCertificate& cert, JobId id) {
    std::vector<Rational> out(cert.segments.size() + 1, Rational(0));
    for (std::size_t i = cert.segments.size(); i-- > 0;) {
        const auto& seg = cert.segments[i];
        auto it = seg.net.find(id);
        out[i] = out[i + 1] + (it == seg.net.end() ? Rational(0) : Rational(it->second * seg.length()));
    }
    return out;
}

Rational left_rate(const RateSnapshot& snap, JobId id) {
    const auto& g = snap.graph;
    return g.has_left(id) ? snap.solution.L[g.left_index(id)] : Rational(0);
}

Rational mapped(const std::map<JobId, Rational>& m, JobId id) {
    auto it = m.find(id);
    return it == m.end() ? Rational(0) : it->second;
}

}  // namespace

DualCertificate build_ct_duals(const Instance& inst, const SimulationResult& run) {
    require_history(run);
    const JobTable jobs(inst);
    DualCertificate cert;
    cert.mode = DualMode::ct;
    cert.machines = inst.machines;

    for (std::size_t s = 0; s < run.trace.segments.size(); ++s) {
        const auto& tseg = run.trace.segments[s];
        SegmentDuals seg;
        seg.start = tseg.start;
        seg.end = tseg.end;
        Rational unfinished = 0;
        for (const auto& j : inst.jobs) {
            auto c = run.trace.completions.find(j.id);
            if (c == run.trace.completions.end() || c->second > tseg.start) unfinished += j.weight;
        }
        seg.beta = unfinished / (2 * inst.machines);

        const auto& snap = run.history[s];
        if (!snap) {
            seg.idle = true;
        } else {
            if (snap->laps) throw std::invalid_argument("build_ct_duals: run used LAPS weights");
            const auto& g = snap->graph;
            const auto act = active_right(g, snap->solution);
            seg.eta = snap->solution.eta;
            seg.waiting = g.right;
            for (std::size_t r = 0; r < g.right.size(); ++r) {
                const JobId id = g.right[r];
                seg.alpha[id] = act[r] ? jobs.w(id) : Rational(0);
                if (act[r]) seg.active.push_back(id);
            }
            std::vector<Rational> mult(g.edges.size());
            for (std::size_t e = 0; e < g.edges.size(); ++e) mult[e] = act[g.edges[e].right] ? seg.eta : Rational(0);
            route_gamma(*snap, mult, seg);
        }
        accumulate(cert, seg);
        cert.segments.push_back(std::move(seg));
    }
    return cert;
}

AuditReport check_ct_dual_feasibility(const Instance& inst, const DualCertificate& cert, double tol) {
    CheckBuilder constraint("dual_constraint", tol);
    CheckBuilder nonneg("dual_nonnegativity", tol);
    const Rational end = cert.segments.empty() ? Rational(0) : cert.segments.back().end;

    for (const auto& seg : cert.segments) {
        nonneg.le(0, seg.beta, "beta on " + span(seg));
        for (const auto& [id, a] : seg.alpha) nonneg.le(0, a, at(id, seg));
        for (const auto& [edge, g] : seg.gamma) {
            nonneg.le(0, g, "edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) + ")");
        }
    }

    for (const auto& job : inst.jobs) {
        const Rational alpha = mapped(cert.alpha_total, job.id);
        const auto suffix = suffix_net(cert, job.id);
        for (std::size_t i = 0; i < cert.segments.size(); ++i) {
            const auto& seg = cert.segments[i];
            if (seg.start < job.release) continue;
            const Rational rhs = job.size * seg.beta;
            constraint.le(alpha - job.weight * seg.start + suffix[i], rhs, at_time(job.id, seg.start));
            constraint.le(alpha - job.weight * seg.end + suffix[i + 1], rhs, at_time(job.id, seg.end) + " (left limit)");
        }
        const Rational t = std::max(end, job.release);
        constraint.le(alpha - job.weight * t, 0, at_time(job.id, t));
    }

    AuditReport report;
    report.checks = {constraint.finish(), nonneg.finish()};
    return report;
}

namespace {

// Longest chain of residual volumes ending at each unfinished job.
std::map<JobId, Rational> residual_chains(const DagStructure& dag,
                                          const std::vector<Rational>& residual, const std::vector<bool>& unfinished) {
    std::vector<Rational> best(dag.size(), Rational(0));
    std::map<JobId, Rational> out;
    for (auto v : dag.topological_order()) {
        if (!unfinished[v]) continue;
        Rational top = 0;
        for (auto u : dag.predecessors(v)) {
            if (unfinished[u]) top = std::max(top, best[u]);
        }
        best[v] = top + residual[v];
        out[dag.id(v)] = best[v];
    }
    return out;
}

}  // namespace

AuditReport ct_structure_audit(const Instance& inst, const SimulationResult& run, const DualCertificate& cert,
                               double tol) {
    require_history(run);
    if (cert.segments.size() != run.trace.segments.size()) {
        throw std::invalid_argument("ct_structure_audit: certificate does not match the run");
    }
    const JobTable jobs(inst);
    const DagStructure dag(inst);
    const auto& trace = run.trace;
    const Rational m = inst.machines;

    CheckBuilder eta_bounds("eta_bounds", tol);
    CheckBuilder pre("pre_start_cancellation", tol);
    CheckBuilder post("post_start_bound", tol);
    CheckBuilder progress("residual_chain_progress", tol);
    CheckBuilder inactive_bound("inactive_time_bound", tol);
    CheckBuilder beta_identity("beta_identity", tol);
    CheckBuilder cost("cost_inequality", tol);

    std::vector<Rational> residual(dag.size());
    for (const auto& j : inst.jobs) residual[dag.index_of(j.id)] = j.size;
    auto unfinished_at = [&](const Rational& t) {
        std::vector<bool> u(dag.size());
        for (std::size_t i = 0; i < dag.size(); ++i) {
            auto c = trace.completions.find(dag.id(i));
            u[i] = c == trace.completions.end() || c->second > t;
        }
        return u;
    };
    std::map<JobId, Rational> inactive_time;

    for (std::size_t s = 0; s < cert.segments.size(); ++s) {
        const auto& seg = cert.segments[s];
        const auto& tseg = trace.segments[s];
        const auto before = residual_chains(dag, residual, unfinished_at(seg.start));
        for (const auto& [id, rate] : tseg.rates) residual[dag.index_of(id)] -= trace.speed * rate * seg.length();
        if (seg.idle) continue;
        const auto after = residual_chains(dag, residual, unfinished_at(seg.end));
        const auto& snap = *run.history[s];
        const std::string where = span(seg);

        Rational w_act = 0, w_wait = 0;
        for (JobId id : seg.waiting) w_wait += jobs.w(id);
        for (JobId id : seg.active) w_act += jobs.w(id);
        eta_bounds.le(w_act / m, seg.eta, "lower on " + where);
        eta_bounds.le(seg.eta, w_wait / m, "upper on " + where);

        for (JobId id : seg.waiting) {
            const Rational lhs = seg.alpha.at(id) + seg.net.at(id);
            if (snap.graph.has_left(id)) {
                post.le(lhs, seg.eta * left_rate(snap, id), at(id, seg));
            } else {
                pre.eq(lhs, 0, at(id, seg));
            }
            if (!std::binary_search(seg.active.begin(), seg.active.end(), id)) {
                const Rational drop = before.at(id) - mapped(after, id);
                progress.eq(drop, trace.speed * seg.length(), at(id, seg));
                inactive_time[id] += seg.length();
            }
        }
    }

    const auto chains = compute_chains(inst);
    Rational chain_term = 0;
    for (const auto& j : inst.jobs) {
        inactive_bound.le(trace.speed * mapped(inactive_time, j.id), chains.at(j.id), "job " + std::to_string(j.id));
        chain_term += j.weight * (chains.at(j.id) + 2 * j.release);
    }
    const Rational cost_a = objective(trace, inst, ObjectiveKind::completion);
    beta_identity.eq(2 * m * cert.beta_integral, cost_a, "2m∫β vs cost");
    cost.le(cost_a, 2 * dual_objective(cert) + chain_term, "total");

    AuditReport report;
    report.checks = {eta_bounds.finish(), pre.finish(),          post.finish(), progress.finish(),
                     inactive_bound.finish(), beta_identity.finish(), cost.finish()};
    return report;
}

namespace {

// Waiting jobs of one snapshot in the dual order.
std::vector<JobId> flow_order(const RateSnapshot& snap, DualMode mode, const std::vector<JobId>& global_order) {
    if (mode == DualMode::laps) return snap.laps->order;
    std::vector<JobId> out;
    for (JobId id : global_order) {
        if (std::binary_search(snap.graph.right.begin(), snap.graph.right.end(), id)) out.push_back(id);
    }
    return out;
}

// Components by (earliest release, id), then completion time, then static
// topological position.
std::vector<JobId> completion_order(const Instance& inst, const ScheduleTrace& trace) {
    const DagStructure dag(inst);
    std::vector<std::optional<Rational>> comp_release(dag.component_count());
    std::vector<std::size_t> pos(dag.size());
    for (std::size_t p = 0; p < dag.topological_order().size(); ++p) pos[dag.topological_order()[p]] = p;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        auto& r = comp_release[dag.component(i)];
        if (!r || dag.release(i) < *r) r = dag.release(i);
    }
    std::vector<std::size_t> idx(dag.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        const auto ca = dag.component(a), cb = dag.component(b);
        const auto& ta = trace.completions.at(dag.id(a));
        const auto& tb = trace.completions.at(dag.id(b));
        return std::tie(*comp_release[ca], ca, ta, pos[a]) < std::tie(*comp_release[cb], cb, tb, pos[b]);
    });
    std::vector<JobId> out;
    for (auto i : idx) out.push_back(dag.id(i));
    return out;
}

}  // namespace

DualCertificate build_flow_duals(const Instance& inst, const SimulationResult& run, DualMode mode,
                                 const Rational& epsilon) {
    if (mode == DualMode::ct) throw std::invalid_argument("build_flow_duals: mode must be ft or laps");
    if (epsilon <= 0) throw std::invalid_argument("build_flow_duals: epsilon must be positive");
    require_history(run);
    const JobTable jobs(inst);
    const Rational m = inst.machines;
    DualCertificate cert;
    cert.mode = mode;
    cert.epsilon = epsilon;
    cert.machines = inst.machines;
    const auto global = mode == DualMode::ft ? completion_order(inst, run.trace) : std::vector<JobId>{};

    for (std::size_t s = 0; s < run.trace.segments.size(); ++s) {
        SegmentDuals seg;
        seg.start = run.trace.segments[s].start;
        seg.end = run.trace.segments[s].end;
        const auto& snap = run.history[s];
        if (!snap) {
            seg.idle = true;
            accumulate(cert, seg);
            cert.segments.push_back(std::move(seg));
            continue;
        }
        if (snap->laps.has_value() != (mode == DualMode::laps)) {
            throw std::invalid_argument("build_flow_duals: run does not match mode " + to_string(mode));
        }
        const auto& g = snap->graph;
        const auto act = active_right(g, snap->solution);
        seg.eta = snap->solution.eta;
        seg.waiting = g.right;
        Rational w_wait = 0, w_act = 0;
        for (std::size_t r = 0; r < g.right.size(); ++r) {
            w_wait += jobs.w(g.right[r]);
            if (act[r]) {
                seg.active.push_back(g.right[r]);
                w_act += jobs.w(g.right[r]);
            }
        }
        seg.beta = w_wait / ((1 + epsilon) * m);
        seg.nice = mode == DualMode::ft || w_act >= (1 - epsilon) * w_wait;

        Rational w_le = 0, r_le = 0, act_lt = 0;
        for (JobId id : flow_order(*snap, mode, global)) {
            const std::size_t r = g.right_index(id);
            const Rational& w = jobs.w(id);
            const Rational& R = snap->solution.R[r];
            w_le += w;
            r_le += R;
            seg.eta_job[id] = w_le / m;
            seg.alpha[id] = seg.nice ? Rational((w * (act[r] ? r_le : Rational(0)) + R * act_lt) / m) : Rational(0);
            if (act[r]) act_lt += w;
        }
        std::vector<Rational> mult(g.edges.size());
        for (std::size_t e = 0; e < g.edges.size(); ++e) mult[e] = seg.eta_job.at(g.right[g.edges[e].right]);
        route_gamma(*snap, mult, seg);
        accumulate(cert, seg);
        cert.segments.push_back(std::move(seg));
    }
    return cert;
}

AuditReport flow_dual_audit(const Instance& inst, const SimulationResult& run, DualMode mode, const Rational& epsilon,
                            double tol, double float_tol) {
    return flow_dual_audit(inst, run, build_flow_duals(inst, run, mode, epsilon), tol, float_tol);
}

AuditReport flow_dual_audit(const Instance& inst, const SimulationResult& run, const DualCertificate& cert, double tol,
                            double float_tol) {
    require_history(run);
    if (cert.mode == DualMode::ct || !cert.epsilon) throw std::invalid_argument("flow_dual_audit: not a flow certificate");
    if (cert.segments.size() != run.trace.segments.size()) {
        throw std::invalid_argument("flow_dual_audit: certificate does not match the run");
    }
    const bool laps = cert.mode == DualMode::laps;
    const JobTable jobs(inst);
    const Rational eps = *cert.epsilon;
    const Rational m = inst.machines;
    const double k = to_double(1 / eps);
    const double e_const = std::exp(1.0);
    // γ multiplier, per-start-rate constant, and the (t − r) coefficient.
    const Rational gamma_factor = laps ? Rational(1 + eps) : Rational(2);
    const Rational speed_factor = laps ? Rational(1 + 3 * eps) : Rational(2 * (1 + eps));
    const double elapsed_factor = laps ? k * e_const : 2.0;

    CheckBuilder alpha_weight(laps ? "alpha_le_ke_weight" : "alpha_le_twice_weight", laps ? float_tol : tol);
    CheckBuilder alpha_eta(laps ? "alpha_le_scaled_eta_rate" : "alpha_le_twice_eta_rate", tol);
    CheckBuilder pre("pre_start_bound", tol);
    CheckBuilder post("post_start_bound", tol);
    CheckBuilder identity("alpha_sum_identity", tol);
    CheckBuilder relaxed("relaxed_dual_constraint", tol);
    CheckBuilder bound("flow_bound", tol);
    CheckBuilder hatw_sum("hatw_sum", tol);
    CheckBuilder sandwich("hatw_sandwich", 1e-12);
    CheckBuilder hatw_eta("hatw_dominates_eta_rate", tol);
    CheckBuilder eta_hatw("eta_hatw_bounds", tol);
    CheckBuilder nice_upper("nice_eta_upper", tol);
    CheckBuilder nice_lower("nice_eta_lower", float_tol);

    std::map<JobId, Rational> beta_min;
    for (std::size_t s = 0; s < cert.segments.size(); ++s) {
        const auto& seg = cert.segments[s];
        if (seg.idle) continue;
        const auto& snap = *run.history[s];
        const auto& g = snap.graph;

        Rational alpha_sum = 0, w_act = 0;
        for (JobId id : seg.active) w_act += jobs.w(id);
        for (JobId id : seg.waiting) {
            auto it = beta_min.find(id);
            if (it == beta_min.end() || seg.beta < it->second) beta_min[id] = seg.beta;

            const Rational& alpha = seg.alpha.at(id);
            const Rational& R = snap.solution.R[g.right_index(id)];
            const Rational& w = jobs.w(id);
            alpha_sum += alpha;
            alpha_weight.le(to_double(alpha), elapsed_factor * to_double(w), at(id, seg));
            alpha_eta.le(alpha, gamma_factor * seg.eta_job.at(id) * R, at(id, seg));
            const Rational lhs = alpha + gamma_factor * seg.net.at(id);
            if (g.has_left(id)) {
                post.le(lhs, speed_factor * beta_min.at(id) * left_rate(snap, id), at(id, seg));
            } else {
                pre.le(lhs, 0, at(id, seg));
            }
        }
        identity.eq(alpha_sum, seg.nice ? w_act : Rational(0), span(seg));

        if (!laps) continue;
        const auto& lw = *snap.laps;
        const auto act = active_right(g, snap.solution);
        Rational total = 0, hat_act = 0, w_all = 0;
        for (std::size_t i = 0; i < lw.order.size(); ++i) {
            total += lw.hatw[i];
            w_all += jobs.w(lw.order[i]);
        }
        hatw_sum.eq(total, 1, span(seg));
        double before = 0;
        const double W = to_double(w_all);
        for (std::size_t i = 0; i < lw.order.size(); ++i) {
            const JobId id = lw.order[i];
            const std::size_t r = g.right_index(id);
            const double w = to_double(jobs.w(id));
            const double h = to_double(lw.hatw[i]);
            sandwich.le(k * (w / W) * std::pow(before / W, k - 1), h, at(id, seg) + " lower");
            sandwich.le(h, k * (w / W) * std::pow((before + w) / W, k - 1), at(id, seg) + " upper");
            before += w;
            const Rational eta_r = seg.eta * snap.solution.R[r];
            if (act[r]) {
                hatw_eta.eq(lw.hatw[i], eta_r, at(id, seg));
                hat_act += lw.hatw[i];
            } else {
                hatw_eta.le(eta_r, lw.hatw[i], at(id, seg));
            }
        }
        const std::string where = span(seg);
        eta_hatw.le(hat_act / m, seg.eta, "lower on " + where);
        eta_hatw.le(seg.eta, total / m, "upper on " + where);
        if (seg.nice) {
            nice_upper.le(seg.eta * m, 1, where);
            nice_lower.le(1 / e_const, to_double(seg.eta * m), where);
        }
    }

    const Rational end = cert.segments.empty() ? Rational(0) : cert.segments.back().end;
    for (const auto& job : inst.jobs) {
        const Rational alpha = mapped(cert.alpha_total, job.id);
        const auto suffix = suffix_net(cert, job.id);
        auto check = [&](const Rational& t, const Rational& beta, const Rational& net_after, const std::string& where) {
            const Rational lhs = alpha + gamma_factor * net_after;
            const Rational base = beta * job.size;
            if (laps) {
                relaxed.le(to_double(lhs), to_double(base) + elapsed_factor * to_double(job.weight * (t - job.release)),
                           where);
            } else {
                relaxed.le(lhs, base + 2 * job.weight * (t - job.release), where);
            }
        };
        for (std::size_t i = 0; i < cert.segments.size(); ++i) {
            const auto& seg = cert.segments[i];
            if (seg.start < job.release) continue;
            check(seg.start, seg.beta, suffix[i], at_time(job.id, seg.start));
            check(seg.end, seg.beta, suffix[i + 1], at_time(job.id, seg.end) + " (left limit)");
        }
        const Rational t = std::max(end, job.release);
        check(t, 0, 0, at_time(job.id, t));
    }

    const auto chains = compute_chains(inst);
    Rational chain_term = 0;
    for (const auto& j : inst.jobs) chain_term += j.weight * chains.at(j.id);
    const Rational flow = objective(run.trace, inst, ObjectiveKind::flow);
    const Rational d = dual_objective(cert);
    if (laps) {
        bound.le(flow, 2 / eps * d + 2 / (eps * eps) * chain_term, "total");
    } else {
        bound.le(flow, 2 / eps * (d + chain_term), "total");
    }

    AuditReport report;
    report.checks = {alpha_weight.finish(), alpha_eta.finish(), pre.finish(),      post.finish(),
                     identity.finish(),     relaxed.finish(),   bound.finish()};
    if (laps) {
        for (auto* b : {&hatw_sum, &sandwich, &hatw_eta, &eta_hatw, &nice_upper, &nice_lower}) {
            report.checks.push_back(b->finish());
        }
    }
    return report;
}

}  // namespace fairdag
